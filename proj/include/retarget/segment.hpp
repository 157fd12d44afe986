// Copyright 2026 The Retarget Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Graph-based segmentation into patches and per-patch mean importance.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <tuple>
#include <vector>

#include "retarget/error.hpp"
#include "retarget/raster.hpp"

namespace retarget {

struct SegmentationParams {
  double smoothing_sigma = 0.8;
  double threshold_k = 300.0;
  int min_patch_size = 50;

  void Validate() const {
    if (!(smoothing_sigma > 0.0) || !(threshold_k > 0.0) || min_patch_size < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "segmentation parameters must be strictly positive");
    }
  }
};

using LabelGrid = Grid<int>;

struct Patch {
  int id = 0;
  long pixel_count = 0;
  double omega = 0.0;
};

// Segmentation labels plus the mean importance of every patch, sorted by id.
struct PatchMap {
  LabelGrid labels;
  std::vector<Patch> patches;

  const Patch& Find(int id) const {
    auto it = std::lower_bound(patches.begin(), patches.end(), id,
                               [](const Patch& p, int v) { return p.id < v; });
    if (it == patches.end() || it->id != id) {
      throw Error(ErrorCode::kInvalidArgument, "unknown patch id " + std::to_string(id));
    }
    return *it;
  }
};

// Disjoint-set forest with union by rank and path compression.
class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n), rank_(n, 0), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int Find(int x) {
    int root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const int next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  // Joins two roots and returns the new root.
  int Join(int a, int b) {
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    if (rank_[a] == rank_[b]) ++rank_[a];
    return a;
  }

  int Size(int root) const { return size_[root]; }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
  std::vector<int> size_;
};

namespace segment_detail {

inline std::vector<double> GaussianKernel(double sigma) {
  const int len = static_cast<int>(std::ceil(sigma * 4.0)) + 1;
  std::vector<double> k(len);
  for (int i = 0; i < len; ++i) k[i] = std::exp(-0.5 * (i / sigma) * (i / sigma));
  double sum = k[0];
  for (int i = 1; i < len; ++i) sum += 2.0 * k[i];
  for (double& v : k) v /= sum;
  return k;
}

// Separable symmetric convolution with clamped borders.
inline ScalarGrid Smooth(const ScalarGrid& in, const std::vector<double>& k) {
  const int w = in.width();
  const int h = in.height();
  const int len = static_cast<int>(k.size());
  ScalarGrid tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = k[0] * in.at(x, y);
      for (int i = 1; i < len; ++i) {
        s += k[i] * (in.at(std::max(x - i, 0), y) + in.at(std::min(x + i, w - 1), y));
      }
      tmp.at(x, y) = s;
    }
  }
  ScalarGrid out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = k[0] * tmp.at(x, y);
      for (int i = 1; i < len; ++i) {
        s += k[i] * (tmp.at(x, std::max(y - i, 0)) + tmp.at(x, std::min(y + i, h - 1)));
      }
      out.at(x, y) = s;
    }
  }
  return out;
}

struct Edge {
  double weight;
  int a;
  int b;
};

// 8-connected grid edges sorted by weight, then source index, then target.
inline std::vector<Edge> BuildEdges(const RasterImage& img, double sigma) {
  const int w = img.width();
  const int h = img.height();
  const std::vector<double> kernel = GaussianKernel(sigma);
  std::array<ScalarGrid, 3> plane;
  for (int c = 0; c < 3; ++c) {
    ScalarGrid g(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) g.at(x, y) = img.at(x, y, c);
    }
    plane[c] = Smooth(g, kernel);
  }
  auto diff = [&plane](int x1, int y1, int x2, int y2) {
    double s = 0.0;
    for (const ScalarGrid& p : plane) {
      const double d = p.at(x1, y1) - p.at(x2, y2);
      s += d * d;
    }
    return std::sqrt(s);
  };
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(w) * h * 4);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int a = y * w + x;
      if (x + 1 < w) edges.push_back({diff(x, y, x + 1, y), a, a + 1});
      if (y + 1 < h) edges.push_back({diff(x, y, x, y + 1), a, a + w});
      if (x + 1 < w && y + 1 < h) edges.push_back({diff(x, y, x + 1, y + 1), a, a + w + 1});
      if (x + 1 < w && y > 0) edges.push_back({diff(x, y, x + 1, y - 1), a, a - w + 1});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
    return std::tie(l.weight, l.a, l.b) < std::tie(r.weight, r.a, r.b);
  });
  return edges;
}

}  // namespace segment_detail

/// Partitions the image into connected patches. Labels are consecutive ids
/// starting at 0, numbered in raster order of each patch's first pixel.
inline LabelGrid Segment(const RasterImage& img, const SegmentationParams& params = {}) {
  params.Validate();
  const int n = img.width() * img.height();
  const std::vector<segment_detail::Edge> edges =
      segment_detail::BuildEdges(img, params.smoothing_sigma);

  DisjointSets sets(n);
  std::vector<double> threshold(n, params.threshold_k);
  for (const auto& e : edges) {
    const int a = sets.Find(e.a);
    const int b = sets.Find(e.b);
    if (a == b || e.weight > threshold[a] || e.weight > threshold[b]) continue;
    const int root = sets.Join(a, b);
    threshold[root] = e.weight + params.threshold_k / sets.Size(root);
  }
  // Small components join the neighbour reached through their cheapest edge.
  for (const auto& e : edges) {
    const int a = sets.Find(e.a);
    const int b = sets.Find(e.b);
    if (a != b && (sets.Size(a) < params.min_patch_size ||
                   sets.Size(b) < params.min_patch_size)) {
      sets.Join(a, b);
    }
  }

  LabelGrid labels(img.width(), img.height());
  std::vector<int> id_of_root(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int root = sets.Find(i);
    if (id_of_root[root] < 0) id_of_root[root] = next++;
    labels.values()[i] = id_of_root[root];
  }
  return labels;
}

inline int CountPatches(const LabelGrid& labels) {
  std::vector<int> ids(labels.values().begin(), labels.values().end());
  std::sort(ids.begin(), ids.end());
  return static_cast<int>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

/// Mean importance over each patch's pixels.
inline PatchMap PatchEnergy(const LabelGrid& labels, const ImportanceMap& map) {
  if (labels.size() != map.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "labels " + ToString(labels.size()) + " vs map " + ToString(map.size()));
  }
  std::map<int, std::pair<long, double>> acc;
  for (std::size_t i = 0; i < labels.values().size(); ++i) {
    auto& [count, sum] = acc[labels.values()[i]];
    ++count;
    sum += map.values()[i];
  }
  PatchMap out{labels, {}};
  out.patches.reserve(acc.size());
  for (const auto& [id, cs] : acc) {
    out.patches.push_back({id, cs.first, std::clamp(cs.second / cs.first, 0.0, 1.0)});
  }
  return out;
}

}  // namespace retarget
