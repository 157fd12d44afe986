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

// Independent reference computations used by unit and acceptance tests.
// None of these call into the code paths they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "retarget/deformation.hpp"
#include "retarget/raster.hpp"

namespace retarget::oracle {

struct BrutePath {
  double total = std::numeric_limits<double>::infinity();
  std::vector<int> columns;
  long paths = 0;
};

// Exhaustive recursion over every 8-connected top-to-bottom path of a
// row-major `w` x `h` grid. Sums are accumulated top to bottom. Among equal
// totals keeps the first found in (bottom column, then bottom-up
// lexicographic) order.
class SeamEnumerator {
 public:
  SeamEnumerator(const std::vector<double>& e, int w, int h) : e_(e), w_(w), h_(h) {}

  BrutePath Run() {
    path_.assign(h_, 0);
    for (int x = 0; x < w_; ++x) {
      path_[0] = x;
      Visit(1, e_[x]);
    }
    return best_;
  }

 private:
  void Visit(int row, double sum) {
    if (row == h_) {
      ++best_.paths;
      if (sum < best_.total || (sum == best_.total && BottomUpLess(path_, best_.columns))) {
        best_.total = sum;
        best_.columns = path_;
      }
      return;
    }
    const int prev = path_[row - 1];
    for (int x = prev - 1; x <= prev + 1; ++x) {
      if (x < 0 || x >= w_) continue;
      path_[row] = x;
      Visit(row + 1, sum + e_[row * w_ + x]);
    }
  }

  static bool BottomUpLess(const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t i = a.size(); i-- > 0;) {
      if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
  }

  const std::vector<double>& e_;
  int w_;
  int h_;
  std::vector<int> path_;
  BrutePath best_;
};

inline BrutePath BruteForceSeam(const std::vector<double>& e, int w, int h) {
  return SeamEnumerator(e, w, h).Run();
}

// Gradient energy with a straight loop: forward differences, zero at the
// last row/column, divided by 510.
inline std::vector<double> GradientStencil(const RasterImage& img) {
  const int w = img.width();
  const int h = img.height();
  std::vector<double> lum(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto p = img.pixel(x, y);
      lum[y * w + x] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
  }
  std::vector<double> e(lum.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double dx = 0.0;
      double dy = 0.0;
      if (x + 1 < w) dx = lum[y * w + x + 1] - lum[y * w + x];
      if (y + 1 < h) dy = lum[(y + 1) * w + x] - lum[y * w + x];
      e[y * w + x] = (std::fabs(dx) + std::fabs(dy)) / 510.0;
    }
  }
  return e;
}

// Deletes one pixel per row from interleaved RGB data.
inline std::vector<std::uint8_t> DeleteColumns(const std::vector<std::uint8_t>& rgb, int w, int h,
                                               const std::vector<int>& cols) {
  std::vector<std::uint8_t> out;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x == cols[y]) continue;
      for (int c = 0; c < 3; ++c) out.push_back(rgb[(y * w + x) * 3 + c]);
    }
  }
  return out;
}

// Graph segmentation with a per-pixel component array relabelled on every
// merge. Returns labels numbered by first appearance in raster order.
inline std::vector<int> NaiveSegment(const RasterImage& img, double sigma, double k,
                                     int min_size) {
  const int w = img.width();
  const int h = img.height();
  const int n = w * h;
  const int len = static_cast<int>(std::ceil(sigma * 4.0)) + 1;
  std::vector<double> g(len);
  double norm = 0.0;
  for (int i = 0; i < len; ++i) {
    g[i] = std::exp(-0.5 * (i / sigma) * (i / sigma));
    norm += i == 0 ? g[i] : 2.0 * g[i];
  }
  for (double& v : g) v /= norm;
  auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };

  std::vector<std::array<double, 3>> sm(n);
  for (int c = 0; c < 3; ++c) {
    std::vector<double> row(n), col(n);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = g[0] * img.at(x, y, c);
        for (int i = 1; i < len; ++i) {
          s += g[i] * (img.at(clampi(x - i, 0, w - 1), y, c) + img.at(clampi(x + i, 0, w - 1), y, c));
        }
        row[y * w + x] = s;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = g[0] * row[y * w + x];
        for (int i = 1; i < len; ++i) {
          s += g[i] * (row[clampi(y - i, 0, h - 1) * w + x] + row[clampi(y + i, 0, h - 1) * w + x]);
        }
        sm[y * w + x][c] = s;
      }
    }
  }

  struct E {
    double wt;
    int a, b;
  };
  std::vector<E> edges;
  for (int a = 0; a < n; ++a) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int x = a % w + dx;
        const int y = a / w + dy;
        if (x < 0 || x >= w || y < 0 || y >= h) continue;
        const int b = y * w + x;
        if (b <= a) continue;
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) d2 += (sm[a][c] - sm[b][c]) * (sm[a][c] - sm[b][c]);
        edges.push_back({std::sqrt(d2), a, b});
      }
    }
  }
  std::stable_sort(edges.begin(), edges.end(), [](const E& l, const E& r) {
    if (l.wt != r.wt) return l.wt < r.wt;
    if (l.a != r.a) return l.a < r.a;
    return l.b < r.b;
  });

  std::vector<int> comp(n);
  for (int i = 0; i < n; ++i) comp[i] = i;
  std::vector<double> internal(n, 0.0);
  std::vector<int> size(n, 1);
  auto merge = [&](int keep, int drop) {
    for (int& c : comp) {
      if (c == drop) c = keep;
    }
    size[keep] += size[drop];
  };
  for (const E& e : edges) {
    const int la = comp[e.a];
    const int lb = comp[e.b];
    if (la == lb) continue;
    if (e.wt <= internal[la] + k / size[la] && e.wt <= internal[lb] + k / size[lb]) {
      merge(la, lb);
      internal[la] = e.wt;
    }
  }
  for (const E& e : edges) {
    const int la = comp[e.a];
    const int lb = comp[e.b];
    if (la != lb && (size[la] < min_size || size[lb] < min_size)) merge(la, lb);
  }
  std::vector<int> out(n);
  std::vector<int> seen;
  for (int i = 0; i < n; ++i) {
    int id = -1;
    for (std::size_t j = 0; j < seen.size(); ++j) {
      if (seen[j] == comp[i]) id = static_cast<int>(j);
    }
    if (id < 0) {
      id = static_cast<int>(seen.size());
      seen.push_back(comp[i]);
    }
    out[i] = id;
  }
  return out;
}

// Regular source lattice; targets uniformly scaled to `dst`.
inline MeshCorrespondence Lattice(Size src, int cell, Size dst) {
  MeshCorrespondence m;
  m.cell_size = cell;
  m.cols = (src.width + cell - 1) / cell + 1;
  m.rows = (src.height + cell - 1) / cell + 1;
  m.source_size = src;
  m.target_size = dst;
  for (int j = 0; j < m.rows; ++j) {
    for (int i = 0; i < m.cols; ++i) {
      const Vec2 s{double(std::min(i * cell, src.width)), double(std::min(j * cell, src.height))};
      m.source.push_back(s);
      m.target.push_back({s.x * dst.width / src.width, s.y * dst.height / src.height});
    }
  }
  return m;
}

// Bilinear position of a source point inside its lattice cell.
inline Vec2 LatticePoint(const MeshCorrespondence& m, double x, double y) {
  const int i = std::min(static_cast<int>(x / m.cell_size), m.cols - 2);
  const int j = std::min(static_cast<int>(y / m.cell_size), m.rows - 2);
  const Vec2 a = m.source[j * m.cols + i];
  const Vec2 b = m.source[(j + 1) * m.cols + i + 1];
  const double u = (x - a.x) / (b.x - a.x);
  const double v = (y - a.y) / (b.y - a.y);
  const Vec2 p00 = m.target[j * m.cols + i], p10 = m.target[j * m.cols + i + 1];
  const Vec2 p01 = m.target[(j + 1) * m.cols + i], p11 = m.target[(j + 1) * m.cols + i + 1];
  return {(1 - u) * (1 - v) * p00.x + u * (1 - v) * p10.x + (1 - u) * v * p01.x + u * v * p11.x,
          (1 - u) * (1 - v) * p00.y + u * (1 - v) * p10.y + (1 - u) * v * p01.y + u * v * p11.y};
}

// Weighted aspect similarity summed cell by cell.
inline double ArsOracle(const MeshCorrespondence& m, const ImportanceMap& map, int cell) {
  double num = 0.0, den = 0.0;
  const int w = m.source_size.width, h = m.source_size.height;
  for (int y0 = 0; y0 < h; y0 += cell) {
    for (int x0 = 0; x0 < w; x0 += cell) {
      const int x1 = std::min(x0 + cell, w), y1 = std::min(y0 + cell, h);
      const Vec2 tl = LatticePoint(m, x0, y0), tr = LatticePoint(m, x1, y0);
      const Vec2 bl = LatticePoint(m, x0, y1), br = LatticePoint(m, x1, y1);
      const double tw = ((tr.x - tl.x) + (br.x - bl.x)) / 2;
      const double th = ((bl.y - tl.y) + (br.y - tr.y)) / 2;
      const double r = (tw / th) / (double(x1 - x0) / (y1 - y0));
      double s = 0.0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) s += map.at(x, y);
      }
      const double omega = s / ((x1 - x0) * (y1 - y0));
      num += omega * std::min(r, 1 / r);
      den += omega;
    }
  }
  return num / den;
}

}  // namespace retarget::oracle
