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

// Seam carving: find, remove and insert minimum-energy 8-connected seams
// until one image axis reaches its target length.

#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "retarget/deformation.hpp"
#include "retarget/energy.hpp"
#include "retarget/error.hpp"
#include "retarget/raster.hpp"

namespace retarget {

enum class Axis { kWidth, kHeight };

// Target resolution for one operator pass; only `axis` is changed.
struct TargetSpec {
  int target_width = 0;
  int target_height = 0;
  Axis axis = Axis::kWidth;

  static TargetSpec Width(Size current, int width) {
    return {width, current.height, Axis::kWidth};
  }
  static TargetSpec Height(Size current, int height) {
    return {current.width, height, Axis::kHeight};
  }
};

enum class SeamDirection { kRemove, kInsert };

struct SeamPlan {
  int iterations = 0;
  SeamDirection direction = SeamDirection::kRemove;
  SeamOrientation orientation = SeamOrientation::kVertical;
};

/// Number of seams between `current` and the target along its axis.
/// Width changes use vertical seams, height changes horizontal ones.
inline SeamPlan Plan(Size current, const TargetSpec& target) {
  const bool width_axis = target.axis == Axis::kWidth;
  const int from = width_axis ? current.width : current.height;
  const int to = width_axis ? target.target_width : target.target_height;
  if (to < 1) {
    throw Error(ErrorCode::kDegenerateTarget,
                "target " + std::string(width_axis ? "width" : "height") + " " +
                    std::to_string(to) + " leaves an empty image");
  }
  SeamPlan plan;
  plan.iterations = std::abs(from - to);
  plan.direction = to > from ? SeamDirection::kInsert : SeamDirection::kRemove;
  plan.orientation =
      width_axis ? SeamOrientation::kVertical : SeamOrientation::kHorizontal;
  return plan;
}

namespace seam_detail {

// Vertical minimum seam on a plain grid. Ties go to the lowest column, both
// at the bottom row and while backtracking.
inline Seam MinVerticalSeam(const ScalarGrid& e) {
  const int w = e.width();
  const int h = e.height();
  ScalarGrid cost(w, h);
  for (int x = 0; x < w; ++x) cost.at(x, 0) = e.at(x, 0);
  for (int y = 1; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double best = cost.at(x, y - 1);
      if (x > 0) best = std::min(best, cost.at(x - 1, y - 1));
      if (x + 1 < w) best = std::min(best, cost.at(x + 1, y - 1));
      cost.at(x, y) = e.at(x, y) + best;
    }
  }
  Seam seam;
  seam.orientation = SeamOrientation::kVertical;
  seam.positions.assign(h, 0);
  int x = 0;
  for (int c = 1; c < w; ++c) {
    if (cost.at(c, h - 1) < cost.at(x, h - 1)) x = c;
  }
  seam.total_energy = cost.at(x, h - 1);
  seam.positions[h - 1] = x;
  for (int y = h - 1; y > 0; --y) {
    int best = x;
    for (int c = std::max(0, x - 1); c <= std::min(w - 1, x + 1); ++c) {
      if (cost.at(c, y - 1) < cost.at(best, y - 1) ||
          (cost.at(c, y - 1) == cost.at(best, y - 1) && c < best)) {
        best = c;
      }
    }
    x = best;
    seam.positions[y - 1] = x;
  }
  return seam;
}

inline RasterImage RemoveVerticalSeam(const RasterImage& img, const std::vector<int>& cols) {
  std::vector<std::uint8_t> data;
  data.reserve(static_cast<std::size_t>(img.width() - 1) * img.height() * 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (x == cols[y]) continue;
      const Rgb p = img.pixel(x, y);
      data.insert(data.end(), p.begin(), p.end());
    }
  }
  return RasterImage(img.width() - 1, img.height(), std::move(data));
}

inline std::uint8_t Average(std::uint8_t a, std::uint8_t b) {
  return static_cast<std::uint8_t>((a + b + 1) / 2);
}

// Duplicates the chosen columns of each row. A duplicated pixel at column
// c > 0 is preceded by the average of columns c-1 and c; at column 0 it is
// followed by the average of columns 0 and 1.
inline RasterImage DuplicateColumns(const RasterImage& img,
                                    const std::vector<std::vector<int>>& chosen,
                                    int k) {
  const int w = img.width();
  std::vector<std::uint8_t> data;
  data.reserve(static_cast<std::size_t>(w + k) * img.height() * 3);
  auto push = [&data](Rgb p) { data.insert(data.end(), p.begin(), p.end()); };
  auto mix = [](Rgb a, Rgb b) {
    return Rgb{Average(a[0], b[0]), Average(a[1], b[1]), Average(a[2], b[2])};
  };
  for (int y = 0; y < img.height(); ++y) {
    auto it = chosen[y].begin();
    for (int x = 0; x < w; ++x) {
      const Rgb p = img.pixel(x, y);
      int n = 0;
      while (it != chosen[y].end() && *it == x) {
        ++n;
        ++it;
      }
      if (x == 0) {
        push(p);
        const Rgb right = w > 1 ? img.pixel(1, y) : p;
        for (int r = 0; r < n; ++r) push(mix(p, right));
      } else {
        const Rgb left = img.pixel(x - 1, y);
        for (int r = 0; r < n; ++r) push(mix(left, p));
        push(p);
      }
    }
  }
  return RasterImage(w + k, img.height(), std::move(data));
}

inline ScalarGrid DuplicateColumns(const ScalarGrid& g,
                                   const std::vector<std::vector<int>>& chosen, int k) {
  const int w = g.width();
  ScalarGrid out(w + k, g.height());
  for (int y = 0; y < g.height(); ++y) {
    int ox = 0;
    auto it = chosen[y].begin();
    for (int x = 0; x < w; ++x) {
      int n = 0;
      while (it != chosen[y].end() && *it == x) {
        ++n;
        ++it;
      }
      const double v = g.at(x, y);
      if (x == 0) {
        out.at(ox++, y) = v;
        const double right = w > 1 ? g.at(1, y) : v;
        for (int r = 0; r < n; ++r) out.at(ox++, y) = 0.5 * (v + right);
      } else {
        for (int r = 0; r < n; ++r) out.at(ox++, y) = 0.5 * (g.at(x - 1, y) + v);
        out.at(ox++, y) = v;
      }
    }
  }
  return out;
}

inline Seam Transposed(Seam s) {
  s.orientation = s.orientation == SeamOrientation::kVertical
                      ? SeamOrientation::kHorizontal
                      : SeamOrientation::kVertical;
  return s;
}

// Energy source working in "vertical" coordinates: when the caller resizes
// height, images arrive here transposed and are transposed back before
// reaching the provider.
class LinedEnergy {
 public:
  LinedEnergy(const EnergyProvider& provider, bool transposed)
      : provider_(provider), transposed_(transposed) {}

  ImportanceMap operator()(const RasterImage& lined, const ImportanceMap* carried) const {
    if (provider_.carries() && carried != nullptr) {
      return EnergyForIteration(provider_, lined, carried);
    }
    if (!transposed_) return EnergyForIteration(provider_, lined, nullptr);
    return Transpose(EnergyForIteration(provider_, Transpose(lined), nullptr));
  }

  bool carries() const { return provider_.carries(); }

 private:
  const EnergyProvider& provider_;
  bool transposed_;
};

}  // namespace seam_detail

/// Globally minimal 8-connected seam of `energy`.
inline Seam MinSeam(const ImportanceMap& energy, SeamOrientation orientation) {
  if (orientation == SeamOrientation::kVertical) {
    return seam_detail::MinVerticalSeam(energy.grid());
  }
  return seam_detail::Transposed(
      seam_detail::MinVerticalSeam(Transpose(energy.grid())));
}

inline Seam MinSeam(const ScalarGrid& energy, SeamOrientation orientation) {
  if (orientation == SeamOrientation::kVertical) {
    return seam_detail::MinVerticalSeam(energy);
  }
  return seam_detail::Transposed(seam_detail::MinVerticalSeam(Transpose(energy)));
}

/// Removes one seam from the image and, when present, from the carried map.
inline std::pair<RasterImage, std::optional<ImportanceMap>> RemoveSeam(
    const RasterImage& img, const std::optional<ImportanceMap>& map, const Seam& seam) {
  ValidateSeam(seam, img.size());
  const bool vertical = seam.orientation == SeamOrientation::kVertical;
  if ((vertical ? img.width() : img.height()) < 2) {
    throw Error(ErrorCode::kInvalidSeam, "removing the seam would leave an empty image");
  }
  if (map && map->size() != img.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "carried map does not match image");
  }
  std::optional<ImportanceMap> reduced;
  if (map) reduced = ImportanceMap(RemoveSeamFromGrid(map->grid(), seam));
  if (vertical) {
    return {seam_detail::RemoveVerticalSeam(img, seam.positions), std::move(reduced)};
  }
  return {Transpose(seam_detail::RemoveVerticalSeam(Transpose(img), seam.positions)),
          std::move(reduced)};
}

namespace seam_detail {

struct LinedResult {
  RasterImage image;
  std::optional<ImportanceMap> map;
  std::vector<SeamBatch> batches;
};

// Removes `count` vertical seams from `lined`. Seams are logged in vertical
// orientation; the caller relabels them when working transposed.
inline LinedResult RemoveLined(RasterImage lined, std::optional<ImportanceMap> carried,
                               const LinedEnergy& energy, int count) {
  SeamBatch batch{SeamOp::kRemove, SeamOrientation::kVertical, lined.size(), {}};
  for (int i = 0; i < count; ++i) {
    if (lined.width() < 2) {
      throw Error(ErrorCode::kDegenerateTarget, "cannot remove an entire axis");
    }
    ImportanceMap e = energy(lined, carried ? &*carried : nullptr);
    if (energy.carries() && !carried) carried = e;
    Seam s = MinVerticalSeam(e.grid());
    auto [next, next_map] = RemoveSeam(lined, carried, s);
    lined = std::move(next);
    carried = std::move(next_map);
    batch.seams.push_back(std::move(s));
  }
  LinedResult r{std::move(lined), std::move(carried), {}};
  if (count > 0) r.batches.push_back(std::move(batch));
  return r;
}

// Inserts `count` seams. Each round finds up to `width` seams by removal on
// a scratch copy, then duplicates them in the working image.
inline LinedResult InsertLined(RasterImage lined, std::optional<ImportanceMap> carried,
                               const LinedEnergy& energy, int count) {
  LinedResult r{std::move(lined), std::move(carried), {}};
  int remaining = count;
  while (remaining > 0) {
    const int round = std::min(remaining, r.image.width());
    SeamBatch batch{SeamOp::kInsert, SeamOrientation::kVertical, r.image.size(), {}};
    RasterImage scratch = r.image;
    std::optional<ImportanceMap> scratch_map = r.map;
    for (int i = 0; i < round; ++i) {
      ImportanceMap e = energy(scratch, scratch_map ? &*scratch_map : nullptr);
      if (energy.carries() && !scratch_map) {
        scratch_map = e;
        if (!r.map) r.map = e;
      }
      Seam s = MinVerticalSeam(e.grid());
      if (i + 1 < round) {
        auto [next, next_map] = RemoveSeam(scratch, scratch_map, s);
        scratch = std::move(next);
        scratch_map = std::move(next_map);
      }
      batch.seams.push_back(std::move(s));
    }
    const auto chosen = InsertionPositions(batch);
    r.image = DuplicateColumns(r.image, chosen, round);
    if (r.map) r.map = ImportanceMap(DuplicateColumns(r.map->grid(), chosen, round));
    r.batches.push_back(std::move(batch));
    remaining -= round;
  }
  return r;
}

}  // namespace seam_detail

struct SeamResult {
  RasterImage image;
  DeformationField field;
  std::optional<ImportanceMap> carried_map;
};

/// One seam-carving pass along `target.axis`: recompute (or carry) the
/// energy, take the minimum seam, remove or duplicate it, repeat.
/// `carried` seeds the carried map in carry mode.
inline SeamResult RetargetSeamAxis(const RasterImage& img, const EnergyProvider& provider,
                                   const TargetSpec& target,
                                   std::optional<ImportanceMap> carried = std::nullopt) {
  const SeamPlan plan = Plan(img.size(), target);
  if (plan.iterations == 0) {
    return {img, DeformationField::Identity(img.size()), std::move(carried)};
  }
  const bool transposed = plan.orientation == SeamOrientation::kHorizontal;
  const seam_detail::LinedEnergy energy(provider, transposed);
  RasterImage lined = transposed ? Transpose(img) : img;
  if (carried && transposed) carried = Transpose(*carried);
  seam_detail::LinedResult r =
      plan.direction == SeamDirection::kRemove
          ? seam_detail::RemoveLined(std::move(lined), std::move(carried), energy,
                                     plan.iterations)
          : seam_detail::InsertLined(std::move(lined), std::move(carried), energy,
                                     plan.iterations);
  if (transposed) {
    r.image = Transpose(r.image);
    if (r.map) r.map = Transpose(*r.map);
    for (SeamBatch& b : r.batches) {
      b.orientation = SeamOrientation::kHorizontal;
      b.input_size = {b.input_size.height, b.input_size.width};
      for (Seam& s : b.seams) s.orientation = SeamOrientation::kHorizontal;
    }
  }
  return {std::move(r.image), DeformationField::FromSeams(img.size(), std::move(r.batches)),
          std::move(r.map)};
}

/// Enlarges along one axis by `k` seams.
inline std::pair<RasterImage, DeformationField> InsertSeams(const RasterImage& img,
                                                            const EnergyProvider& provider,
                                                            int k, Axis axis = Axis::kWidth) {
  if (k < 0) throw Error(ErrorCode::kDegenerateTarget, "negative seam count");
  const TargetSpec target = axis == Axis::kWidth
                                ? TargetSpec::Width(img.size(), img.width() + k)
                                : TargetSpec::Height(img.size(), img.height() + k);
  SeamResult r = RetargetSeamAxis(img, provider, target);
  return {std::move(r.image), std::move(r.field)};
}

/// Resizes to `target`, width first then height; the returned field logs
/// both passes.
inline std::pair<RasterImage, DeformationField> RetargetSeam(const RasterImage& img,
                                                             const EnergyProvider& provider,
                                                             Size target) {
  SeamResult first = RetargetSeamAxis(img, provider, TargetSpec::Width(img.size(), target.width));
  SeamResult second = RetargetSeamAxis(first.image, provider,
                                       TargetSpec::Height(first.image.size(), target.height),
                                       std::move(first.carried_map));
  std::vector<SeamBatch> batches = first.field.batches();
  batches.insert(batches.end(), second.field.batches().begin(), second.field.batches().end());
  return {std::move(second.image), DeformationField::FromSeams(img.size(), std::move(batches))};
}

inline std::pair<RasterImage, DeformationField> RetargetSeam(const RasterImage& img,
                                                             const EnergyProvider& provider,
                                                             const TargetSpec& target) {
  SeamResult r = RetargetSeamAxis(img, provider, target);
  return {std::move(r.image), std::move(r.field)};
}

}  // namespace retarget
