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

// Deformation-based aspect ratio similarity and seam energy retention.

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "retarget/deformation.hpp"
#include "retarget/error.hpp"
#include "retarget/raster.hpp"

namespace retarget {

struct ArsCell {
  int id = 0;
  double omega = 0.0;
  double r = 1.0;             // target aspect / source aspect
  double contribution = 0.0;  // omega * min(r, 1/r) / sum(omega)
};

struct ArsReport {
  double score = 1.0;
  std::vector<ArsCell> cells;

  void WriteCsv(std::ostream& out) const {
    char buf[128];
    out << "cell_id,omega,r,contribution\n";
    for (const ArsCell& c : cells) {
      std::snprintf(buf, sizeof(buf), "%d,%.9f,%.9f,%.9f\n", c.id, c.omega, c.r,
                    c.contribution);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "score,%.6f\n", score);
    out << buf;
  }

  void WriteText(std::ostream& out) const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "ARS score: %.6f over %zu cells\n", score, cells.size());
    out << buf;
    for (const ArsCell& c : cells) {
      std::snprintf(buf, sizeof(buf), "  cell %4d  omega %.4f  r %.4f  contribution %.6f\n",
                    c.id, c.omega, c.r, c.contribution);
      out << buf;
    }
  }
};

/// min(r, 1/r), zero for non-positive ratios.
inline double AspectSimilarity(double r) {
  if (!(r > 0.0)) return 0.0;
  return std::min(r, 1.0 / r);
}

/// Tiles the source into cells, maps every cell's corners through `field`
/// and scores how well each cell keeps its aspect ratio, weighted by the
/// cell's mean importance. Zero-importance cells are ignored unless every
/// cell is zero, in which case all cells weigh the same.
inline ArsReport Ars(const DeformationField& field, const ImportanceMap& map,
                     int cell_size = 16) {
  if (cell_size < 1) throw Error(ErrorCode::kInvalidArgument, "cell size must be positive");
  const Size src = field.source_size();
  if (map.size() != src) {
    throw Error(ErrorCode::kDimensionMismatch,
                "map " + ToString(map.size()) + " vs field source " + ToString(src));
  }
  ArsReport report;
  std::vector<double> similarity;
  int id = 0;
  for (int y0 = 0; y0 < src.height; y0 += cell_size) {
    const int y1 = std::min(y0 + cell_size, src.height);
    for (int x0 = 0; x0 < src.width; x0 += cell_size) {
      const int x1 = std::min(x0 + cell_size, src.width);
      const Vec2 tl = field.MapPoint({double(x0), double(y0)});
      const Vec2 tr = field.MapPoint({double(x1), double(y0)});
      const Vec2 br = field.MapPoint({double(x1), double(y1)});
      const Vec2 bl = field.MapPoint({double(x0), double(y1)});
      const double tw = 0.5 * ((tr.x - tl.x) + (br.x - bl.x));
      const double th = 0.5 * ((bl.y - tl.y) + (br.y - tr.y));
      const double sw = x1 - x0;
      const double sh = y1 - y0;
      ArsCell cell;
      cell.id = id++;
      cell.r = th > 0.0 ? (tw / th) / (sw / sh) : 0.0;
      double sum = 0.0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) sum += map.at(x, y);
      }
      cell.omega = sum / (sw * sh);
      report.cells.push_back(cell);
      similarity.push_back(AspectSimilarity(cell.r));
    }
  }
  double total = 0.0;
  for (const ArsCell& c : report.cells) total += c.omega;
  const bool uniform = total <= 0.0;
  if (uniform) total = static_cast<double>(report.cells.size());
  double weighted = 0.0;
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    ArsCell& c = report.cells[i];
    const double w = uniform ? 1.0 : c.omega;
    c.contribution = w * similarity[i] / total;
    weighted += w * similarity[i];
  }
  report.score = std::clamp(weighted / total, 0.0, 1.0);
  return report;
}

/// Fraction of total importance that survives a seam-removal log.
inline double EnergyRetention(const ImportanceMap& original, const DeformationField& field) {
  if (field.kind() != FieldKind::kSeamRemovalLog) {
    throw Error(ErrorCode::kKindMismatch, "energy retention needs a seam-removal log");
  }
  if (original.size() != field.source_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "map does not match field source");
  }
  const Grid<int> removed = field.RemovedMask();
  double total = 0.0;
  double lost = 0.0;
  for (std::size_t i = 0; i < original.values().size(); ++i) {
    total += original.values()[i];
    if (removed.values()[i]) lost += original.values()[i];
  }
  if (total <= 0.0) return 1.0;
  return std::clamp(1.0 - lost / total, 0.0, 1.0);
}

}  // namespace retarget
