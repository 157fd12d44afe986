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

// Source-to-target correspondence left behind by a retargeting operator:
// either an ordered log of seams or a deformed quad mesh.

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "retarget/error.hpp"
#include "retarget/raster.hpp"

namespace retarget {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double Dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double Cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

enum class SeamOrientation { kVertical, kHorizontal };

// Vertical seams hold one column per row; horizontal seams one row per
// column.
struct Seam {
  SeamOrientation orientation = SeamOrientation::kVertical;
  std::vector<int> positions;
  double total_energy = 0.0;
};

/// Throws InvalidSeam unless `seam` is 8-connected and inside an image of
/// `size`.
inline void ValidateSeam(const Seam& seam, Size size) {
  const bool vertical = seam.orientation == SeamOrientation::kVertical;
  const int length = vertical ? size.height : size.width;
  const int extent = vertical ? size.width : size.height;
  if (static_cast<int>(seam.positions.size()) != length) {
    throw Error(ErrorCode::kInvalidSeam, "seam length " +
                                             std::to_string(seam.positions.size()) +
                                             " does not match image " + ToString(size));
  }
  for (std::size_t i = 0; i < seam.positions.size(); ++i) {
    const int p = seam.positions[i];
    if (p < 0 || p >= extent) {
      throw Error(ErrorCode::kInvalidSeam, "seam position out of bounds");
    }
    if (i > 0 && std::abs(p - seam.positions[i - 1]) > 1) {
      throw Error(ErrorCode::kInvalidSeam, "seam is not 8-connected");
    }
  }
}

/// Deletes a vertical seam from a generic grid.
template <typename T>
Grid<T> RemoveVerticalSeam(const Grid<T>& g, const std::vector<int>& cols) {
  Grid<T> out(g.width() - 1, g.height());
  for (int y = 0; y < g.height(); ++y) {
    int ox = 0;
    for (int x = 0; x < g.width(); ++x) {
      if (x != cols[y]) out.at(ox++, y) = g.at(x, y);
    }
  }
  return out;
}

/// Deletes a seam of either orientation from a generic grid.
template <typename T>
Grid<T> RemoveSeamFromGrid(const Grid<T>& g, const Seam& seam) {
  ValidateSeam(seam, g.size());
  if (seam.orientation == SeamOrientation::kVertical) {
    if (g.width() < 2) throw Error(ErrorCode::kInvalidSeam, "would leave width 0");
    return RemoveVerticalSeam(g, seam.positions);
  }
  if (g.height() < 2) throw Error(ErrorCode::kInvalidSeam, "would leave height 0");
  return Transpose(RemoveVerticalSeam(Transpose(g), seam.positions));
}

enum class SeamOp { kRemove, kInsert };

// Seams found against one input image. For removal, seams apply one after
// the other, each in the coordinates left by its predecessor. For insertion
// the seams are expressed the same way (they were found by removal on a
// scratch copy) and are then duplicated in `input_size` coordinates.
struct SeamBatch {
  SeamOp op = SeamOp::kRemove;
  SeamOrientation orientation = SeamOrientation::kVertical;
  Size input_size;
  std::vector<Seam> seams;
};

/// For an insertion batch: per line (row for vertical seams, column for
/// horizontal) the sorted positions in `input_size` that get duplicated.
inline std::vector<std::vector<int>> InsertionPositions(const SeamBatch& batch) {
  const bool vertical = batch.orientation == SeamOrientation::kVertical;
  const Size lined = vertical ? batch.input_size
                              : Size{batch.input_size.height, batch.input_size.width};
  Grid<int> index(lined.width, lined.height);
  for (int y = 0; y < lined.height; ++y) {
    for (int x = 0; x < lined.width; ++x) index.at(x, y) = x;
  }
  std::vector<std::vector<int>> chosen(lined.height);
  for (const Seam& s : batch.seams) {
    if (static_cast<int>(s.positions.size()) != lined.height) {
      throw Error(ErrorCode::kInvalidSeam, "insertion seam length mismatch");
    }
    for (int y = 0; y < lined.height; ++y) {
      if (s.positions[y] < 0 || s.positions[y] >= index.width()) {
        throw Error(ErrorCode::kInvalidSeam, "insertion seam out of bounds");
      }
      chosen[y].push_back(index.at(s.positions[y], y));
    }
    if (index.width() > 1) index = RemoveVerticalSeam(index, s.positions);
  }
  for (auto& row : chosen) std::sort(row.begin(), row.end());
  return chosen;
}

// Regular quad grid with source and target vertex positions, row-major,
// `cols` x `rows` vertices.
struct MeshCorrespondence {
  int cols = 0;
  int rows = 0;
  int cell_size = 0;
  Size source_size;
  Size target_size;
  std::vector<Vec2> source;
  std::vector<Vec2> target;

  int VertexIndex(int i, int j) const { return j * cols + i; }
};

enum class FieldKind { kSeamRemovalLog, kSeamInsertionLog, kMesh };

class DeformationField {
 public:
  DeformationField() = default;

  static DeformationField Identity(Size size) {
    DeformationField f;
    f.kind_ = FieldKind::kSeamRemovalLog;
    f.source_size_ = f.target_size_ = size;
    return f;
  }

  static DeformationField FromSeams(Size source, std::vector<SeamBatch> batches) {
    DeformationField f;
    f.source_size_ = source;
    f.batches_ = std::move(batches);
    f.kind_ = FieldKind::kSeamRemovalLog;
    Size cur = source;
    for (const SeamBatch& b : f.batches_) {
      if (b.input_size != cur) {
        throw Error(ErrorCode::kInvalidArgument, "seam batch size chain is broken");
      }
      const int n = static_cast<int>(b.seams.size());
      const int sign = b.op == SeamOp::kRemove ? -1 : 1;
      if (b.op == SeamOp::kInsert) f.kind_ = FieldKind::kSeamInsertionLog;
      if (b.orientation == SeamOrientation::kVertical) {
        cur.width += sign * n;
      } else {
        cur.height += sign * n;
      }
    }
    f.target_size_ = cur;
    return f;
  }

  static DeformationField FromMesh(MeshCorrespondence mesh) {
    DeformationField f;
    f.kind_ = FieldKind::kMesh;
    f.source_size_ = mesh.source_size;
    f.target_size_ = mesh.target_size;
    if (mesh.source.size() != static_cast<std::size_t>(mesh.cols) * mesh.rows ||
        mesh.target.size() != mesh.source.size() || mesh.cols < 2 || mesh.rows < 2) {
      throw Error(ErrorCode::kInvalidArgument, "inconsistent mesh correspondence");
    }
    f.mesh_ = std::move(mesh);
    return f;
  }

  FieldKind kind() const { return kind_; }
  bool is_seam_log() const { return kind_ != FieldKind::kMesh; }
  Size source_size() const { return source_size_; }
  Size target_size() const { return target_size_; }
  const std::vector<SeamBatch>& batches() const { return batches_; }
  const MeshCorrespondence& mesh() const { return mesh_; }

  std::size_t seam_count() const {
    std::size_t n = 0;
    for (const auto& b : batches_) n += b.seams.size();
    return n;
  }

  /// Maps a continuous source point (pixel corners at integer coordinates)
  /// to target coordinates.
  Vec2 MapPoint(Vec2 p) const {
    if (!(p.x >= 0.0 && p.y >= 0.0 && p.x <= source_size_.width &&
          p.y <= source_size_.height)) {
      throw Error(ErrorCode::kCoverageError, "point outside source image");
    }
    return kind_ == FieldKind::kMesh ? MapMeshPoint(p) : MapSeamPoint(p);
  }

  /// For every target pixel, the row-major index of the source pixel it
  /// came from. Seam logs only.
  Grid<int> SourceIndex() const {
    RequireSeams();
    Grid<int> index(source_size_.width, source_size_.height);
    for (int i = 0; i < source_size_.width * source_size_.height; ++i) {
      index.values()[i] = i;
    }
    for (const SeamBatch& b : batches_) {
      if (b.op == SeamOp::kRemove) {
        for (const Seam& s : b.seams) index = RemoveSeamFromGrid(index, s);
      } else {
        index = DuplicateAlong(index, b);
      }
    }
    return index;
  }

  /// Row-major mask of source pixels deleted by a removal log.
  Grid<int> RemovedMask() const {
    if (kind_ != FieldKind::kSeamRemovalLog) {
      throw Error(ErrorCode::kKindMismatch, "removed pixels need a seam-removal log");
    }
    Grid<int> mask(source_size_.width, source_size_.height, 1);
    const Grid<int> kept = SourceIndex();
    for (int i : kept.values()) mask.values()[i] = 0;
    return mask;
  }

  void Write(std::ostream& out) const {
    out.precision(17);
    if (kind_ == FieldKind::kMesh) {
      out << "mesh " << mesh_.cols << ' ' << mesh_.rows << ' ' << mesh_.cell_size << ' '
          << source_size_.width << ' ' << source_size_.height << ' '
          << target_size_.width << ' ' << target_size_.height << '\n';
      for (std::size_t i = 0; i < mesh_.source.size(); ++i) {
        out << mesh_.source[i].x << ' ' << mesh_.source[i].y << ' ' << mesh_.target[i].x
            << ' ' << mesh_.target[i].y << '\n';
      }
      return;
    }
    out << "seams " << source_size_.width << ' ' << source_size_.height << ' '
        << batches_.size() << '\n';
    for (const SeamBatch& b : batches_) {
      out << "batch " << (b.op == SeamOp::kRemove ? "remove" : "insert") << ' '
          << b.input_size.width << ' ' << b.input_size.height << ' ' << b.seams.size()
          << '\n';
      for (const Seam& s : b.seams) {
        out << (s.orientation == SeamOrientation::kVertical ? 'v' : 'h');
        for (int p : s.positions) out << ' ' << p;
        out << '\n';
      }
    }
  }

  std::string ToText() const {
    std::ostringstream os;
    Write(os);
    return os.str();
  }

  static DeformationField Read(std::istream& in) {
    std::string tag;
    if (!(in >> tag)) Malformed("empty field file");
    if (tag == "mesh") {
      MeshCorrespondence m;
      if (!(in >> m.cols >> m.rows >> m.cell_size >> m.source_size.width >>
            m.source_size.height >> m.target_size.width >> m.target_size.height)) {
        Malformed("bad mesh header");
      }
      if (m.cols < 2 || m.rows < 2 || m.cols > 100000 || m.rows > 100000) {
        Malformed("bad mesh dimensions");
      }
      const std::size_t n = static_cast<std::size_t>(m.cols) * m.rows;
      m.source.resize(n);
      m.target.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> m.source[i].x >> m.source[i].y >> m.target[i].x >> m.target[i].y)) {
          Malformed("truncated mesh vertex list");
        }
      }
      return FromMesh(std::move(m));
    }
    if (tag != "seams") Malformed("unknown field kind '" + tag + "'");
    Size source;
    std::size_t nbatches = 0;
    if (!(in >> source.width >> source.height >> nbatches)) Malformed("bad seam header");
    std::vector<SeamBatch> batches(nbatches);
    for (SeamBatch& b : batches) {
      std::string word, op;
      std::size_t nseams = 0;
      if (!(in >> word >> op >> b.input_size.width >> b.input_size.height >> nseams) ||
          word != "batch" || (op != "remove" && op != "insert")) {
        Malformed("bad batch header");
      }
      b.op = op == "remove" ? SeamOp::kRemove : SeamOp::kInsert;
      Size cur = b.input_size;
      for (std::size_t k = 0; k < nseams; ++k) {
        std::string o;
        if (!(in >> o) || (o != "v" && o != "h")) Malformed("bad seam orientation");
        Seam s;
        s.orientation = o == "v" ? SeamOrientation::kVertical : SeamOrientation::kHorizontal;
        if (k == 0) b.orientation = s.orientation;
        if (s.orientation != b.orientation) Malformed("mixed orientations in batch");
        const bool vertical = s.orientation == SeamOrientation::kVertical;
        s.positions.resize(vertical ? cur.height : cur.width);
        for (int& p : s.positions) {
          if (!(in >> p)) Malformed("truncated seam");
        }
        ValidateSeam(s, cur);
        (vertical ? cur.width : cur.height) -= 1;
        b.seams.push_back(std::move(s));
      }
    }
    return FromSeams(source, std::move(batches));
  }

  static DeformationField FromText(const std::string& text) {
    std::istringstream is(text);
    return Read(is);
  }

 private:
  [[noreturn]] static void Malformed(const std::string& why) {
    throw Error(ErrorCode::kDecodeError, "deformation field: " + why);
  }

  void RequireSeams() const {
    if (kind_ == FieldKind::kMesh) {
      throw Error(ErrorCode::kKindMismatch, "operation needs a seam log");
    }
  }

  static Grid<int> DuplicateAlong(const Grid<int>& g, const SeamBatch& b) {
    const bool vertical = b.orientation == SeamOrientation::kVertical;
    const Grid<int> lined = vertical ? g : Transpose(g);
    const auto chosen = InsertionPositions(b);
    Grid<int> out(lined.width() + static_cast<int>(b.seams.size()), lined.height());
    for (int y = 0; y < lined.height(); ++y) {
      int ox = 0;
      auto it = chosen[y].begin();
      for (int x = 0; x < lined.width(); ++x) {
        const int n = static_cast<int>(std::count(it, chosen[y].end(), x));
        for (int r = 0; r <= n; ++r) out.at(ox++, y) = lined.at(x, y);
        it += n;
      }
    }
    return vertical ? out : Transpose(out);
  }

  Vec2 MapSeamPoint(Vec2 p) const {
    for (const SeamBatch& b : batches_) {
      const bool vertical = b.orientation == SeamOrientation::kVertical;
      double& along = vertical ? p.x : p.y;
      const double across = vertical ? p.y : p.x;
      Size cur = b.input_size;
      const int lines = vertical ? cur.height : cur.width;
      const int line = std::clamp(static_cast<int>(std::floor(across)), 0, lines - 1);
      if (b.op == SeamOp::kRemove) {
        for (const Seam& s : b.seams) {
          if (s.positions[line] < along) along -= 1.0;
        }
      } else {
        const auto chosen = InsertionPositions(b);
        const auto& row = chosen[line];
        along += static_cast<double>(
            std::lower_bound(row.begin(), row.end(), along,
                             [](int c, double v) { return c < v; }) -
            row.begin());
      }
    }
    return p;
  }

  Vec2 MapMeshPoint(Vec2 p) const {
    const MeshCorrespondence& m = mesh_;
    const int qx = m.cols - 1;
    const int qy = m.rows - 1;
    int i = 0;
    while (i + 1 < qx && p.x > m.source[m.VertexIndex(i + 1, 0)].x) ++i;
    int j = 0;
    while (j + 1 < qy && p.y > m.source[m.VertexIndex(0, j + 1)].y) ++j;
    const Vec2 s00 = m.source[m.VertexIndex(i, j)];
    const Vec2 s11 = m.source[m.VertexIndex(i + 1, j + 1)];
    const double u = (p.x - s00.x) / (s11.x - s00.x);
    const double v = (p.y - s00.y) / (s11.y - s00.y);
    const Vec2 t00 = m.target[m.VertexIndex(i, j)];
    const Vec2 t10 = m.target[m.VertexIndex(i + 1, j)];
    const Vec2 t01 = m.target[m.VertexIndex(i, j + 1)];
    const Vec2 t11 = m.target[m.VertexIndex(i + 1, j + 1)];
    return (1 - u) * (1 - v) * t00 + u * (1 - v) * t10 + (1 - u) * v * t01 +
           u * v * t11;
  }

  FieldKind kind_ = FieldKind::kSeamRemovalLog;
  Size source_size_;
  Size target_size_;
  std::vector<SeamBatch> batches_;
  MeshCorrespondence mesh_;
};

}  // namespace retarget
