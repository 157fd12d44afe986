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

// Patch-based mesh warping. A regular quad mesh is laid over the image,
// every quad inherits the importance of the patch owning most of its
// pixels, and target vertex positions minimise a weighted sum of
// similarity (per-patch uniform scale) and linear-scaling edge energies,
// plus grid-orientation and temporal terms for video.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "retarget/deformation.hpp"
#include "retarget/energy.hpp"
#include "retarget/error.hpp"
#include "retarget/raster.hpp"
#include "retarget/segment.hpp"
#include "retarget/sparse.hpp"

namespace retarget {

enum class WarpMode { kModifiedImage, kModifiedVideo, kLegacyImage, kLegacyVideo };

struct WarpEnergyConfig {
  WarpMode mode = WarpMode::kModifiedImage;
  // Legacy modes only: weight of the similarity term; linear scaling gets
  // 1 - alpha. 0.7 and 0.8 are the customary values.
  double alpha = 0.8;
  // Video modes only.
  double temporal_lambda = 1.0;

  bool video() const {
    return mode == WarpMode::kModifiedVideo || mode == WarpMode::kLegacyVideo;
  }
  bool legacy() const {
    return mode == WarpMode::kLegacyImage || mode == WarpMode::kLegacyVideo;
  }

  void Validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0,1]");
    }
    if (!(temporal_lambda >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "temporal lambda must be >= 0");
    }
  }
};

struct MeshQuad {
  // Vertex indices: top-left, top-right, bottom-right, bottom-left.
  std::array<int, 4> corners{};
  int patch_id = 0;
  double omega = 0.0;
};

struct MeshGrid {
  int cols = 0;  // vertices per row
  int rows = 0;  // vertices per column
  int cell_size = 0;
  Size image_size;
  Size target_size;
  std::vector<Vec2> source_vertices;
  std::vector<Vec2> target_vertices;
  std::vector<MeshQuad> quads;  // row-major

  int quads_x() const { return cols - 1; }
  int quads_y() const { return rows - 1; }
  int VertexIndex(int i, int j) const { return j * cols + i; }
  const MeshQuad& quad(int qi, int qj) const { return quads[qj * quads_x() + qi]; }

  MeshCorrespondence Correspondence() const {
    return {cols, rows, cell_size, image_size, target_size, source_vertices,
            target_vertices};
  }
};

/// Regular mesh of ceil(W/cell) x ceil(H/cell) quads; the last row and
/// column of vertices sit on the image border. Each quad belongs to the
/// patch owning most of its pixels (ties to the lower id).
inline MeshGrid BuildMesh(Size image, const PatchMap& patches, int cell_size = 20) {
  if (cell_size < 2) {
    throw Error(ErrorCode::kDegenerateMesh, "cell size must be at least 2");
  }
  if (patches.labels.size() != image) {
    throw Error(ErrorCode::kDimensionMismatch,
                "labels " + ToString(patches.labels.size()) + " vs image " + ToString(image));
  }
  MeshGrid m;
  m.cell_size = cell_size;
  m.image_size = image;
  m.target_size = image;
  m.cols = (image.width + cell_size - 1) / cell_size + 1;
  m.rows = (image.height + cell_size - 1) / cell_size + 1;
  m.source_vertices.resize(static_cast<std::size_t>(m.cols) * m.rows);
  for (int j = 0; j < m.rows; ++j) {
    for (int i = 0; i < m.cols; ++i) {
      m.source_vertices[m.VertexIndex(i, j)] = {
          static_cast<double>(std::min(i * cell_size, image.width)),
          static_cast<double>(std::min(j * cell_size, image.height))};
    }
  }
  m.target_vertices = m.source_vertices;

  std::map<int, double> omega;
  for (const Patch& p : patches.patches) omega[p.id] = p.omega;
  for (int qj = 0; qj < m.quads_y(); ++qj) {
    for (int qi = 0; qi < m.quads_x(); ++qi) {
      std::map<int, int> votes;
      const int x1 = std::min((qi + 1) * cell_size, image.width);
      const int y1 = std::min((qj + 1) * cell_size, image.height);
      for (int y = qj * cell_size; y < y1; ++y) {
        for (int x = qi * cell_size; x < x1; ++x) ++votes[patches.labels.at(x, y)];
      }
      int owner = votes.begin()->first;
      int best = 0;
      for (const auto& [id, n] : votes) {
        if (n > best) {
          best = n;
          owner = id;
        }
      }
      auto it = omega.find(owner);
      if (it == omega.end()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "patch " + std::to_string(owner) + " missing from patch table");
      }
      MeshQuad q;
      q.corners = {m.VertexIndex(qi, qj), m.VertexIndex(qi + 1, qj),
                   m.VertexIndex(qi + 1, qj + 1), m.VertexIndex(qi, qj + 1)};
      q.patch_id = owner;
      q.omega = it->second;
      m.quads.push_back(q);
    }
  }
  return m;
}

/// Shoelace area of a quad (positive for the source orientation).
inline double SignedArea(const std::array<Vec2, 4>& p) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += Cross(p[i], p[(i + 1) % 4]);
  return 0.5 * s;
}

inline std::array<Vec2, 4> QuadPoints(const std::vector<Vec2>& v, const MeshQuad& q) {
  return {v[q.corners[0]], v[q.corners[1]], v[q.corners[2]], v[q.corners[3]]};
}

inline int CountFoldovers(const MeshGrid& m) {
  int n = 0;
  for (const MeshQuad& q : m.quads) {
    if (SignedArea(QuadPoints(m.target_vertices, q)) < 0.0) ++n;
  }
  return n;
}

inline void CheckFoldover(const MeshGrid& m) {
  if (const int n = CountFoldovers(m); n > 0) {
    throw Error(ErrorCode::kFoldover, std::to_string(n) + " quad(s) folded over");
  }
}

enum class TermKind { kLinearScaling, kSimilarity, kOrientation, kTemporal };

// weight * (coef_a * v[var_a] + coef_b * v[var_b] - rhs)^2; var_b < 0 means
// a single-variable row.
struct ResidualRow {
  int var_a = 0;
  double coef_a = 0.0;
  int var_b = -1;
  double coef_b = 0.0;
  double rhs = 0.0;
  double weight = 0.0;
  TermKind kind = TermKind::kLinearScaling;

  double Residual(std::span<const double> v) const {
    double r = coef_a * v[var_a] - rhs;
    if (var_b >= 0) r += coef_b * v[var_b];
    return r;
  }
};

// Sum of weighted squared linear residuals over 2N unknowns, laid out as
// x0, y0, x1, y1, ...
class QuadraticObjective {
 public:
  explicit QuadraticObjective(int num_variables = 0) : num_variables_(num_variables) {}

  void Add(const ResidualRow& row) {
    if (row.weight > 0.0) rows_.push_back(row);
  }

  int num_variables() const { return num_variables_; }
  const std::vector<ResidualRow>& rows() const { return rows_; }

  double Value(std::span<const double> v) const {
    double s = 0.0;
    for (const ResidualRow& r : rows_) {
      const double e = r.Residual(v);
      s += r.weight * e * e;
    }
    return s;
  }

  double Value(std::span<const double> v, TermKind kind) const {
    double s = 0.0;
    for (const ResidualRow& r : rows_) {
      if (r.kind != kind) continue;
      const double e = r.Residual(v);
      s += r.weight * e * e;
    }
    return s;
  }

  std::vector<double> Gradient(std::span<const double> v) const {
    std::vector<double> g(num_variables_, 0.0);
    for (const ResidualRow& r : rows_) {
      const double e = 2.0 * r.weight * r.Residual(v);
      g[r.var_a] += e * r.coef_a;
      if (r.var_b >= 0) g[r.var_b] += e * r.coef_b;
    }
    return g;
  }

 private:
  int num_variables_;
  std::vector<ResidualRow> rows_;
};

inline std::vector<double> Flatten(const std::vector<Vec2>& v) {
  std::vector<double> out;
  out.reserve(v.size() * 2);
  for (const Vec2& p : v) {
    out.push_back(p.x);
    out.push_back(p.y);
  }
  return out;
}

inline std::vector<Vec2> Unflatten(std::span<const double> v) {
  std::vector<Vec2> out(v.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {v[2 * i], v[2 * i + 1]};
  return out;
}

// Per-patch uniform scale used by the similarity term.
using PatchScales = std::map<int, double>;

/// Least-squares ratio of current to source edge vectors over each patch's
/// quad sides.
inline PatchScales EstimatePatchScales(const MeshGrid& m, const std::vector<Vec2>& current) {
  std::map<int, std::pair<double, double>> acc;
  for (const MeshQuad& q : m.quads) {
    auto& [num, den] = acc[q.patch_id];
    for (int e = 0; e < 4; ++e) {
      const int a = q.corners[e];
      const int b = q.corners[(e + 1) % 4];
      const Vec2 d = m.source_vertices[b] - m.source_vertices[a];
      const Vec2 dp = current[b] - current[a];
      num += Dot(dp, d);
      den += Dot(d, d);
    }
  }
  PatchScales scales;
  for (const auto& [id, nd] : acc) {
    scales[id] = nd.second > 0.0 ? std::max(nd.first / nd.second, 1e-6) : 1.0;
  }
  return scales;
}

/// Builds the warping objective for resizing the mesh's image to `target`.
/// Every quad side contributes a linear-scaling residual against
/// diag(W'/W, H'/H) and a similarity residual against its patch scale. In
/// modified modes they are weighted (1 - omega) and omega of the owning
/// patch; legacy modes use (1 - alpha) and alpha. Video modes add unit
/// weight orientation terms on every mesh edge and, given `previous`,
/// temporal_lambda * |v - v_prev|^2 per vertex.
inline QuadraticObjective AssembleEnergy(const MeshGrid& m, Size target,
                                         const WarpEnergyConfig& cfg,
                                         const PatchScales& scales,
                                         const std::vector<Vec2>* previous = nullptr) {
  cfg.Validate();
  const int n = static_cast<int>(m.source_vertices.size());
  QuadraticObjective obj(2 * n);
  const double sx = static_cast<double>(target.width) / m.image_size.width;
  const double sy = static_cast<double>(target.height) / m.image_size.height;

  for (const MeshQuad& q : m.quads) {
    const double w_sim = cfg.legacy() ? cfg.alpha : q.omega;
    const double w_lin = 1.0 - w_sim;
    auto scale = scales.find(q.patch_id);
    const double sk = scale == scales.end() ? 1.0 : scale->second;
    for (int e = 0; e < 4; ++e) {
      const int a = q.corners[e];
      const int b = q.corners[(e + 1) % 4];
      const Vec2 d = m.source_vertices[b] - m.source_vertices[a];
      for (int axis = 0; axis < 2; ++axis) {
        const double comp = axis == 0 ? d.x : d.y;
        const double lin = axis == 0 ? sx : sy;
        obj.Add({2 * b + axis, 1.0, 2 * a + axis, -1.0, lin * comp, w_lin,
                 TermKind::kLinearScaling});
        obj.Add({2 * b + axis, 1.0, 2 * a + axis, -1.0, sk * comp, w_sim,
                 TermKind::kSimilarity});
      }
    }
  }

  if (cfg.video()) {
    for (int j = 0; j < m.rows; ++j) {
      for (int i = 0; i + 1 < m.cols; ++i) {
        const int a = m.VertexIndex(i, j);
        const int b = m.VertexIndex(i + 1, j);
        obj.Add({2 * b + 1, 1.0, 2 * a + 1, -1.0, 0.0, 1.0, TermKind::kOrientation});
      }
    }
    for (int j = 0; j + 1 < m.rows; ++j) {
      for (int i = 0; i < m.cols; ++i) {
        const int a = m.VertexIndex(i, j);
        const int b = m.VertexIndex(i, j + 1);
        obj.Add({2 * b, 1.0, 2 * a, -1.0, 0.0, 1.0, TermKind::kOrientation});
      }
    }
    if (previous != nullptr) {
      if (static_cast<int>(previous->size()) != n) {
        throw Error(ErrorCode::kDimensionMismatch, "previous mesh has a different layout");
      }
      for (int v = 0; v < n; ++v) {
        obj.Add({2 * v, 1.0, -1, 0.0, (*previous)[v].x, cfg.temporal_lambda,
                 TermKind::kTemporal});
        obj.Add({2 * v + 1, 1.0, -1, 0.0, (*previous)[v].y, cfg.temporal_lambda,
                 TermKind::kTemporal});
      }
    }
  }
  return obj;
}

// Per-variable pinned values; std::nullopt marks a free variable.
struct BoundaryConstraints {
  std::vector<std::optional<double>> fixed;

  bool is_fixed(int var) const { return fixed[var].has_value(); }
};

/// Corners pinned to the target corners; other border vertices keep only
/// their coordinate across the border fixed, so they slide along it.
inline BoundaryConstraints BorderConstraints(const MeshGrid& m, Size target) {
  BoundaryConstraints c;
  c.fixed.assign(2 * m.source_vertices.size(), std::nullopt);
  for (int j = 0; j < m.rows; ++j) {
    for (int i = 0; i < m.cols; ++i) {
      const int v = m.VertexIndex(i, j);
      if (i == 0) c.fixed[2 * v] = 0.0;
      if (i == m.cols - 1) c.fixed[2 * v] = static_cast<double>(target.width);
      if (j == 0) c.fixed[2 * v + 1] = 0.0;
      if (j == m.rows - 1) c.fixed[2 * v + 1] = static_cast<double>(target.height);
    }
  }
  return c;
}

/// Gradient with the pinned components zeroed.
inline std::vector<double> ConstrainedGradient(const QuadraticObjective& obj,
                                               const BoundaryConstraints& c,
                                               std::span<const double> v) {
  std::vector<double> g = obj.Gradient(v);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (c.is_fixed(static_cast<int>(i))) g[i] = 0.0;
  }
  return g;
}

struct QuadraticSolveResult {
  std::vector<double> values;
  CgResult cg;
};

/// Minimises `obj` over the free variables by conjugate gradient on the
/// reduced normal equations, starting from `initial`.
inline QuadraticSolveResult SolveQuadratic(const QuadraticObjective& obj,
                                           const BoundaryConstraints& c,
                                           std::span<const double> initial,
                                           double tolerance = 1e-8,
                                           int max_iterations = 1000,
                                           double absolute_tolerance = 0.0) {
  const int n = obj.num_variables();
  std::vector<int> free_index(n, -1);
  int nfree = 0;
  for (int i = 0; i < n; ++i) {
    if (!c.is_fixed(i)) free_index[i] = nfree++;
  }
  QuadraticSolveResult out;
  out.values.assign(initial.begin(), initial.end());
  for (int i = 0; i < n; ++i) {
    if (c.is_fixed(i)) out.values[i] = *c.fixed[i];
  }
  if (nfree == 0) {
    out.cg.converged = true;
    return out;
  }

  std::vector<Triplet> triplets;
  std::vector<double> rhs(nfree, 0.0);
  triplets.reserve(obj.rows().size() * 4);
  for (const ResidualRow& r : obj.rows()) {
    const std::array<std::pair<int, double>, 2> terms{
        std::pair{r.var_a, r.coef_a}, std::pair{r.var_b, r.coef_b}};
    const int nterms = r.var_b >= 0 ? 2 : 1;
    // Move pinned variables to the right-hand side.
    double target = r.rhs;
    for (int t = 0; t < nterms; ++t) {
      if (c.is_fixed(terms[t].first)) target -= terms[t].second * *c.fixed[terms[t].first];
    }
    for (int t = 0; t < nterms; ++t) {
      const int fi = free_index[terms[t].first];
      if (fi < 0) continue;
      rhs[fi] += r.weight * terms[t].second * target;
      for (int u = 0; u < nterms; ++u) {
        const int fu = free_index[terms[u].first];
        if (fu < 0) continue;
        triplets.emplace_back(fi, fu, r.weight * terms[t].second * terms[u].second);
      }
    }
  }
  SparseMatrix h(nfree, nfree);
  h.setFromTriplets(triplets.begin(), triplets.end());
  std::vector<double> x(nfree);
  for (int i = 0; i < n; ++i) {
    if (free_index[i] >= 0) x[free_index[i]] = out.values[i];
  }
  out.cg = ConjugateGradient(h, rhs, x, tolerance, max_iterations, absolute_tolerance);
  if (!out.cg.converged) {
    throw Error(ErrorCode::kNonConvergence,
                "conjugate gradient stopped at relative residual " +
                    std::to_string(out.cg.relative_residual) + " after " +
                    std::to_string(out.cg.iterations) + " iterations");
  }
  for (int i = 0; i < n; ++i) {
    if (free_index[i] >= 0) out.values[i] = x[free_index[i]];
  }
  return out;
}

struct WarpSolveOptions {
  int outer_iterations = 5;
  double tolerance = 1e-8;
  int max_inner_iterations = 1000;
  // Residual floor of the reduced system (half the free gradient norm).
  double absolute_tolerance = 1e-7;
  bool check_foldover = true;
};

// Starting point for a solve. `previous` also activates the temporal term
// in video modes.
struct WarpWarmStart {
  std::vector<Vec2> previous;
  PatchScales scales;
};

struct WarpSolution {
  MeshGrid mesh;
  PatchScales scales;               // scales used by the final vertex solve
  QuadraticObjective objective;     // objective minimised by the final solve
  BoundaryConstraints constraints;
  CgResult last_cg;

  double ObjectiveValue() const { return objective.Value(Flatten(mesh.target_vertices)); }
};

/// Alternates between solving the vertices for fixed patch scales and
/// re-estimating the scales from the solved vertices. Without a warm start
/// the vertices start at uniform scaling and the first scales are estimated
/// from that configuration.
inline WarpSolution SolveWarp(MeshGrid mesh, Size target, const WarpEnergyConfig& cfg,
                              const WarpSolveOptions& options = {},
                              const WarpWarmStart* warm = nullptr) {
  if (target.width < 1 || target.height < 1) {
    throw Error(ErrorCode::kDegenerateTarget, "target " + ToString(target) + " is empty");
  }
  cfg.Validate();
  const double sx = static_cast<double>(target.width) / mesh.image_size.width;
  const double sy = static_cast<double>(target.height) / mesh.image_size.height;
  const std::vector<Vec2>* previous = nullptr;
  std::vector<Vec2> current;
  PatchScales scales;
  if (warm != nullptr && !warm->previous.empty()) {
    if (warm->previous.size() != mesh.source_vertices.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "warm start has a different mesh layout");
    }
    current = warm->previous;
    if (cfg.video()) previous = &warm->previous;
  } else {
    current.reserve(mesh.source_vertices.size());
    for (const Vec2& v : mesh.source_vertices) current.push_back({v.x * sx, v.y * sy});
  }
  scales = warm != nullptr && !warm->scales.empty() ? warm->scales
                                                    : EstimatePatchScales(mesh, current);

  WarpSolution sol{std::move(mesh), {}, QuadraticObjective{}, BorderConstraints({}, target), {}};
  sol.constraints = BorderConstraints(sol.mesh, target);
  sol.mesh.target_size = target;
  std::vector<double> values = Flatten(current);
  for (int pass = 0; pass < std::max(1, options.outer_iterations); ++pass) {
    if (pass > 0) scales = EstimatePatchScales(sol.mesh, Unflatten(values));
    sol.objective = AssembleEnergy(sol.mesh, target, cfg, scales, previous);
    QuadraticSolveResult r = SolveQuadratic(sol.objective, sol.constraints, values,
                                            options.tolerance, options.max_inner_iterations,
                                            options.absolute_tolerance);
    values = std::move(r.values);
    sol.last_cg = r.cg;
  }
  sol.scales = std::move(scales);
  sol.mesh.target_vertices = Unflatten(values);
  if (options.check_foldover) CheckFoldover(sol.mesh);
  return sol;
}

namespace warp_detail {

// Solves bilinear(quad, u, v) = p by Newton iteration.
inline std::optional<std::pair<double, double>> InverseBilinear(const std::array<Vec2, 4>& q,
                                                                Vec2 p) {
  // q: top-left, top-right, bottom-right, bottom-left.
  const Vec2 a = q[0];
  const Vec2 b = q[1] - q[0];
  const Vec2 c = q[3] - q[0];
  const Vec2 d = q[0] - q[1] + q[2] - q[3];
  double u = 0.5, v = 0.5;
  for (int it = 0; it < 30; ++it) {
    const Vec2 f = a + u * b + v * c + (u * v) * d - p;
    const Vec2 fu = b + v * d;
    const Vec2 fv = c + u * d;
    const double det = Cross(fu, fv);
    if (std::abs(det) < 1e-300) return std::nullopt;
    const double du = Cross(f, fv) / det;
    const double dv = Cross(fu, f) / det;
    u -= du;
    v -= dv;
    if (std::abs(du) < 1e-14 && std::abs(dv) < 1e-14) break;
  }
  if (!std::isfinite(u) || !std::isfinite(v)) return std::nullopt;
  // Newton can stall far from the root for points outside the quad.
  const Vec2 f = a + u * b + v * c + (u * v) * d - p;
  const double scale = std::max({1.0, std::abs(p.x), std::abs(p.y)});
  if (std::abs(f.x) > 1e-9 * scale || std::abs(f.y) > 1e-9 * scale) return std::nullopt;
  return std::pair{u, v};
}

inline double Outside(double u, double v) {
  return std::max({0.0, -u, u - 1.0, -v, v - 1.0});
}

constexpr double kInsideSlack = 1e-9;

inline Vec2 SourcePoint(const MeshGrid& m, const MeshQuad& q, double u, double v) {
  const Vec2 s0 = m.source_vertices[q.corners[0]];
  const Vec2 s2 = m.source_vertices[q.corners[2]];
  return {s0.x + u * (s2.x - s0.x), s0.y + v * (s2.y - s0.y)};
}

}  // namespace warp_detail

/// Source position of a target point, through the bilinear parametrisation
/// of the quad containing it. Points outside every quad map through the
/// nearest one with clamped coordinates; nullopt only for degenerate quads.
inline std::optional<Vec2> InverseMapPoint(const MeshGrid& m, Vec2 target_point) {
  double best = std::numeric_limits<double>::infinity();
  std::optional<Vec2> result;
  for (const MeshQuad& q : m.quads) {
    const auto uv = warp_detail::InverseBilinear(QuadPoints(m.target_vertices, q), target_point);
    if (!uv) continue;
    const double out = warp_detail::Outside(uv->first, uv->second);
    if (out < best) {
      best = out;
      result = warp_detail::SourcePoint(m, q, std::clamp(uv->first, 0.0, 1.0),
                                        std::clamp(uv->second, 0.0, 1.0));
      if (out <= warp_detail::kInsideSlack) break;
    }
  }
  return result;
}

/// Bilinear sample at continuous pixel-centre coordinates, clamped to the
/// image.
inline std::array<double, 3> SampleBilinear(const RasterImage& img, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  std::array<double, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const double top = (1 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
    const double bot = (1 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
    out[c] = (1 - fy) * top + fy * bot;
  }
  return out;
}

/// Resamples `img` through a solved mesh: each target pixel centre is
/// inverse-mapped through its quad and the source is sampled bilinearly.
inline std::pair<RasterImage, DeformationField> RenderWarp(const RasterImage& img,
                                                           const MeshGrid& m) {
  if (img.size() != m.image_size) {
    throw Error(ErrorCode::kDimensionMismatch, "mesh was built for another image size");
  }
  CheckFoldover(m);
  const int tw = m.target_size.width;
  const int th = m.target_size.height;
  std::vector<Vec2> source_of(static_cast<std::size_t>(tw) * th);
  std::vector<double> fit(source_of.size(), std::numeric_limits<double>::infinity());

  for (const MeshQuad& q : m.quads) {
    const auto pts = QuadPoints(m.target_vertices, q);
    double x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
    for (const Vec2& p : pts) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    const int px0 = std::max(0, static_cast<int>(std::floor(x0 - 0.5)));
    const int px1 = std::min(tw - 1, static_cast<int>(std::ceil(x1 - 0.5)));
    const int py0 = std::max(0, static_cast<int>(std::floor(y0 - 0.5)));
    const int py1 = std::min(th - 1, static_cast<int>(std::ceil(y1 - 0.5)));
    for (int py = py0; py <= py1; ++py) {
      for (int px = px0; px <= px1; ++px) {
        const std::size_t idx = static_cast<std::size_t>(py) * tw + px;
        if (fit[idx] <= warp_detail::kInsideSlack) continue;
        const auto uv = warp_detail::InverseBilinear(pts, {px + 0.5, py + 0.5});
        if (!uv) continue;
        const double out = warp_detail::Outside(uv->first, uv->second);
        if (out < fit[idx]) {
          fit[idx] = out;
          source_of[idx] = warp_detail::SourcePoint(m, q, std::clamp(uv->first, 0.0, 1.0),
                                                    std::clamp(uv->second, 0.0, 1.0));
        }
      }
    }
  }

  std::vector<std::uint8_t> data(source_of.size() * 3);
  for (int py = 0; py < th; ++py) {
    for (int px = 0; px < tw; ++px) {
      const std::size_t idx = static_cast<std::size_t>(py) * tw + px;
      Vec2 s = source_of[idx];
      if (!std::isfinite(fit[idx])) {
        // Not reached by any quad's bounding box.
        s = InverseMapPoint(m, {px + 0.5, py + 0.5}).value_or(Vec2{px + 0.5, py + 0.5});
      }
      const auto rgb = SampleBilinear(img, s.x - 0.5, s.y - 0.5);
      for (int c = 0; c < 3; ++c) {
        data[idx * 3 + c] =
            static_cast<std::uint8_t>(std::lround(std::clamp(rgb[c], 0.0, 255.0)));
      }
    }
  }
  return {RasterImage(tw, th, std::move(data)), DeformationField::FromMesh(m.Correspondence())};
}

struct WarpJob {
  WarpEnergyConfig energy;
  SegmentationParams segmentation;
  int cell_size = 20;
  WarpSolveOptions solver;
};

struct WarpResult {
  RasterImage image;
  DeformationField field;
  WarpSolution solution;
};

/// Segment, weight patches by mean importance, solve and render.
inline WarpResult RetargetWarp(const RasterImage& img, const ImportanceMap& importance,
                               Size target, const WarpJob& job = {}) {
  const LabelGrid labels = Segment(img, job.segmentation);
  const PatchMap patches = PatchEnergy(labels, importance);
  WarpSolution sol =
      SolveWarp(BuildMesh(img.size(), patches, job.cell_size), target, job.energy, job.solver);
  auto [out, field] = RenderWarp(img, sol.mesh);
  return {std::move(out), std::move(field), std::move(sol)};
}

inline WarpResult RetargetWarp(const RasterImage& img, const EnergyProvider& provider,
                               Size target, const WarpJob& job = {}) {
  return RetargetWarp(img, provider.Compute(img), target, job);
}

inline WarpEnergyConfig AsVideo(WarpEnergyConfig cfg) {
  if (cfg.mode == WarpMode::kModifiedImage) cfg.mode = WarpMode::kModifiedVideo;
  if (cfg.mode == WarpMode::kLegacyImage) cfg.mode = WarpMode::kLegacyVideo;
  return cfg;
}

/// Blends `next` into `smoothed`: 0.5 * smoothed + 0.5 * next.
inline ImportanceMap SmoothImportance(const ImportanceMap& smoothed, const ImportanceMap& next) {
  std::vector<double> v(next.values().size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = 0.5 * smoothed.values()[i] + 0.5 * next.values()[i];
  }
  return ImportanceMap(next.width(), next.height(), std::move(v));
}

/// Frame-by-frame warping. Segmentation comes from the first frame and is
/// reused; importance is exponentially smoothed across frames; each frame
/// after the first starts from, and is tied by the temporal term to, the
/// previous frame's solution.
inline std::vector<WarpResult> RetargetVideo(std::span<const RasterImage> frames,
                                             const EnergyProvider& provider, Size target,
                                             const WarpJob& job = {}) {
  if (frames.empty()) throw Error(ErrorCode::kInvalidArgument, "no frames");
  for (const RasterImage& f : frames) {
    if (f.size() != frames.front().size()) {
      throw Error(ErrorCode::kFrameDimensionMismatch,
                  "frame is " + ToString(f.size()) + ", first frame is " +
                      ToString(frames.front().size()));
    }
  }
  const WarpEnergyConfig cfg = AsVideo(job.energy);
  const LabelGrid labels = Segment(frames.front(), job.segmentation);
  std::vector<WarpResult> out;
  out.reserve(frames.size());
  std::optional<ImportanceMap> smoothed;
  std::optional<WarpWarmStart> warm;
  for (const RasterImage& frame : frames) {
    const ImportanceMap m = provider.Compute(frame);
    smoothed = smoothed ? SmoothImportance(*smoothed, m) : m;
    MeshGrid mesh = BuildMesh(frame.size(), PatchEnergy(labels, *smoothed), job.cell_size);
    WarpSolution sol = SolveWarp(std::move(mesh), target, cfg, job.solver,
                                 warm ? &*warm : nullptr);
    warm = WarpWarmStart{sol.mesh.target_vertices, sol.scales};
    auto [img, field] = RenderWarp(frame, sol.mesh);
    out.push_back({std::move(img), std::move(field), std::move(sol)});
  }
  return out;
}

}  // namespace retarget
