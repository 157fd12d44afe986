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

// Sparse symmetric solves for the warp normal equations.

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <algorithm>
#include <span>

namespace retarget {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradient for a symmetric positive
/// definite `a`. `x` holds the initial guess on entry. Converged once
/// |b - Ax| <= tolerance * |b|; iteration continues past that point until
/// |b - Ax| <= absolute_tolerance as well, or the iteration limit.
inline CgResult ConjugateGradient(const SparseMatrix& a, std::span<const double> b,
                                  std::span<double> x, double tolerance, int max_iterations,
                                  double absolute_tolerance = 0.0) {
  const Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
  Eigen::Map<Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  CgResult res;
  const double b_norm = bv.norm();
  if (b_norm == 0.0) {
    xv.setZero();
    res.converged = true;
    return res;
  }
  double stop = tolerance;
  if (absolute_tolerance > 0.0) stop = std::min(stop, absolute_tolerance / b_norm);

  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(stop);
  cg.setMaxIterations(max_iterations);
  cg.compute(a);
  const Eigen::VectorXd solution = cg.solveWithGuess(bv, Eigen::VectorXd(xv));
  xv = solution;
  res.iterations = static_cast<int>(cg.iterations());
  res.relative_residual = (bv - a * xv).norm() / b_norm;
  res.converged = res.relative_residual <= tolerance;
  return res;
}

}  // namespace retarget
