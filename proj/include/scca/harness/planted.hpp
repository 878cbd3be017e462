// Copyright 2026 The scca Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Synthetic two-view data with planted canonical structure.
//
// Latent construction in whitened coordinates (all blocks have unit second
// moment and are mutually orthogonal when `exact`):
//   Xw[:, i] = sqrt(r_i) Z[:, i] + sqrt(1 - r_i) Ex[:, i]   (i < k)
//   Xw[:, i] = Ex[:, i]                                     (i >= k)
// and the same for Yw with Ey. Then X = Xw A_x + noise, Y = Yw A_y + noise.
// Without noise the canonical correlations are exactly r and the canonical
// vectors are A_x^{-1} e_i, A_y^{-1} e_i.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "scca/matrix_core.hpp"
#include "scca/model.hpp"
#include "scca/reference.hpp"

namespace scca {

enum class Conditioning {
  isotropic,  // A = I
  rotated,    // A = Q1 D Q2, eigenvalues of A^T A log-spaced over `condition`
};

struct PlantedParams {
  Index n = 2000;
  Index p1 = 50;
  Index p2 = 50;
  std::vector<double> correlations{0.9, 0.8, 0.7, 0.6, 0.5};
  double noise = 0.0;        // std of extra i.i.d. Gaussian noise per entry
  Conditioning profile = Conditioning::isotropic;
  double condition = 1.0;    // lambda_max / lambda_min of the population Gram
  // Orthonormalize latent blocks so empirical and planted structure agree
  // exactly; needs n >= k + p1 + p2, otherwise i.i.d. latents are used.
  bool exact = true;
};

struct PlantedInstance {
  DataMatrix x;
  DataMatrix y;
  CcaModel planted;  // rank k, exact for the data when noise == 0 && exact
  PlantedParams params;
  std::uint64_t seed = 0;
};

namespace detail {

inline Matrix random_orthogonal(Index p, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(p, p, rng));
  Matrix q = qr.householderQ() * Matrix::Identity(p, p);
  // Fix column signs so the distribution is Haar and the result deterministic.
  const Vector d = qr.matrixQR().diagonal();
  for (Index j = 0; j < p; ++j)
    if (d(j) < 0.0) q.col(j) *= -1.0;
  return q;
}

inline Matrix mixing_matrix(Index p, const PlantedParams& prm, std::mt19937_64& rng) {
  if (prm.profile == Conditioning::isotropic || p == 1) return Matrix::Identity(p, p);
  // Singular values of A span sqrt(condition), centered geometrically on 1.
  Vector s(p);
  const double half = 0.25 * std::log(prm.condition);
  for (Index j = 0; j < p; ++j) {
    const double frac = static_cast<double>(j) / static_cast<double>(p - 1);
    s(j) = std::exp(half - 2.0 * half * frac);
  }
  const Matrix q1 = random_orthogonal(p, rng);
  const Matrix q2 = random_orthogonal(p, rng);
  return q1 * s.asDiagonal() * q2;
}

}  // namespace detail

inline void validate(const PlantedParams& prm) {
  const auto k = static_cast<Index>(prm.correlations.size());
  if (prm.n < 1 || prm.p1 < 1 || prm.p2 < 1) throw InputError("planted dimensions must be >= 1");
  if (k < 1 || k > std::min(prm.p1, prm.p2)) throw InputError("need 1 <= k <= min(p1, p2) planted correlations");
  for (Index i = 0; i < k; ++i) {
    const double r = prm.correlations[static_cast<std::size_t>(i)];
    if (!(r > 0.0 && r < 1.0)) throw InputError("planted correlations must lie in (0, 1)");
    if (i > 0 && !(r < prm.correlations[static_cast<std::size_t>(i - 1)])) {
      throw InputError("planted correlations must be strictly decreasing");
    }
  }
  if (!(prm.noise >= 0.0) || !std::isfinite(prm.noise)) throw InputError("noise scale must be >= 0");
  if (!(prm.condition >= 1.0) || !std::isfinite(prm.condition)) throw InputError("condition must be >= 1");
}

inline PlantedInstance generate_planted(const PlantedParams& prm, std::uint64_t seed) {
  validate(prm);
  const auto k = static_cast<Index>(prm.correlations.size());
  const Index n = prm.n;
  std::mt19937_64 rng(seed);

  const Index width = k + prm.p1 + prm.p2;
  Matrix latent = gaussian_matrix(n, width, rng);
  if (prm.exact && n >= width) {
    latent = orthonormal_basis(latent) * std::sqrt(static_cast<double>(n));
  }
  const auto z = latent.leftCols(k);
  const auto ex = latent.middleCols(k, prm.p1);
  const auto ey = latent.rightCols(prm.p2);

  Matrix xw = ex;
  Matrix yw = ey;
  for (Index i = 0; i < k; ++i) {
    const double r = prm.correlations[static_cast<std::size_t>(i)];
    xw.col(i) = std::sqrt(r) * z.col(i) + std::sqrt(1.0 - r) * ex.col(i);
    yw.col(i) = std::sqrt(r) * z.col(i) + std::sqrt(1.0 - r) * ey.col(i);
  }

  const Matrix ax = detail::mixing_matrix(prm.p1, prm, rng);
  const Matrix ay = detail::mixing_matrix(prm.p2, prm, rng);
  Matrix x = xw * ax;
  Matrix y = yw * ay;
  if (prm.noise > 0.0) {
    x += prm.noise * gaussian_matrix(n, prm.p1, rng);
    y += prm.noise * gaussian_matrix(n, prm.p2, rng);
  }

  CcaModel planted;
  planted.phi = ax.partialPivLu().solve(Matrix::Identity(prm.p1, k));
  planted.psi = ay.partialPivLu().solve(Matrix::Identity(prm.p2, k));
  planted.lambda = Eigen::Map<const Vector>(prm.correlations.data(), k);
  fix_signs(planted);

  return {DataMatrix(std::move(x)), DataMatrix(std::move(y)), std::move(planted), prm, seed};
}

// Bounds L1 >= max(lambda_max(S_x), lambda_max(S_y)) and
// L2 >= 1 / min(lambda_min(S_x), lambda_min(S_y)), both clipped below at 1.
struct ConditioningBounds {
  double l1 = 1.0;
  double l2 = 1.0;
};

inline ConditioningBounds measure_conditioning(const DataMatrix& x, const DataMatrix& y, double lambda = 0.0) {
  const SymEigen ex = sym_eigen(gram(x, lambda).values);
  const SymEigen ey = sym_eigen(gram(y, lambda).values);
  const double lo = std::min(ex.min(), ey.min());
  if (!(lo > 0.0)) throw NumericError("Gram matrix is singular; conditioning undefined");
  return {std::max({1.0, ex.max(), ey.max()}), std::max(1.0, 1.0 / lo)};
}

}  // namespace scca
