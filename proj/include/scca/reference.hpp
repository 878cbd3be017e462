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

// Exact and classical CCA solvers: the spectral oracle, the QR-whitening
// route, alternating least squares and the (non-convergent) projected
// gradient scheme kept as a negative control.

#pragma once

#include <string>
#include <utility>

#include "scca/matrix_core.hpp"
#include "scca/model.hpp"

namespace scca {

namespace detail {

// Eigenvalues at or below this fraction of the largest one make an
// unregularized Gram matrix count as singular.
inline constexpr double kSingularRatio = 1e-12;

inline void check_rank(const DataMatrix& x, const DataMatrix& y, Index k) {
  if (x.rows() != y.rows()) {
    throw DimensionError("X and Y must have the same number of rows (" + std::to_string(x.rows()) + " vs " +
                         std::to_string(y.rows()) + ")");
  }
  if (k < 1 || k > std::min(x.cols(), y.cols())) {
    throw DimensionError("rank " + std::to_string(k) + " must lie in [1, min(p1, p2)] = [1, " +
                         std::to_string(std::min(x.cols(), y.cols())) + "]");
  }
}

inline SymEigen checked_gram_eigen(const GramMatrix& s, const char* view) {
  SymEigen e = sym_eigen(s.values);
  if (e.max() <= 0.0 || e.min() <= kSingularRatio * e.max()) {
    throw NumericError(std::string("Gram matrix of ") + view +
                       " is singular; use a regularization lambda > 0");
  }
  return e;
}

}  // namespace detail

// Whitening route: S_x^{-1/2} S_xy S_y^{-1/2} = U D V^T, phi = S_x^{-1/2} U,
// psi = S_y^{-1/2} V, lambda = D. Forms both Gram matrices densely; this is
// the ground-truth oracle and is meant for moderate p.
inline CcaModel spectral_cca(const DataMatrix& x, const DataMatrix& y, Index k, double lambda = 0.0) {
  detail::check_rank(x, y, k);
  const GramMatrix sx = gram(x, lambda);
  const GramMatrix sy = gram(y, lambda);
  const SymEigen ex = detail::checked_gram_eigen(sx, "X");
  const SymEigen ey = detail::checked_gram_eigen(sy, "Y");
  const Matrix wx = inv_sqrt_from_eigen(ex, ex.min());
  const Matrix wy = inv_sqrt_from_eigen(ey, ey.min());
  const Matrix whitened = wx * cross_covariance(x, y).values * wy;

  Eigen::JacobiSVD<Matrix> svd(whitened, Eigen::ComputeThinU | Eigen::ComputeThinV);
  CcaModel m{wx * svd.matrixU().leftCols(k), wy * svd.matrixV().leftCols(k), svd.singularValues().head(k),
             true};
  fix_signs(m);
  return m;
}

// QR-whitening route: X = Q_x R_x, Y = Q_y R_y, SVD of Q_x^T Q_y. With
// lambda > 0 the factorization runs on [X; sqrt(n lambda) I] so that
// R^T R / n equals the regularized Gram. Dense inputs only.
inline CcaModel qr_cca(const DataMatrix& x, const DataMatrix& y, Index k, double lambda = 0.0) {
  detail::check_rank(x, y, k);
  if (x.is_sparse() || y.is_sparse()) throw InputError("qr_cca requires dense inputs");
  if (!(lambda >= 0.0)) throw InputError("regularization must be >= 0");
  const Index n = x.rows();

  struct Factor {
    Matrix q_top;  // first n rows of Q
    Matrix r;
  };
  auto factor = [&](const Matrix& a, const char* view) {
    const Index p = a.cols();
    if (lambda == 0.0 && n < p) {
      throw NumericError(std::string("view ") + view + " has more columns than rows; use lambda > 0");
    }
    Matrix aug = a;
    if (lambda > 0.0) {
      aug.resize(n + p, p);
      aug.topRows(n) = a;
      aug.bottomRows(p) = std::sqrt(static_cast<double>(n) * lambda) * Matrix::Identity(p, p);
    }
    Eigen::HouseholderQR<Matrix> qr(aug);
    Matrix r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    const Vector diag = r.diagonal().cwiseAbs();
    if (diag.maxCoeff() == 0.0 || diag.minCoeff() <= std::sqrt(detail::kSingularRatio) * diag.maxCoeff()) {
      throw NumericError(std::string("view ") + view + " is rank deficient; use lambda > 0");
    }
    Matrix q = qr.householderQ() * Matrix::Identity(aug.rows(), p);
    return Factor{q.topRows(n), std::move(r)};
  };

  const Factor fx = factor(x.dense(), "X");
  const Factor fy = factor(y.dense(), "Y");
  Eigen::JacobiSVD<Matrix> svd(fx.q_top.transpose() * fy.q_top, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double root_n = std::sqrt(static_cast<double>(n));
  CcaModel m{root_n * fx.r.triangularView<Eigen::Upper>().solve(svd.matrixU().leftCols(k)),
             root_n * fy.r.triangularView<Eigen::Upper>().solve(svd.matrixV().leftCols(k)),
             svd.singularValues().head(k), true};
  fix_signs(m);
  return m;
}

struct AlsOptions {
  int max_iters = 1000;
  double tol = 1e-8;
  double lambda = 0.0;
};

struct AlsResult {
  CcaModel model;  // rank 1
  int iterations = 0;
  bool converged = false;
};

// Alternating least squares for the leading pair:
//   phi <- S_x^{-1} S_xy psi / |.|_x,  psi <- S_y^{-1} S_yx phi / |.|_y,
// both updates reading the previous iterate. Stops when the induced-norm
// change of both vectors drops below tol. The initial pair is normalized.
inline AlsResult als_cca(const DataMatrix& x, const DataMatrix& y, const Vector& phi0, const Vector& psi0,
                         const AlsOptions& opt = {}) {
  detail::check_rank(x, y, 1);
  if (phi0.size() != x.cols() || psi0.size() != y.cols()) throw DimensionError("initial vectors do not match X, Y");
  const GramMatrix sx = gram(x, opt.lambda);
  const GramMatrix sy = gram(y, opt.lambda);
  detail::checked_gram_eigen(sx, "X");
  detail::checked_gram_eigen(sy, "Y");
  const Eigen::LLT<Matrix> solve_x(sx.values);
  const Eigen::LLT<Matrix> solve_y(sy.values);
  const Matrix sxy = cross_covariance(x, y).values;

  const double nx0 = induced_norm(sx, phi0);
  const double ny0 = induced_norm(sy, psi0);
  if (nx0 == 0.0 || ny0 == 0.0) throw InputError("initial vectors must be nonzero");
  Vector phi = phi0 / nx0;
  Vector psi = psi0 / ny0;

  // Correlation magnitude below which the views are treated as uncorrelated:
  // |S_x^{-1} S_xy psi|_x is the captured correlation for unit psi.
  constexpr double kZeroCorrelation = 1e-12;

  AlsResult result;
  for (int t = 1; t <= opt.max_iters; ++t) {
    Vector next_phi = solve_x.solve(sxy * psi);
    Vector next_psi = solve_y.solve(sxy.transpose() * phi);
    const double a = induced_norm(sx, next_phi);
    const double b = induced_norm(sy, next_psi);
    result.iterations = t;
    if (a <= kZeroCorrelation || b <= kZeroCorrelation) {
      result.converged = true;
      break;
    }
    next_phi /= a;
    next_psi /= b;
    const double change = induced_norm(sx, next_phi - phi) + induced_norm(sy, next_psi - psi);
    phi = std::move(next_phi);
    psi = std::move(next_psi);
    if (change < opt.tol) {
      result.converged = true;
      break;
    }
  }
  const double corr = phi.dot(sxy * psi);
  if (corr < 0.0) psi = -psi;
  result.model = CcaModel{phi, psi, Vector::Constant(1, std::abs(corr)), true};
  fix_signs(result.model);
  return result;
}

// One step of the projected gradient scheme
//   phi' = normalize_x(phi - eta1 (S_x phi - S_xy psi)),
//   psi' = normalize_y(psi - eta2 (S_y psi - S_yx phi)).
// The canonical pair is generally NOT a fixed point of this map; it exists
// as a negative-control fixture.
inline std::pair<Vector, Vector> naive_gradient_step(const Vector& phi, const Vector& psi, double eta1,
                                                     double eta2, const DataMatrix& x, const DataMatrix& y,
                                                     double lambda = 0.0) {
  detail::check_rank(x, y, 1);
  if (phi.size() != x.cols() || psi.size() != y.cols()) throw DimensionError("vectors do not match X, Y");
  const double n = static_cast<double>(x.rows());
  const Vector xphi = x.times(phi).col(0);
  const Vector ypsi = y.times(psi).col(0);
  const Vector r = xphi - ypsi;
  Vector next_phi = phi - eta1 * (x.transpose_times(r).col(0) / n + lambda * phi);
  Vector next_psi = psi - eta2 * (y.transpose_times(-r).col(0) / n + lambda * psi);
  const double a = induced_norm(x, lambda, next_phi);
  const double b = induced_norm(y, lambda, next_psi);
  if (a == 0.0 || b == 0.0) throw DegenerateIterateError("naive gradient step produced a zero vector");
  return {next_phi / a, next_psi / b};
}

}  // namespace scca
