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

// Kernel CCA through AppGrad: with Gram matrices K_X, K_Y in place of the
// data matrices, the rank-k iteration solves for dual coefficients W with
// W^T K K W / n = I.

#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "scca/appgrad.hpp"
#include "scca/matrix_core.hpp"
#include "scca/metrics.hpp"

namespace scca {

enum class KernelKind { linear, rbf, polynomial };

struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  double bandwidth = 1.0;  // rbf: exp(-|a - b|^2 / (2 sigma^2))
  int degree = 2;          // polynomial: (a.b + offset)^degree
  double offset = 1.0;
};

inline void validate(const KernelSpec& s) {
  if (s.kind == KernelKind::rbf && !(s.bandwidth > 0.0)) throw InputError("rbf bandwidth must be > 0");
  if (s.kind == KernelKind::polynomial && (s.degree < 1 || !(s.offset >= 0.0))) {
    throw InputError("polynomial kernel needs degree >= 1 and offset >= 0");
  }
}

struct KernelGram {
  Matrix values;  // n x n symmetric PSD
  KernelSpec spec;
};

inline KernelGram kernel_gram(const DataMatrix& x, const KernelSpec& spec) {
  validate(spec);
  const Matrix d = x.to_dense();
  Matrix k = d * d.transpose();
  if (spec.kind == KernelKind::rbf) {
    const Vector sq = d.rowwise().squaredNorm();
    const double scale = 1.0 / (2.0 * spec.bandwidth * spec.bandwidth);
    for (Index j = 0; j < k.cols(); ++j)
      for (Index i = 0; i < k.rows(); ++i) k(i, j) = std::exp(-std::max(sq(i) + sq(j) - 2.0 * k(i, j), 0.0) * scale);
  } else if (spec.kind == KernelKind::polynomial) {
    k = (k.array() + spec.offset).pow(spec.degree).matrix();
  }
  return {symmetrized(k), spec};
}

// H K H with H = I - 11^T/n. Not applied by kernel_cca unless requested.
inline Matrix center_kernel(const Matrix& k) {
  const Vector row_mean = k.rowwise().mean();
  const double total = k.mean();
  Matrix c = k;
  c.colwise() -= row_mean;
  c.rowwise() -= row_mean.transpose();
  c.array() += total;
  return c;
}

struct KernelCcaOptions {
  std::optional<double> lambda;  // default 1e-6 * trace(K) / n per view
  AppGradOptions solver;         // k, lambda and eta are overridden/derived
  bool center = false;
};

struct KernelCcaResult {
  Matrix w_x;  // n x k
  Matrix w_y;
  Vector lambda;
  RunReport report;
};

inline KernelCcaResult kernel_cca(const KernelGram& kx, const KernelGram& ky, Index k, const KernelCcaOptions& opt = {}) {
  if (kx.values.rows() != ky.values.rows() || kx.values.rows() != kx.values.cols() ||
      ky.values.rows() != ky.values.cols()) {
    throw DimensionError("kernel Gram matrices must both be n x n over the same samples");
  }
  const double n = static_cast<double>(kx.values.rows());
  const DataMatrix gx(opt.center ? center_kernel(kx.values) : kx.values);
  const DataMatrix gy(opt.center ? center_kernel(ky.values) : ky.values);
  // A single ridge for both sides; the larger of the two trace-scaled defaults.
  const double lambda = opt.lambda ? *opt.lambda
                                   : 1e-6 * std::max(gx.dense().trace(), gy.dense().trace()) / n;

  AppGradOptions so = opt.solver;
  so.k = k;
  so.lambda = lambda;
  RunResult run = run_appgrad(gx, gy, so);

  // The ridge leaves W^T K K W / n = I - lambda W^T W; re-whiten without it.
  KernelCcaResult out;
  const Matrix wx = run.model.phi * sym_inv_sqrt(Matrix(gx.times(run.model.phi).transpose() * gx.times(run.model.phi) / n));
  const Matrix wy = run.model.psi * sym_inv_sqrt(Matrix(gy.times(run.model.psi).transpose() * gy.times(run.model.psi) / n));
  const Matrix c = gx.times(wx).transpose() * gy.times(wy) / n;
  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.w_x = wx * svd.matrixU();
  out.w_y = wy * svd.matrixV();
  out.lambda = svd.singularValues();
  out.report = std::move(run.report);
  out.report.solver = "kernel-appgrad";
  return out;
}

}  // namespace scca
