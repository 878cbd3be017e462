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

// Approximate-whitening heuristics used as comparison points:
//   NW-CCA  - top-k SVD of the unwhitened S_xy,
//   DW-CCA  - SVD after scaling by diag(S)^{-1/2},
//   PCA-CCA - exact CCA inside the leading m principal directions.
// NW and DW return models flagged whitened == false.

#pragma once

#include <cstdint>
#include <string>

#include "scca/matrix_core.hpp"
#include "scca/model.hpp"
#include "scca/reference.hpp"

namespace scca {

struct BaselineOptions {
  RandomizedSvdOptions svd;
  double lambda = 0.0;
};

// lambda holds the singular values of S_xy (covariances, not correlations).
inline CcaModel nw_cca(const DataMatrix& x, const DataMatrix& y, Index k, const BaselineOptions& opt = {}) {
  detail::check_rank(x, y, k);
  const SvdResult svd = randomized_svd(cross_covariance(x, y).values, k, opt.svd);
  CcaModel m{svd.u, svd.v, svd.d, false};
  fix_signs(m);
  return m;
}

// lambda holds the singular values of the diagonally scaled S_xy.
inline CcaModel dw_cca(const DataMatrix& x, const DataMatrix& y, Index k, const BaselineOptions& opt = {}) {
  detail::check_rank(x, y, k);
  auto inv_root_diag = [&](const DataMatrix& v, const char* view) {
    // Column second moments from stored entries: diag(X^T X)/n.
    Vector d = Vector::Zero(v.cols());
    if (v.is_sparse()) {
      const auto& s = v.sparse();
      for (Index r = 0; r < s.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(s, r); it; ++it) d(it.col()) += it.value() * it.value();
    } else {
      d = v.dense().colwise().squaredNorm().transpose();
    }
    d = d / static_cast<double>(v.rows()) + Vector::Constant(v.cols(), opt.lambda);
    for (Index j = 0; j < d.size(); ++j) {
      if (!(d(j) > 0.0)) {
        throw DataError(std::string("column ") + std::to_string(j) + " of " + view +
                        " has zero variance; use lambda > 0");
      }
    }
    return Vector(d.cwiseSqrt().cwiseInverse());
  };
  const Vector wx = inv_root_diag(x, "X");
  const Vector wy = inv_root_diag(y, "Y");
  const Matrix scaled = wx.asDiagonal() * cross_covariance(x, y).values * wy.asDiagonal();
  const SvdResult svd = randomized_svd(scaled, k, opt.svd);
  CcaModel m{wx.asDiagonal() * svd.u, wy.asDiagonal() * svd.v, svd.d, false};
  fix_signs(m);
  return m;
}

// Default retained dimension for PCA-CCA.
inline Index default_pca_dim(Index k) { return 4 * k; }

struct PcaProjection {
  Matrix basis;  // p x m, orthonormal columns
  Index dim() const { return basis.cols(); }
};

// Leading m right singular vectors of the (uncentered) data matrix.
inline PcaProjection pca_projection(const DataMatrix& x, Index m, const RandomizedSvdOptions& opt = {}) {
  if (m < 1 || m > std::min(x.rows(), x.cols())) throw DimensionError("PCA dimension out of range");
  SvdResult svd = randomized_svd(x, m, opt);
  return {std::move(svd.v)};
}

// Projects each view onto its leading m principal directions, solves exact
// CCA on the m-dimensional pair and maps the canonical vectors back through
// the PCA bases. m = p reproduces spectral_cca.
inline CcaModel pca_cca(const DataMatrix& x, const DataMatrix& y, Index k, Index m, const BaselineOptions& opt = {}) {
  detail::check_rank(x, y, k);
  if (m < k || m > std::min({x.cols(), y.cols(), x.rows()})) {
    throw DimensionError("PCA dimension m = " + std::to_string(m) + " must lie in [k, min(p1, p2, n)]");
  }
  RandomizedSvdOptions sy = opt.svd;
  sy.seed = opt.svd.seed + 1;
  const PcaProjection px = pca_projection(x, m, opt.svd);
  const PcaProjection py = pca_projection(y, m, sy);
  const CcaModel inner = spectral_cca(DataMatrix(x.times(px.basis)), DataMatrix(y.times(py.basis)), k, opt.lambda);
  CcaModel out{px.basis * inner.phi, py.basis * inner.psi, inner.lambda, true};
  fix_signs(out);
  return out;
}

}  // namespace scca
