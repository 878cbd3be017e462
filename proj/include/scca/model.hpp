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

#pragma once

#include "scca/matrix_core.hpp"

namespace scca {

// Canonical vectors (columns of phi/psi) and their correlations.
//
// Whitened models satisfy phi^T S_x phi = I, psi^T S_y psi = I and
// phi^T S_xy psi = diag(lambda). Heuristic baselines produce directions that
// are not S-orthonormal; they carry whitened == false so nothing downstream
// asserts those invariants on them.
struct CcaModel {
  Matrix phi;
  Matrix psi;
  Vector lambda;
  bool whitened = true;

  Index rank() const { return lambda.size(); }
};

// Flips column pairs so the largest-magnitude entry of each phi column is
// nonnegative. psi follows phi so phi_i^T S_xy psi_i keeps its sign.
inline void fix_signs(CcaModel& m) {
  for (Index j = 0; j < m.phi.cols(); ++j) {
    Index arg = 0;
    m.phi.col(j).cwiseAbs().maxCoeff(&arg);
    if (m.phi(arg, j) < 0.0) {
      m.phi.col(j) *= -1.0;
      m.psi.col(j) *= -1.0;
    }
  }
}

inline CcaModel truncate(const CcaModel& m, Index k) {
  if (k < 1 || k > m.rank()) throw DimensionError("cannot truncate model of rank " + std::to_string(m.rank()) +
                                                  " to " + std::to_string(k));
  return {m.phi.leftCols(k), m.psi.leftCols(k), m.lambda.head(k), m.whitened};
}

// Re-whitens (phi, psi) on the given data, then rotates the pair so the
// captured correlation matrix (X phi)^T (Y psi) / n becomes diagonal with
// sorted entries, and keeps the leading k directions. Re-whitening matters
// for iterates normalized on a subsample.
inline CcaModel diagonalize_captured(const DataMatrix& x, const DataMatrix& y, const Matrix& phi,
                                     const Matrix& psi, Index k, double lambda = 0.0) {
  if (k < 1 || k > phi.cols()) throw DimensionError("requested rank exceeds the number of directions");
  const double n = static_cast<double>(x.rows());
  const Matrix xa = x.times(phi);
  const Matrix yb = y.times(psi);
  const Matrix wx = sym_inv_sqrt(symmetrized(xa.transpose() * xa / n + lambda * phi.transpose() * phi));
  const Matrix wy = sym_inv_sqrt(symmetrized(yb.transpose() * yb / n + lambda * psi.transpose() * psi));
  const Matrix c = wx * (xa.transpose() * yb / n) * wy;
  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  CcaModel m{phi * wx * svd.matrixU().leftCols(k), psi * wy * svd.matrixV().leftCols(k),
             svd.singularValues().head(k), true};
  fix_signs(m);
  return m;
}

}  // namespace scca
