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

// Dense/sparse data matrices and the small dense kernels every solver needs:
// Gram and cross-covariance formation, induced norms, symmetric inverse
// square roots and a randomized truncated SVD.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "scca/errors.hpp"

namespace scca {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// Row-major so row subsets (minibatches) are cheap to extract.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

namespace detail {

inline bool all_finite(const double* data, Index count) {
  for (Index i = 0; i < count; ++i) {
    if (!std::isfinite(data[i])) return false;
  }
  return true;
}

inline std::string shape(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace detail

// An n x p observation matrix (rows are samples). Solvers only touch it
// through products X*V and X^T*W so sparse inputs never densify.
class DataMatrix {
 public:
  explicit DataMatrix(Matrix dense) : storage_(std::move(dense)) {
    const auto& m = std::get<Matrix>(storage_);
    check_shape(m.rows(), m.cols());
    if (!detail::all_finite(m.data(), m.size())) {
      throw DataError("data matrix contains non-finite values");
    }
  }

  explicit DataMatrix(SparseMatrix sparse) : storage_(std::move(sparse)) {
    auto& s = std::get<SparseMatrix>(storage_);
    check_shape(s.rows(), s.cols());
    s.makeCompressed();
    if (!detail::all_finite(s.valuePtr(), s.nonZeros())) {
      throw DataError("data matrix contains non-finite values");
    }
  }

  // Builds sparse storage from coordinates. Duplicate (row, col) pairs are
  // rejected rather than summed.
  static DataMatrix from_triplets(Index rows, Index cols,
                                  std::vector<Triplet> entries) {
    check_shape(rows, cols);
    for (const auto& t : entries) {
      if (t.row() < 0 || t.row() >= rows || t.col() < 0 || t.col() >= cols) {
        throw DimensionError("entry (" + std::to_string(t.row()) + ", " +
                             std::to_string(t.col()) + ") outside " +
                             detail::shape(rows, cols));
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
    });
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (entries[i].row() == entries[i - 1].row() &&
          entries[i].col() == entries[i - 1].col()) {
        throw DataError("duplicate entry at (" + std::to_string(entries[i].row()) +
                        ", " + std::to_string(entries[i].col()) + ")");
      }
    }
    SparseMatrix s(rows, cols);
    s.setFromTriplets(entries.begin(), entries.end());
    return DataMatrix(std::move(s));
  }

  Index rows() const {
    return std::visit([](const auto& m) { return Index(m.rows()); }, storage_);
  }
  Index cols() const {
    return std::visit([](const auto& m) { return Index(m.cols()); }, storage_);
  }
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(storage_); }

  // Stored entries; n*p for dense storage.
  Index nnz() const {
    if (is_sparse()) return sparse().nonZeros();
    return rows() * cols();
  }

  const Matrix& dense() const {
    if (is_sparse()) throw InputError("dense storage requested from a sparse matrix");
    return std::get<Matrix>(storage_);
  }
  const SparseMatrix& sparse() const {
    if (!is_sparse()) throw InputError("sparse storage requested from a dense matrix");
    return std::get<SparseMatrix>(storage_);
  }

  Matrix to_dense() const {
    if (is_sparse()) return Matrix(sparse());
    return dense();
  }

  // X * v
  Matrix times(const Eigen::Ref<const Matrix>& v) const {
    if (v.rows() != cols()) {
      throw DimensionError("X*V with X " + detail::shape(rows(), cols()) + " and V " +
                           detail::shape(v.rows(), v.cols()));
    }
    if (is_sparse()) return sparse() * v;
    return dense() * v;
  }

  // X^T * w
  Matrix transpose_times(const Eigen::Ref<const Matrix>& w) const {
    if (w.rows() != rows()) {
      throw DimensionError("X^T*W with X " + detail::shape(rows(), cols()) + " and W " +
                           detail::shape(w.rows(), w.cols()));
    }
    if (is_sparse()) return sparse().transpose() * w;
    return dense().transpose() * w;
  }

  // Rows in the given order; indices may repeat.
  DataMatrix select_rows(std::span<const Index> idx) const {
    if (idx.empty()) throw DimensionError("empty row selection");
    for (Index i : idx) {
      if (i < 0 || i >= rows()) throw DimensionError("row index out of range");
    }
    if (is_sparse()) {
      const auto& s = sparse();
      SparseMatrix out(static_cast<Index>(idx.size()), s.cols());
      Eigen::VectorXi counts(out.rows());
      for (std::size_t r = 0; r < idx.size(); ++r) {
        counts(static_cast<Index>(r)) =
            static_cast<int>(s.outerIndexPtr()[idx[r] + 1] - s.outerIndexPtr()[idx[r]]);
      }
      out.reserve(counts);
      for (std::size_t r = 0; r < idx.size(); ++r) {
        for (SparseMatrix::InnerIterator it(s, idx[r]); it; ++it) {
          out.insert(static_cast<Index>(r), it.col()) = it.value();
        }
      }
      return DataMatrix(std::move(out));
    }
    const auto& d = dense();
    Matrix out(static_cast<Index>(idx.size()), d.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Index>(r)) = d.row(idx[r]);
    return DataMatrix(std::move(out));
  }

  // Cost of one product with a width-k thin matrix.
  double product_flops(Index k) const { return 2.0 * static_cast<double>(nnz()) * static_cast<double>(k); }

 private:
  static void check_shape(Index r, Index c) {
    if (r < 1 || c < 1) throw DimensionError("data matrix must be at least 1x1, got " + detail::shape(r, c));
  }

  std::variant<Matrix, SparseMatrix> storage_;
};

// X^T Y for any storage combination, accumulated over stored entries only.
inline Matrix transpose_product(const DataMatrix& x, const DataMatrix& y) {
  if (x.rows() != y.rows()) {
    throw DimensionError("row counts differ: " + std::to_string(x.rows()) + " vs " +
                         std::to_string(y.rows()));
  }
  if (x.is_sparse() && y.is_sparse()) {
    SparseMatrix xt = x.sparse().transpose();
    return Matrix(xt * y.sparse());
  }
  if (x.is_sparse()) return x.sparse().transpose() * y.dense();
  if (y.is_sparse()) return (y.sparse().transpose() * x.dense()).transpose();
  return x.dense().transpose() * y.dense();
}

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// S = X^T X / n + lambda I, symmetrized.
struct GramMatrix {
  Matrix values;
  double lambda = 0.0;

  Index dim() const { return values.rows(); }
};

struct CrossCovariance {
  Matrix values;
};

inline GramMatrix gram(const DataMatrix& x, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("regularization must be finite and >= 0");
  Matrix s = transpose_product(x, x) / static_cast<double>(x.rows());
  s.diagonal().array() += lambda;
  return {symmetrized(s), lambda};
}

inline CrossCovariance cross_covariance(const DataMatrix& x, const DataMatrix& y) {
  return {transpose_product(x, y) / static_cast<double>(x.rows())};
}

// (u^T S u)^{1/2}; roundoff negatives down to -1e-12 are clamped.
inline double induced_norm(const GramMatrix& s, const Eigen::Ref<const Vector>& u) {
  if (u.size() != s.dim()) {
    throw DimensionError("vector of length " + std::to_string(u.size()) + " against Gram of dim " +
                         std::to_string(s.dim()));
  }
  const double r = u.dot(s.values * u);
  if (r < -1e-12) throw NumericError("negative quadratic form; Gram matrix is not PSD");
  return std::sqrt(std::max(r, 0.0));
}

// Same norm evaluated through products: (|Xu|^2/n + lambda |u|^2)^{1/2}.
inline double induced_norm(const DataMatrix& x, double lambda, const Eigen::Ref<const Vector>& u) {
  const Vector xu = x.times(u);
  return std::sqrt(xu.squaredNorm() / static_cast<double>(x.rows()) + lambda * u.squaredNorm());
}

// Symmetric eigendecomposition with eigenvalues in ascending order.
struct SymEigen {
  Vector values;
  Matrix vectors;

  double min() const { return values(0); }
  double max() const { return values(values.size() - 1); }
};

inline void check_symmetric(const Matrix& m, double tol, const char* what) {
  if (m.rows() != m.cols()) throw DimensionError(std::string(what) + " must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw InputError(std::string(what) + " is not symmetric");
  }
}

inline SymEigen sym_eigen(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  if (es.info() != Eigen::Success) throw NumericError("symmetric eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline Matrix inv_sqrt_from_eigen(const SymEigen& e, double floor) {
  const Vector scale = e.values.cwiseMax(floor).cwiseSqrt().cwiseInverse();
  return e.vectors * scale.asDiagonal() * e.vectors.transpose();
}

// Relative eigenvalue floor used when the caller does not give one.
inline constexpr double kDefaultRelativeFloor = 1e-10;

inline double default_floor(const SymEigen& e) {
  return std::max(kDefaultRelativeFloor * e.max(), std::numeric_limits<double>::min());
}

// U max(D, floor)^{-1/2} U^T for symmetric PSD M = U D U^T.
inline Matrix sym_inv_sqrt(const Matrix& m, double floor) {
  if (!(floor > 0.0)) throw InputError("eigenvalue floor must be positive");
  check_symmetric(m, 1e-10, "matrix");
  return inv_sqrt_from_eigen(sym_eigen(m), floor);
}

inline Matrix sym_inv_sqrt(const Matrix& m) {
  check_symmetric(m, 1e-10, "matrix");
  const SymEigen e = sym_eigen(m);
  return inv_sqrt_from_eigen(e, default_floor(e));
}

struct SvdResult {
  Matrix u;  // p1 x k, orthonormal columns
  Vector d;  // nonincreasing
  Matrix v;  // p2 x k, orthonormal columns
};

inline Matrix orthonormal_basis(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

inline Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  return g;
}

struct RandomizedSvdOptions {
  Index oversample = 10;
  int power_iters = 2;
  std::uint64_t seed = 0;
};

// Range-finder SVD: sketch with a Gaussian test matrix, refine with
// power iterations (re-orthonormalized each pass), then an exact SVD of the
// small projected matrix. The sketch width is capped at min(p1, p2).
inline SvdResult randomized_svd(const DataMatrix& a, Index k, const RandomizedSvdOptions& opt = {}) {
  const Index p1 = a.rows();
  const Index p2 = a.cols();
  if (k < 1 || k > std::min(p1, p2)) {
    throw DimensionError("rank " + std::to_string(k) + " invalid for " + detail::shape(p1, p2));
  }
  if (opt.oversample < 0 || opt.power_iters < 0) throw InputError("oversample and power_iters must be >= 0");
  const Index width = std::min(k + opt.oversample, std::min(p1, p2));

  std::mt19937_64 rng(opt.seed);
  Matrix q = orthonormal_basis(a.times(gaussian_matrix(p2, width, rng)));
  for (int it = 0; it < opt.power_iters; ++it) {
    const Matrix z = orthonormal_basis(a.transpose_times(q));
    q = orthonormal_basis(a.times(z));
  }
  const Matrix b = a.transpose_times(q).transpose();  // width x p2
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {q * svd.matrixU().leftCols(k), svd.singularValues().head(k), svd.matrixV().leftCols(k)};
}

inline SvdResult randomized_svd(const Matrix& a, Index k, const RandomizedSvdOptions& opt = {}) {
  return randomized_svd(DataMatrix(a), k, opt);
}

// Largest eigenvalue of X^T X / n + lambda I by power iteration on products.
inline double estimate_top_eigenvalue(const DataMatrix& x, double lambda, std::uint64_t seed,
                                      int max_iters = 100, double rel_tol = 1e-8) {
  std::mt19937_64 rng(seed);
  Vector v = gaussian_matrix(x.cols(), 1, rng).col(0);
  v.normalize();
  double est = 0.0;
  const double n = static_cast<double>(x.rows());
  for (int it = 0; it < max_iters; ++it) {
    Vector w = x.transpose_times(x.times(v)).col(0) / n + lambda * v;
    const double next = w.norm();
    if (next == 0.0) return lambda;
    v = w / next;
    if (std::abs(next - est) <= rel_tol * next) return next;
    est = next;
  }
  return est;
}

}  // namespace scca
