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

#include <gtest/gtest.h>

#include <cmath>

#include "scca/errors.hpp"
#include "scca/matrix_core.hpp"
#include "test_util.hpp"

namespace scca {
namespace {

using testing::loop_cross;
using testing::random_matrix;
using testing::rel_diff;
using testing::sparsify;

TEST(DataMatrixTest, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(DataMatrix(Matrix(0, 3)), DimensionError);
  Matrix m = Matrix::Ones(2, 2);
  m(1, 0) = std::nan("");
  EXPECT_THROW(DataMatrix{m}, DataError);
  m(1, 0) = INFINITY;
  EXPECT_THROW(DataMatrix{m}, DataError);
}

TEST(DataMatrixTest, TripletsValidated) {
  EXPECT_THROW(DataMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), DimensionError);
  EXPECT_THROW(DataMatrix::from_triplets(2, 2, {{0, -1, 1.0}}), DimensionError);
  EXPECT_THROW(DataMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {0, 1, 2.0}}), DataError);
  const DataMatrix s = DataMatrix::from_triplets(3, 2, {{0, 1, 1.0}, {2, 0, -2.0}});
  EXPECT_TRUE(s.is_sparse());
  EXPECT_EQ(s.nnz(), 2);
  EXPECT_EQ(s.rows(), 3);
  EXPECT_EQ(s.cols(), 2);
}

TEST(DataMatrixTest, StorageAccessorsCheckKind) {
  const DataMatrix d(Matrix::Ones(2, 2));
  EXPECT_THROW(d.sparse(), InputError);
  const DataMatrix s = DataMatrix::from_triplets(2, 2, {{0, 0, 1.0}});
  EXPECT_THROW(s.dense(), InputError);
}

TEST(DataMatrixTest, SparseAndDenseProductsAgree) {
  const Matrix m = random_matrix(40, 12, 1);
  const DataMatrix s = sparsify(m, 0.3, 2);
  const DataMatrix d(s.to_dense());
  const Matrix v = random_matrix(12, 3, 3);
  const Matrix w = random_matrix(40, 4, 4);
  EXPECT_LE(rel_diff(s.times(v), d.times(v)), 1e-12);
  EXPECT_LE(rel_diff(s.transpose_times(w), d.transpose_times(w)), 1e-12);
  EXPECT_THROW(s.times(Matrix::Ones(11, 1)), DimensionError);
  EXPECT_THROW(s.transpose_times(Matrix::Ones(39, 1)), DimensionError);
}

TEST(DataMatrixTest, SelectRowsKeepsOrderAndRepeats) {
  const Matrix m = random_matrix(6, 3, 5);
  const std::vector<Index> idx{4, 0, 4};
  const DataMatrix d = DataMatrix(m).select_rows(idx);
  const DataMatrix s = sparsify(m, 1.0, 6).select_rows(idx);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    EXPECT_EQ(d.dense().row(r), m.row(idx[r]));
    EXPECT_EQ(s.to_dense().row(r), m.row(idx[r]));
  }
  const std::vector<Index> bad{6};
  EXPECT_THROW(DataMatrix(m).select_rows(bad), DimensionError);
}

TEST(GramTest, IdentityInput) {
  const GramMatrix g = gram(DataMatrix(Matrix::Identity(3, 3)), 0.0);
  EXPECT_LE((g.values - Matrix::Identity(3, 3) / 3.0).norm(), 1e-15);
}

TEST(GramTest, OnesColumnWithRidge) {
  const GramMatrix g = gram(DataMatrix(Matrix::Ones(4, 1)), 0.1);
  ASSERT_EQ(g.dim(), 1);
  EXPECT_NEAR(g.values(0, 0), 1.1, 1e-15);
  EXPECT_DOUBLE_EQ(g.lambda, 0.1);
}

TEST(GramTest, MatchesDoubleLoop) {
  Matrix x(5, 3);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 3; ++j) x(i, j) = static_cast<double>(i + j);
  const GramMatrix g = gram(DataMatrix(x), 0.0);
  EXPECT_LE(rel_diff(g.values, loop_cross(x, x)), 1e-12);
}

TEST(GramTest, RejectsBadLambda) {
  const DataMatrix x(Matrix::Ones(2, 2));
  EXPECT_THROW(gram(x, -1.0), InputError);
  EXPECT_THROW(gram(x, std::nan("")), InputError);
}

TEST(GramTest, RidgeIsPositiveDefiniteAndSymmetric) {
  const DataMatrix x(random_matrix(4, 10, 7));  // rank deficient
  const GramMatrix g = gram(x, 0.25);
  EXPECT_EQ((g.values - g.values.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GE(sym_eigen(g.values).min(), 0.25 - 1e-10);
}

TEST(GramTest, PsdForAnyFiniteInput) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DataMatrix x(random_matrix(6, 9, seed) * 1e3);
    EXPECT_GE(sym_eigen(gram(x, 0.0).values).min(), -1e-10 * std::max(1.0, sym_eigen(gram(x, 0.0).values).max()));
  }
}

TEST(GramTest, SparseAndDenseAgree) {
  const Matrix m = random_matrix(30, 8, 8);
  const DataMatrix s = sparsify(m, 0.4, 9);
  const DataMatrix d(s.to_dense());
  const DataMatrix ys = sparsify(random_matrix(30, 5, 10), 0.5, 11);
  EXPECT_LE((gram(s, 0.0).values - gram(d, 0.0).values).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((cross_covariance(s, ys).values - cross_covariance(d, DataMatrix(ys.to_dense())).values)
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
  EXPECT_LE((cross_covariance(d, ys).values - cross_covariance(s, DataMatrix(ys.to_dense())).values)
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(CrossCovarianceTest, IdentityPair) {
  const DataMatrix i2(Matrix::Identity(2, 2));
  EXPECT_LE((cross_covariance(i2, i2).values - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(CrossCovarianceTest, OrthogonalColumnSpacesGiveZero) {
  const Matrix q = orthonormal_basis(random_matrix(10, 5, 12));
  const DataMatrix x(Matrix(q.leftCols(2)));
  const DataMatrix y(Matrix(q.rightCols(3)));
  EXPECT_LE(cross_covariance(x, y).values.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CrossCovarianceTest, MatchesDoubleLoop) {
  const Matrix x = random_matrix(6, 2, 13);
  const Matrix y = random_matrix(6, 3, 14);
  EXPECT_LE(rel_diff(cross_covariance(DataMatrix(x), DataMatrix(y)).values, loop_cross(x, y)), 1e-12);
}

TEST(CrossCovarianceTest, RowMismatch) {
  EXPECT_THROW(cross_covariance(DataMatrix(Matrix::Ones(3, 2)), DataMatrix(Matrix::Ones(4, 2))), DimensionError);
}

TEST(InducedNormTest, Examples) {
  const GramMatrix s{Matrix::Identity(2, 2), 0.0};
  EXPECT_DOUBLE_EQ(induced_norm(s, Vector(Eigen::Vector2d(3, 4))), 5.0);
  EXPECT_DOUBLE_EQ(induced_norm(s, Vector::Zero(2)), 0.0);
  EXPECT_THROW(induced_norm(s, Vector::Zero(3)), DimensionError);
}

TEST(InducedNormTest, MatchesDirectProduct) {
  const Matrix x = random_matrix(8, 3, 15);
  const Vector u = random_matrix(3, 1, 16).col(0);
  const double direct = (x * u).norm() / std::sqrt(8.0);
  EXPECT_NEAR(induced_norm(gram(DataMatrix(x), 0.0), u), direct, 1e-12 * direct);
  EXPECT_NEAR(induced_norm(DataMatrix(x), 0.0, u), direct, 1e-12 * direct);
}

TEST(InducedNormTest, NonPsdRejectedTinyNegativeClamped) {
  GramMatrix s{Matrix::Identity(1, 1) * -1.0, 0.0};
  EXPECT_THROW(induced_norm(s, Vector::Ones(1)), NumericError);
  s.values(0, 0) = -1e-13;
  EXPECT_EQ(induced_norm(s, Vector::Ones(1)), 0.0);
}

TEST(InducedNormTest, SumIdentity) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix x = random_matrix(9, 4, 100 + seed);
    const Matrix y = random_matrix(9, 3, 200 + seed);
    const Vector u = random_matrix(4, 1, 300 + seed).col(0);
    const Vector v = random_matrix(3, 1, 400 + seed).col(0);
    const double lhs = std::pow(induced_norm(gram(DataMatrix(x), 0.0), u), 2) +
                       std::pow(induced_norm(gram(DataMatrix(y), 0.0), v), 2);
    const double rhs = ((x * u).squaredNorm() + (y * v).squaredNorm()) / 9.0;
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(SymInvSqrtTest, ScaledIdentity) {
  EXPECT_LE((sym_inv_sqrt(4.0 * Matrix::Identity(2, 2), 1e-12) - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(SymInvSqrtTest, FloorEngages) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = 1e-20;
  const Matrix r = sym_inv_sqrt(m, 1e-8);
  EXPECT_NEAR(r(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(r(1, 1), 1e4, 1e-8);
  EXPECT_NEAR(r(0, 1), 0.0, 1e-12);
}

TEST(SymInvSqrtTest, ReconstructionSymmetryCommutation) {
  const Matrix a = random_matrix(8, 5, 17);
  const Matrix m = a.transpose() * a;
  const Matrix r = sym_inv_sqrt(m, 1e-12);
  EXPECT_LE((r * m * r - Matrix::Identity(5, 5)).norm(), 1e-8);
  EXPECT_LE((r - r.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((r * m - m * r).norm(), 1e-8 * m.norm());
}

TEST(SymInvSqrtTest, Errors) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = 0.5;
  EXPECT_THROW(sym_inv_sqrt(m, 1e-8), InputError);
  EXPECT_THROW(sym_inv_sqrt(Matrix::Identity(2, 2), 0.0), InputError);
  EXPECT_THROW(sym_inv_sqrt(Matrix::Identity(2, 3), 1e-8), DimensionError);
}

TEST(SymInvSqrtTest, DefaultFloorIsRelative) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1e4;
  const Matrix r = sym_inv_sqrt(m);
  EXPECT_NEAR(r(1, 1), 1.0 / std::sqrt(1e-6), 1e-6);
}

TEST(RandomizedSvdTest, KnownDiagonal) {
  Matrix a = Matrix::Zero(3, 3);
  a.diagonal() << 3, 2, 1;
  const SvdResult r = randomized_svd(a, 2);
  EXPECT_NEAR(r.d(0), 3.0, 1e-12);
  EXPECT_NEAR(r.d(1), 2.0, 1e-12);
  const double err = (a - r.u * r.d.asDiagonal() * r.v.transpose()).norm() / a.norm();
  EXPECT_NEAR(err, 1.0 / std::sqrt(14.0), 1e-12);
}

TEST(RandomizedSvdTest, ExactLowRankReconstruction) {
  const Matrix a = random_matrix(30, 2, 18) * random_matrix(2, 25, 19);
  const SvdResult r = randomized_svd(a, 2, {0, 2, 5});
  EXPECT_LE((a - r.u * r.d.asDiagonal() * r.v.transpose()).norm() / a.norm(), 1e-8);
  EXPECT_LE((r.u.transpose() * r.u - Matrix::Identity(2, 2)).norm(), 1e-8);
  EXPECT_LE((r.v.transpose() * r.v - Matrix::Identity(2, 2)).norm(), 1e-8);
}

TEST(RandomizedSvdTest, MatchesDenseSvdOracle) {
  // Random singular vectors with a geometrically decaying spectrum.
  const Matrix u = orthonormal_basis(random_matrix(50, 40, 20));
  const Matrix v = orthonormal_basis(random_matrix(40, 40, 22));
  Vector d(40);
  for (Index i = 0; i < 40; ++i) d(i) = 10.0 * std::pow(0.6, static_cast<double>(i));
  const Matrix a = u * d.asDiagonal() * v.transpose();
  RandomizedSvdOptions opt;
  opt.power_iters = 3;
  opt.seed = 21;
  const SvdResult r = randomized_svd(a, 5, opt);
  Eigen::JacobiSVD<Matrix> oracle(a);
  for (Index i = 0; i < 5; ++i) EXPECT_NEAR(r.d(i), oracle.singularValues()(i), 1e-6) << "index " << i;
  for (Index i = 1; i < 5; ++i) EXPECT_GE(r.d(i - 1), r.d(i));
}

TEST(RandomizedSvdTest, FlatSpectrumIsApproximate) {
  // A Gaussian matrix has no spectral gap; the sketch is accurate only to a
  // few digits but never overestimates.
  const Matrix a = random_matrix(50, 40, 20);
  RandomizedSvdOptions opt;
  opt.power_iters = 3;
  opt.seed = 21;
  const SvdResult r = randomized_svd(a, 5, opt);
  Eigen::JacobiSVD<Matrix> oracle(a);
  for (Index i = 0; i < 5; ++i) {
    EXPECT_LE(r.d(i), oracle.singularValues()(i) + 1e-10);
    EXPECT_NEAR(r.d(i), oracle.singularValues()(i), 0.02 * oracle.singularValues()(i)) << "index " << i;
  }
}

TEST(RandomizedSvdTest, DeterministicAndValidated) {
  const Matrix a = random_matrix(20, 15, 22);
  const SvdResult r1 = randomized_svd(a, 3, {5, 2, 9});
  const SvdResult r2 = randomized_svd(a, 3, {5, 2, 9});
  EXPECT_EQ(r1.u, r2.u);
  EXPECT_EQ(r1.d, r2.d);
  EXPECT_THROW(randomized_svd(a, 16), DimensionError);
  EXPECT_THROW(randomized_svd(a, 0), DimensionError);
  EXPECT_THROW(randomized_svd(a, 2, {-1, 2, 0}), InputError);
}

TEST(TopEigenvalueTest, MatchesDense) {
  const DataMatrix x(random_matrix(40, 6, 23));
  const double dense = sym_eigen(gram(x, 0.3).values).max();
  EXPECT_NEAR(estimate_top_eigenvalue(x, 0.3, 1, 1000, 1e-14), dense, 1e-6 * dense);
}

}  // namespace
}  // namespace scca
