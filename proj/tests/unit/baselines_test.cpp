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

#include "scca/appgrad.hpp"
#include "scca/baselines.hpp"
#include "scca/metrics.hpp"
#include "scca/reference.hpp"
#include "test_util.hpp"

namespace scca {
namespace {

using testing::planted;
using testing::random_matrix;

// Columns are orthonormal times sqrt(n), so S_x = S_y = I exactly, with some
// shared structure between the views.
std::pair<DataMatrix, DataMatrix> prewhitened_pair(Index n, Index p1, Index p2, std::uint64_t seed) {
  const auto inst = planted(n, p1, p2, {0.9, 0.7, 0.4}, seed);
  return {inst.x, inst.y};
}

TEST(NwCcaTest, PrewhitenedDataMatchesSpectral) {
  const auto [x, y] = prewhitened_pair(400, 8, 6, 1);
  ASSERT_LE((gram(x, 0.0).values - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-10);
  const CcaModel nw = nw_cca(x, y, 3);
  const CcaModel sp = spectral_cca(x, y, 3);
  EXPECT_FALSE(nw.whitened);
  EXPECT_GE(principal_angles(nw.phi, sp.phi).cosines.minCoeff(), 1.0 - 1e-6);
  EXPECT_GE(principal_angles(nw.psi, sp.psi).cosines.minCoeff(), 1.0 - 1e-6);
}

TEST(NwCcaTest, FullRankCaptureBoundedByOracle) {
  const DataMatrix x(random_matrix(30, 4, 2));
  const DataMatrix y(random_matrix(30, 3, 3));
  const CcaModel nw = nw_cca(x, y, 3);
  EXPECT_LE(tcc(x, y, nw), tcc(x, y, spectral_cca(x, y, 3)) + 1e-8);
  EXPECT_THROW(nw_cca(x, y, 4), DimensionError);
}

TEST(NwCcaTest, BelowAppGradOnIllConditionedInstance) {
  const auto inst = planted(3000, 30, 30, {0.9, 0.8, 0.7}, 4, 1e3);
  const CcaModel oracle = spectral_cca(inst.x, inst.y, 3);
  AppGradOptions opt;
  opt.k = 3;
  opt.seed = 5;
  opt.max_iters = 3000;
  opt.trace_every = 0;
  const double app = pcc(inst.x, inst.y, run_appgrad(inst.x, inst.y, opt).model, oracle);
  const double nw = pcc(inst.x, inst.y, nw_cca(inst.x, inst.y, 3), oracle);
  EXPECT_LT(nw, app);
}

TEST(DwCcaTest, DiagonalGramsMatchSpectral) {
  const Index n = 500;
  const auto inst = planted(n, 6, 5, {0.9, 0.6, 0.3}, 6);
  Vector sx(6), sy(5);
  sx << 10, 3, 1, 0.5, 7, 2;
  sy << 0.2, 4, 1, 9, 3;
  const DataMatrix x(Matrix(inst.x.dense() * sx.asDiagonal()));
  const DataMatrix y(Matrix(inst.y.dense() * sy.asDiagonal()));
  const Matrix gx = gram(x, 0.0).values;
  ASSERT_LE((gx - Matrix(gx.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-8);
  const CcaModel dw = dw_cca(x, y, 3);
  const CcaModel sp = spectral_cca(x, y, 3);
  EXPECT_GE(principal_angles(dw.phi, sp.phi, gx).cosines.minCoeff(), 1.0 - 1e-6);
  EXPECT_NEAR(tcc(x, y, dw), tcc(x, y, sp), 1e-8);
}

TEST(DwCcaTest, CorrelatedFeaturesBounded) {
  const auto inst = planted(2000, 20, 20, {0.9, 0.7, 0.5}, 7, 100.0);
  const CcaModel oracle = spectral_cca(inst.x, inst.y, 3);
  const double dw = pcc(inst.x, inst.y, dw_cca(inst.x, inst.y, 3), oracle);
  const double nw = pcc(inst.x, inst.y, nw_cca(inst.x, inst.y, 3), oracle);
  EXPECT_LE(dw, 1.0 + 1e-8);
  EXPECT_LE(nw, 1.0 + 1e-8);
  RecordProperty("pcc_dw", std::to_string(dw));
  RecordProperty("pcc_nw", std::to_string(nw));
}

TEST(DwCcaTest, ZeroColumnNeedsRidge) {
  Matrix xm = random_matrix(20, 3, 8);
  xm.col(1).setZero();
  const DataMatrix x(xm);
  const DataMatrix y(random_matrix(20, 3, 9));
  EXPECT_THROW(dw_cca(x, y, 2), DataError);
  BaselineOptions opt;
  opt.lambda = 1e-3;
  EXPECT_NO_THROW(dw_cca(x, y, 2, opt));
  EXPECT_THROW(dw_cca(testing::sparsify(xm, 1.0, 1), y, 2), DataError);
}

TEST(PcaCcaTest, FullDimensionReducesToSpectral) {
  const DataMatrix x(random_matrix(60, 6, 10));
  const DataMatrix y(random_matrix(60, 6, 11));
  const CcaModel pc = pca_cca(x, y, 3, 6);
  const CcaModel sp = spectral_cca(x, y, 3);
  EXPECT_LE((pc.lambda - sp.lambda).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_TRUE(pc.whitened);
}

// Planted views whose canonical coordinates are scaled by `canon` and the
// rest by `other`, so canonical directions sit in leading or trailing PCs.
std::pair<DataMatrix, DataMatrix> scaled_pair(double canon, double other, std::uint64_t seed) {
  const auto inst = planted(2000, 12, 12, {0.9, 0.8}, seed);
  Vector s = Vector::Constant(12, other);
  s.head(2).setConstant(canon);
  return {DataMatrix(Matrix(inst.x.dense() * s.asDiagonal())), DataMatrix(Matrix(inst.y.dense() * s.asDiagonal()))};
}

TEST(PcaCcaTest, AlignedInstanceRecovered) {
  const auto [x, y] = scaled_pair(10.0, 1.0, 12);
  const CcaModel oracle = spectral_cca(x, y, 2);
  EXPECT_GE(pcc(x, y, pca_cca(x, y, 2, 2), oracle), 0.99);
}

TEST(PcaCcaTest, TrailingInstanceMissed) {
  const auto [x, y] = scaled_pair(0.1, 1.0, 13);
  const CcaModel oracle = spectral_cca(x, y, 2);
  EXPECT_LE(pcc(x, y, pca_cca(x, y, 2, 2), oracle), 0.5);
}

TEST(PcaCcaTest, RangeAndProjection) {
  const DataMatrix x(random_matrix(50, 6, 14));
  const DataMatrix y(random_matrix(50, 5, 15));
  EXPECT_THROW(pca_cca(x, y, 3, 2), DimensionError);
  EXPECT_THROW(pca_cca(x, y, 3, 6), DimensionError);
  const PcaProjection p = pca_projection(x, 4);
  EXPECT_EQ(p.dim(), 4);
  EXPECT_LE((p.basis.transpose() * p.basis - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(default_pca_dim(25), 100);
}

TEST(BaselineInvariantsTest, OracleBoundsDeterminismEndpoints) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto inst = planted(1000, 16, 14, {0.9, 0.7, 0.5}, 20 + seed, 50.0);
    const double oracle = tcc(inst.x, inst.y, spectral_cca(inst.x, inst.y, 3));
    BaselineOptions opt;
    opt.svd.seed = seed;
    const CcaModel nw = nw_cca(inst.x, inst.y, 3, opt);
    const CcaModel dw = dw_cca(inst.x, inst.y, 3, opt);
    const CcaModel pk = pca_cca(inst.x, inst.y, 3, 3, opt);
    const CcaModel pp = pca_cca(inst.x, inst.y, 3, 14, opt);
    for (const CcaModel* m : {&nw, &dw, &pk, &pp}) EXPECT_LE(tcc(inst.x, inst.y, *m), oracle + 1e-8);
    EXPECT_GE(tcc(inst.x, inst.y, pp), tcc(inst.x, inst.y, pk) - 1e-12);
    EXPECT_EQ(nw_cca(inst.x, inst.y, 3, opt).phi, nw.phi);
    EXPECT_EQ(dw_cca(inst.x, inst.y, 3, opt).phi, dw.phi);
    EXPECT_EQ(pca_cca(inst.x, inst.y, 3, 3, opt).phi, pk.phi);
  }
}

}  // namespace
}  // namespace scca
