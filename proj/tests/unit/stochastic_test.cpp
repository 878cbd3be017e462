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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "scca/metrics.hpp"
#include "scca/reference.hpp"
#include "scca/stochastic.hpp"
#include "test_util.hpp"

namespace scca {
namespace {

using testing::planted;
using testing::random_matrix;

TEST(SamplerTest, FullBatchIsEverything) {
  const MinibatchPlan plan{10, SamplingMode::without_replacement, 1};
  for (long t = 0; t < 3; ++t) {
    const auto idx = sample_minibatch(plan, t, 10);
    std::vector<Index> all(10);
    std::iota(all.begin(), all.end(), Index{0});
    EXPECT_EQ(idx, all);
  }
}

TEST(SamplerTest, DeterministicAcrossFreshPlans) {
  for (auto mode : {SamplingMode::with_replacement, SamplingMode::without_replacement, SamplingMode::sequential}) {
    const MinibatchPlan a{7, mode, 42};
    const MinibatchPlan b{7, mode, 42};
    EXPECT_EQ(sample_minibatch(a, 0, 50), sample_minibatch(b, 0, 50));
    EXPECT_EQ(sample_minibatch(a, 9, 50), MinibatchSampler(b, 50).batch(9));
  }
  EXPECT_NE(sample_minibatch({7, SamplingMode::with_replacement, 1}, 0, 50),
            sample_minibatch({7, SamplingMode::with_replacement, 2}, 0, 50));
}

TEST(SamplerTest, WithoutReplacementPartitionsEachEpoch) {
  MinibatchSampler s({4, SamplingMode::without_replacement, 3}, 13);
  ASSERT_EQ(s.batches_per_epoch(), 3);
  for (long epoch = 0; epoch < 3; ++epoch) {
    std::set<Index> seen;
    for (long b = 0; b < 3; ++b) {
      for (Index i : s.batch(epoch * 3 + b)) EXPECT_TRUE(seen.insert(i).second);
    }
    EXPECT_EQ(seen.size(), 12u);
  }
}

TEST(SamplerTest, SequentialReturnsNextArrivals) {
  const MinibatchPlan plan{3, SamplingMode::sequential, 0};
  EXPECT_EQ(sample_minibatch(plan, 0, 7), (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(sample_minibatch(plan, 1, 7), (std::vector<Index>{3, 4, 5}));
  EXPECT_EQ(sample_minibatch(plan, 2, 7), (std::vector<Index>{0, 1, 6}));
}

TEST(SamplerTest, WithReplacementIsUniform) {
  const Index n = 10;
  const MinibatchPlan plan{1000, SamplingMode::with_replacement, 5};
  const auto idx = sample_minibatch(plan, 0, n);
  std::vector<int> counts(n, 0);
  for (Index i : idx) ++counts[static_cast<std::size_t>(i)];
  const double mean = 1000.0 / n;
  const double sigma = std::sqrt(1000.0 * 0.1 * 0.9);
  for (int c : counts) EXPECT_LE(std::abs(c - mean), 3.0 * sigma);
}

TEST(SamplerTest, Errors) {
  EXPECT_THROW(sample_minibatch({11, SamplingMode::without_replacement, 0}, 0, 10), InputError);
  EXPECT_THROW(sample_minibatch({11, SamplingMode::sequential, 0}, 0, 10), InputError);
  EXPECT_THROW(sample_minibatch({0, SamplingMode::with_replacement, 0}, 0, 10), InputError);
  EXPECT_THROW(sample_minibatch({2, SamplingMode::with_replacement, 0}, -1, 10), InputError);
  EXPECT_THROW(sample_minibatch({2, SamplingMode::with_replacement, 0}, 0, 0), DimensionError);
}

TEST(ScheduleTest, PositiveAndNonincreasing) {
  for (auto kind : {ScheduleKind::constant, ScheduleKind::inverse_t, ScheduleKind::inverse_sqrt_t}) {
    const StepSchedule s{kind, {0.5, 0.25}, 10.0};
    double prev = s.at(0).x;
    EXPECT_DOUBLE_EQ(prev, 0.5);
    for (long t = 1; t < 1000; t += 7) {
      const StepSizes e = s.at(t);
      EXPECT_GT(e.x, 0.0);
      EXPECT_GT(e.y, 0.0);
      EXPECT_LE(e.x, prev);
      prev = e.x;
    }
  }
  EXPECT_DOUBLE_EQ((StepSchedule{ScheduleKind::inverse_t, {1.0, 1.0}, 10.0}.at(10).x), 0.5);
  EXPECT_THROW(validate(StepSchedule{ScheduleKind::constant, {0.0, 1.0}, 10.0}), InputError);
  EXPECT_THROW(validate(StepSchedule{ScheduleKind::constant, {1.0, 1.0}, 0.0}), InputError);
}

TEST(StochasticStepTest, FullBatchEqualsBatchStep) {
  const auto inst = planted(300, 8, 6, {0.9, 0.6}, 1, 4.0);
  const AppGradState s = gaussian_init(inst.x, inst.y, 2, 0.0, 2);
  const MinibatchPlan plan{300, SamplingMode::without_replacement, 3};
  const auto idx = sample_minibatch(plan, 0, 300);
  const AppGradState a = stochastic_appgrad_step(s, {0.3, 0.3}, inst.x.select_rows(idx), inst.y.select_rows(idx));
  const AppGradState b = appgrad_step(s, {0.3, 0.3}, inst.x, inst.y);
  EXPECT_LE((a.phi - b.phi).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((a.psi_tilde - b.psi_tilde).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StochasticStepTest, FixedPointAtFullBatch) {
  const auto inst = planted(400, 8, 8, {0.9, 0.6, 0.3}, 4, 6.0);
  const CcaModel oracle = spectral_cca(inst.x, inst.y, 3);
  const AppGradState s = fixed_point_state(oracle);
  const auto idx = sample_minibatch({400, SamplingMode::without_replacement, 5}, 0, 400);
  const AppGradState next = stochastic_appgrad_step(s, {0.2, 0.2}, inst.x.select_rows(idx), inst.y.select_rows(idx));
  EXPECT_LE((next.phi - s.phi).norm() + (next.psi_tilde - s.psi_tilde).norm(), 1e-8);
}

TEST(StochasticStepTest, SampledGradientIsUnbiased) {
  const Matrix x = random_matrix(6, 3, 6);
  const Matrix y = random_matrix(6, 2, 7);
  const Matrix a = random_matrix(3, 2, 8);
  const Matrix psi = random_matrix(2, 2, 9);
  const Matrix full = x.transpose() * (x * a - y * psi) / 6.0;
  Matrix sum = Matrix::Zero(3, 2);
  int count = 0;
  for (Index i = 0; i < 6; ++i)
    for (Index j = i + 1; j < 6; ++j) {
      const std::vector<Index> idx{i, j};
      const DataMatrix xb = DataMatrix(x).select_rows(idx);
      const DataMatrix yb = DataMatrix(y).select_rows(idx);
      sum += detail::ls_gradient(xb, 0.0, a, xb.times(a), yb.times(psi));
      ++count;
    }
  EXPECT_EQ(count, 15);
  EXPECT_LE((sum / count - full).cwiseAbs().maxCoeff(), 1e-12);
}

// Relative spectral error of the sampled k x k whitening against the full one.
std::vector<double> whitening_errors(const DataMatrix& x, const Matrix& tilde, Index m, int batches,
                                     std::uint64_t seed) {
  const Matrix xt = x.times(tilde);
  const Matrix full = sym_inv_sqrt(Matrix(xt.transpose() * xt / static_cast<double>(x.rows())));
  std::vector<double> out;
  for (int b = 0; b < batches; ++b) {
    const auto idx = sample_minibatch({m, SamplingMode::with_replacement, seed}, b, x.rows());
    const Matrix xs = x.select_rows(idx).times(tilde);
    const Matrix sampled = sym_inv_sqrt(Matrix(xs.transpose() * xs / static_cast<double>(m)));
    Eigen::JacobiSVD<Matrix> num(sampled - full);
    Eigen::JacobiSVD<Matrix> den(full);
    out.push_back(num.singularValues()(0) / den.singularValues()(0));
  }
  return out;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

TEST(StochasticStepTest, SampledWhiteningConcentrates) {
  const auto inst = planted(5000, 20, 20, {0.9, 0.8, 0.7, 0.6, 0.5}, 10, 10.0);
  const Matrix tilde = random_matrix(20, 5, 11);
  double prev = INFINITY;
  for (Index c : {2, 5, 10}) {
    const double med = median(whitening_errors(inst.x, tilde, c * 5, 100, 12));
    EXPECT_LT(med, prev) << "c = " << c;
    prev = med;
  }
  // At the default batch size (m = 100 k) every sampled whitening is within 15%.
  const auto errs = whitening_errors(inst.x, tilde, 500, 100, 13);
  EXPECT_LE(*std::max_element(errs.begin(), errs.end()), 0.15);
}

TEST(RunStochasticTest, FullBatchReproducesBatchTrajectory) {
  const auto inst = planted(400, 10, 8, {0.9, 0.7, 0.5}, 14, 5.0);
  StochasticOptions so;
  so.k = 3;
  so.plan = {400, SamplingMode::without_replacement, 15};
  so.schedule = StepSchedule{ScheduleKind::constant, {0.2, 0.2}, 100.0};
  so.seed = 16;
  AppGradState a = gaussian_init(inst.x, inst.y, 3, 0.0, 16);
  AppGradState b = a;
  MinibatchSampler sampler(so.plan, 400);
  for (long t = 0; t < 50; ++t) {
    const auto idx = sampler.batch(t);
    a = stochastic_appgrad_step(a, so.schedule->at(t), inst.x.select_rows(idx), inst.y.select_rows(idx));
    b = appgrad_step(b, {0.2, 0.2}, inst.x, inst.y);
    ASSERT_LE((a.phi - b.phi).cwiseAbs().maxCoeff(), 1e-12) << "iteration " << t;
    ASSERT_LE((a.psi - b.psi).cwiseAbs().maxCoeff(), 1e-12) << "iteration " << t;
  }
  so.iterations = 50;
  const RunResult run = run_stochastic(inst.x, inst.y, so);
  EXPECT_LE((run.state.phi - b.phi).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RunStochasticTest, ZeroBudgetReturnsInitialization) {
  const auto inst = planted(300, 6, 6, {0.9, 0.5}, 17, 3.0);
  StochasticOptions so;
  so.k = 2;
  so.iterations = 0;
  so.plan.batch_size = 50;
  so.seed = 18;
  const RunResult r = run_stochastic(inst.x, inst.y, so);
  const AppGradState init = gaussian_init(inst.x, inst.y, 2, 0.0, 18);
  EXPECT_EQ(r.state.phi, init.phi);
  EXPECT_NEAR(tcc(inst.x, inst.y, r.model), tcc(inst.x, inst.y, init.phi, init.psi), 1e-10);
  EXPECT_EQ(r.report.iterations, 0);
}

TEST(RunStochasticTest, OnePassStreaming) {
  const auto inst = planted(20000, 20, 20, {0.9, 0.7, 0.5}, 19, 4.0);
  const CcaModel oracle = spectral_cca(inst.x, inst.y, 3);
  StochasticOptions so;
  so.k = 3;
  so.one_pass = true;
  so.plan.batch_size = 100;
  so.seed = 20;
  Evaluation ev;
  ev.oracle = &oracle;
  const RunResult r = run_stochastic(inst.x, inst.y, so, std::nullopt, ev);
  EXPECT_EQ(r.report.iterations, 200);
  EXPECT_GE(*r.report.final_pcc, 0.9);
}

TEST(RunStochasticTest, DeterministicTraces) {
  const auto inst = planted(2000, 10, 10, {0.9, 0.6}, 21, 4.0);
  const CcaModel oracle = spectral_cca(inst.x, inst.y, 2);
  StochasticOptions so;
  so.k = 2;
  so.iterations = 60;
  so.plan = {100, SamplingMode::with_replacement, 22};
  so.seed = 23;
  Evaluation ev;
  ev.oracle = &oracle;
  const RunResult a = run_stochastic(inst.x, inst.y, so, std::nullopt, ev);
  const RunResult b = run_stochastic(inst.x, inst.y, so, std::nullopt, ev);
  ASSERT_EQ(a.report.records.size(), b.report.records.size());
  // Default cadence: once per ceil(n / m) = 20 iterations, plus the start.
  EXPECT_EQ(a.report.records.size(), 4u);
  for (std::size_t i = 0; i < a.report.records.size(); ++i) {
    EXPECT_EQ(a.report.records[i].tcc, b.report.records[i].tcc);
    EXPECT_EQ(a.report.records[i].flops, b.report.records[i].flops);
  }
  EXPECT_NO_THROW(validate(a.report));
  EXPECT_EQ(a.report.solver, "stochastic-appgrad");
}

TEST(CrossValidationTest, SingleCandidate) {
  const auto inst = planted(500, 8, 8, {0.9, 0.6}, 24);
  StochasticOptions so;
  so.k = 2;
  const StepSizes s = cross_validate_step(inst.x, inst.y, so, {0.37});
  EXPECT_DOUBLE_EQ(s.x, 0.37);
  EXPECT_DOUBLE_EQ(s.y, 0.37);
}

TEST(CrossValidationTest, PicksBestHoldoutScore) {
  const auto inst = planted(2000, 10, 10, {0.9, 0.7, 0.5}, 25);
  StochasticOptions so;
  so.k = 3;
  so.seed = 26;
  const std::vector<double> grid{1e-4, 1e-2, 1e0};
  CrossValidationOptions cv;
  cv.parallel = false;
  const StepSizes pick = cross_validate_step(inst.x, inst.y, so, grid, cv);
  EXPECT_NE(pick.x, 1e-4);
  // Recompute every candidate's holdout TCC independently.
  const TrainHoldoutSplit split = split_rows(2000, cv.holdout_fraction, so.seed);
  const DataMatrix xt = inst.x.select_rows(split.train), yt = inst.y.select_rows(split.train);
  const DataMatrix xh = inst.x.select_rows(split.holdout), yh = inst.y.select_rows(split.holdout);
  const AppGradState init = gaussian_init(xt, yt, 3, 0.0, so.seed);
  double picked = 0.0, best = 0.0;
  for (double g : grid) {
    AppGradOptions o;
    o.k = 3;
    o.eta = StepSizes{g, g};
    o.max_iters = static_cast<int>(cv.budget);
    o.trace_every = 0;
    const RunResult r = run_appgrad(xt, yt, o, init);
    const double v = tcc(xh, yh, r.state.phi, r.state.psi);
    best = std::max(best, v);
    if (g == pick.x) picked = v;
  }
  EXPECT_GE(picked, best);
  // Parallel evaluation selects the same candidate.
  cv.parallel = true;
  EXPECT_EQ(cross_validate_step(inst.x, inst.y, so, grid, cv).x, pick.x);
}

TEST(CrossValidationTest, Errors) {
  const auto inst = planted(500, 8, 8, {0.9, 0.6}, 27);
  StochasticOptions so;
  so.k = 2;
  EXPECT_THROW(cross_validate_step(inst.x, inst.y, so, {1e6}), NumericError);
  EXPECT_THROW(cross_validate_step(inst.x, inst.y, so, {}), InputError);
  EXPECT_THROW(cross_validate_step(inst.x, inst.y, so, {-1.0}), InputError);
  CrossValidationOptions cv;
  cv.holdout_fraction = 0.6;
  EXPECT_THROW(cross_validate_step(inst.x, inst.y, so, {0.1}, cv), InputError);
}

TEST(SplitTest, DisjointCover) {
  const TrainHoldoutSplit s = split_rows(100, 0.1, 3);
  EXPECT_EQ(s.holdout.size(), 10u);
  EXPECT_EQ(s.train.size(), 90u);
  std::set<Index> all(s.train.begin(), s.train.end());
  all.insert(s.holdout.begin(), s.holdout.end());
  EXPECT_EQ(all.size(), 100u);
  EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
  EXPECT_THROW(split_rows(100, 0.0, 3), InputError);
}

}  // namespace
}  // namespace scca
