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

// Minibatch AppGrad: gradient steps and k x k whitening both use only the m
// sampled rows, so a step costs O(m (p1 + p2) k).

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "scca/appgrad.hpp"
#include "scca/matrix_core.hpp"
#include "scca/metrics.hpp"

namespace scca {

enum class SamplingMode {
  with_replacement,     // m independent uniform draws per step
  without_replacement,  // reshuffle every epoch, consecutive slices of m
  sequential,           // the next m arrivals, wrapping around
};

struct MinibatchPlan {
  Index batch_size = 500;
  SamplingMode mode = SamplingMode::without_replacement;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ index);
}

}  // namespace detail

// Index sets for a plan. Batches are a pure function of (plan, t), so any
// two samplers over the same plan agree; the current epoch's permutation is
// cached. Indices within a batch are sorted.
//
// Without replacement, an epoch holds floor(n / m) batches; the n mod m
// leftover indices of each shuffle are skipped for that epoch.
class MinibatchSampler {
 public:
  MinibatchSampler(MinibatchPlan plan, Index n) : plan_(plan), n_(n) {
    if (n < 1) throw DimensionError("cannot sample from an empty data set");
    // Independent draws may exceed n; partitioning modes may not.
    if (plan.batch_size < 1 || (plan.mode != SamplingMode::with_replacement && plan.batch_size > n)) {
      throw InputError("batch size " + std::to_string(plan.batch_size) + " must lie in [1, n = " +
                       std::to_string(n) + "]");
    }
  }

  Index batches_per_epoch() const { return n_ / plan_.batch_size; }

  std::vector<Index> batch(long t) {
    if (t < 0) throw InputError("iteration index must be >= 0");
    const Index m = plan_.batch_size;
    std::vector<Index> out(static_cast<std::size_t>(m));
    switch (plan_.mode) {
      case SamplingMode::with_replacement: {
        std::mt19937_64 rng(detail::stream_key(plan_.seed, static_cast<std::uint64_t>(t)));
        std::uniform_int_distribution<Index> pick(0, n_ - 1);
        for (auto& i : out) i = pick(rng);
        break;
      }
      case SamplingMode::without_replacement: {
        const long epoch = t / batches_per_epoch();
        if (epoch != cached_epoch_) {
          permutation_.resize(static_cast<std::size_t>(n_));
          std::iota(permutation_.begin(), permutation_.end(), Index{0});
          std::mt19937_64 rng(detail::stream_key(plan_.seed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(epoch)));
          std::shuffle(permutation_.begin(), permutation_.end(), rng);
          cached_epoch_ = epoch;
        }
        const auto slot = static_cast<std::size_t>((t % batches_per_epoch()) * m);
        std::copy_n(permutation_.begin() + static_cast<std::ptrdiff_t>(slot), m, out.begin());
        break;
      }
      case SamplingMode::sequential: {
        const Index start = static_cast<Index>((static_cast<long long>(t) * m) % n_);
        for (Index j = 0; j < m; ++j) out[static_cast<std::size_t>(j)] = (start + j) % n_;
        break;
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  MinibatchPlan plan_;
  Index n_;
  long cached_epoch_ = -1;
  std::vector<Index> permutation_;
};

inline std::vector<Index> sample_minibatch(const MinibatchPlan& plan, long t, Index n) {
  return MinibatchSampler(plan, n).batch(t);
}

enum class ScheduleKind { constant, inverse_t, inverse_sqrt_t };

// eta_t = base * f(t) with f = 1, 1/(1 + t/t0) or 1/sqrt(1 + t/t0).
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::constant;
  StepSizes base;
  double t0 = 100.0;

  StepSizes at(long t) const {
    double f = 1.0;
    const double u = 1.0 + static_cast<double>(t) / t0;
    if (kind == ScheduleKind::inverse_t) f = 1.0 / u;
    if (kind == ScheduleKind::inverse_sqrt_t) f = 1.0 / std::sqrt(u);
    return {base.x * f, base.y * f};
  }
};

inline void validate(const StepSchedule& s) {
  if (!(s.base.x > 0.0) || !(s.base.y > 0.0)) throw InputError("schedule base steps must be > 0");
  if (!(s.t0 > 0.0)) throw InputError("schedule offset t0 must be > 0");
}

// One minibatch step; x_batch, y_batch are the sampled rows. The k x k
// whitening uses the sampled Gram phi~^T (X_I^T X_I / m + lambda I) phi~.
inline AppGradState stochastic_appgrad_step(const AppGradState& s, const StepSizes& eta, const DataMatrix& x_batch,
                                            const DataMatrix& y_batch, double lambda = 0.0) {
  return appgrad_step(s, eta, x_batch, y_batch, lambda);
}

struct StochasticOptions {
  Index k = 20;
  double lambda = 0.0;
  std::optional<StepSchedule> schedule;  // constant default_step_sizes when absent
  MinibatchPlan plan;
  long iterations = 1000;
  bool one_pass = false;  // stream each row once: floor(n/m) sequential batches
  std::uint64_t seed = 0;
  long trace_every = 0;   // 0 means once per epoch-equivalent, ceil(n/m)
  bool trace = true;
  std::optional<double> target_pcc;
  bool record_wall_time = false;
};

// Runs the stochastic iteration for a fixed budget. A batch whose sampled
// Gram is degenerate is redrawn once from an independent stream; a second
// failure propagates.
inline RunResult run_stochastic(const DataMatrix& x, const DataMatrix& y, const StochasticOptions& opt,
                                std::optional<AppGradState> init = std::nullopt, const Evaluation& ev = {}) {
  if (x.rows() != y.rows()) throw DimensionError("X and Y must have the same number of rows");
  if (opt.k < 1 || opt.k > std::min(x.cols(), y.cols())) throw DimensionError("rank must lie in [1, min(p1, p2)]");
  if (opt.iterations < 0) throw InputError("iteration budget must be >= 0");
  const Index n = x.rows();

  MinibatchPlan plan = opt.plan;
  if (opt.one_pass) plan.mode = SamplingMode::sequential;
  MinibatchSampler sampler(plan, n);
  MinibatchPlan retry_plan = plan;
  retry_plan.seed = detail::splitmix64(plan.seed ^ 0xa5a5a5a5ULL);
  if (retry_plan.mode == SamplingMode::sequential) retry_plan.mode = SamplingMode::with_replacement;
  MinibatchSampler retry(retry_plan, n);

  StepSchedule schedule;
  if (opt.schedule) {
    schedule = *opt.schedule;
  } else {
    schedule.base = default_step_sizes(x, y, opt.lambda, opt.seed ^ 0x9e3779b97f4a7c15ULL);
  }
  validate(schedule);

  const long budget = opt.one_pass ? static_cast<long>(n / plan.batch_size) : opt.iterations;
  const long cadence = opt.trace_every > 0 ? opt.trace_every : static_cast<long>((n + plan.batch_size - 1) / plan.batch_size);

  RunResult out;
  out.state = init ? std::move(*init) : gaussian_init(x, y, opt.k, opt.lambda, opt.seed);
  detail::check_state(out.state, x, y);
  if (out.state.rank() != opt.k) throw DimensionError("initial state rank differs from k");
  out.state.iteration = 0;

  auto& rep = out.report;
  rep.solver = "stochastic-appgrad";
  rep.seed = opt.seed;
  rep.config = {{"k", std::to_string(opt.k)},
                {"lambda", detail::fmt(opt.lambda)},
                {"eta_x", detail::fmt(schedule.base.x)},
                {"eta_y", detail::fmt(schedule.base.y)},
                {"schedule", schedule.kind == ScheduleKind::constant    ? "constant"
                             : schedule.kind == ScheduleKind::inverse_t ? "inverse-t"
                                                                        : "inverse-sqrt-t"},
                {"t0", detail::fmt(schedule.t0)},
                {"batch_size", std::to_string(plan.batch_size)},
                {"iterations", std::to_string(budget)}};

  const auto start = std::chrono::steady_clock::now();
  auto trace = [&](const AppGradState& s) {
    TraceRecord rec = detail::evaluate(s, x, y, ev, opt.lambda);
    rec.flops = rep.total_flops;
    if (opt.record_wall_time) {
      rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    rep.records.push_back(rec);
    return rec;
  };
  if (opt.trace) trace(out.state);

  for (long t = 0; t < budget; ++t) {
    const StepSizes eta = schedule.at(t);
    std::vector<Index> idx = sampler.batch(t);
    AppGradState next;
    for (int attempt = 0;; ++attempt) {
      const DataMatrix xb = x.select_rows(idx);
      const DataMatrix yb = y.select_rows(idx);
      try {
        next = stochastic_appgrad_step(out.state, eta, xb, yb, opt.lambda);
        rep.total_flops += appgrad_step_flops(xb, yb, opt.k);
        break;
      } catch (const DegenerateIterateError&) {
        if (attempt > 0) throw;
        idx = retry.batch(t);
      }
    }
    out.state = std::move(next);
    rep.iterations = t + 1;
    const bool last = t + 1 == budget;
    if (opt.trace && ((t + 1) % cadence == 0 || last)) {
      const TraceRecord rec = trace(out.state);
      if (opt.target_pcc && rec.pcc && *rec.pcc >= *opt.target_pcc) {
        rep.converged = true;
        break;
      }
    }
  }
  detail::finish_run(out, x, y, ev, opt.lambda);
  return out;
}

struct CrossValidationOptions {
  double holdout_fraction = 0.1;
  long budget = 100;       // iterations per candidate
  bool stochastic = false; // score candidates with the minibatch runner
  bool parallel = true;    // candidates run concurrently
};

struct TrainHoldoutSplit {
  std::vector<Index> train;
  std::vector<Index> holdout;
};

// Random split; holdout gets ceil(fraction * n) rows, both index lists sorted.
inline TrainHoldoutSplit split_rows(Index n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 0.5)) throw InputError("holdout fraction must lie in (0, 0.5]");
  const auto h = static_cast<Index>(std::ceil(fraction * static_cast<double>(n)));
  if (h < 1 || n - h < 1) throw DimensionError("too few rows to hold out a fraction");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(detail::stream_key(seed, 0x686f6c64ULL));
  std::shuffle(perm.begin(), perm.end(), rng);
  TrainHoldoutSplit s;
  s.holdout.assign(perm.begin(), perm.begin() + h);
  s.train.assign(perm.begin() + h, perm.end());
  std::sort(s.holdout.begin(), s.holdout.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

// Picks the step (same on both sides) whose short run from a common
// initialization maximizes held-out TCC. Candidates that degenerate or
// diverge are skipped; ties go to the smaller step.
inline StepSizes cross_validate_step(const DataMatrix& x, const DataMatrix& y, const StochasticOptions& base,
                                     std::vector<double> grid, const CrossValidationOptions& cv = {}) {
  if (grid.empty()) throw InputError("step-size grid is empty");
  for (double g : grid) {
    if (!(g > 0.0) || !std::isfinite(g)) throw InputError("step-size candidates must be finite and > 0");
  }
  std::sort(grid.begin(), grid.end());
  const TrainHoldoutSplit split = split_rows(x.rows(), cv.holdout_fraction, base.seed);
  const DataMatrix xt = x.select_rows(split.train);
  const DataMatrix yt = y.select_rows(split.train);
  const DataMatrix xh = x.select_rows(split.holdout);
  const DataMatrix yh = y.select_rows(split.holdout);
  const AppGradState init = gaussian_init(xt, yt, base.k, base.lambda, base.seed);

  auto score = [&](double eta) -> std::optional<double> {
    try {
      AppGradState state;
      if (cv.stochastic) {
        StochasticOptions o = base;
        o.schedule = StepSchedule{ScheduleKind::constant, {eta, eta}, 100.0};
        o.iterations = cv.budget;
        o.one_pass = false;
        o.trace = false;
        o.plan.batch_size = std::min(o.plan.batch_size, xt.rows());
        state = run_stochastic(xt, yt, o, init).state;
      } else {
        AppGradOptions o;
        o.k = base.k;
        o.lambda = base.lambda;
        o.eta = StepSizes{eta, eta};
        o.max_iters = static_cast<int>(cv.budget);
        o.seed = base.seed;
        o.trace_every = 0;
        state = run_appgrad(xt, yt, o, init).state;
      }
      if (!state.phi.allFinite() || !state.psi.allFinite()) return std::nullopt;
      const double v = tcc(xh, yh, state.phi, state.psi);
      if (!std::isfinite(v)) return std::nullopt;
      return v;
    } catch (const NumericError&) {
      return std::nullopt;
    }
  };

  std::vector<std::optional<double>> scores(grid.size());
  if (cv.parallel && grid.size() > 1) {
    std::vector<std::future<std::optional<double>>> jobs;
    for (double g : grid) jobs.push_back(std::async(std::launch::async, score, g));
    for (std::size_t i = 0; i < jobs.size(); ++i) scores[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) scores[i] = score(grid[i]);
  }

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (scores[i] && (!best || *scores[i] > *scores[*best])) best = i;
  }
  if (!best) throw NumericError("every step-size candidate degenerated or diverged");
  return {grid[*best], grid[*best]};
}

}  // namespace scca
