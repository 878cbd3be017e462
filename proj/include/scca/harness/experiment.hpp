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

// End-to-end experiment: data acquisition, optional holdout split, exact
// oracle, solver dispatch, best-k extraction, metrics and artifact writing.

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <utility>

#include "scca/appgrad.hpp"
#include "scca/baselines.hpp"
#include "scca/harness/config.hpp"
#include "scca/harness/io.hpp"
#include "scca/harness/planted.hpp"
#include "scca/kernel.hpp"
#include "scca/metrics.hpp"
#include "scca/reference.hpp"
#include "scca/stochastic.hpp"

namespace scca {

struct ExperimentData {
  DataMatrix x;
  DataMatrix y;
  std::optional<CcaModel> planted;
};

// Loads both views from disk, or generates a planted instance from the seed.
inline ExperimentData load_experiment_data(const SolverConfig& c) {
  if (!c.x_path.empty()) {
    DataMatrix x = load_dataset(c.x_path, c.format);
    DataMatrix y = load_dataset(c.y_path, c.format);
    if (x.rows() != y.rows()) throw DimensionError("X and Y files have different row counts");
    return {std::move(x), std::move(y), std::nullopt};
  }
  PlantedInstance inst = generate_planted(c.planted, c.seed);
  return {std::move(inst.x), std::move(inst.y), std::move(inst.planted)};
}

struct ExperimentResult {
  CcaModel model;  // best-k directions
  RunReport report;
};

namespace experiment_detail {

inline constexpr std::uint64_t kSplitStream = 0x5eed0001ULL;

// Rough cost of the dense exact solvers: Grams, cross covariance and the
// cubic decompositions.
inline double exact_solver_flops(const DataMatrix& x, const DataMatrix& y) {
  const double n = static_cast<double>(x.rows());
  const double p1 = static_cast<double>(x.cols());
  const double p2 = static_cast<double>(y.cols());
  return 2.0 * n * (p1 * p1 + p2 * p2 + p1 * p2) + 10.0 * (p1 * p1 * p1 + p2 * p2 * p2);
}

// Randomized SVD of a rows x cols operand with nnz stored entries: one
// sketch, two products per power iteration, the final projection, and the
// thin QR factorizations.
inline double randomized_svd_flops(double rows, double cols, double nnz, Index k, const RandomizedSvdOptions& o) {
  const double w = static_cast<double>(std::min<Index>(k + o.oversample, static_cast<Index>(std::min(rows, cols))));
  const double products = 2.0 * nnz * w * (2.0 + 2.0 * o.power_iters);
  return products + 4.0 * (rows + cols) * w * w * (1.0 + o.power_iters);
}

// Dense cross covariance plus a randomized SVD of the p1 x p2 result.
inline double cross_svd_flops(const DataMatrix& x, const DataMatrix& y, Index k, const RandomizedSvdOptions& o) {
  const double p1 = static_cast<double>(x.cols()), p2 = static_cast<double>(y.cols());
  return 2.0 * static_cast<double>(x.rows()) * p1 * p2 + randomized_svd_flops(p1, p2, p1 * p2, k, o);
}

inline double pca_cca_flops(const DataMatrix& x, const DataMatrix& y, Index m, const RandomizedSvdOptions& o) {
  const double n = static_cast<double>(x.rows()), md = static_cast<double>(m);
  const double sketches = randomized_svd_flops(n, static_cast<double>(x.cols()), static_cast<double>(x.nnz()), m, o) +
                          randomized_svd_flops(n, static_cast<double>(y.cols()), static_cast<double>(y.nnz()), m, o);
  const double projection = 2.0 * md * static_cast<double>(x.nnz() + y.nnz());
  return sketches + projection + 2.0 * n * 3.0 * md * md + 20.0 * md * md * md;
}

inline RunReport single_point_report(const std::string& solver, double flops) {
  RunReport r;
  r.solver = solver;
  r.iterations = 0;
  r.converged = true;
  r.total_flops = flops;
  return r;
}

}  // namespace experiment_detail

// Runs one configured solver. Iterative solvers work at rank k + l and the k
// directions with the largest captured correlations are kept. With a holdout
// fraction, solvers see only the training rows and holdout PCC recomputes
// both numerator and denominator on the held-out rows.
inline ExperimentResult run_experiment(const SolverConfig& c, const ExperimentData& data) {
  validate(c);
  const Index p_min = std::min(data.x.cols(), data.y.cols());
  if (c.k > p_min) throw DimensionError("k = " + std::to_string(c.k) + " exceeds min(p1, p2) = " + std::to_string(p_min));

  std::optional<DataMatrix> xt, yt, xh, yh;
  if (c.holdout > 0.0) {
    const TrainHoldoutSplit split = split_rows(data.x.rows(), c.holdout, c.seed ^ experiment_detail::kSplitStream);
    xt = data.x.select_rows(split.train);
    yt = data.y.select_rows(split.train);
    xh = data.x.select_rows(split.holdout);
    yh = data.y.select_rows(split.holdout);
  }
  const DataMatrix& x = xt ? *xt : data.x;
  const DataMatrix& y = yt ? *yt : data.y;

  ExperimentResult out;
  auto& rep = out.report;

  if (c.solver == SolverKind::kernel_appgrad) {
    if (c.holdout > 0.0) throw InputError("holdout evaluation is not supported for kernel solvers");
    const KernelSpec spec = c.kernel.value_or(KernelSpec{});
    const KernelGram kx = kernel_gram(x, spec);
    const KernelGram ky = kernel_gram(y, spec);
    KernelCcaOptions ko;
    if (c.lambda > 0.0) ko.lambda = c.lambda;
    ko.solver.max_iters = static_cast<int>(c.max_iters);
    ko.solver.tol = c.tol;
    ko.solver.seed = c.seed;
    ko.solver.trace_every = static_cast<int>(c.trace_every > 0 ? c.trace_every : 1);
    ko.solver.record_wall_time = c.timing;
    if (c.eta) ko.solver.eta = StepSizes{*c.eta, *c.eta};
    KernelCcaResult kr = kernel_cca(kx, ky, c.k, ko);
    out.model = CcaModel{std::move(kr.w_x), std::move(kr.w_y), std::move(kr.lambda), true};
    rep = std::move(kr.report);
    rep.final_tcc = out.model.lambda.sum();
    rep.final_pcc.reset();
  } else {
    const CcaModel oracle = spectral_cca(x, y, c.k, c.lambda);
    std::optional<CcaModel> holdout_oracle;
    if (xh) holdout_oracle = spectral_cca(*xh, *yh, c.k, c.lambda);

    Evaluation ev;
    ev.oracle = &oracle;
    if (xh) {
      ev.holdout_x = &*xh;
      ev.holdout_y = &*yh;
      ev.holdout_oracle = &*holdout_oracle;
    }
    ev.eval_rank = c.k;
    const Index rank = std::min(c.k + c.oversample, p_min);

    auto score_exact = [&](CcaModel model, const std::string& name, double flops) {
      out.model = std::move(model);
      rep = experiment_detail::single_point_report(name, flops);
      TraceRecord rec;
      rec.flops = flops;
      rec.tcc = tcc(x, y, out.model);
      rec.pcc = rec.tcc / tcc(x, y, oracle);
      if (xh) {
        rec.tcc_holdout = tcc(*xh, *yh, out.model);
        rec.pcc_holdout = *rec.tcc_holdout / tcc(*xh, *yh, *holdout_oracle);
      }
      rep.records.push_back(rec);
      rep.final_tcc = rec.tcc;
      rep.final_pcc = rec.pcc;
      rep.final_pcc_holdout = rec.pcc_holdout;
    };

    BaselineOptions bo;
    bo.lambda = c.lambda;
    bo.svd.seed = c.seed;
    bo.svd.oversample = std::max<Index>(bo.svd.oversample, c.oversample);

    switch (c.solver) {
      case SolverKind::spectral:
        score_exact(oracle, "spectral", experiment_detail::exact_solver_flops(x, y));
        break;
      case SolverKind::qr:
        score_exact(qr_cca(x, y, c.k, c.lambda), "qr", experiment_detail::exact_solver_flops(x, y));
        break;
      case SolverKind::nw:
        score_exact(nw_cca(x, y, c.k, bo), "nw", experiment_detail::cross_svd_flops(x, y, c.k, bo.svd));
        break;
      case SolverKind::dw:
        score_exact(dw_cca(x, y, c.k, bo), "dw",
                    experiment_detail::cross_svd_flops(x, y, c.k, bo.svd) + 2.0 * static_cast<double>(x.nnz() + y.nnz()));
        break;
      case SolverKind::pca_cca:
      {
        const Index m = c.pca_m.value_or(std::min(default_pca_dim(c.k), std::min(p_min, x.rows())));
        score_exact(pca_cca(x, y, c.k, m, bo), "pca-cca", experiment_detail::pca_cca_flops(x, y, m, bo.svd));
        break;
      }
      case SolverKind::als: {
        if (c.k != 1) throw InputError("the als solver computes the leading pair only; use k = 1");
        std::mt19937_64 rng(c.seed);
        AlsOptions ao;
        ao.lambda = c.lambda;
        ao.tol = c.tol;
        ao.max_iters = static_cast<int>(c.max_iters);
        const AlsResult ar = als_cca(x, y, gaussian_matrix(x.cols(), 1, rng).col(0),
                                     gaussian_matrix(y.cols(), 1, rng).col(0), ao);
        // Gram factorizations once, then two products per view per sweep.
        score_exact(ar.model, "als",
                    experiment_detail::exact_solver_flops(x, y) +
                        static_cast<double>(ar.iterations) * 4.0 * static_cast<double>(x.nnz() + y.nnz()));
        rep.iterations = ar.iterations;
        rep.converged = ar.converged;
        break;
      }
      case SolverKind::appgrad:
      case SolverKind::stochastic_appgrad: {
        const bool stochastic = c.solver == SolverKind::stochastic_appgrad;
        StochasticOptions so;
        so.k = rank;
        so.lambda = c.lambda;
        so.plan = {std::min(c.batch_size, x.rows()), c.sampling, c.seed};
        so.iterations = c.max_iters;
        so.one_pass = c.one_pass;
        so.seed = c.seed;
        so.trace_every = c.trace_every;
        so.record_wall_time = c.timing;

        std::optional<StepSizes> eta;
        if (!c.eta_grid.empty()) {
          CrossValidationOptions cv;
          cv.stochastic = stochastic;
          eta = cross_validate_step(x, y, so, c.eta_grid, cv);
        } else if (c.eta) {
          eta = StepSizes{*c.eta, *c.eta};
        }

        RunResult run;
        if (stochastic) {
          if (eta) so.schedule = StepSchedule{c.schedule, *eta, c.t0};
          else if (c.schedule != ScheduleKind::constant) {
            so.schedule = StepSchedule{c.schedule, default_step_sizes(x, y, c.lambda, c.seed ^ 0x9e3779b97f4a7c15ULL), c.t0};
          }
          run = run_stochastic(x, y, so, std::nullopt, ev);
        } else {
          AppGradOptions ao;
          ao.k = rank;
          ao.lambda = c.lambda;
          ao.eta = eta;
          ao.max_iters = static_cast<int>(c.max_iters);
          ao.tol = c.tol;
          ao.seed = c.seed;
          ao.trace_every = static_cast<int>(c.trace_every > 0 ? c.trace_every : 1);
          ao.record_wall_time = c.timing;
          run = run_appgrad(x, y, ao, std::nullopt, ev);
        }
        out.model = std::move(run.model);
        rep = std::move(run.report);
        break;
      }
      case SolverKind::kernel_appgrad:
        break;
    }
  }

  // Embed the resolved configuration, keeping solver-derived values.
  auto derived = std::move(rep.config);
  rep.config = config_entries(c);
  for (auto& [key, value] : derived) {
    if (key == "eta_x" || key == "eta_y") rep.config.emplace_back("resolved_" + key, std::move(value));
  }
  rep.seed = c.seed;
  validate(rep);
  return out;
}

inline ExperimentResult run_experiment(const SolverConfig& c) { return run_experiment(c, load_experiment_data(c)); }

// Writes the line-delimited report, an optional (FLOPs, PCC) curve and an
// optional model prefix. Empty paths are skipped.
inline void write_experiment_outputs(const ExperimentResult& r, const std::string& report_path,
                                     const std::string& trace_path, const std::string& model_prefix) {
  if (!report_path.empty()) {
    auto out = io_detail::open_out(report_path);
    write_report(out, r.report);
  }
  if (!trace_path.empty()) {
    auto out = io_detail::open_out(trace_path);
    write_flop_curve(out, r.report);
  }
  if (!model_prefix.empty()) save_model(model_prefix, r.model);
}

}  // namespace scca
