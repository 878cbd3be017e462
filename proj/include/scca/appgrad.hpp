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

// Batch AppGrad. The state carries an unnormalized pair (phi~, psi~) that
// takes plain least-squares gradient steps and a normalized pair (phi, psi)
// obtained from it by a k x k whitening. Nothing of size p x p is formed:
// the data enter only through X*V and X^T*W products.
//
// One step, both gradient steps reading the incoming normalized partners:
//   phi~' = phi~ - eta_x (S_x phi~ - S_xy psi)
//   phi'  = phi~' (phi~'^T S_x phi~')^{-1/2}
//   psi~' = psi~ - eta_y (S_y psi~ - S_yx phi)
//   psi'  = psi~' (psi~'^T S_y psi~')^{-1/2}
// with S_x = X^T X / n + lambda I. Every (phi_i, psi_i, l_i phi_i, l_i psi_i)
// built from canonical pairs, rotated by any orthogonal Q, is a fixed point.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "scca/matrix_core.hpp"
#include "scca/metrics.hpp"
#include "scca/model.hpp"

namespace scca {

struct StepSizes {
  double x = 0.0;
  double y = 0.0;
};

struct AppGradState {
  Matrix phi;        // p1 x k, phi^T S_x phi = I
  Matrix psi;        // p2 x k, psi^T S_y psi = I
  Matrix phi_tilde;  // p1 x k, unnormalized
  Matrix psi_tilde;  // p2 x k, unnormalized
  long iteration = 0;

  Index rank() const { return phi.cols(); }
};

namespace detail {

inline void check_state(const AppGradState& s, const DataMatrix& x, const DataMatrix& y) {
  if (x.rows() != y.rows()) throw DimensionError("X and Y must have the same number of rows");
  const Index k = s.phi.cols();
  if (k < 1 || s.psi.cols() != k || s.phi_tilde.cols() != k || s.psi_tilde.cols() != k) {
    throw DimensionError("state blocks must share a column count >= 1");
  }
  if (s.phi.rows() != x.cols() || s.phi_tilde.rows() != x.cols() || s.psi.rows() != y.cols() ||
      s.psi_tilde.rows() != y.cols()) {
    throw DimensionError("state dimensions do not match X, Y");
  }
}

inline void check_steps(const StepSizes& eta) {
  if (!(eta.x >= 0.0) || !(eta.y >= 0.0) || !std::isfinite(eta.x) || !std::isfinite(eta.y)) {
    throw InputError("step sizes must be finite and nonnegative");
  }
}

// S v = X^T (X v) / n + lambda v, applied to the residual form used by the
// gradient: X^T (X a - b) / n + lambda a with b = Y psi precomputed.
inline Matrix ls_gradient(const DataMatrix& x, double lambda, const Matrix& a, const Matrix& xa, const Matrix& target) {
  return x.transpose_times(xa - target) / static_cast<double>(x.rows()) + lambda * a;
}

}  // namespace detail

// Minimum eigenvalue (relative to the largest) the k x k Gram of phi~ must
// keep; below it the iterate has lost rank.
inline constexpr double kIterateFloorRatio = 1e-10;

// Whitening of one side: returns phi~ (phi~^T S phi~)^{-1/2}, the k x k Gram
// evaluated as (X phi~)^T (X phi~)/n + lambda phi~^T phi~.
inline Matrix normalize_directions(const DataMatrix& x, double lambda, const Matrix& tilde) {
  const Matrix xt = x.times(tilde);
  Matrix g = xt.transpose() * xt / static_cast<double>(x.rows());
  if (lambda != 0.0) g += lambda * (tilde.transpose() * tilde);
  if (!g.allFinite()) throw DegenerateIterateError("iterate overflowed; reduce the step size");
  const SymEigen e = sym_eigen(g);
  if (!(e.max() > 0.0) || e.min() < kIterateFloorRatio * e.max()) {
    throw DegenerateIterateError("iterate lost rank (k x k Gram eigenvalues " + std::to_string(e.min()) + " / " +
                                 std::to_string(e.max()) + "); reinitialize");
  }
  return tilde * inv_sqrt_from_eigen(e, e.min());
}

// Rank-1 AppGrad step with scalar normalization.
inline AppGradState appgrad_step_rank1(const AppGradState& s, const StepSizes& eta, const DataMatrix& x,
                                       const DataMatrix& y, double lambda = 0.0) {
  detail::check_state(s, x, y);
  detail::check_steps(eta);
  if (s.rank() != 1) throw DimensionError("rank-1 step called on a rank-" + std::to_string(s.rank()) + " state");
  const Matrix x_phi = x.times(s.phi);
  const Matrix y_psi = y.times(s.psi);

  AppGradState next;
  next.phi_tilde = s.phi_tilde - eta.x * detail::ls_gradient(x, lambda, s.phi_tilde, x.times(s.phi_tilde), y_psi);
  next.psi_tilde = s.psi_tilde - eta.y * detail::ls_gradient(y, lambda, s.psi_tilde, y.times(s.psi_tilde), x_phi);
  const double nx = induced_norm(x, lambda, next.phi_tilde.col(0));
  const double ny = induced_norm(y, lambda, next.psi_tilde.col(0));
  if (!std::isfinite(nx) || !std::isfinite(ny)) throw DegenerateIterateError("iterate overflowed; reduce the step size");
  if (nx < 1e-14 || ny < 1e-14) throw DegenerateIterateError("unnormalized iterate vanished; reinitialize");
  next.phi = next.phi_tilde / nx;
  next.psi = next.psi_tilde / ny;
  next.iteration = s.iteration + 1;
  return next;
}

// Rank-k AppGrad step.
inline AppGradState appgrad_step(const AppGradState& s, const StepSizes& eta, const DataMatrix& x,
                                 const DataMatrix& y, double lambda = 0.0) {
  detail::check_state(s, x, y);
  detail::check_steps(eta);
  const Matrix x_phi = x.times(s.phi);
  const Matrix y_psi = y.times(s.psi);

  AppGradState next;
  next.phi_tilde = s.phi_tilde - eta.x * detail::ls_gradient(x, lambda, s.phi_tilde, x.times(s.phi_tilde), y_psi);
  next.phi = normalize_directions(x, lambda, next.phi_tilde);
  next.psi_tilde = s.psi_tilde - eta.y * detail::ls_gradient(y, lambda, s.psi_tilde, y.times(s.psi_tilde), x_phi);
  next.psi = normalize_directions(y, lambda, next.psi_tilde);
  next.iteration = s.iteration + 1;
  return next;
}

// Cost model for one step on an n-row problem (dense nnz = n p). Per side:
// three thin products with its own view at 2 nnz k each (X phi~, X^T r,
// X phi~'), the k x k Gram (2 n k^2), the ridge term and the rotation
// (2 p k^2 each), an eigensolve (~10 k^3) and the vector updates (3 p k).
// Plus one product of each view with its normalized block (X phi, Y psi).
inline double appgrad_step_flops(Index n, Index nnz_x, Index nnz_y, Index p1, Index p2, Index k) {
  const double kk = static_cast<double>(k);
  auto side = [&](double nnz, double p) {
    return 3.0 * 2.0 * nnz * kk + 2.0 * static_cast<double>(n) * kk * kk + 4.0 * p * kk * kk + 10.0 * kk * kk * kk +
           3.0 * p * kk;
  };
  // Each side also multiplies the other view by its normalized partner.
  return side(static_cast<double>(nnz_x), static_cast<double>(p1)) +
         side(static_cast<double>(nnz_y), static_cast<double>(p2)) + 2.0 * static_cast<double>(nnz_x) * kk +
         2.0 * static_cast<double>(nnz_y) * kk;
}

inline double appgrad_step_flops(const DataMatrix& x, const DataMatrix& y, Index k) {
  return appgrad_step_flops(x.rows(), x.nnz(), y.nnz(), x.cols(), y.cols(), k);
}

// Gaussian initialization normalized so phi^T S_x phi = I; the tilde blocks
// start equal to the normalized ones.
inline AppGradState gaussian_init(const DataMatrix& x, const DataMatrix& y, Index k, double lambda,
                                  std::uint64_t seed) {
  if (k < 1 || k > std::min(x.cols(), y.cols())) throw DimensionError("rank must lie in [1, min(p1, p2)]");
  std::mt19937_64 rng(seed);
  AppGradState s;
  const Matrix gx = gaussian_matrix(x.cols(), k, rng);
  const Matrix gy = gaussian_matrix(y.cols(), k, rng);
  s.phi = normalize_directions(x, lambda, gx);
  s.psi = normalize_directions(y, lambda, gy);
  s.phi_tilde = s.phi;
  s.psi_tilde = s.psi;
  return s;
}

// State (Phi, Psi, Phi Lambda, Psi Lambda) built from a whitened model.
inline AppGradState fixed_point_state(const CcaModel& m) {
  AppGradState s;
  s.phi = m.phi;
  s.psi = m.psi;
  s.phi_tilde = m.phi * m.lambda.asDiagonal();
  s.psi_tilde = m.psi * m.lambda.asDiagonal();
  return s;
}

// |next - prev R|_F for the orthogonal R best aligning prev to next.
inline double procrustes_distance(const Matrix& prev, const Matrix& next) {
  Eigen::JacobiSVD<Matrix> svd(prev.transpose() * next, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix r = svd.matrixU() * svd.matrixV().transpose();
  return (next - prev * r).norm();
}

struct TheoryStep {
  double eta = 0.0;
  double delta = 0.0;
  double rate = 0.0;  // guaranteed per-iteration contraction of e_t
};

// Step size and contraction factor for the local linear convergence
// guarantee. Requires l1 > l2 >= 0, L1, L2 >= 1 and
// e0 < 2 (l1^2 - l2^2) / L1 (strict).
inline TheoryStep theoretical_step_size(double l1, double l2, double big_l1, double big_l2, double e0) {
  if (!(l1 > l2) || !(l2 >= 0.0)) throw PreconditionError("need lambda1 > lambda2 >= 0");
  if (!(big_l1 >= 1.0) || !(big_l2 >= 1.0)) throw PreconditionError("need L1 >= 1 and L2 >= 1");
  if (!(e0 >= 0.0)) throw PreconditionError("initial error must be >= 0");
  const double gap = l1 * l1 - l2 * l2;
  const double bound = 2.0 * gap / big_l1;
  if (!(e0 < bound)) {
    throw PreconditionError("initial error " + std::to_string(e0) + " outside the contraction region e0 < " +
                            std::to_string(bound));
  }
  TheoryStep out;
  out.delta = 1.0 - std::sqrt(1.0 - (2.0 * gap - big_l1 * e0) / (2.0 * l1 * l1));
  out.eta = out.delta / (6.0 * big_l1);
  out.rate = 1.0 - out.delta * out.delta / (6.0 * big_l1 * big_l2);
  return out;
}

// e_t = |phi~ - l1 phi1|^2 + |psi~ - l1 psi1|^2 in Euclidean norms, with the
// sign of the truth chosen to minimize it.
inline double error_metric(const AppGradState& s, const CcaModel& truth) {
  if (s.rank() != 1) throw DimensionError("error metric is defined for rank-1 states");
  if (truth.rank() < 1 || truth.phi.rows() != s.phi_tilde.rows() || truth.psi.rows() != s.psi_tilde.rows()) {
    throw DimensionError("truth does not match the state dimensions");
  }
  const double l1 = truth.lambda(0);
  const Vector a = l1 * truth.phi.col(0);
  const Vector b = l1 * truth.psi.col(0);
  const double plus = (s.phi_tilde.col(0) - a).squaredNorm() + (s.psi_tilde.col(0) - b).squaredNorm();
  const double minus = (s.phi_tilde.col(0) + a).squaredNorm() + (s.psi_tilde.col(0) + b).squaredNorm();
  return std::min(plus, minus);
}

// Default step 1 / (2 L) with L a power-iteration estimate of
// max(lambda_max(S_x), lambda_max(S_y)).
inline StepSizes default_step_sizes(const DataMatrix& x, const DataMatrix& y, double lambda, std::uint64_t seed) {
  const double l = std::max(estimate_top_eigenvalue(x, lambda, seed), estimate_top_eigenvalue(y, lambda, seed + 1));
  if (!(l > 0.0)) throw DataError("data matrices are identically zero");
  const double eta = 1.0 / (2.0 * l);
  return {eta, eta};
}

// Optional evaluation targets for traces. Pointers are non-owning.
struct Evaluation {
  const CcaModel* oracle = nullptr;          // in-sample truth (PCC)
  const DataMatrix* holdout_x = nullptr;     // held-out rows
  const DataMatrix* holdout_y = nullptr;
  const CcaModel* holdout_oracle = nullptr;  // truth recomputed on held-out rows
  const CcaModel* rank1_truth = nullptr;     // enables e_t for rank-1 runs
  Index eval_rank = 0;                       // score the best eval_rank directions (0: all)
};

struct AppGradOptions {
  Index k = 20;
  double lambda = 0.0;
  std::optional<StepSizes> eta;  // default_step_sizes when absent
  int max_iters = 2000;
  double tol = 1e-7;             // relative Procrustes movement
  std::uint64_t seed = 0;
  int trace_every = 1;           // 0 disables per-iteration tracing
  std::optional<double> target_pcc;  // stop once traced PCC reaches it
  bool record_wall_time = false;
};

struct RunResult {
  CcaModel model;
  RunReport report;
  AppGradState state;
};

namespace detail {

inline TraceRecord evaluate(const AppGradState& s, const DataMatrix& x, const DataMatrix& y, const Evaluation& ev,
                            double lambda) {
  TraceRecord rec;
  rec.iteration = s.iteration;
  Matrix a = s.phi;
  Matrix b = s.psi;
  if (ev.eval_rank > 0 && ev.eval_rank < s.rank()) {
    const CcaModel best = diagonalize_captured(x, y, s.phi, s.psi, ev.eval_rank, lambda);
    a = best.phi;
    b = best.psi;
  }
  rec.tcc = tcc(x, y, a, b);
  if (ev.oracle) rec.pcc = rec.tcc / tcc(x, y, *ev.oracle);
  if (ev.holdout_x && ev.holdout_y) {
    rec.tcc_holdout = tcc(*ev.holdout_x, *ev.holdout_y, a, b);
    if (ev.holdout_oracle) rec.pcc_holdout = *rec.tcc_holdout / tcc(*ev.holdout_x, *ev.holdout_y, *ev.holdout_oracle);
  }
  if (ev.rank1_truth && s.rank() == 1) rec.error = error_metric(s, *ev.rank1_truth);
  return rec;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Shared final step of both runners: diagonalize, score, summarize.
inline void finish_run(RunResult& out, const DataMatrix& x, const DataMatrix& y, const Evaluation& ev, double lambda) {
  const Index keep = ev.eval_rank > 0 && ev.eval_rank < out.state.rank() ? ev.eval_rank : out.state.rank();
  out.model = diagonalize_captured(x, y, out.state.phi, out.state.psi, keep, lambda);
  out.report.final_tcc = tcc(x, y, out.model);
  if (ev.oracle) out.report.final_pcc = *out.report.final_tcc / tcc(x, y, *ev.oracle);
  if (ev.holdout_x && ev.holdout_y && ev.holdout_oracle) {
    out.report.final_pcc_holdout = pcc(*ev.holdout_x, *ev.holdout_y, out.model, *ev.holdout_oracle);
  }
}

}  // namespace detail

// Batch AppGrad driver. Stops when the Procrustes-aligned movement of both
// normalized blocks, relative to their Frobenius norms, drops below tol, when
// a traced PCC reaches target_pcc, or after max_iters. On exhaustion the
// traced state with the highest in-sample TCC is returned.
inline RunResult run_appgrad(const DataMatrix& x, const DataMatrix& y, const AppGradOptions& opt,
                             std::optional<AppGradState> init = std::nullopt, const Evaluation& ev = {}) {
  if (x.rows() != y.rows()) throw DimensionError("X and Y must have the same number of rows");
  if (opt.k < 1 || opt.k > std::min(x.cols(), y.cols())) throw DimensionError("rank must lie in [1, min(p1, p2)]");
  if (opt.max_iters < 0 || opt.trace_every < 0) throw InputError("max_iters and trace_every must be >= 0");
  const StepSizes eta = opt.eta ? *opt.eta : default_step_sizes(x, y, opt.lambda, opt.seed ^ 0x9e3779b97f4a7c15ULL);

  RunResult out;
  out.state = init ? std::move(*init) : gaussian_init(x, y, opt.k, opt.lambda, opt.seed);
  detail::check_state(out.state, x, y);
  if (out.state.rank() != opt.k) throw DimensionError("initial state rank differs from k");
  out.state.iteration = 0;

  auto& rep = out.report;
  rep.solver = "appgrad";
  rep.seed = opt.seed;
  rep.config = {{"k", std::to_string(opt.k)},
                {"lambda", detail::fmt(opt.lambda)},
                {"eta_x", detail::fmt(eta.x)},
                {"eta_y", detail::fmt(eta.y)},
                {"max_iters", std::to_string(opt.max_iters)},
                {"tol", detail::fmt(opt.tol)}};

  const double step_cost = appgrad_step_flops(x, y, opt.k);
  const auto start = std::chrono::steady_clock::now();
  std::optional<AppGradState> best;
  double best_tcc = -1.0;

  auto trace = [&](const AppGradState& s) {
    TraceRecord rec = detail::evaluate(s, x, y, ev, opt.lambda);
    rec.flops = rep.total_flops;
    if (opt.record_wall_time) {
      rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    if (rec.tcc > best_tcc) {
      best_tcc = rec.tcc;
      best = s;
    }
    rep.records.push_back(rec);
    return rec;
  };
  if (opt.trace_every > 0) trace(out.state);

  for (int t = 1; t <= opt.max_iters; ++t) {
    AppGradState next = opt.k == 1 ? appgrad_step_rank1(out.state, eta, x, y, opt.lambda)
                                   : appgrad_step(out.state, eta, x, y, opt.lambda);
    rep.total_flops += step_cost;
    const double move = std::max(procrustes_distance(out.state.phi, next.phi) / next.phi.norm(),
                                 procrustes_distance(out.state.psi, next.psi) / next.psi.norm());
    out.state = std::move(next);
    rep.iterations = t;
    const bool last = move < opt.tol || t == opt.max_iters;
    if (opt.trace_every > 0 && (t % opt.trace_every == 0 || last)) {
      const TraceRecord rec = trace(out.state);
      if (opt.target_pcc && rec.pcc && *rec.pcc >= *opt.target_pcc) {
        rep.converged = true;
        break;
      }
    }
    if (move < opt.tol) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged && best) out.state = *best;
  detail::finish_run(out, x, y, ev, opt.lambda);
  return out;
}

}  // namespace scca
