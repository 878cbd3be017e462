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

// Solver configuration: a flat "key = value" text format ('#' comments) whose
// keys double as command-line overrides. The resolved configuration is
// embedded in every run report.

#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scca/errors.hpp"
#include "scca/harness/io.hpp"
#include "scca/harness/planted.hpp"
#include "scca/kernel.hpp"
#include "scca/stochastic.hpp"

namespace scca {

enum class SolverKind { spectral, qr, als, appgrad, stochastic_appgrad, nw, dw, pca_cca, kernel_appgrad };

inline SolverKind parse_solver_kind(std::string_view s) {
  if (s == "spectral") return SolverKind::spectral;
  if (s == "qr") return SolverKind::qr;
  if (s == "als") return SolverKind::als;
  if (s == "appgrad") return SolverKind::appgrad;
  if (s == "stochastic-appgrad" || s == "stochastic") return SolverKind::stochastic_appgrad;
  if (s == "nw") return SolverKind::nw;
  if (s == "dw") return SolverKind::dw;
  if (s == "pca-cca" || s == "pca") return SolverKind::pca_cca;
  if (s == "kernel-appgrad" || s == "kernel") return SolverKind::kernel_appgrad;
  throw InputError("unknown solver '" + std::string(s) + "'");
}

inline std::string to_string(SolverKind k) {
  switch (k) {
    case SolverKind::spectral: return "spectral";
    case SolverKind::qr: return "qr";
    case SolverKind::als: return "als";
    case SolverKind::appgrad: return "appgrad";
    case SolverKind::stochastic_appgrad: return "stochastic-appgrad";
    case SolverKind::nw: return "nw";
    case SolverKind::dw: return "dw";
    case SolverKind::pca_cca: return "pca-cca";
    case SolverKind::kernel_appgrad: return "kernel-appgrad";
  }
  return "unknown";
}

inline ScheduleKind parse_schedule_kind(std::string_view s) {
  if (s == "constant") return ScheduleKind::constant;
  if (s == "inverse-t") return ScheduleKind::inverse_t;
  if (s == "inverse-sqrt-t") return ScheduleKind::inverse_sqrt_t;
  throw InputError("unknown schedule '" + std::string(s) + "' (constant, inverse-t, inverse-sqrt-t)");
}

inline std::string to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::inverse_t: return "inverse-t";
    case ScheduleKind::inverse_sqrt_t: return "inverse-sqrt-t";
  }
  return "unknown";
}

inline SamplingMode parse_sampling_mode(std::string_view s) {
  if (s == "with-replacement") return SamplingMode::with_replacement;
  if (s == "without-replacement") return SamplingMode::without_replacement;
  if (s == "sequential") return SamplingMode::sequential;
  throw InputError("unknown sampling mode '" + std::string(s) + "'");
}

inline std::string to_string(SamplingMode m) {
  switch (m) {
    case SamplingMode::with_replacement: return "with-replacement";
    case SamplingMode::without_replacement: return "without-replacement";
    case SamplingMode::sequential: return "sequential";
  }
  return "unknown";
}

// "linear", "rbf:<sigma>", "poly:<degree>[:<offset>]".
inline KernelSpec parse_kernel_spec(std::string_view s) {
  const auto parts = io_detail::split(s, ':');
  KernelSpec spec;
  double v = 0.0;
  auto number = [&](std::string_view f) {
    if (!io_detail::parse_double(f, v)) throw InputError("bad kernel parameter '" + std::string(f) + "'");
    return v;
  };
  if (parts[0] == "linear" && parts.size() == 1) {
    spec.kind = KernelKind::linear;
  } else if (parts[0] == "rbf" && parts.size() <= 2) {
    spec.kind = KernelKind::rbf;
    if (parts.size() == 2) spec.bandwidth = number(parts[1]);
  } else if ((parts[0] == "poly" || parts[0] == "polynomial") && parts.size() <= 3) {
    spec.kind = KernelKind::polynomial;
    if (parts.size() >= 2) spec.degree = static_cast<int>(number(parts[1]));
    if (parts.size() == 3) spec.offset = number(parts[2]);
  } else {
    throw InputError("bad kernel spec '" + std::string(s) + "' (linear, rbf:<sigma>, poly:<d>[:<c>])");
  }
  validate(spec);
  return spec;
}

inline std::string to_string(const KernelSpec& s) {
  switch (s.kind) {
    case KernelKind::linear: return "linear";
    case KernelKind::rbf: return "rbf:" + io_detail::format_double(s.bandwidth);
    case KernelKind::polynomial:
      return "poly:" + std::to_string(s.degree) + ":" + io_detail::format_double(s.offset);
  }
  return "unknown";
}

struct SolverConfig {
  SolverKind solver = SolverKind::appgrad;
  Index k = 20;
  Index oversample = 0;                 // l: iterative solvers run at rank k + l
  double lambda = 0.0;
  std::optional<double> eta;            // same step on both views; default 1/(2L)
  std::vector<double> eta_grid;         // nonempty: cross-validate the step
  ScheduleKind schedule = ScheduleKind::constant;
  double t0 = 100.0;
  Index batch_size = 500;
  SamplingMode sampling = SamplingMode::without_replacement;
  bool one_pass = false;
  long max_iters = 2000;                // iterations for stochastic runs
  double tol = 1e-7;
  std::uint64_t seed = 0;
  double holdout = 0.0;                 // fraction of rows held out, 0 for none
  std::optional<KernelSpec> kernel;
  std::optional<Index> pca_m;
  long trace_every = 0;                 // 0: every iteration (batch) / every epoch (stochastic)
  bool timing = false;                  // record wall time (breaks byte-identical reports)

  // Data: either two files or a planted instance.
  std::string x_path;
  std::string y_path;
  FileFormat format = FileFormat::csv;
  PlantedParams planted;
};

namespace config_detail {

template <class T>
T parse_integer(std::string_view key, std::string_view v) {
  T out{};
  v = io_detail::trim(v);
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw InputError("key '" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
  }
  return out;
}

inline double parse_real(std::string_view key, std::string_view v) {
  double out = 0.0;
  if (!io_detail::parse_double(v, out)) {
    throw InputError("key '" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
  return out;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
  v = io_detail::trim(v);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError("key '" + std::string(key) + "' expects a boolean, got '" + std::string(v) + "'");
}

inline std::vector<double> parse_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  for (auto f : io_detail::split(v, ',')) out.push_back(parse_real(key, f));
  return out;
}

inline std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += io_detail::format_double(v[i]);
  }
  return out;
}

}  // namespace config_detail

// Sets one key. Throws InputError for unknown keys or malformed values.
inline void set_config_value(SolverConfig& c, std::string_view key, std::string_view raw) {
  using namespace config_detail;
  const std::string_view v = io_detail::trim(raw);
  if (key == "solver") c.solver = parse_solver_kind(v);
  else if (key == "k") c.k = parse_integer<Index>(key, v);
  else if (key == "oversample") c.oversample = parse_integer<Index>(key, v);
  else if (key == "lambda") c.lambda = parse_real(key, v);
  else if (key == "eta") c.eta = parse_real(key, v);
  else if (key == "eta_grid") c.eta_grid = parse_list(key, v);
  else if (key == "schedule") c.schedule = parse_schedule_kind(v);
  else if (key == "t0") c.t0 = parse_real(key, v);
  else if (key == "batch_size") c.batch_size = parse_integer<Index>(key, v);
  else if (key == "sampling") c.sampling = parse_sampling_mode(v);
  else if (key == "one_pass") c.one_pass = parse_bool(key, v);
  else if (key == "max_iters") c.max_iters = parse_integer<long>(key, v);
  else if (key == "tol") c.tol = parse_real(key, v);
  else if (key == "seed") c.seed = parse_integer<std::uint64_t>(key, v);
  else if (key == "holdout") c.holdout = parse_real(key, v);
  else if (key == "kernel") c.kernel = parse_kernel_spec(v);
  else if (key == "pca_m") c.pca_m = parse_integer<Index>(key, v);
  else if (key == "trace_every") c.trace_every = parse_integer<long>(key, v);
  else if (key == "timing") c.timing = parse_bool(key, v);
  else if (key == "x") c.x_path = std::string(v);
  else if (key == "y") c.y_path = std::string(v);
  else if (key == "format") c.format = parse_file_format(v);
  else if (key == "n") c.planted.n = parse_integer<Index>(key, v);
  else if (key == "p1") c.planted.p1 = parse_integer<Index>(key, v);
  else if (key == "p2") c.planted.p2 = parse_integer<Index>(key, v);
  else if (key == "correlations") c.planted.correlations = parse_list(key, v);
  else if (key == "noise") c.planted.noise = parse_real(key, v);
  else if (key == "profile") {
    if (v == "isotropic") c.planted.profile = Conditioning::isotropic;
    else if (v == "rotated") c.planted.profile = Conditioning::rotated;
    else throw InputError("unknown conditioning profile '" + std::string(v) + "' (isotropic, rotated)");
  } else if (key == "condition") c.planted.condition = parse_real(key, v);
  else throw InputError("unknown configuration key '" + std::string(key) + "'");
}

// Domain checks shared by file and command-line input.
inline void validate(const SolverConfig& c) {
  if (c.k < 1) throw InputError("k must be >= 1");
  if (c.oversample < 0) throw InputError("oversample must be >= 0");
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw InputError("lambda must be finite and >= 0");
  if (c.eta && !(*c.eta > 0.0)) throw InputError("eta must be > 0");
  for (double g : c.eta_grid) {
    if (!(g > 0.0)) throw InputError("eta_grid entries must be > 0");
  }
  if (!(c.t0 > 0.0)) throw InputError("t0 must be > 0");
  if (c.solver == SolverKind::stochastic_appgrad && c.batch_size < 1) throw InputError("batch_size must be >= 1");
  if (c.max_iters < 0) throw InputError("max_iters must be >= 0");
  if (!(c.tol >= 0.0)) throw InputError("tol must be >= 0");
  if (!(c.holdout >= 0.0 && c.holdout <= 0.5)) throw InputError("holdout must lie in [0, 0.5]");
  if (c.trace_every < 0) throw InputError("trace_every must be >= 0");
  if (c.pca_m && *c.pca_m < c.k) throw InputError("pca_m must be >= k");
  if (c.x_path.empty() != c.y_path.empty()) throw InputError("give both x and y data paths, or neither");
}

// Parses "key = value" lines. Blank lines and '#' comments are ignored.
inline void read_config(std::istream& in, SolverConfig& c) {
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = io_detail::trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", lineno);
    try {
      set_config_value(c, io_detail::trim(s.substr(0, eq)), s.substr(eq + 1));
    } catch (const InputError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
}

inline SolverConfig load_config(const std::string& path) {
  auto in = io_detail::open_in(path);
  SolverConfig c;
  try {
    read_config(in, c);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
  return c;
}

// Resolved configuration as ordered key/value pairs; read_config accepts it.
inline std::vector<std::pair<std::string, std::string>> config_entries(const SolverConfig& c) {
  using io_detail::format_double;
  std::vector<std::pair<std::string, std::string>> out{
      {"solver", to_string(c.solver)},
      {"k", std::to_string(c.k)},
      {"oversample", std::to_string(c.oversample)},
      {"lambda", format_double(c.lambda)},
  };
  if (c.eta) out.emplace_back("eta", format_double(*c.eta));
  if (!c.eta_grid.empty()) out.emplace_back("eta_grid", config_detail::format_list(c.eta_grid));
  out.emplace_back("schedule", to_string(c.schedule));
  out.emplace_back("t0", format_double(c.t0));
  out.emplace_back("batch_size", std::to_string(c.batch_size));
  out.emplace_back("sampling", to_string(c.sampling));
  out.emplace_back("one_pass", c.one_pass ? "true" : "false");
  out.emplace_back("max_iters", std::to_string(c.max_iters));
  out.emplace_back("tol", format_double(c.tol));
  out.emplace_back("seed", std::to_string(c.seed));
  out.emplace_back("holdout", format_double(c.holdout));
  if (c.kernel) out.emplace_back("kernel", to_string(*c.kernel));
  if (c.pca_m) out.emplace_back("pca_m", std::to_string(*c.pca_m));
  out.emplace_back("trace_every", std::to_string(c.trace_every));
  out.emplace_back("timing", c.timing ? "true" : "false");
  if (!c.x_path.empty()) {
    out.emplace_back("x", c.x_path);
    out.emplace_back("y", c.y_path);
    out.emplace_back("format", c.format == FileFormat::csv ? "csv" : "matrix-market");
  } else {
    out.emplace_back("n", std::to_string(c.planted.n));
    out.emplace_back("p1", std::to_string(c.planted.p1));
    out.emplace_back("p2", std::to_string(c.planted.p2));
    out.emplace_back("correlations", config_detail::format_list(c.planted.correlations));
    out.emplace_back("noise", format_double(c.planted.noise));
    out.emplace_back("profile", c.planted.profile == Conditioning::isotropic ? "isotropic" : "rotated");
    out.emplace_back("condition", format_double(c.planted.condition));
  }
  return out;
}

inline void write_config(std::ostream& out, const SolverConfig& c) {
  for (const auto& [k, v] : config_entries(c)) out << k << " = " << v << '\n';
}

}  // namespace scca
