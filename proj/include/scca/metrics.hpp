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

// Correlation-capture metrics (TCC, PCC), subspace angles and run traces.

#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "scca/matrix_core.hpp"
#include "scca/model.hpp"

namespace scca {

namespace detail {

// Singular values of a projection below this fraction of the largest are
// treated as a collapsed direction.
inline constexpr double kCollapseRatio = 1e-10;

struct ColumnSpace {
  Matrix basis;  // orthonormal, n x rank
  bool collapsed = false;
};

inline ColumnSpace column_space(const Matrix& p) {
  Eigen::JacobiSVD<Matrix> svd(p, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  Index rank = 0;
  const double smax = s.size() > 0 ? s(0) : 0.0;
  while (rank < s.size() && smax > 0.0 && s(rank) > kCollapseRatio * smax) ++rank;
  return {svd.matrixU().leftCols(rank), rank < p.cols()};
}

}  // namespace detail

struct CanonicalCorrelations {
  Vector values;  // nonincreasing, in [0, 1]
  bool rank_collapsed = false;
};

// Canonical correlations between the column spaces of two n x k matrices,
// i.e. cosines of the principal angles between span(P) and span(Q) in R^n.
// Depends only on the spans, so it is invariant to invertible
// right-multiplication of either argument.
inline CanonicalCorrelations canonical_correlations(const Matrix& p, const Matrix& q) {
  if (p.rows() != q.rows()) throw DimensionError("projections must have the same number of rows");
  const detail::ColumnSpace a = detail::column_space(p);
  const detail::ColumnSpace b = detail::column_space(q);
  CanonicalCorrelations out;
  out.rank_collapsed = a.collapsed || b.collapsed;
  if (a.basis.cols() == 0 || b.basis.cols() == 0) {
    out.values = Vector::Zero(0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(a.basis.transpose() * b.basis);
  out.values = svd.singularValues().cwiseMin(1.0).cwiseMax(0.0);
  return out;
}

// Total correlations captured by directions A (p1 x k), B (p2 x k): the sum
// of canonical correlations between XA and YB.
inline double tcc(const DataMatrix& x, const DataMatrix& y, const Matrix& a, const Matrix& b) {
  if (x.rows() != y.rows()) throw DimensionError("X and Y must have the same number of rows");
  return canonical_correlations(x.times(a), y.times(b)).values.sum();
}

inline double tcc(const DataMatrix& x, const DataMatrix& y, const CcaModel& m) { return tcc(x, y, m.phi, m.psi); }

// TCC of the estimate over TCC of the oracle directions, both on (X, Y).
// Pass held-out rows to get the out-of-sample version; there both numerator
// and denominator are recomputed, so values above 1 are possible.
inline double pcc(const DataMatrix& x, const DataMatrix& y, const Matrix& a, const Matrix& b,
                  const Matrix& oracle_phi, const Matrix& oracle_psi) {
  const double denom = tcc(x, y, oracle_phi, oracle_psi);
  if (!(denom > 1e-14)) throw NumericError("oracle captures no correlation; PCC undefined");
  return tcc(x, y, a, b) / denom;
}

inline double pcc(const DataMatrix& x, const DataMatrix& y, const CcaModel& est, const CcaModel& oracle) {
  return pcc(x, y, est.phi, est.psi, oracle.phi, oracle.psi);
}

struct PrincipalAngles {
  Vector cosines;  // nonincreasing, in [0, 1]
  bool rank_deficient = false;
};

// Cosines of the principal angles between span(A) and span(B) under the
// inner product <u, v> = u^T S v.
inline PrincipalAngles principal_angles(const Matrix& a, const Matrix& b, const Matrix& s) {
  if (a.cols() != b.cols()) throw DimensionError("principal angles need equal column counts");
  if (a.rows() != s.rows() || b.rows() != s.rows() || s.rows() != s.cols()) {
    throw DimensionError("inner-product matrix does not match the bases");
  }
  bool deficient = false;
  auto s_orthonormal = [&](const Matrix& m) {
    const SymEigen e = sym_eigen(m.transpose() * s * m);
    if (e.max() <= 0.0 || e.min() <= 1e-12 * e.max()) deficient = true;
    return Matrix(m * inv_sqrt_from_eigen(e, default_floor(e)));
  };
  const Matrix qa = s_orthonormal(a);
  const Matrix qb = s_orthonormal(b);
  Eigen::JacobiSVD<Matrix> svd(qa.transpose() * s * qb);
  return {svd.singularValues().cwiseMin(1.0).cwiseMax(0.0), deficient};
}

inline PrincipalAngles principal_angles(const Matrix& a, const Matrix& b) {
  return principal_angles(a, b, Matrix::Identity(a.rows(), a.rows()));
}

// One trace line. Optional fields are omitted from the serialized record
// when absent.
struct TraceRecord {
  long iteration = 0;
  double flops = 0.0;
  std::optional<double> wall_seconds;
  double tcc = 0.0;
  std::optional<double> tcc_holdout;
  std::optional<double> pcc;
  std::optional<double> pcc_holdout;
  std::optional<double> error;
};

struct RunReport {
  std::string solver;
  std::uint64_t seed = 0;
  // Resolved configuration as key/value text, in emission order.
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<TraceRecord> records;
  long iterations = 0;
  bool converged = false;
  double total_flops = 0.0;
  std::optional<double> final_tcc;
  std::optional<double> final_pcc;
  std::optional<double> final_pcc_holdout;
};

// Throws if the trace is not strictly increasing in iteration, has
// decreasing FLOPs, or carries non-finite scalars.
inline void validate(const RunReport& r) {
  auto finite = [](const std::optional<double>& v) { return !v || std::isfinite(*v); };
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    const auto& rec = r.records[i];
    if (!std::isfinite(rec.flops) || !std::isfinite(rec.tcc) || !finite(rec.wall_seconds) ||
        !finite(rec.tcc_holdout) || !finite(rec.pcc) || !finite(rec.pcc_holdout) || !finite(rec.error)) {
      throw NumericError("trace record " + std::to_string(i) + " has a non-finite value");
    }
    if (i > 0) {
      if (rec.iteration <= r.records[i - 1].iteration) throw InputError("trace iterations must increase");
      if (rec.flops < r.records[i - 1].flops) throw InputError("trace FLOPs must not decrease");
    }
  }
}

// Report format: JSON Lines, one object per line.
//   {"record":"header","solver":S,"seed":N,"config":{key:value,...}}
//   {"record":"iter","t":T,"flops":F[,"wall_s":W],"tcc":C[,"tcc_holdout":H]
//       [,"pcc":P][,"pcc_holdout":Q][,"e_t":E]}            (one per trace point)
//   {"record":"summary","iterations":T,"converged":B,"flops":F
//       [,"tcc":C][,"pcc":P][,"pcc_holdout":Q]}
// Keys appear in exactly this order.
inline void write_report(std::ostream& os, const RunReport& r) {
  using nlohmann::ordered_json;
  ordered_json header;
  header["record"] = "header";
  header["solver"] = r.solver;
  header["seed"] = r.seed;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : r.config) cfg[k] = v;
  header["config"] = cfg;
  os << header.dump() << '\n';

  for (const auto& rec : r.records) {
    ordered_json j;
    j["record"] = "iter";
    j["t"] = rec.iteration;
    j["flops"] = rec.flops;
    if (rec.wall_seconds) j["wall_s"] = *rec.wall_seconds;
    j["tcc"] = rec.tcc;
    if (rec.tcc_holdout) j["tcc_holdout"] = *rec.tcc_holdout;
    if (rec.pcc) j["pcc"] = *rec.pcc;
    if (rec.pcc_holdout) j["pcc_holdout"] = *rec.pcc_holdout;
    if (rec.error) j["e_t"] = *rec.error;
    os << j.dump() << '\n';
  }

  ordered_json s;
  s["record"] = "summary";
  s["iterations"] = r.iterations;
  s["converged"] = r.converged;
  s["flops"] = r.total_flops;
  if (r.final_tcc) s["tcc"] = *r.final_tcc;
  if (r.final_pcc) s["pcc"] = *r.final_pcc;
  if (r.final_pcc_holdout) s["pcc_holdout"] = *r.final_pcc_holdout;
  os << s.dump() << '\n';
}

inline RunReport read_report(std::istream& is) {
  using nlohmann::json;
  RunReport r;
  std::string line;
  long lineno = 0;
  bool have_header = false;
  auto opt = [](const json& j, const char* key) -> std::optional<double> {
    if (j.contains(key)) return j.at(key).get<double>();
    return std::nullopt;
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(e.what(), lineno);
    }
    const std::string kind = j.value("record", "");
    try {
      if (kind == "header") {
        r.solver = j.at("solver").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        // Parsing through nlohmann::json sorts keys; keep the file order instead.
        nlohmann::ordered_json cfg = nlohmann::ordered_json::parse(line).at("config");
        for (auto it = cfg.begin(); it != cfg.end(); ++it) r.config.emplace_back(it.key(), it.value().get<std::string>());
        have_header = true;
      } else if (kind == "iter") {
        TraceRecord rec;
        rec.iteration = j.at("t").get<long>();
        rec.flops = j.at("flops").get<double>();
        rec.wall_seconds = opt(j, "wall_s");
        rec.tcc = j.at("tcc").get<double>();
        rec.tcc_holdout = opt(j, "tcc_holdout");
        rec.pcc = opt(j, "pcc");
        rec.pcc_holdout = opt(j, "pcc_holdout");
        rec.error = opt(j, "e_t");
        r.records.push_back(rec);
      } else if (kind == "summary") {
        r.iterations = j.at("iterations").get<long>();
        r.converged = j.at("converged").get<bool>();
        r.total_flops = j.at("flops").get<double>();
        r.final_tcc = opt(j, "tcc");
        r.final_pcc = opt(j, "pcc");
        r.final_pcc_holdout = opt(j, "pcc_holdout");
      } else {
        throw ParseError("unknown record kind '" + kind + "'", lineno);
      }
    } catch (const json::exception& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (!have_header) throw ParseError("report has no header record", 0);
  return r;
}

// Plot-ready two-column text: cumulative FLOPs and PCC (TCC when no oracle
// was available), one trace point per line.
inline void write_flop_curve(std::ostream& os, const RunReport& r) {
  os << "# flops " << (r.records.empty() || r.records.front().pcc ? "pcc" : "tcc") << '\n';
  std::ostringstream line;
  line.precision(17);
  for (const auto& rec : r.records) {
    line.str("");
    line << rec.flops << ' ' << (rec.pcc ? *rec.pcc : rec.tcc) << '\n';
    os << line.str();
  }
}

// FLOPs recorded at the first trace point whose in-sample PCC reaches the
// target, if any.
inline std::optional<double> flops_to_reach(const RunReport& r, double target_pcc) {
  for (const auto& rec : r.records) {
    if (rec.pcc && *rec.pcc >= target_pcc) return rec.flops;
  }
  return std::nullopt;
}

}  // namespace scca
