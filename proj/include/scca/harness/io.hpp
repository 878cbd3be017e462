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

// Dataset and model file formats.
//
//   CSV           rows are samples, ',' separated, '.' decimal point, an
//                 optional non-numeric header line. Locale independent.
//   Matrix Market "%%MatrixMarket matrix coordinate real general" banner,
//                 '%' comments, a "rows cols nnz" size line, 1-based entries.
//   Dense text    a "rows cols" header line, then one row per line with
//                 space separated values (model files).
//
// Numbers are written in shortest round-trip form so write-then-read is
// exact.

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "scca/matrix_core.hpp"
#include "scca/model.hpp"

namespace scca {

enum class FileFormat { csv, matrix_market };

inline FileFormat parse_file_format(std::string_view s) {
  if (s == "csv") return FileFormat::csv;
  if (s == "mm" || s == "matrix-market" || s == "mtx") return FileFormat::matrix_market;
  throw InputError("unknown file format '" + std::string(s) + "' (expected csv or matrix-market)");
}

namespace io_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline bool parse_index(std::string_view s, long long& out) {
  s = trim(s);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc() && ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace io_detail

inline DataMatrix read_csv(std::istream& in) {
  std::vector<double> values;
  Index cols = 0;
  Index rows = 0;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (io_detail::trim(line).empty()) continue;
    const auto fields = io_detail::split(line, ',');
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size(); ++j) numeric = numeric && io_detail::parse_double(fields[j], row[j]);
    if (!numeric) {
      if (rows == 0 && cols == 0) {
        cols = static_cast<Index>(fields.size());  // header
        continue;
      }
      throw ParseError("row " + std::to_string(rows + 1) + " has a non-numeric field", lineno);
    }
    if (cols == 0) cols = static_cast<Index>(row.size());
    if (static_cast<Index>(row.size()) != cols) {
      throw ParseError("row " + std::to_string(rows + 1) + " has " + std::to_string(row.size()) + " fields, expected " +
                           std::to_string(cols),
                       lineno);
    }
    for (double v : row) {
      if (!std::isfinite(v)) throw ParseError("row " + std::to_string(rows + 1) + " has a non-finite value", lineno);
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0 || cols == 0) throw ParseError("CSV input has no data rows", lineno);
  Matrix m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(),
                                                                                                       rows, cols);
  return DataMatrix(std::move(m));
}

inline void write_csv(std::ostream& out, const DataMatrix& x) {
  const Matrix d = x.to_dense();
  std::string line;
  for (Index i = 0; i < d.rows(); ++i) {
    line.clear();
    for (Index j = 0; j < d.cols(); ++j) {
      if (j > 0) line += ',';
      line += io_detail::format_double(d(i, j));
    }
    line += '\n';
    out << line;
  }
}

inline DataMatrix read_matrix_market(std::istream& in) {
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty Matrix Market input", 1);
  ++lineno;
  const auto banner = io_detail::tokens(line);
  if (banner.size() != 5 || io_detail::lower(banner[0]) != "%%matrixmarket" || io_detail::lower(banner[1]) != "matrix" ||
      io_detail::lower(banner[2]) != "coordinate" ||
      (io_detail::lower(banner[3]) != "real" && io_detail::lower(banner[3]) != "integer") ||
      io_detail::lower(banner[4]) != "general") {
    throw ParseError("expected banner '%%MatrixMarket matrix coordinate real general'", lineno);
  }

  long long rows = -1, cols = -1, nnz = -1;
  std::vector<Triplet> entries;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = io_detail::tokens(line);
    if (t.empty() || t[0].front() == '%') continue;
    if (rows < 0) {
      if (t.size() != 3 || !io_detail::parse_index(t[0], rows) || !io_detail::parse_index(t[1], cols) ||
          !io_detail::parse_index(t[2], nnz) || rows < 1 || cols < 1 || nnz < 0) {
        throw ParseError("malformed size line (expected 'rows cols nnz')", lineno);
      }
      entries.reserve(static_cast<std::size_t>(nnz));
      continue;
    }
    long long i = 0, j = 0;
    double v = 0.0;
    if (t.size() != 3 || !io_detail::parse_index(t[0], i) || !io_detail::parse_index(t[1], j) ||
        !io_detail::parse_double(t[2], v)) {
      throw ParseError("malformed entry (expected 'row col value')", lineno);
    }
    if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError("entry index out of range", lineno);
    if (!std::isfinite(v)) throw ParseError("non-finite entry", lineno);
    if (static_cast<long long>(entries.size()) == nnz) throw ParseError("more entries than declared", lineno);
    entries.emplace_back(static_cast<Index>(i - 1), static_cast<Index>(j - 1), v);
  }
  if (rows < 0) throw ParseError("missing size line", lineno);
  if (static_cast<long long>(entries.size()) != nnz) {
    throw ParseError("declared " + std::to_string(nnz) + " entries, found " + std::to_string(entries.size()), lineno);
  }
  return DataMatrix::from_triplets(static_cast<Index>(rows), static_cast<Index>(cols), std::move(entries));
}

// Dense matrices are written with every entry, zeros included.
inline void write_matrix_market(std::ostream& out, const DataMatrix& x) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  if (x.is_sparse()) {
    const auto& s = x.sparse();
    out << s.rows() << ' ' << s.cols() << ' ' << s.nonZeros() << '\n';
    for (Index r = 0; r < s.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(s, r); it; ++it)
        out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << io_detail::format_double(it.value()) << '\n';
    return;
  }
  const Matrix& d = x.dense();
  out << d.rows() << ' ' << d.cols() << ' ' << d.size() << '\n';
  for (Index i = 0; i < d.rows(); ++i)
    for (Index j = 0; j < d.cols(); ++j) out << i + 1 << ' ' << j + 1 << ' ' << io_detail::format_double(d(i, j)) << '\n';
}

inline DataMatrix load_dataset(const std::string& path, FileFormat format) {
  auto in = io_detail::open_in(path);
  try {
    return format == FileFormat::csv ? read_csv(in) : read_matrix_market(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

inline void save_dataset(const std::string& path, const DataMatrix& x, FileFormat format) {
  auto out = io_detail::open_out(path);
  if (format == FileFormat::csv) {
    write_csv(out, x);
  } else {
    write_matrix_market(out, x);
  }
  if (!out) throw InputError("failed writing '" + path + "'");
}

inline void write_dense_text(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  std::string line;
  for (Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) line += ' ';
      line += io_detail::format_double(m(i, j));
    }
    line += '\n';
    out << line;
  }
}

inline Matrix read_dense_text(std::istream& in) {
  std::string line;
  long lineno = 0;
  long long rows = -1, cols = -1;
  while (rows < 0 && std::getline(in, line)) {
    ++lineno;
    const auto t = io_detail::tokens(line);
    if (t.empty()) continue;
    if (t.size() != 2 || !io_detail::parse_index(t[0], rows) || !io_detail::parse_index(t[1], cols) || rows < 0 ||
        cols < 0) {
      throw ParseError("expected header 'rows cols'", lineno);
    }
  }
  if (rows < 0) throw ParseError("missing header", lineno);
  Matrix m(rows, cols);
  for (long long i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw ParseError("expected " + std::to_string(rows) + " rows", lineno);
    ++lineno;
    const auto t = io_detail::tokens(line);
    if (static_cast<long long>(t.size()) != cols) throw ParseError("row has the wrong number of values", lineno);
    for (long long j = 0; j < cols; ++j) {
      if (!io_detail::parse_double(t[static_cast<std::size_t>(j)], m(i, j))) throw ParseError("bad number", lineno);
    }
  }
  return m;
}

// Writes <prefix>.phi.txt, <prefix>.psi.txt and <prefix>.lambda.txt.
inline void save_model(const std::string& prefix, const CcaModel& m) {
  auto write = [](const std::string& path, const Matrix& v) {
    auto out = io_detail::open_out(path);
    write_dense_text(out, v);
  };
  write(prefix + ".phi.txt", m.phi);
  write(prefix + ".psi.txt", m.psi);
  write(prefix + ".lambda.txt", m.lambda);
}

inline CcaModel load_model(const std::string& prefix) {
  auto read = [](const std::string& path) {
    auto in = io_detail::open_in(path);
    return read_dense_text(in);
  };
  CcaModel m;
  m.phi = read(prefix + ".phi.txt");
  m.psi = read(prefix + ".psi.txt");
  const Matrix l = read(prefix + ".lambda.txt");
  if (l.cols() != 1 || l.rows() != m.phi.cols()) throw ParseError("lambda file does not match phi", 0);
  m.lambda = l.col(0);
  return m;
}

}  // namespace scca
