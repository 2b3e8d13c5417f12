#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "mixkern/errors.hpp"
#include "mixkern/estimators.hpp"
#include "mixkern/processes.hpp"

namespace mixkern {

/// Locale-independent decimal formatting with 17 significant digits, enough
/// for binary64 values to survive a text round trip exactly.  Non-finite
/// values print as inf / -inf / nan.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

/// Locale-independent parse of a full token into a double.  Accepts the
/// spellings fmt_double produces; anything else (including trailing junk)
/// raises bad-range naming the offending token.
inline double parse_double(const std::string& tok) {
  if (tok == "inf" || tok == "+inf" || tok == "infinity") return std::numeric_limits<double>::infinity();
  if (tok == "-inf" || tok == "-infinity") return -std::numeric_limits<double>::infinity();
  if (tok == "nan") return std::numeric_limits<double>::quiet_NaN();
  double out = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc() || res.ptr != last)
    raise("bad-range", "cannot parse '" + tok + "' as a number");
  return out;
}

inline long long parse_int(const std::string& tok) {
  long long out = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    raise("bad-range", "cannot parse '" + tok + "' as an integer");
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) raise("io-error", "cannot open '" + path + "' for writing");
  f << text;
  if (!f) raise("io-error", "failed writing '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) raise("io-error", "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Serialize a series or panel to CSV with schema t,i,x,z1..zd.  Rows are
/// period-major; series use i = 0 throughout; samples without a response
/// leave the x column empty.
inline std::string sample_to_csv(const sample& s) {
  std::ostringstream out;
  out << "t,i,x";
  for (int j = 1; j <= s.d; ++j) out << ",z" << j;
  out << "\n";
  for (int row = 0; row < s.t; ++row) {
    out << row << ",0,";
    if (s.has_x) out << fmt_double(s.x[static_cast<std::size_t>(row)]);
    for (int j = 0; j < s.d; ++j)
      out << ',' << fmt_double(s.z[static_cast<std::size_t>(row) * s.d + j]);
    out << "\n";
  }
  return out.str();
}

inline std::string panel_to_csv(const panel_sample& p) {
  std::ostringstream out;
  out << "t,i,x";
  for (int j = 1; j <= p.d; ++j) out << ",z" << j;
  out << "\n";
  for (int row = 0; row < p.t; ++row)
    for (int i = 0; i < p.n; ++i) {
      out << row << ',' << i << ',' << fmt_double(p.x_col(i)[row]);
      for (int j = 0; j < p.d; ++j)
        out << ',' << fmt_double(p.z_col(i)[static_cast<std::size_t>(row) * p.d + j]);
      out << "\n";
    }
  return out.str();
}

/// Parsed CSV data; n = 1 with all i = 0 means a plain series.
struct csv_sample_data {
  int t{0};
  int n{1};
  int d{1};
  bool has_x{false};
  std::vector<double> z;  ///< individual-major, (i*T + t)*d + j
  std::vector<double> x;  ///< individual-major, i*T + t
};

/// Parse the t,i,x,z1..zd schema back into columnar storage.  The file must
/// cover a full rectangle of (t, i) pairs; the x column must be all-present
/// or all-empty.
inline csv_sample_data csv_to_sample_data(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) raise("bad-range", "empty sample CSV");
  auto header = detail::split_csv_line(line);
  if (header.size() < 4 || header[0] != "t" || header[1] != "i" || header[2] != "x")
    raise("bad-range", "sample CSV header must be t,i,x,z1..zd");
  const int d = static_cast<int>(header.size()) - 3;
  for (int j = 0; j < d; ++j)
    if (header[static_cast<std::size_t>(3 + j)] != "z" + std::to_string(j + 1))
      raise("bad-range", "sample CSV header must be t,i,x,z1..zd");

  struct row_rec {
    int t, i;
    bool has_x;
    double x;
    std::vector<double> z;
  };
  std::vector<row_rec> rows;
  int max_t = -1, max_i = -1;
  bool any_x = false, any_missing_x = false;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto f = detail::split_csv_line(line);
    if (static_cast<int>(f.size()) != 3 + d)
      raise("bad-range", "sample CSV row has " + std::to_string(f.size()) + " fields, expected " +
                             std::to_string(3 + d));
    row_rec r;
    r.t = static_cast<int>(parse_int(f[0]));
    r.i = static_cast<int>(parse_int(f[1]));
    r.has_x = !f[2].empty();
    r.x = r.has_x ? parse_double(f[2]) : 0.0;
    (r.has_x ? any_x : any_missing_x) = true;
    r.z.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) r.z[static_cast<std::size_t>(j)] = parse_double(f[static_cast<std::size_t>(3 + j)]);
    if (r.t < 0 || r.i < 0) raise("bad-range", "sample CSV indices must be nonnegative");
    max_t = std::max(max_t, r.t);
    max_i = std::max(max_i, r.i);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) raise("bad-range", "sample CSV has no data rows");
  if (any_x && any_missing_x)
    raise("bad-range", "sample CSV mixes present and missing x values");

  csv_sample_data out;
  out.t = max_t + 1;
  out.n = max_i + 1;
  out.d = d;
  out.has_x = any_x;
  const std::size_t cells = static_cast<std::size_t>(out.t) * out.n;
  if (rows.size() != cells)
    raise("bad-range", "sample CSV must cover a full (t, i) rectangle: got " +
                           std::to_string(rows.size()) + " rows for " + std::to_string(cells) +
                           " cells");
  out.z.assign(cells * d, std::numeric_limits<double>::quiet_NaN());
  if (out.has_x) out.x.assign(cells, 0.0);
  std::vector<char> seen(cells, 0);
  for (const auto& r : rows) {
    const std::size_t cell = static_cast<std::size_t>(r.i) * out.t + r.t;
    if (seen[cell]) raise("bad-range", "sample CSV repeats a (t, i) pair");
    seen[cell] = 1;
    for (int j = 0; j < d; ++j) out.z[cell * d + j] = r.z[static_cast<std::size_t>(j)];
    if (out.has_x) out.x[cell] = r.x;
  }
  return out;
}

inline sample csv_data_to_series(const csv_sample_data& data) {
  if (data.n != 1) raise("unsupported-combination", "expected a series CSV, got a panel (N > 1)");
  sample s;
  s.t = data.t;
  s.d = data.d;
  s.z = data.z;
  s.has_x = data.has_x;
  s.x = data.x;
  return s;
}

inline panel_sample csv_data_to_panel(const csv_sample_data& data) {
  if (!data.has_x) raise("no-response-variable", "panel CSV requires the x column");
  panel_sample p;
  p.t = data.t;
  p.n = data.n;
  p.d = data.d;
  p.z = data.z;
  p.x = data.x;
  return p;
}

/// Curve CSV with schema z1..zd,value,denominator,flag.
inline std::string curve_to_csv(int d, const std::vector<double>& grid,
                                const std::vector<est_result>& vals) {
  const std::size_t n_pts = grid.size() / static_cast<std::size_t>(d);
  if (vals.size() != n_pts) raise("dimension-mismatch", "curve grid/value length mismatch");
  std::ostringstream out;
  for (int j = 1; j <= d; ++j) out << (j == 1 ? "" : ",") << 'z' << j;
  out << ",value,denominator,flag\n";
  for (std::size_t p = 0; p < n_pts; ++p) {
    for (int j = 0; j < d; ++j) out << (j == 0 ? "" : ",") << fmt_double(grid[p * d + j]);
    out << ',' << fmt_double(vals[p].value) << ',' << fmt_double(vals[p].denominator) << ','
        << est_flag_name(vals[p].flag) << "\n";
  }
  return out.str();
}

}  // namespace mixkern
