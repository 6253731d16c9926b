#pragma once

// Run transcripts: UTF-8 CSV. Lines starting with '#' carry "key = value"
// metadata (the run configuration), then one header row, then one row per
// round. Vector fields are ';'-joined with 17 significant digits; learner
// internals that do not apply to the learner are left empty.
//
// Columns, in order:
//   t, w, g, h, f_w, f_u, u, vbar, b, alpha, m_hat, n, p, radius
// Internals are the values in force when w_t was produced.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gradvar/errors.hpp"
#include "gradvar/point.hpp"

namespace gradvar {

inline constexpr const char* kTranscriptHeader = "t,w,g,h,f_w,f_u,u,vbar,b,alpha,m_hat,n,p,radius";

struct TranscriptRow {
  std::size_t t = 0;
  Point w;
  Point g;
  Point h;
  double f_w = 0.0;
  double f_u = 0.0;
  Point u;
  std::optional<double> vbar;
  std::optional<double> b;
  std::optional<double> alpha;
  std::optional<double> m_hat;
  std::optional<std::size_t> n;
  std::optional<std::vector<double>> p;
  std::optional<double> radius;
};

struct Transcript {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<TranscriptRow> rows;

  std::optional<std::string> meta(const std::string& key) const {
    for (const auto& [k, v] : metadata)
      if (k == key) return v;
    return std::nullopt;
  }
};

namespace detail {

inline void put_double(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

inline void put_vector(std::ostream& os, std::span<const double> v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ';';
    put_double(os, v[i]);
  }
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("not a number: '" + std::string(s) + "'");
  if (!std::isfinite(v)) throw ParseError("not a finite number: '" + std::string(s) + "'");
  return v;
}

inline std::vector<double> parse_list(std::string_view s) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t sep = s.find(';', start);
    out.push_back(parse_double(s.substr(start, sep == std::string_view::npos ? sep : sep - start)));
    if (sep == std::string_view::npos) break;
    start = sep + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t sep = line.find(',', start);
    out.push_back(line.substr(start, sep == std::string_view::npos ? sep : sep - start));
    if (sep == std::string_view::npos) break;
    start = sep + 1;
  }
  return out;
}

inline std::optional<double> opt_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

}  // namespace detail

inline void write_transcript_header(std::ostream& os,
                                    const std::vector<std::pair<std::string, std::string>>& metadata) {
  for (const auto& [k, v] : metadata) os << "# " << k << " = " << v << '\n';
  os << kTranscriptHeader << '\n';
}

inline void write_transcript_row(std::ostream& os, const TranscriptRow& r) {
  using detail::put_double;
  using detail::put_vector;
  auto opt = [&](const std::optional<double>& v) {
    os << ',';
    if (v) put_double(os, *v);
  };
  os << r.t << ',';
  put_vector(os, r.w.coords());
  os << ',';
  put_vector(os, r.g.coords());
  os << ',';
  put_vector(os, r.h.coords());
  os << ',';
  put_double(os, r.f_w);
  os << ',';
  put_double(os, r.f_u);
  os << ',';
  put_vector(os, r.u.coords());
  opt(r.vbar);
  opt(r.b);
  opt(r.alpha);
  opt(r.m_hat);
  os << ',';
  if (r.n) os << *r.n;
  os << ',';
  if (r.p) put_vector(os, *r.p);
  opt(r.radius);
  os << '\n';
}

inline Transcript read_transcript(std::istream& is) {
  Transcript tr;
  std::string line;
  bool header_seen = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (header_seen) throw ParseError("metadata after header at line " + std::to_string(lineno));
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t");
        const auto b = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      tr.metadata.emplace_back(trim(line.substr(1, eq - 1)), trim(line.substr(eq + 1)));
      continue;
    }
    if (!header_seen) {
      if (line != kTranscriptHeader) throw ParseError("unexpected transcript header at line " + std::to_string(lineno));
      header_seen = true;
      continue;
    }
    const auto f = detail::split_csv(line);
    if (f.size() != 14) throw ParseError("expected 14 fields at line " + std::to_string(lineno));
    try {
      TranscriptRow r;
      const double t = detail::parse_double(f[0]);
      if (!(t >= 1.0) || t != static_cast<double>(static_cast<std::size_t>(t))) throw ParseError("bad round index");
      r.t = static_cast<std::size_t>(t);
      r.w = Point(detail::parse_list(f[1]));
      r.g = Point(detail::parse_list(f[2]));
      r.h = Point(detail::parse_list(f[3]));
      r.f_w = detail::parse_double(f[4]);
      r.f_u = detail::parse_double(f[5]);
      r.u = Point(detail::parse_list(f[6]));
      r.vbar = detail::opt_double(f[7]);
      r.b = detail::opt_double(f[8]);
      r.alpha = detail::opt_double(f[9]);
      r.m_hat = detail::opt_double(f[10]);
      if (!f[11].empty()) r.n = static_cast<std::size_t>(detail::parse_double(f[11]));
      if (!f[12].empty()) r.p = detail::parse_list(f[12]);
      r.radius = detail::opt_double(f[13]);
      const std::size_t d = r.w.dim();
      if (d == 0 || r.g.dim() != d || r.h.dim() != d || r.u.dim() != d)
        throw ParseError("vector fields disagree in dimension");
      if (!tr.rows.empty() && r.t != tr.rows.back().t + 1) throw ParseError("rounds are not consecutive");
      if (tr.rows.empty() && r.t != 1) throw ParseError("first round must be 1");
      tr.rows.push_back(std::move(r));
    } catch (const NumericalError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!header_seen) throw ParseError("transcript has no header row");
  return tr;
}

inline Transcript read_transcript_string(const std::string& text) {
  std::istringstream is(text);
  return read_transcript(is);
}

}  // namespace gradvar
