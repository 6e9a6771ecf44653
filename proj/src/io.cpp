#include "nilscope/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace nilscope {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
bool parse_number(const std::string& s, T& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_sequence_csv(std::ostream& os, const SequenceSample& u) {
  os << "n,re,im\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    os << u.first_index + static_cast<std::int64_t>(i) << ',' << format_double(u.values[i].real())
       << ',' << format_double(u.values[i].imag()) << '\n';
  }
}

SequenceSample read_sequence_csv(std::istream& is) {
  SequenceSample u;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (t != "n,re,im") throw ParseError("expected header 'n,re,im', got '" + t + "'", lineno);
      continue;
    }
    const auto f = split_commas(t);
    if (f.size() != 3) throw ParseError("expected 3 fields, got " + std::to_string(f.size()), lineno);
    std::int64_t n = 0;
    double re = 0.0, im = 0.0;
    if (!parse_number(f[0], n)) throw ParseError("bad index '" + f[0] + "'", lineno);
    if (!parse_number(f[1], re)) throw ParseError("bad real part '" + f[1] + "'", lineno);
    if (!parse_number(f[2], im)) throw ParseError("bad imaginary part '" + f[2] + "'", lineno);
    if (!std::isfinite(re) || !std::isfinite(im)) throw ParseError("non-finite value", lineno);
    if (u.values.empty()) {
      u.first_index = n;
    } else if (n != u.last_index() + 1) {
      throw ParseError("index " + std::to_string(n) + " does not follow " + std::to_string(u.last_index()),
                       lineno);
    }
    u.values.emplace_back(re, im);
  }
  if (!header_seen) throw ParseError("empty input", 0);
  if (u.values.empty()) throw ParseError("no data rows", lineno);
  u.origin = "csv";
  return u;
}

Json sequence_to_json(const SequenceSample& u, double bound) {
  Json j;
  j["metadata"] = {{"origin", u.origin},
                   {"first_index", u.first_index},
                   {"last_index", u.last_index()},
                   {"count", u.size()},
                   {"bound", bound}};
  Json rows = Json::array();
  for (std::size_t i = 0; i < u.size(); ++i) {
    rows.push_back({{"n", u.first_index + static_cast<std::int64_t>(i)},
                    {"re", u.values[i].real()},
                    {"im", u.values[i].imag()}});
  }
  j["samples"] = std::move(rows);
  return j;
}

SequenceSample sequence_from_json(const Json& j) {
  SequenceSample u;
  try {
    const auto& rows = j.at("samples");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      const std::int64_t n = r.at("n").get<std::int64_t>();
      if (i == 0) {
        u.first_index = n;
      } else if (n != u.last_index() + 1) {
        throw ParseError("samples[" + std::to_string(i) + "]: index " + std::to_string(n) +
                             " does not follow " + std::to_string(u.last_index()),
                         0);
      }
      u.values.emplace_back(r.at("re").get<double>(), r.at("im").get<double>());
    }
    if (j.contains("metadata") && j["metadata"].contains("origin")) {
      u.origin = j["metadata"]["origin"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("sequence json: ") + e.what(), 0);
  }
  if (u.values.empty()) throw ParseError("sequence json: no samples", 0);
  return u;
}

SequenceSample load_sequence(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  if (path.extension() == ".json") {
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid json: ") + e.what(), 0);
    }
    return sequence_from_json(j);
  }
  return read_sequence_csv(in);
}

std::vector<std::vector<double>> read_points_csv(std::istream& is) {
  std::vector<std::vector<double>> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto f = split_commas(t);
    std::vector<double> row;
    for (const auto& s : f) {
      double v = 0.0;
      if (!parse_number(s, v)) {
        if (pts.empty() && row.empty()) break;  // header
        throw ParseError("bad number '" + s + "'", lineno);
      }
      row.push_back(v);
    }
    if (row.empty()) continue;
    if (!pts.empty() && row.size() != pts.front().size()) {
      throw ParseError("expected " + std::to_string(pts.front().size()) + " coordinates", lineno);
    }
    pts.push_back(std::move(row));
  }
  return pts;
}

Json report_to_json(const RegularityReport& r) {
  Json j;
  j["order"] = r.order;
  j["eps"] = r.eps;
  j["delta"] = r.delta;
  j["M"] = r.M;
  j["shift_max"] = r.shift_max;
  j["k_range"] = {r.k_range.lo, r.k_range.hi};
  Json v = Json::array();
  for (const auto& x : r.violations) {
    v.push_back({{"k", x.k}, {"m", x.m}, {"n", x.n}, {"p", x.p}, {"gap", x.gap}});
  }
  j["violations"] = std::move(v);
  j["violation_count"] = r.violations.size();
  j["hypothesis_count"] = r.hypothesis_count;
  j["informative_count"] = r.informative_count;
  j["scanned"] = r.scanned;
  j["elapsed_ms"] = r.elapsed_ms;
  j["vacuous"] = r.vacuous;
  return j;
}

void write_violations_csv(std::ostream& os, const RegularityReport& r) {
  os << "k,m,n,p,gap\n";
  for (const auto& v : r.violations) {
    os << v.k << ',' << v.m << ',' << v.n << ',' << v.p << ',' << format_double(v.gap) << '\n';
  }
}

Json calibration_to_json(const CalibrationResult& c) {
  Json j;
  j["M"] = c.M;
  j["delta"] = c.delta;
  j["clean"] = c.clean;
  Json grid = Json::array();
  for (const auto& g : c.grid) {
    grid.push_back({{"M", g.M},
                    {"delta", g.delta},
                    {"violations", g.violations},
                    {"hypothesis_count", g.hypothesis_count}});
  }
  j["grid"] = std::move(grid);
  j["report"] = report_to_json(c.report);
  return j;
}

Json to_json(const NilPoint& p) { return Json::array({p.x(), p.y(), p.z()}); }

Json to_json(const TorusPoint& p) {
  Json a = Json::array();
  for (int i = 0; i < p.dims; ++i) a.push_back(p.coords[static_cast<std::size_t>(i)]);
  return a;
}

Json to_json(const Shifts& s) { return Json::array({s.m, s.n, s.p}); }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

}  // namespace nilscope
