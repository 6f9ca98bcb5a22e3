#include "avgbound/io/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "avgbound/numerics/errors.hpp"

namespace avgbound::io {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  return os;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  auto os = open_out(path);
  for (std::size_t j = 0; j < table.header.size(); ++j) os << (j ? "," : "") << table.header[j];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << format_double(row[j]);
    os << '\n';
  }
  if (!os.flush()) throw Error("write failure on '" + path.string() + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw Error("empty CSV '" + path.string() + "'");
  t.header = split(line, ',');
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& field : split(line, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw Error("malformed number '" + field + "' in '" + path.string() + "'");
      }
      row.push_back(v);
    }
    if (row.size() != t.header.size()) throw Error("row width differs from the header in '" + path.string() + "'");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable estimator_table(const averaging::EstimatorCurves& c) {
  CsvTable t{{"tau", "n_P", "n_E", "n_Y", "m_P", "m_E", "m_Y"}, {}};
  for (std::size_t k = 0; k < c.sample_tau.size(); ++k) {
    const Vector& n = c.sample_n[k];
    const Vector& m = c.sample_m[k];
    t.rows.push_back({c.sample_tau[k], n[0], n[1], n[2], m[0], m[1], m[2]});
  }
  return t;
}

CsvTable comparison_table(const runner::ComparisonReport& r) {
  CsvTable t{{"t_orbits", "absL_P", "envelope_P", "absL_E", "envelope_E", "absL_Y", "envelope_Y"}, {}};
  for (std::size_t k = 0; k < r.t_orbits.size(); ++k) {
    const auto& a = r.abs_L[k];
    const auto& e = r.envelope[k];
    t.rows.push_back({r.t_orbits[k], a[0], e[0], a[1], e[1], a[2], e[2]});
  }
  return t;
}

void emit_csv(const averaging::EstimatorCurves& curves, const std::filesystem::path& path) {
  if (curves.sample_tau.empty()) throw DomainError("emit_csv: no estimator samples");
  write_csv(path, estimator_table(curves));
}

void emit_csv(const runner::ComparisonReport& report, const std::filesystem::path& path) {
  if (report.t_orbits.empty()) throw DomainError("emit_csv: empty comparison");
  write_csv(path, comparison_table(report));
}

void write_key_values(const std::filesystem::path& path, const KeyValues& entries) {
  auto os = open_out(path);
  for (const auto& [k, v] : entries) os << k << '=' << v << '\n';
  if (!os.flush()) throw Error("write failure on '" + path.string() + "'");
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open config file '" + path.string() + "'");
  KeyValues out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw DomainError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out.emplace_back(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  return out;
}

}  // namespace avgbound::io
