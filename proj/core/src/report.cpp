#include "brz/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include "json.hpp"

namespace brz {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {
int default_threads = -1;
}

void set_thread_limit(int threads) {
  if (default_threads < 0) default_threads = omp_get_max_threads();
  omp_set_num_threads(threads > 0 ? threads : default_threads);
}

int thread_limit() { return omp_get_max_threads(); }

CheckRow to_row(std::string suite, const VerificationReport& r) {
  CheckRow row;
  row.suite = std::move(suite);
  row.check = r.check;
  row.lhs = r.lhs;
  row.rhs = r.rhs;
  row.tolerance = r.tolerance;
  row.kind = r.inequality ? "inequality" : "identity";
  row.pass = r.pass;
  row.metadata = r.metadata;
  return row;
}

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// numbers go through format_number so the JSON and CSV agree digit for digit
nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("table " + name + ": row width mismatch");
  rows.push_back(std::move(row));
}

void Table::write(std::ostream& out) const {
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << csv_cell(columns[c]);
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
    out << '\n';
  }
}

std::string RunReport::config_hash() const {
  std::string text;
  for (const auto& [k, v] : config) text += k + "=" + v + "\n";
  return fnv1a_hex(text);
}

bool RunReport::pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

std::vector<std::string> RunReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.pass) {
      out.push_back(c.suite + ": " + c.check + " (lhs " + format_number(c.lhs) + ", rhs " + format_number(c.rhs) +
                    ", tolerance " + format_number(c.tolerance) + ")");
    }
  }
  return out;
}

std::string RunReport::json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_hash"] = config_hash();
  j["seed"] = seed;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json e;
    e["suite"] = c.suite;
    e["check"] = c.check;
    e["kind"] = c.kind;
    e["lhs"] = number(c.lhs);
    e["rhs"] = number(c.rhs);
    e["tolerance"] = number(c.tolerance);
    e["pass"] = c.pass;
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [k, v] : c.metadata) m[k] = v;
    e["metadata"] = m;
    arr.push_back(std::move(e));
  }
  j["checks"] = arr;
  j["pass"] = pass();
  return j.dump(2) + "\n";
}

void RunReport::write_csv(std::ostream& out) const {
  const std::string hash = config_hash();
  out << "suite,check,kind,lhs,rhs,tolerance,pass,config_hash,seed\n";
  for (const auto& c : checks) {
    out << csv_cell(c.suite) << ',' << csv_cell(c.check) << ',' << c.kind << ',' << format_number(c.lhs) << ','
        << format_number(c.rhs) << ',' << format_number(c.tolerance) << ',' << (c.pass ? "true" : "false") << ','
        << hash << ',' << seed << '\n';
  }
}

}  // namespace brz
