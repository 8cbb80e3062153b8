#include "config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "brz/report.hpp"

namespace brz::cli {

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
      line_(line) {}

namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  if (trim(raw).empty()) return out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

struct Value {
  std::string raw;
  int line;
};

// typed access with the line of the entry for messages
struct Reader {
  const std::string& source;
  const std::string& key;
  const Value& v;

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(source, v.line, key + ": " + what); }

  double number(const std::string& s) const {
    if (s.empty()) fail("expected a number, got nothing");
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (*end != '\0' || errno == ERANGE || !std::isfinite(x)) fail("expected a number, got '" + s + "'");
    return x;
  }
  long long integer(const std::string& s) const {
    if (s.empty()) fail("expected an integer, got nothing");
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(s.c_str(), &end, 10);
    if (*end != '\0' || errno == ERANGE) fail("expected an integer, got '" + s + "'");
    return x;
  }
  double number() const { return number(v.raw); }
  long long integer() const { return integer(v.raw); }
  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const auto& s : split_list(v.raw)) out.push_back(number(s));
    return out;
  }
  std::vector<int> integers() const {
    std::vector<int> out;
    for (const auto& s : split_list(v.raw)) out.push_back(static_cast<int>(integer(s)));
    return out;
  }
  bool boolean() const {
    if (v.raw == "true" || v.raw == "1" || v.raw == "yes") return true;
    if (v.raw == "false" || v.raw == "0" || v.raw == "no") return false;
    fail("expected true or false, got '" + v.raw + "'");
  }
  void require(bool ok, const std::string& what) const {
    if (!ok) fail(what);
  }
};

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + format_number(v[k]);
  return s;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + std::to_string(v[k]);
  return s;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + v[k];
  return s;
}

struct Key {
  const char* name;
  const char* doc;
  std::function<void(RunConfig&, const Reader&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& schema() {
  static const std::vector<Key> keys = {
      {"alpha", "per-axis alpha, comma separated; d is the list length (or see d)",
       [](RunConfig& c, const Reader& r) {
         c.alpha = r.numbers();
         r.require(!c.alpha.empty(), "alpha list is empty");
         for (double a : c.alpha) r.require(a >= 0.0, "alpha components must be >= 0");
       },
       [](const RunConfig& c) { return join(c.alpha); }},
      {"d", "dimension 1..3; repeats a single alpha value d times", nullptr,
       [](const RunConfig& c) { return std::to_string(c.dim()); }},
      {"grid.n", "nodes per axis on both grids",
       [](RunConfig& c, const Reader& r) {
         c.n = static_cast<int>(r.integer());
         r.require(c.n >= 8 && c.n <= 4096, "must be in [8, 4096]");
       },
       [](const RunConfig& c) { return std::to_string(c.n); }},
      {"grid.x_max", "space box per axis",
       [](RunConfig& c, const Reader& r) {
         c.x_max = r.number();
         r.require(c.x_max > 0, "must be positive");
       },
       [](const RunConfig& c) { return format_number(c.x_max); }},
      {"grid.y_max", "frequency box per axis",
       [](RunConfig& c, const Reader& r) {
         c.y_max = r.number();
         r.require(c.y_max > 0, "must be positive");
       },
       [](const RunConfig& c) { return format_number(c.y_max); }},
      {"grid.profile", "uniform or composite-log-linear",
       [](RunConfig& c, const Reader& r) {
         try {
           c.profile = parse_grid_profile(r.v.raw);
         } catch (const std::exception&) {
           r.fail("unknown profile '" + r.v.raw + "'");
         }
       },
       [](const RunConfig& c) { return to_string(c.profile); }},
      {"time.t_min", "first node of the log-time grid",
       [](RunConfig& c, const Reader& r) { c.time.t_min = r.number(); },
       [](const RunConfig& c) { return format_number(c.time.t_min); }},
      {"time.t_max", "last node of the log-time grid",
       [](RunConfig& c, const Reader& r) { c.time.t_max = r.number(); },
       [](const RunConfig& c) { return format_number(c.time.t_max); }},
      {"time.step", "step in log t",
       [](RunConfig& c, const Reader& r) { c.time.step = r.number(); },
       [](const RunConfig& c) { return format_number(c.time.step); }},
      {"p", "Lebesgue exponents, each > 1",
       [](RunConfig& c, const Reader& r) {
         c.p = r.numbers();
         r.require(!c.p.empty(), "p list is empty");
         for (double p : c.p) r.require(p > 1.0, "every p must be > 1");
       },
       [](const RunConfig& c) { return join(c.p); }},
      {"kappa", "mollifier radii, each >= 0",
       [](RunConfig& c, const Reader& r) {
         c.kappa = r.numbers();
         r.require(!c.kappa.empty(), "kappa list is empty");
         for (double k : c.kappa) r.require(k >= 0.0, "kappa must be >= 0");
       },
       [](const RunConfig& c) { return join(c.kappa); }},
      {"family", "annulus-bump, gaussian or random-spectral",
       [](RunConfig& c, const Reader& r) {
         try {
           c.family.kind = parse_family(r.v.raw);
         } catch (const std::exception&) {
           r.fail("unknown family '" + r.v.raw + "'");
         }
       },
       [](const RunConfig& c) { return to_string(c.family.kind); }},
      {"family.center_lo", "lower end of the spectral centre range",
       [](RunConfig& c, const Reader& r) { c.family.center_lo = r.number(); },
       [](const RunConfig& c) { return format_number(c.family.center_lo); }},
      {"family.center_hi", "upper end of the spectral centre range",
       [](RunConfig& c, const Reader& r) { c.family.center_hi = r.number(); },
       [](const RunConfig& c) { return format_number(c.family.center_hi); }},
      {"family.width_lo", "lower end of the width range",
       [](RunConfig& c, const Reader& r) { c.family.width_lo = r.number(); },
       [](const RunConfig& c) { return format_number(c.family.width_lo); }},
      {"family.width_hi", "upper end of the width range",
       [](RunConfig& c, const Reader& r) { c.family.width_hi = r.number(); },
       [](const RunConfig& c) { return format_number(c.family.width_hi); }},
      {"family.r_min", "spectral cutoff radius",
       [](RunConfig& c, const Reader& r) {
         c.family.r_min = r.number();
         r.require(c.family.r_min > 0, "must be positive");
       },
       [](const RunConfig& c) { return format_number(c.family.r_min); }},
      {"family.bumps", "bumps per sample",
       [](RunConfig& c, const Reader& r) {
         c.family.bumps = static_cast<int>(r.integer());
         r.require(c.family.bumps >= 1 && c.family.bumps <= 64, "must be in [1, 64]");
       },
       [](const RunConfig& c) { return std::to_string(c.family.bumps); }},
      {"seed", "seed of every randomized family (required here or by --seed)",
       [](RunConfig& c, const Reader& r) {
         const long long s = r.integer();
         r.require(s >= 0, "must be >= 0");
         c.seed = static_cast<std::uint64_t>(s);
       },
       [](const RunConfig& c) { return c.seed ? std::to_string(*c.seed) : std::string("unset"); }},
      {"trials", "seeded samples per cell",
       [](RunConfig& c, const Reader& r) {
         c.trials = static_cast<int>(r.integer());
         r.require(c.trials >= 1 && c.trials <= 100000, "must be in [1, 100000]");
       },
       [](const RunConfig& c) { return std::to_string(c.trials); }},
      {"output", "output directory (overridden by --out and BRZ_OUTPUT_DIR)",
       [](RunConfig& c, const Reader& r) {
         r.require(!r.v.raw.empty(), "empty path");
         c.output = r.v.raw;
       },
       nullptr},
      {"tol.hankel", "involution and Plancherel, relative",
       [](RunConfig& c, const Reader& r) { c.tol.hankel = r.number(); },
       [](const RunConfig& c) { return format_number(c.tol.hankel); }},
      {"tol.kernel", "kernel against multiplier, relative L2",
       [](RunConfig& c, const Reader& r) { c.tol.kernel = r.number(); },
       [](const RunConfig& c) { return format_number(c.tol.kernel); }},
      {"tol.lemma", "duality identity, relative",
       [](RunConfig& c, const Reader& r) { c.tol.lemma = r.number(); },
       [](const RunConfig& c) { return format_number(c.tol.lemma); }},
      {"tol.domination", "absolute slack of the domination and positivity checks",
       [](RunConfig& c, const Reader& r) { c.tol.domination = r.number(); },
       [](const RunConfig& c) { return format_number(c.tol.domination); }},
      {"tol.stability", "growth of an empirical constant under sample doubling",
       [](RunConfig& c, const Reader& r) { c.tol.stability = r.number(); },
       [](const RunConfig& c) { return format_number(c.tol.stability); }},
      {"tol.embedding", "relative slack of the embedding inequality",
       [](RunConfig& c, const Reader& r) { c.tol.embedding = r.number(); },
       [](const RunConfig& c) { return format_number(c.tol.embedding); }},
      {"tol.energy", "energy identity, relative",
       [](RunConfig& c, const Reader& r) { c.tol.energy = r.number(); },
       [](const RunConfig& c) { return format_number(c.tol.energy); }},
      {"tol.pv", "principal value against multiplier, relative to max |R f|",
       [](RunConfig& c, const Reader& r) { c.tol.pv = r.number(); },
       [](const RunConfig& c) { return format_number(c.tol.pv); }},
      {"semigroup.samples", "(x, y, t) samples per empirical kernel constant",
       [](RunConfig& c, const Reader& r) {
         const long long s = r.integer();
         r.require(s >= 10 && s <= 10000000, "must be in [10, 1e7]");
         c.constant_samples = static_cast<std::size_t>(s);
       },
       [](const RunConfig& c) { return std::to_string(c.constant_samples); }},
      {"bellman.m2", "eta block dimensions, each 1..3",
       [](RunConfig& c, const Reader& r) {
         c.bellman_m2 = r.integers();
         r.require(!c.bellman_m2.empty(), "list is empty");
         for (int m : c.bellman_m2) r.require(m >= 1 && m <= 3, "each entry must be in 1..3");
       },
       [](const RunConfig& c) { return join(c.bellman_m2); }},
      {"bellman.grid_n", "points per side of the (r, s) grid",
       [](RunConfig& c, const Reader& r) {
         c.bellman_grid = static_cast<int>(r.integer());
         r.require(c.bellman_grid >= 2 && c.bellman_grid <= 2000, "must be in [2, 2000]");
       },
       [](const RunConfig& c) { return std::to_string(c.bellman_grid); }},
      {"bellman.samples", "seeded (r, s) points for the Hessian condition",
       [](RunConfig& c, const Reader& r) {
         const long long s = r.integer();
         r.require(s >= 1 && s <= 1000000, "must be in [1, 1e6]");
         c.bellman_samples = static_cast<std::size_t>(s);
       },
       [](const RunConfig& c) { return std::to_string(c.bellman_samples); }},
      {"bellman.light", "use the 24/8/6 mollifier rule for the grid sweeps",
       [](RunConfig& c, const Reader& r) { c.bellman_light = r.boolean(); },
       [](const RunConfig& c) { return std::string(c.bellman_light ? "true" : "false"); }},
      {"bellman.r_max", "(r, s) box",
       [](RunConfig& c, const Reader& r) {
         c.bellman_r_max = r.number();
         r.require(c.bellman_r_max > 0, "must be positive");
       },
       [](const RunConfig& c) { return format_number(c.bellman_r_max); }},
      {"field.samples", "interior (x, t) samples of the Bellman field",
       [](RunConfig& c, const Reader& r) {
         const long long s = r.integer();
         r.require(s >= 1 && s <= 1000000, "must be in [1, 1e6]");
         c.field_samples = static_cast<std::size_t>(s);
       },
       [](const RunConfig& c) { return std::to_string(c.field_samples); }},
      {"field.h", "stencil step",
       [](RunConfig& c, const Reader& r) {
         c.field_h = r.number();
         r.require(c.field_h > 0 && c.field_h < 0.1, "must be in (0, 0.1)");
       },
       [](const RunConfig& c) { return format_number(c.field_h); }},
      {"k", "composition orders 1..3 for the theorem table",
       [](RunConfig& c, const Reader& r) {
         c.k = r.integers();
         r.require(!c.k.empty(), "list is empty");
         for (int k : c.k) r.require(k >= 1 && k <= 3, "each entry must be in 1..3");
       },
       [](const RunConfig& c) { return join(c.k); }},
      {"theorem.d", "dimensions for the theorem table; empty uses alpha as given",
       [](RunConfig& c, const Reader& r) {
         c.theorem_d = r.integers();
         for (int d : c.theorem_d) r.require(d >= 1 && d <= 3, "each entry must be in 1..3");
       },
       [](const RunConfig& c) { return join(c.theorem_d); }},
      {"theorem.patterns", "alpha patterns zero, half, mixed",
       [](RunConfig& c, const Reader& r) {
         c.theorem_patterns = split_list(r.v.raw);
         r.require(!c.theorem_patterns.empty(), "list is empty");
         for (const auto& s : c.theorem_patterns) {
           r.require(s == "zero" || s == "half" || s == "mixed", "unknown pattern '" + s + "'");
         }
       },
       [](const RunConfig& c) { return join(c.theorem_patterns); }},
  };
  return keys;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> RunConfig::resolved() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Key& k : schema()) {
    if (k.get) out.emplace_back(k.name, k.get(*this));
  }
  return out;
}

RunConfig parse_config(std::string_view text, const std::string& source) {
  std::map<std::string, Value> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(source, number, "expected 'key = value', got '" + body + "'");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ConfigError(source, number, "missing key before '='");
    bool known = false;
    for (const Key& k : schema()) known = known || key == k.name;
    if (!known) throw ConfigError(source, number, "unknown key '" + key + "'");
    if (auto it = entries.find(key); it != entries.end()) {
      throw ConfigError(source, number,
                        "key '" + key + "' already set on line " + std::to_string(it->second.line));
    }
    entries[key] = {trim(body.substr(eq + 1)), number};
  }

  RunConfig c;
  for (const Key& k : schema()) {
    auto it = entries.find(k.name);
    if (it == entries.end() || !k.set) continue;
    k.set(c, Reader{source, it->first, it->second});
  }
  if (auto it = entries.find("d"); it != entries.end()) {
    const Reader r{source, it->first, it->second};
    const auto d = static_cast<int>(r.integer());
    r.require(d >= 1 && d <= 3, "must be in 1..3");
    if (c.alpha.size() == 1) {
      c.alpha.assign(static_cast<std::size_t>(d), c.alpha[0]);
    } else {
      r.require(static_cast<int>(c.alpha.size()) == d,
                "alpha has " + std::to_string(c.alpha.size()) + " components but d = " + std::to_string(d));
    }
  }
  auto line_of = [&](const char* key) {
    auto it = entries.find(key);
    return it == entries.end() ? 0 : it->second.line;
  };
  if (c.dim() > 3) throw ConfigError(source, line_of("alpha"), "alpha: at most 3 components");
  if (std::pow(static_cast<double>(c.n), c.dim()) > 4e6) {
    throw ConfigError(source, line_of("grid.n"), "grid.n: n^d exceeds the 4e6 node budget");
  }
  try {
    c.time.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source, std::max({line_of("time.t_min"), line_of("time.t_max"), line_of("time.step")}), e.what());
  }
  if (c.family.center_lo > c.family.center_hi || c.family.width_lo > c.family.width_hi ||
      c.family.width_lo <= 0) {
    throw ConfigError(source, line_of("family.center_lo"), "family: ranges must satisfy lo <= hi and widths > 0");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::vector<double> alpha_pattern(const std::string& name, int d) {
  if (name == "zero") return std::vector<double>(static_cast<std::size_t>(d), 0.0);
  if (name == "half") return std::vector<double>(static_cast<std::size_t>(d), 0.5);
  if (name == "mixed") {
    const std::vector<double> full{0.5, 1.0, 2.0};
    return {full.begin(), full.begin() + d};
  }
  throw std::invalid_argument("unknown alpha pattern '" + name + "'");
}

std::string config_reference() {
  std::ostringstream out;
  const RunConfig defaults;
  for (const Key& k : schema()) {
    out << k.name;
    if (k.get) out << " = " << k.get(defaults);
    out << "\n    " << k.doc << '\n';
  }
  return out.str();
}

}  // namespace brz::cli
