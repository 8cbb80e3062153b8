#pragma once

// Flat "key = value" run configuration. '#' starts a comment, lists are
// comma separated, unknown or repeated keys are errors. Every error names the
// file and line it comes from.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "brz/bellman.hpp"
#include "brz/families.hpp"
#include "brz/grid.hpp"
#include "brz/verify.hpp"

namespace brz::cli {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct Tolerances {
  double hankel = 1e-6;
  double kernel = 1e-6;
  double lemma = 1e-4;
  double domination = 1e-10;
  double stability = 0.05;
  double embedding = 1e-6;
  double energy = 1e-6;
  double pv = 1e-3;
};

struct RunConfig {
  std::vector<double> alpha{0.5};
  int n = 96;
  double x_max = 11.0;
  double y_max = 8.5;
  GridProfile profile = GridProfile::uniform;
  TimeGrid time;
  std::vector<double> p{2.0};
  std::vector<double> kappa{0.1};
  FamilySpec family;
  std::optional<std::uint64_t> seed;
  int trials = 10;
  std::string output = "out";
  Tolerances tol;

  std::size_t constant_samples = 1000;
  std::vector<int> bellman_m2{1, 2, 3};
  int bellman_grid = 200;
  std::size_t bellman_samples = 1000;
  /// smaller mollifier rule for the size/sign grid sweeps
  bool bellman_light = true;
  double bellman_r_max = 5.0;
  std::size_t field_samples = 200;
  double field_h = 0.02;
  std::vector<int> k{1};
  /// empty: the theorem table uses alpha as given
  std::vector<int> theorem_d;
  std::vector<std::string> theorem_patterns{"zero", "half", "mixed"};

  MultiIndexAlpha alpha_index() const { return MultiIndexAlpha(alpha); }
  int dim() const { return static_cast<int>(alpha.size()); }
  std::uint64_t seed_value() const { return seed.value_or(0); }
  /// every key with its resolved value, in schema order
  std::vector<std::pair<std::string, std::string>> resolved() const;
};

/// Parses and validates. `source` is used in error messages.
RunConfig parse_config(std::string_view text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// alpha pattern for the theorem table: zero, half, or mixed = (0.5, 1, 2) truncated to d
std::vector<double> alpha_pattern(const std::string& name, int d);

/// Text of the documented keys with their defaults, used by `--help-config`.
std::string config_reference();

}  // namespace brz::cli
