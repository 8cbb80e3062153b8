#pragma once

// Run reports shared by the CLI suites and the acceptance binary: a flat list
// of checks plus the resolved configuration, written as JSON and CSV with a
// fixed number format so identical runs give identical bytes.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "brz/verify.hpp"

namespace brz {

/// %.17g, with "nan", "inf" and "-inf" spelled out.
std::string format_number(double v);

/// FNV-1a 64 of the bytes, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Upper bound on worker threads for the parallel loops (0 restores the default).
void set_thread_limit(int threads);
int thread_limit();

struct CheckRow {
  std::string suite;
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  /// "identity" or "inequality"
  std::string kind = "identity";
  bool pass = false;
  std::vector<std::pair<std::string, std::string>> metadata;
};

CheckRow to_row(std::string suite, const VerificationReport& report);

/// CSV table with a header row. Cells are written as given; the caller
/// formats numbers through format_number.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  void write(std::ostream& out) const;
};

struct RunReport {
  std::string command;
  std::uint64_t seed = 0;
  /// resolved configuration, in key order
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<CheckRow> checks;
  std::vector<Table> tables;

  /// hash of the resolved configuration text
  std::string config_hash() const;
  bool pass() const;
  std::vector<std::string> failures() const;

  void add(CheckRow row) { checks.push_back(std::move(row)); }
  void add(std::string suite, const VerificationReport& r) { checks.push_back(to_row(std::move(suite), r)); }

  std::string json() const;
  /// one line per check: suite,check,kind,lhs,rhs,tolerance,pass,config_hash,seed
  void write_csv(std::ostream& out) const;
};

}  // namespace brz
