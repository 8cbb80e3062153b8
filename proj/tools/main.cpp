#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "brz/report.hpp"
#include "config.hpp"
#include "suites.hpp"

namespace {

enum Exit { ok = 0, checks_failed = 1, config_error = 2, runtime_error = 3 };

struct Options {
  std::string config;
  int threads = 0;
  std::string out;
  std::uint64_t seed = 0;
};

int run(const std::string& command, const Options& o, const CLI::App& sub) {
  using namespace brz::cli;
  RunConfig cfg;
  try {
    cfg = load_config(o.config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  }
  if (sub.count("--seed")) cfg.seed = o.seed;
  if (sub.count("--out")) cfg.output = o.out;
  // the environment wins over both the config and --out
  if (const char* env = std::getenv("BRZ_OUTPUT_DIR"); env && *env) cfg.output = env;
  brz::set_thread_limit(o.threads);

  brz::RunReport report;
  try {
    report = run_suite(command, cfg);
    write_outputs(report, cfg.output);
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return runtime_error;
  }
  const auto failures = report.failures();
  std::cout << command << ": " << report.checks.size() - failures.size() << "/" << report.checks.size()
            << " checks passed, config " << report.config_hash() << ", seed " << report.seed << ", output "
            << cfg.output << '\n';
  for (const auto& f : failures) std::cerr << "FAIL " << f << '\n';
  return failures.empty() ? ok : checks_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bessel-Riesz verification suites"};
  app.require_subcommand(0, 1);
  bool help_config = false;
  app.add_flag("--help-config", help_config, "List the config keys with their defaults");

  Options o;
  const char* names[][2] = {
      {"hankel", "Hankel transform: involution, Plancherel, self-adjointness, eigenfunctions"},
      {"semigroup", "heat/Poisson kernels against multipliers, kernel constants, limits, domination"},
      {"riesz", "Riesz transforms: energy identity, principal value, norm ratios"},
      {"bellman", "Bellman function bounds and Hessian certification"},
      {"embed", "duality identity, pointwise Bellman inequality, bilinear embedding, theorem table"},
  };
  for (const auto& [name, doc] : names) {
    auto* sub = app.add_subcommand(name, doc);
    sub->add_option("--config", o.config, "config file (key = value lines)")->required()->check(CLI::ExistingFile);
    sub->add_option("--threads", o.threads, "cap on worker threads (0: default)")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", o.out, "output directory (BRZ_OUTPUT_DIR overrides)");
    sub->add_option("--seed", o.seed, "seed, overrides the config");
  }
  CLI11_PARSE(app, argc, argv);

  if (help_config) {
    std::cout << brz::cli::config_reference();
    return ok;
  }
  for (auto* sub : app.get_subcommands()) return run(sub->get_name(), o, *sub);
  std::cout << app.help();
  return config_error;
}
