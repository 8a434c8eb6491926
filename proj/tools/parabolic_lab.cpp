// parabolic_lab: run declarative experiments and the bundled verification suites.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
// 3 runtime error.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "parabolic/errors.hpp"
#include "parabolic/experiment.hpp"

namespace {

using namespace parabolic;

struct Flags {
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string format;
};

std::filesystem::path output_root(const Flags& flags) {
  if (!flags.out.empty()) return flags.out;
  if (const char* env = std::getenv("PARABOLIC_LAB_OUT"); env != nullptr && *env != '\0') return env;
  return "lab-out";
}

// A path on disk, or the name of a bundled config.
ExperimentConfig resolve_config(const std::string& arg, const Flags& flags) {
  ExperimentConfig c;
  if (std::filesystem::exists(arg)) {
    try {
      c = load_config(arg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::IoError) throw;
      throw ValidationError("config", e.what());
    }
  } else {
    bool found = false;
    for (const auto& b : bundled_configs())
      if (b.name == arg) found = true;
    if (!found) throw ValidationError("config", "no config file or bundled config named '" + arg + "'");
    c = bundled_config(arg);
  }
  if (flags.seed) c.seed = *flags.seed;
  if (!flags.format.empty()) c.formats = {flags.format};
  validate_config(c);
  return c;
}

void print_report(const RunReport& r) {
  for (const auto& c : r.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.kind;
    if (c.criterion > 0) std::cout << " [criterion " << c.criterion << "]";
    std::cout << ": " << c.summary << "\n";
  }
  std::cout << r.name << ": " << (r.passed ? "pass" : "fail") << ", " << r.executed_checks << "/"
            << r.requested_checks << " checks, " << r.stats.steps << " steps, hash " << r.config_hash << "\n";
  if (!r.files.empty()) std::cout << "wrote " << r.directory.string() << "\n";
}

int run_config(ExperimentConfig config, const Flags& flags) {
  RunOptions opts;
  opts.output_root = output_root(flags);
  const RunReport report = run_experiment(config, opts);
  print_report(report);
  return report.passed ? 0 : 1;
}

int cmd_run(const std::string& path, const Flags& flags) { return run_config(resolve_config(path, flags), flags); }

int cmd_rates(const std::string& path, const Flags& flags) {
  ExperimentConfig c = resolve_config(path, flags);
  std::erase_if(c.checks, [](const CheckConfig& chk) { return chk.block.kind != "rate_fit"; });
  if (c.checks.empty()) {
    CheckConfig chk = default_check("rate_fit", c.dim);
    if (c.max_order < 2) chk.block.params[0].second = std::vector<double>{1.0};
    c.checks.push_back(chk);
  }
  validate_config(c);
  return run_config(std::move(c), flags);
}

int cmd_oracle(const std::string& path, const Flags& flags) {
  ExperimentConfig c = resolve_config(path, flags);
  std::erase_if(c.checks, [](const CheckConfig& chk) {
    return chk.block.kind != "heat_oracle" && chk.block.kind != "galerkin_oracle";
  });
  if (c.checks.empty()) {
    const bool heat = c.diffusion.kind == "isotropic";
    c.checks.push_back(default_check(heat ? "heat_oracle" : "galerkin_oracle", c.dim));
  }
  validate_config(c);
  return run_config(std::move(c), flags);
}

int cmd_verify(const std::string& suite, const Flags& flags) {
  SuiteOptions opts;
  opts.run.output_root = output_root(flags);
  opts.threads = flags.threads;
  opts.seed = flags.seed;
  const SuiteReport report = verify_suite(suite, opts);
  for (const auto& c : report.criteria)
    std::cout << "criterion " << c.criterion << ": " << (c.passed ? "PASS" : "FAIL") << "  " << c.summary << "\n";
  std::cout << "suite " << report.suite << ": " << (report.passed() ? "PASS" : "FAIL") << "\n";
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments for linear parabolic equations on the periodic box"};
  app.require_subcommand(1);
  Flags flags;
  std::uint64_t seed = 0;
  app.add_option("--out", flags.out, "Output root (default $PARABOLIC_LAB_OUT or ./lab-out)");
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--threads", flags.threads, "Experiments run in parallel by verify")->check(CLI::Range(1, 256));
  app.add_option("--format", flags.format, "Write only this data format (config copy always written)")
      ->check(CLI::IsMember({"csv", "json"}));

  std::string target;
  auto* run = app.add_subcommand("run", "Run an experiment config (file path or bundled name)");
  run->add_option("config", target)->required();
  auto* verify = app.add_subcommand("verify", "Run a bundled verification suite");
  verify->add_option("suite", target, "oracle, smoothing, galerkin or weakform")->required();
  auto* rates = app.add_subcommand("rates", "Run only the rate fits of a config");
  rates->add_option("config", target)->required();
  auto* oracle = app.add_subcommand("oracle-check", "Run only the oracle comparisons of a config");
  oracle->add_option("config", target)->required();
  app.fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (*seed_opt) flags.seed = seed;

  try {
    if (*run) return cmd_run(target, flags);
    if (*verify) return cmd_verify(target, flags);
    if (*rates) return cmd_rates(target, flags);
    if (*oracle) return cmd_oracle(target, flags);
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    const bool config = e.code() == ErrorCode::UnknownSuite;
    std::cerr << (config ? "config error: " : "runtime error: ") << e.what() << "\n";
    return config ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
