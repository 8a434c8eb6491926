#include <algorithm>
#include <array>
#include <atomic>
#include <thread>

#include "parabolic/errors.hpp"
#include "parabolic/experiment.hpp"

namespace parabolic {
namespace detail {
extern const BundledConfig kBundled[];
extern const std::size_t kBundledCount;
}  // namespace detail

namespace {

constexpr std::array<std::string_view, 4> kSuites{"oracle", "smoothing", "galerkin", "weakform"};

}  // namespace

std::span<const BundledConfig> bundled_configs() { return {detail::kBundled, detail::kBundledCount}; }

ExperimentConfig bundled_config(std::string_view name) {
  for (const auto& b : bundled_configs())
    if (b.name == name) return parse_config(b.text);
  std::string names;
  for (const auto& b : bundled_configs()) names += (names.empty() ? "" : ", ") + std::string(b.name);
  throw Error(ErrorCode::InvalidArgument, "no bundled config '" + std::string(name) + "'; available: " + names);
}

std::span<const std::string_view> suite_names() { return kSuites; }

std::vector<int> suite_criteria(std::string_view suite) {
  if (suite == "oracle") return {1, 2};
  if (suite == "smoothing") return {3, 4};
  if (suite == "galerkin") return {5, 6, 7};
  if (suite == "weakform") return {8, 9};
  std::string names;
  for (auto s : kSuites) names += (names.empty() ? "" : ", ") + std::string(s);
  throw Error(ErrorCode::UnknownSuite, "unknown suite '" + std::string(suite) + "'; valid suites: " + names);
}

bool SuiteReport::passed() const {
  return !criteria.empty() && std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.passed; });
}

SuiteReport verify_suite(std::string_view suite, const SuiteOptions& options) {
  const std::vector<int> criteria = suite_criteria(suite);
  const auto wanted = [&](int c) { return std::find(criteria.begin(), criteria.end(), c) != criteria.end(); };

  std::vector<ExperimentConfig> configs;
  for (const auto& b : bundled_configs()) {
    ExperimentConfig c = parse_config(b.text);
    std::erase_if(c.checks, [&](const CheckConfig& chk) { return !wanted(chk.criterion); });
    if (c.checks.empty()) continue;
    if (options.seed) c.seed = *options.seed;
    c.output_dir = "verify-" + std::string(suite) + "/" + c.name;
    configs.push_back(std::move(c));
  }

  SuiteReport report;
  report.suite = suite;
  report.runs.resize(configs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        report.runs[i] = run_experiment(configs[i], options.run);
      } catch (const std::exception& e) {
        RunReport& r = report.runs[i];
        r.name = configs[i].name;
        r.config_hash = config_hash(configs[i]);
        r.partial = true;
        r.error = e.what();
        r.requested_checks = configs[i].checks.size();
      }
    }
  };
  const int threads = std::clamp(options.threads, 1, static_cast<int>(std::max<std::size_t>(configs.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (int criterion : criteria) {
    CriterionVerdict v;
    v.criterion = criterion;
    v.passed = true;
    std::size_t count = 0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      const RunReport& run = report.runs[i];
      if (run.partial) {
        const bool involved = std::any_of(configs[i].checks.begin(), configs[i].checks.end(),
                                          [&](const auto& c) { return c.criterion == criterion; });
        if (involved) {
          v.passed = false;
          ++count;
          v.summary += (v.summary.empty() ? "" : " | ") + run.name + ": " + run.error;
        }
        continue;
      }
      for (const auto& chk : run.checks) {
        if (chk.criterion != criterion) continue;
        ++count;
        v.passed = v.passed && chk.passed;
        v.summary += (v.summary.empty() ? "" : " | ") + run.name + "/" + chk.kind + ": " + chk.summary;
      }
    }
    if (count == 0) {
      v.passed = false;
      v.summary = "no bundled check covers this criterion";
    }
    report.criteria.push_back(std::move(v));
  }
  return report;
}

}  // namespace parabolic
