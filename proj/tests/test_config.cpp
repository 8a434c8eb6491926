#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"
#include "parabolic/errors.hpp"
#include "parabolic/experiment.hpp"

using namespace parabolic;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("parabolic-test-config-" + name);
  fs::remove_all(p);
  return p;
}

template <class E>
E error_of(auto&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e;
  }
  FAIL("expected error not thrown");
  throw;
}

const char* kSmall = R"(
name: small
seed: 9
problem:
  grid: {dim: 1, points: 1024}
  diffusion: {kind: isotropic, c: 1}
  initial: {kind: rough, decay: 0.75}
solver:
  method: exact
  horizon: 0.01
  schedule: {spacing: log, count: 24, first: 1.0e-4, last: 0.01}
)";

}  // namespace

TEST_CASE("minimal config is fully defaulted") {
  const auto c = parse_config("problem:\n  grid:\n    points: 32\n");
  CHECK(c.schema_version == 1);
  CHECK(c.name == "experiment");
  CHECK(c.dim == 1);
  CHECK(c.points == 32);
  CHECK(c.length == 2.0 * std::numbers::pi);
  CHECK(c.diffusion.kind == "isotropic");
  CHECK(c.diffusion.number("c") == 1.0);
  CHECK(c.forcing.kind == "zero");
  CHECK(c.initial.kind == "multimode");
  CHECK(c.method == "split");
  CHECK(c.safety == 1.0);
  CHECK(c.horizon == 1.0);
  CHECK(c.schedule.spacing == "log");
  CHECK(c.schedule.count == 32);
  CHECK(c.schedule.first == 1e-3);
  CHECK(c.schedule.last == 1.0);
  CHECK(c.output_dir == "experiment");
  CHECK(c.formats == std::vector<std::string>{"csv", "json"});
  CHECK(c.max_order == 3);
  CHECK(c.checks.empty());
  // Every default is written out in the canonical copy.
  const auto text = emit_config(c);
  for (const char* key : {"length:", "kind: isotropic", "c: 1", "safety: 1", "spacing: log", "first: 0.001", "max_order: 3"})
    CHECK(text.find(key) != std::string::npos);
  CHECK(parse_config("") == parse_config("{}"));
}

TEST_CASE("dimension-dependent defaults") {
  const auto c = parse_config(R"(
problem:
  grid: {dim: 3, points: 8}
  diffusion: diagonal
  initial: mode
checks:
  - {kind: uniqueness}
)");
  CHECK(c.diffusion.list("entries") == std::vector<double>{1, 1, 1});
  CHECK(c.initial.list("wave") == std::vector<double>{1, 0, 0});
  CHECK(c.checks[0].block.list("wave") == std::vector<double>{1, 0, 0});
}

TEST_CASE("canonical emission round-trips bit-identically") {
  for (const auto& b : bundled_configs()) {
    const auto c = parse_config(b.text);
    CHECK(c.name == b.name);
    const auto text = emit_config(c);
    const auto again = parse_config(text);
    CHECK(again == c);
    CHECK(emit_config(again) == text);
  }
}

TEST_CASE("round trip holds for arbitrary doubles") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    ExperimentConfig c = parse_config(kSmall);
    c.length = std::ldexp(1.0 + unit(rng), static_cast<int>(rng() % 20) - 10);
    c.horizon = std::ldexp(1.0 + unit(rng), static_cast<int>(rng() % 10) - 5);
    c.safety = unit(rng) * 0.999 + 1e-3;
    c.schedule.last = c.horizon * (0.5 + 0.5 * unit(rng));
    c.schedule.first = c.schedule.last * (1e-4 + 0.5 * unit(rng));
    c.seed = rng();
    c.initial.params[0].second = 0.5 + 3.0 * unit(rng);
    validate_config(c);
    const auto back = parse_config(emit_config(c));
    CHECK(back == c);
    CHECK(std::memcmp(&back.length, &c.length, sizeof(double)) == 0);
    CHECK(config_hash(back) == config_hash(c));
  }
}

TEST_CASE("numbers use the shortest round-trip form") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(1e-8) == "1e-08");
  CHECK(format_number(2.0 * std::numbers::pi) == "6.283185307179586");
}

TEST_CASE("malformed text reports line and column") {
  const auto e = error_of<ParseError>([] { parse_config("name: x\nproblem:\n  grid: [1, 2\n"); });
  CHECK(e.line() >= 3);
  CHECK(e.column() >= 1);
  CHECK(e.code() == ErrorCode::ParseError);
}

TEST_CASE("validation errors name the field") {
  const auto decay = error_of<ValidationError>([] {
    parse_config("problem:\n  initial: {kind: rough, decay: 0.4}\n");
  });
  CHECK(decay.field() == "problem.initial.decay");
  CHECK(decay.cause() == ErrorCode::DecayTooSmall);

  const auto diff = error_of<ValidationError>([] { parse_config("problem:\n  diffusion: {kind: marble}\n"); });
  CHECK(diff.field() == "problem.diffusion.kind");
  for (const char* name : {"isotropic", "diagonal", "sine", "modulated"})
    CHECK(std::string(diff.what()).find(name) != std::string::npos);

  CHECK(error_of<ValidationError>([] { parse_config("solver: {horizon: 0}\n"); }).field() == "solver.horizon");
  CHECK(error_of<ValidationError>([] { parse_config("problem: {grid: {points: abc}}\n"); }).field() ==
        "problem.grid.points");
  CHECK(error_of<ValidationError>([] { parse_config("problem: {grid: {points: 30.5}}\n"); }).field() ==
        "problem.grid.points");
  CHECK(error_of<ValidationError>([] { parse_config("problem: {grid: {points: 7}}\n"); }).field() ==
        "problem.grid.points");
  CHECK(error_of<ValidationError>([] { parse_config("problem: {grid: {colour: 7}}\n"); }).field() ==
        "problem.grid.colour");
  CHECK(error_of<ValidationError>([] { parse_config("problem: {diffusion: {kind: sine, q: 1}}\n"); }).field() ==
        "problem.diffusion.q");
  CHECK(error_of<ValidationError>([] { parse_config("solver: {horizon: 1, schedule: {last: 2}}\n"); }).field() ==
        "solver.schedule.last");
  CHECK(error_of<ValidationError>([] { parse_config("checks:\n  - {kind: nothing}\n"); }).field() ==
        "checks[0].kind");
  CHECK(error_of<ValidationError>([] { parse_config("checks:\n  - {kind: rate_fit, orders: [1, 9]}\n"); }).field() ==
        "checks[0].orders");
  CHECK(error_of<ValidationError>([] { parse_config("schema_version: 2\n"); }).field() == "schema_version");
  CHECK(error_of<ValidationError>([] { parse_config("output: {formats: [xml]}\n"); }).field() ==
        "output.formats[0]");

  const auto mismatch = error_of<ValidationError>([] {
    parse_config("problem: {diffusion: sine}\nsolver: {method: exact}\n");
  });
  CHECK(mismatch.field() == "solver.method");
  CHECK(mismatch.cause() == ErrorCode::MethodMismatch);
  CHECK(error_of<ValidationError>([] { parse_config("problem: {diffusion: {kind: sine, a: 1, b: 1}}\n"); }).cause() ==
        ErrorCode::NotElliptic);
  CHECK(error_of<ValidationError>([] { parse_config("problem: {grid: {dim: 2}, diffusion: sine}\n"); }).field() ==
        "problem.diffusion.kind");
}

TEST_CASE("config hash") {
  const auto a = parse_config(kSmall);
  auto b = a;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.seed += 1;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("zero horizon fails before any output") {
  const auto root = scratch("zero");
  ExperimentConfig c = parse_config(kSmall);
  c.horizon = 0.0;
  CHECK(error_of<ValidationError>([&] { run_experiment(c, {root, true}); }).field() == "solver.horizon");
  CHECK_FALSE(fs::exists(root));
}

TEST_CASE("run writes series, report and resolved config") {
  const auto root = scratch("run");
  ExperimentConfig c = parse_config(std::string(kSmall) + R"(
checks:
  - {kind: rate_fit, criterion: 3, orders: [1], window: [1.0e-3, 0.01]}
  - {kind: mass_balance, criterion: 9}
)");
  const auto report = run_experiment(c, {root, true});
  CHECK(report.passed);
  CHECK(report.requested_checks == 2);
  CHECK(report.executed_checks == 2);
  const fs::path dir = root / "small";
  CHECK(report.directory == dir);
  for (const auto& f : report.files) CHECK(fs::exists(dir / f));
  CHECK(report.files == std::vector<std::string>{"series.csv", "config.resolved.yaml", "report.json"});

  const auto csv = read_file(dir / "series.csv");
  CHECK(csv.rfind("t,norm_0,norm_1,norm_2,norm_3,M1,Mm\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 25);

  const auto json = nlohmann::json::parse(read_file(dir / "report.json"));
  CHECK(json["schema_version"] == 1);
  CHECK(json["config_hash"] == config_hash(load_config(dir / "config.resolved.yaml")));
  CHECK(json["requested_checks"] == json["executed_checks"]);
  CHECK(json["checks"].size() == 2);
  CHECK(json["files"].size() == 3);
  const double slope = json["checks"][0]["metrics"]["fits"][0]["slope"];
  CHECK(std::abs(slope + 0.75) < 0.12);

  // Determinism: a rerun reproduces the CSV byte for byte.
  run_experiment(c, {root, true});
  CHECK(read_file(dir / "series.csv") == csv);
  for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().extension() != ".tmp");
}

TEST_CASE("formats select the files written") {
  const auto root = scratch("formats");
  ExperimentConfig c = parse_config(kSmall);
  c.formats = {"json"};
  const auto r = run_experiment(c, {root, true});
  CHECK_FALSE(fs::exists(root / "small" / "series.csv"));
  CHECK(r.files == std::vector<std::string>{"config.resolved.yaml", "report.json"});
  c.formats = {"csv"};
  fs::remove_all(root);
  const auto r2 = run_experiment(c, {root, true});
  CHECK_FALSE(fs::exists(root / "small" / "report.json"));
  CHECK(r2.files == std::vector<std::string>{"series.csv", "config.resolved.yaml"});
}

TEST_CASE("every check kind executes") {
  const auto root = scratch("kinds");
  ExperimentConfig c = parse_config(R"(
name: kinds
problem:
  grid: {dim: 1, points: 128}
  diffusion: {kind: isotropic, c: 0.5}
  initial: {kind: rough, decay: 0.75}
solver:
  method: split
  horizon: 0.02
  schedule: {spacing: log, count: 24, first: 1.0e-3, last: 0.02}
checks:
  - {kind: heat_oracle}
  - {kind: rate_fit, orders: [1], window: [1.0e-3, 0.02], tolerance: 10, min_r2: 0}
  - {kind: smoothing_bound, orders: [1, 2], refine: true, stability: 1}
  - {kind: gronwall}
  - {kind: dissipation, refine: true, stability: 1}
  - {kind: monotone_norms}
  - {kind: continuity, time: 0.01, shifts: [2.0e-4, 1.0e-4], tolerance: 0.5}
  - {kind: uniqueness}
  - {kind: weak_residual, max_residual: 1, control: false}
  - {kind: mass_balance}
  - {kind: spectral_decay}
)");
  const auto r = run_experiment(c, {root, false});
  REQUIRE(r.checks.size() == 11);
  CHECK(r.executed_checks == 11);
  for (const auto& chk : r.checks) {
    INFO(chk.kind << ": " << chk.summary);
    CHECK_FALSE(chk.metrics.contains("error"));
    CHECK(chk.passed);
  }
  CHECK(r.passed);
  CHECK(r.files.empty());
  CHECK_FALSE(fs::exists(root));
}

TEST_CASE("a check that errors fails alone") {
  const auto root = scratch("galerkin");
  ExperimentConfig c = parse_config(R"(
name: galerkin
problem:
  grid: {dim: 1, points: 128}
  diffusion: sine
  initial: {kind: poisson, radius: 0.4}
solver:
  horizon: 0.05
  schedule: {spacing: linear, count: 5}
checks:
  - {kind: galerkin_oracle, modes: [5, 9, 17], tolerance: 1.0e-3}
  - {kind: galerkin_bounds, modes: [5, 9, 17], spread: 1}
  - {kind: galerkin_oracle, modes: [9, 5000]}
  - {kind: mass_balance}
)");
  const auto r = run_experiment(c, {root, false});
  REQUIRE(r.checks.size() == 4);
  CHECK(r.executed_checks == 4);
  for (std::size_t i : {0u, 1u, 3u}) {
    INFO(r.checks[i].kind << ": " << r.checks[i].summary);
    CHECK(r.checks[i].passed);
  }
  CHECK_FALSE(r.checks[2].passed);
  CHECK(r.checks[2].metrics.contains("error"));
  CHECK_FALSE(r.passed);
}

TEST_CASE("default checks") {
  const auto c = default_check("rate_fit");
  CHECK(c.block.kind == "rate_fit");
  CHECK(c.block.integers("orders") == std::vector<int>{1, 2});
  CHECK(c.criterion == 0);
  CHECK_THROWS_AS(default_check("nothing"), ValidationError);
}

TEST_CASE("suites") {
  CHECK(suite_criteria("oracle") == std::vector<int>{1, 2});
  CHECK(suite_criteria("smoothing") == std::vector<int>{3, 4});
  CHECK(suite_criteria("galerkin") == std::vector<int>{5, 6, 7});
  CHECK(suite_criteria("weakform") == std::vector<int>{8, 9});
  try {
    suite_criteria("bogus");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownSuite);
    for (auto s : suite_names()) CHECK(std::string(e.what()).find(s) != std::string::npos);
  }
  // Every criterion 1..9 is covered by some bundled check.
  for (int k = 1; k <= 9; ++k) {
    bool covered = false;
    for (const auto& b : bundled_configs())
      for (const auto& chk : parse_config(b.text).checks) covered = covered || chk.criterion == k;
    CHECK_MESSAGE(covered, "criterion " << k);
  }
}

TEST_CASE("verify runs a suite in parallel with one verdict per criterion") {
  const auto root = scratch("verify");
  SuiteOptions opts;
  opts.run.output_root = root;
  opts.threads = 3;
  const auto r = verify_suite("oracle", opts);
  REQUIRE(r.criteria.size() == 2);
  CHECK(r.criteria[0].criterion == 1);
  CHECK(r.criteria[1].criterion == 2);
  CHECK(r.passed());
  for (const auto& run : r.runs) {
    CHECK(run.requested_checks == run.executed_checks);
    for (const auto& chk : run.checks) CHECK((chk.criterion == 1 || chk.criterion == 2));
  }
  CHECK(fs::exists(root / "verify-oracle" / "heat-oracle" / "report.json"));
  fs::remove_all(root);
}
