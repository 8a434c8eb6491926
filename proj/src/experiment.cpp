#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "parabolic/errors.hpp"
#include "parabolic/experiment.hpp"
#include "parabolic/galerkin.hpp"
#include "parabolic/monitor.hpp"

namespace parabolic {
namespace {

using json = nlohmann::ordered_json;

ScalarField build_field(const KindBlock& b, const GridSpec& grid, const DiffusionField& diffusion,
                        std::uint64_t seed) {
  const auto& k = b.kind;
  if (k == "zero") return ScalarField::zeros(grid);
  if (k == "constant") return constant_field(grid, b.number("value"));
  if (k == "mode") return mode_field(grid, b.integers("wave"), b.number("amplitude"), b.flag("cosine"));
  if (k == "multimode") return multimode_field(grid);
  if (k == "poisson") return poisson_field(grid, b.number("radius"));
  if (k == "rough") return rough_data_sampler({b.number("decay"), seed, b.number("amplitude"), b.number("mean")}, grid);
  if (k == "manufactured") {
    KindBlock target = b;
    target.kind = b.text("target");
    return manufactured_steady(diffusion, build_field(target, grid, diffusion, seed));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown field kind " + k);
}

std::optional<double> isotropic_constant(const ExperimentConfig& c) {
  if (c.diffusion.kind == "isotropic") return c.diffusion.number("c");
  if (c.diffusion.kind == "diagonal") {
    const auto& e = c.diffusion.list("entries");
    if (std::all_of(e.begin(), e.end(), [&](double v) { return v == e[0]; })) return e[0];
  }
  return std::nullopt;
}

double norm(const ScalarField& u) { return std::sqrt(sobolev_norm(u, 0)); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Refined {
  ExperimentConfig config;
  ProblemSpec problem;
  Trajectory trajectory;
  NormSeries series;
};

struct Context {
  const ExperimentConfig& config;
  const ProblemSpec& problem;
  Method method;
  SolveOptions options;
  std::vector<double> times;
  const Trajectory& trajectory;
  const NormSeries& series;
  const EnergySeries& energy;
  std::unique_ptr<Refined> refined_run;

  const Refined& refined() {
    if (!refined_run) {
      ExperimentConfig rc = parabolic::refined(config);
      ProblemSpec rp = build_problem(rc);
      Trajectory rt = solve(rp, times, method, {rc.safety, true});
      NormSeries rs = norm_series(rt, config.max_order);
      refined_run = std::make_unique<Refined>(Refined{std::move(rc), std::move(rp), std::move(rt), std::move(rs)});
    }
    return *refined_run;
  }
};

double relative_change(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 1e-10 ? std::abs(a - b) / scale : 0.0;
}

CheckVerdict heat_oracle(Context& ctx, const KindBlock& b) {
  const std::string& name = b.text("method");
  const Method m = name == "solver" ? ctx.method : parse_method(name);
  std::optional<Trajectory> own;
  if (m != ctx.method) own = solve(ctx.problem, ctx.times, m, ctx.options);
  const Trajectory& traj = own ? *own : ctx.trajectory;
  double worst = 0.0;
  std::vector<double> errors;
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const ScalarField ref = heat_exact(ctx.problem, ctx.times[j]);
    const double scale = norm(ref);
    const double err = l2_distance(traj.states()[j], ref) / (scale > 0.0 ? scale : 1.0);
    errors.push_back(err);
    worst = std::max(worst, err);
  }
  CheckVerdict v;
  v.passed = worst <= b.number("tolerance");
  v.summary = std::string(to_string(m)) + " vs closed form: max relative L2 error " + fmt(worst) + " (tol " +
              fmt(b.number("tolerance")) + ")";
  v.metrics = {{"method", to_string(m)}, {"max_relative_error", worst}, {"relative_errors", errors}};
  return v;
}

CheckVerdict galerkin_oracle(Context& ctx, const KindBlock& b) {
  const auto modes = b.integers("modes");
  const GalerkinStudy study = galerkin_study(ctx.trajectory, modes);
  bool shrinking = true;
  for (std::size_t i = 1; i < study.oracle_gaps.size(); ++i)
    shrinking = shrinking && study.oracle_gaps[i] < study.oracle_gaps[i - 1];
  CheckVerdict v;
  v.passed = shrinking && study.oracle_gaps.back() <= b.number("tolerance");
  v.summary = "projection gap " + fmt(study.oracle_gaps.back()) + " at m = " + std::to_string(modes.back()) +
              " (tol " + fmt(b.number("tolerance")) + "), " + (shrinking ? "shrinking" : "not shrinking") +
              " over m";
  v.metrics = {{"modes", modes}, {"gaps", study.oracle_gaps}, {"monotone", shrinking}};
  return v;
}

CheckVerdict galerkin_bounds(Context& ctx, const KindBlock& b) {
  const auto modes = b.integers("modes");
  const GalerkinStudy study = galerkin_study(ctx.trajectory, modes);
  const auto spread = [](const std::vector<double>& c) {
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    return *hi > 0.0 ? (*hi - *lo) / *hi : 0.0;
  };
  bool nested = true;
  for (std::size_t i = 1; i < study.nesting_gaps.size(); ++i)
    nested = nested && study.nesting_gaps[i] <= study.nesting_gaps[i - 1];
  const double sa = spread(study.apriori_constants), si = spread(study.integrated_constants);
  CheckVerdict v;
  v.passed = sa <= b.number("spread") && si <= b.number("spread") && nested;
  v.summary = "a priori constants spread " + fmt(sa) + ", integrated " + fmt(si) + ", nesting gaps " +
              (nested ? "nonincreasing" : "increasing");
  v.metrics = {{"modes", modes},
               {"apriori_constants", study.apriori_constants},
               {"integrated_constants", study.integrated_constants},
               {"nesting_gaps", study.nesting_gaps},
               {"apriori_spread", sa},
               {"integrated_spread", si}};
  return v;
}

std::optional<double> predicted_slope(const ExperimentConfig& c, int k) {
  if (c.initial.kind != "rough" || c.forcing.kind != "zero" || !isotropic_constant(c)) return std::nullopt;
  return rough_data_slope(c.dim, k, c.initial.number("decay"));
}

// [10 dt, T/10], cut where the k-th norm falls to 1e3 eps of the L2 norm.
std::pair<double, double> default_window(const Context& ctx, int k) {
  const double dt = ctx.trajectory.stats().max_step;
  double lo = dt > 0.0 && ctx.method != Method::ExactExponential ? 10.0 * dt : ctx.times.front();
  double hi = ctx.config.horizon / 10.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t j = 0; j < ctx.times.size(); ++j) {
    if (ctx.times[j] < lo) continue;
    if (ctx.series.norms[k][j] <= 1e3 * eps * ctx.series.norms[0][j]) {
      hi = std::min(hi, j > 0 ? ctx.times[j - 1] : lo);
      break;
    }
  }
  return {lo, hi};
}

CheckVerdict rate_fit_check(Context& ctx, const KindBlock& b) {
  const auto& window = b.list("window");
  CheckVerdict v;
  v.passed = true;
  json fits = json::array();
  for (int k : b.integers("orders")) {
    const auto [lo, hi] = window.empty() ? default_window(ctx, k) : std::pair{window[0], window[1]};
    const RateFit fit = rate_fit(ctx.series, k, lo, hi);
    const auto pred = predicted_slope(ctx.config, k);
    bool ok = true;
    if (pred) ok = std::abs(fit.slope - *pred) <= b.number("tolerance") && fit.r2 >= b.number("min_r2");
    v.passed = v.passed && ok;
    json f = {{"k", k},         {"t_lo", lo},     {"t_hi", hi},
              {"samples", fit.samples}, {"slope", fit.slope}, {"r2", fit.r2},
              {"fitted_constant", fit.fitted_constant}, {"passed", ok}};
    f["predicted_slope"] = pred ? json(*pred) : json(nullptr);
    fits.push_back(f);
    v.summary += (v.summary.empty() ? "" : "; ") + std::string("k=") + std::to_string(k) + " slope " +
                 fmt(fit.slope) + (pred ? " (predicted " + fmt(*pred) + ")" : " (no prediction)") + " r2 " +
                 fmt(fit.r2);
  }
  v.metrics = {{"fits", fits}};
  return v;
}

CheckVerdict smoothing_check(Context& ctx, const KindBlock& b) {
  const auto& w = b.list("window");
  std::optional<std::pair<double, double>> window;
  if (!w.empty()) window = std::pair{w[0], w[1]};
  CheckVerdict v;
  v.passed = true;
  json bounds = json::array();
  for (int k : b.integers("orders")) {
    const SmoothingBound sb = check_smoothing_bound(ctx.series, k, window);
    json e = {{"k", k},
              {"fitted_constant", sb.fitted_constant},
              {"argmax_time", sb.argmax_time},
              {"left_slope", sb.left_slope},
              {"passed", sb.passed}};
    bool ok = sb.passed;
    if (b.flag("refine")) {
      const SmoothingBound rb = check_smoothing_bound(ctx.refined().series, k, window);
      const double change = relative_change(sb.fitted_constant, rb.fitted_constant);
      e["refined_constant"] = rb.fitted_constant;
      e["refinement_change"] = change;
      ok = ok && rb.passed && change <= b.number("stability");
    }
    v.passed = v.passed && ok;
    v.summary += (v.summary.empty() ? "" : "; ") + std::string("k=") + std::to_string(k) + " C_T " +
                 fmt(sb.fitted_constant) + (e.contains("refinement_change")
                                                ? " (refined change " + fmt(e["refinement_change"]) + ")"
                                                : std::string()) +
                 (ok ? "" : " FAIL");
    bounds.push_back(e);
  }
  v.metrics = {{"bounds", bounds}};
  if (b.flag("refine")) {
    v.metrics["refined_points"] = ctx.refined().config.points;
    v.metrics["refined_safety"] = ctx.refined().config.safety;
  }
  return v;
}

CheckVerdict gronwall_check(Context& ctx, const KindBlock& b) {
  const double data = ctx.series.forcing_sq.back();
  const GronwallFit fit = check_gronwall(ctx.energy, data);
  CheckVerdict v;
  v.passed = fit.m1_constant <= b.number("max_constant") && fit.mm_constant <= b.number("max_constant");
  v.summary = "minimal C for M1 " + fmt(fit.m1_constant) + ", for M (m = " + std::to_string(ctx.energy.order) +
              ") " + fmt(fit.mm_constant) + " (max " + fmt(b.number("max_constant")) + ")";
  v.metrics = {{"order", ctx.energy.order},
               {"m1_constant", fit.m1_constant},
               {"mm_constant", fit.mm_constant},
               {"data", data}};
  return v;
}

CheckVerdict dissipation_check(Context& ctx, const KindBlock& b) {
  const DissipationReport r = check_dissipation(ctx.series, ctx.trajectory);
  CheckVerdict v;
  v.passed = b.flag("expect_zero") ? r.feasible_with_zero : std::isfinite(r.max_constant);
  v.summary = "max fitted C " + fmt(r.max_constant) + (r.feasible_with_zero ? " (feasible with 0)" : "");
  v.metrics = {{"constants", r.constants},
               {"max_constant", r.max_constant},
               {"feasible_with_zero", r.feasible_with_zero},
               {"constant_basis", "grid estimate: D and its derivatives are sampled on the solver grid"}};
  if (b.flag("refine")) {
    const DissipationReport rr = check_dissipation(ctx.refined().series, ctx.refined().trajectory);
    const double change = relative_change(r.max_constant, rr.max_constant);
    v.metrics["refined_max_constant"] = rr.max_constant;
    v.metrics["refinement_change"] = change;
    v.passed = v.passed && std::isfinite(rr.max_constant) && change <= b.number("stability");
    v.summary += ", refined " + fmt(rr.max_constant) + " (change " + fmt(change) + ")";
  }
  return v;
}

CheckVerdict monotone_check(Context& ctx, const KindBlock& b) {
  const int top = static_cast<int>(b.number("max_order"));
  const double tol = b.number("tolerance");
  CheckVerdict v;
  v.passed = true;
  json worst = json::array();
  for (int k = 0; k <= top; ++k) {
    double prev = sobolev_norm(ctx.problem.initial(), k);
    double excess = 0.0;
    for (const auto& u : ctx.trajectory.states()) {
      const double cur = sobolev_norm(u, k);
      if (prev > 0.0) excess = std::max(excess, (cur - prev) / prev);
      else if (cur > 0.0) excess = std::numeric_limits<double>::infinity();
      prev = cur;
    }
    v.passed = v.passed && excess <= tol;
    worst.push_back(excess);
  }
  v.summary = std::string("orders 0..") + std::to_string(top) + (v.passed ? " nonincreasing" : " increase") +
              " (worst relative increase " + fmt(*std::max_element(worst.begin(), worst.end())) + ")";
  v.metrics = {{"max_order", top}, {"relative_increase", worst}};
  return v;
}

CheckVerdict continuity_check(Context& ctx, const KindBlock& b) {
  const auto& shifts = b.list("shifts");
  const ContinuityReport r = check_continuity(ctx.problem, b.number("time"), shifts, ctx.method, ctx.options);
  double worst = 0.0;
  for (std::size_t i = 0; i < r.l2_ratios.size(); ++i) {
    const double expected = shifts[i + 1] / shifts[i];
    worst = std::max({worst, std::abs(r.l2_ratios[i] - expected), std::abs(r.gradient_ratios[i] - expected)});
  }
  CheckVerdict v;
  v.passed = worst <= b.number("tolerance");
  v.summary = "defect ratios at t = " + fmt(r.time) + " within " + fmt(worst) + " of the shift ratios (tol " +
              fmt(b.number("tolerance")) + ")";
  v.metrics = {{"time", r.time},
               {"shifts", r.shifts},
               {"l2_defects", r.l2_defects},
               {"gradient_defects", r.gradient_defects},
               {"l2_ratios", r.l2_ratios},
               {"gradient_ratios", r.gradient_ratios},
               {"max_deviation", worst}};
  return v;
}

CheckVerdict uniqueness_check(Context& ctx, const KindBlock& b) {
  const GridSpec& grid = ctx.problem.grid();
  const auto wave = b.integers("wave");
  const ScalarField delta = mode_field(grid, wave, b.number("amplitude"));
  const ScalarField perturbed = combine(1.0, ctx.problem.initial(), 1.0, delta);
  const StabilityReport r = check_uniqueness_stability(ctx.problem, perturbed, ctx.times, ctx.method, ctx.options);
  std::string expect = b.text("expect");
  const auto c = isotropic_constant(ctx.config);
  if (expect == "auto") expect = c ? "closed_form" : "nonincreasing";
  CheckVerdict v;
  v.metrics = {{"expect", expect},
               {"initial_defect", r.initial_defect},
               {"defects", r.defects},
               {"gronwall_constant", r.gronwall_constant},
               {"contractive", r.contractive},
               {"nonincreasing", r.nonincreasing}};
  if (expect == "closed_form") {
    double k2 = 0.0;
    for (int w : wave) k2 += std::pow(grid.wavenumber_scale() * w, 2);
    double worst = 0.0;
    for (std::size_t j = 0; j < r.defects.size(); ++j) {
      const double predicted = std::exp(-*c * k2 * ctx.times[j]) * r.initial_defect;
      worst = std::max(worst, std::abs(r.defects[j] - predicted) / predicted);
    }
    v.passed = worst <= b.number("tolerance");
    v.metrics["max_relative_error"] = worst;
    v.summary = "defect vs exp(-c |kappa|^2 t) ||delta||: max relative error " + fmt(worst) + " (tol " +
                fmt(b.number("tolerance")) + ")";
  } else {
    v.passed = r.nonincreasing;
    v.summary = std::string("defect ") + (r.nonincreasing ? "nonincreasing" : "increases") + ", Gronwall C " +
                fmt(r.gronwall_constant);
  }
  return v;
}

CheckVerdict weak_residual_check(Context& ctx, const KindBlock& b) {
  const int modes = static_cast<int>(b.number("test_modes"));
  const WeakResidual r = residual_weak_form(ctx.trajectory, modes);
  CheckVerdict v;
  v.passed = r.max_residual <= b.number("max_residual");
  v.summary = "normalized residual " + fmt(r.max_residual) + " (max " + fmt(b.number("max_residual")) + ")";
  v.metrics = {{"test_functions", r.test_functions}, {"samples", r.samples}, {"max_residual", r.max_residual}};
  if (b.flag("control")) {
    const WeakResidual rc = residual_weak_form(shuffled_control(ctx.trajectory, ctx.config.seed), modes);
    v.passed = v.passed && rc.max_residual >= b.number("control_min");
    v.summary += ", shuffled control " + fmt(rc.max_residual) + " (min " + fmt(b.number("control_min")) + ")";
    v.metrics["control_residual"] = rc.max_residual;
  }
  return v;
}

CheckVerdict mass_check(Context& ctx, const KindBlock& b) {
  const double defect = mass_balance(ctx.trajectory);
  const double bound =
      b.number("tolerance") * (norm(ctx.problem.initial()) + ctx.config.horizon * norm(ctx.problem.forcing()));
  CheckVerdict v;
  v.passed = defect <= bound;
  v.summary = "mean defect " + fmt(defect) + " (bound " + fmt(bound) + ")";
  v.metrics = {{"defect", defect}, {"bound", bound}};
  return v;
}

CheckVerdict decay_check(Context& ctx, const KindBlock& b) {
  DecayProfile earlier = spectral_decay_profile(ctx.problem.initial());
  CheckVerdict v;
  v.passed = true;
  json crossovers = json::array();
  for (const auto& u : ctx.trajectory.states()) {
    DecayProfile later = spectral_decay_profile(u);
    const double peak = *std::max_element(earlier.amplitude.begin(), earlier.amplitude.end());
    const auto r = dominance_crossover(later, earlier, b.number("rel_tol"), 1e-13 * peak);
    crossovers.push_back(r ? json(*r) : json(nullptr));
    v.passed = v.passed && r.has_value();
    earlier = std::move(later);
  }
  v.summary = v.passed ? "every profile dominated by its predecessor beyond a crossover shell"
                       : "some profile is not dominated by its predecessor";
  v.metrics = {{"crossovers", crossovers}};
  if (const auto c = isotropic_constant(ctx.config); c && ctx.trajectory.size() >= 2) {
    const auto n = ctx.trajectory.size();
    const DecayProfile a = spectral_decay_profile(ctx.trajectory.states()[n - 1]);
    const DecayProfile p = spectral_decay_profile(ctx.trajectory.states()[n - 2]);
    try {
      const double rate = gaussian_rate(a, p, 1, ctx.config.points / 8, ctx.config.length);
      v.metrics["gaussian_rate"] = rate;
      v.metrics["expected_rate"] = *c * (ctx.times[n - 1] - ctx.times[n - 2]);
    } catch (const Error&) {
      v.metrics["gaussian_rate"] = nullptr;
    }
  }
  return v;
}

CheckVerdict run_check(Context& ctx, const CheckConfig& chk) {
  const auto& k = chk.block.kind;
  const KindBlock& b = chk.block;
  if (k == "heat_oracle") return heat_oracle(ctx, b);
  if (k == "galerkin_oracle") return galerkin_oracle(ctx, b);
  if (k == "galerkin_bounds") return galerkin_bounds(ctx, b);
  if (k == "rate_fit") return rate_fit_check(ctx, b);
  if (k == "smoothing_bound") return smoothing_check(ctx, b);
  if (k == "gronwall") return gronwall_check(ctx, b);
  if (k == "dissipation") return dissipation_check(ctx, b);
  if (k == "monotone_norms") return monotone_check(ctx, b);
  if (k == "continuity") return continuity_check(ctx, b);
  if (k == "uniqueness") return uniqueness_check(ctx, b);
  if (k == "weak_residual") return weak_residual_check(ctx, b);
  if (k == "mass_balance") return mass_check(ctx, b);
  if (k == "spectral_decay") return decay_check(ctx, b);
  throw Error(ErrorCode::InvalidArgument, "unknown check " + k);
}

std::string series_csv(const NormSeries& series, const EnergySeries& energy) {
  std::ostringstream os;
  os << "t";
  for (int k = 0; k <= series.order(); ++k) os << ",norm_" << k;
  os << ",M1,Mm\n";
  for (std::size_t j = 0; j < series.times.size(); ++j) {
    os << format_number(series.times[j]);
    for (int k = 0; k <= series.order(); ++k) os << ',' << format_number(series.norms[k][j]);
    os << ',' << format_number(energy.m1[j]) << ',' << format_number(energy.mm[j]) << '\n';
  }
  return os.str();
}

bool wants(const ExperimentConfig& c, std::string_view format) {
  return std::find(c.formats.begin(), c.formats.end(), format) != c.formats.end();
}

}  // namespace

std::vector<double> sample_times(const ExperimentConfig& c) {
  const auto& s = c.schedule;
  if (s.count == 1) return {s.first};
  return s.spacing == "linear" ? linear_schedule(s.first, s.last, s.count) : log_schedule(s.first, s.last, s.count);
}

ProblemSpec build_problem(const ExperimentConfig& c) {
  const GridSpec grid(c.dim, c.points, c.length);
  const auto& d = c.diffusion;
  std::optional<DiffusionField> diffusion;
  if (d.kind == "isotropic") diffusion = isotropic_diffusion(grid, d.number("c"));
  else if (d.kind == "diagonal") diffusion = diagonal_diffusion(grid, d.list("entries"));
  else if (d.kind == "sine") diffusion = sine_diffusion(grid, d.number("a"), d.number("b"));
  else if (d.kind == "modulated") diffusion = modulated_diffusion(grid, d.number("a"), d.number("b"), d.number("c"));
  else throw Error(ErrorCode::InvalidArgument, "unknown diffusion " + d.kind);
  ScalarField forcing = build_field(c.forcing, grid, *diffusion, c.seed);
  ScalarField initial = build_field(c.initial, grid, *diffusion, c.seed);
  return ProblemSpec(std::move(*diffusion), std::move(forcing), std::move(initial), c.horizon);
}

ExperimentConfig refined(const ExperimentConfig& config) {
  ExperimentConfig r = config;
  r.points *= 2;
  r.safety *= 0.5;
  return r;
}

void write_atomic(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

nlohmann::ordered_json RunReport::to_json() const {
  json checks_json = json::array();
  for (const auto& c : checks)
    checks_json.push_back({{"kind", c.kind},
                           {"criterion", c.criterion},
                           {"passed", c.passed},
                           {"summary", c.summary},
                           {"metrics", c.metrics}});
  return {{"schema_version", kSchemaVersion},
          {"name", name},
          {"config_hash", config_hash},
          {"seed", seed},
          {"passed", passed},
          {"partial", partial},
          {"error", error},
          {"requested_checks", requested_checks},
          {"executed_checks", executed_checks},
          {"stats",
           {{"method", to_string(stats.method)},
            {"steps", stats.steps},
            {"max_step", stats.max_step},
            {"splitting_constant", stats.splitting_constant},
            {"wall_seconds", wall_seconds}}},
          {"checks", checks_json},
          {"files", files}};
}

RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.name = config.name;
  report.config_hash = config_hash(config);
  report.seed = config.seed;
  report.requested_checks = config.checks.size();
  const std::filesystem::path dir_part(config.output_dir);
  report.directory = dir_part.is_absolute() ? dir_part : options.output_root / dir_part;

  const auto finish = [&](const std::string* csv) {
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!options.write_files) return;
    std::error_code ec;
    std::filesystem::create_directories(report.directory, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + report.directory.string() + ": " + ec.message());
    report.files.clear();
    if (csv != nullptr && wants(config, "csv")) {
      write_atomic(report.directory / "series.csv", *csv);
      report.files.push_back("series.csv");
    }
    write_atomic(report.directory / "config.resolved.yaml", emit_config(config));
    report.files.push_back("config.resolved.yaml");
    if (wants(config, "json")) {
      report.files.push_back("report.json");
      write_atomic(report.directory / "report.json", report.to_json().dump(2) + "\n");
    }
  };

  const Method method = parse_method(config.method);
  const SolveOptions solve_options{config.safety, true};
  const std::vector<double> times = sample_times(config);
  std::optional<ProblemSpec> problem;
  std::optional<Trajectory> trajectory;
  try {
    problem = build_problem(config);
    trajectory = solve(*problem, times, method, solve_options);
  } catch (const std::exception& e) {
    report.partial = true;
    report.error = e.what();
    finish(nullptr);
    throw;
  }
  report.stats = trajectory->stats();
  const NormSeries series = norm_series(*trajectory, config.max_order);
  const EnergySeries energy = energy_series(series);

  Context ctx{config, *problem, method, solve_options, times, *trajectory, series, energy, nullptr};
  for (const auto& chk : config.checks) {
    CheckVerdict v;
    try {
      v = run_check(ctx, chk);
    } catch (const std::exception& e) {
      v.passed = false;
      v.summary = std::string("error: ") + e.what();
      v.metrics = {{"error", e.what()}};
    }
    v.kind = chk.block.kind;
    v.criterion = chk.criterion;
    report.checks.push_back(std::move(v));
  }
  report.executed_checks = report.checks.size();
  report.passed = std::all_of(report.checks.begin(), report.checks.end(), [](const auto& v) { return v.passed; });
  const std::string csv = series_csv(series, energy);
  finish(&csv);
  return report;
}

}  // namespace parabolic
