#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

#include "parabolic/errors.hpp"
#include "parabolic/experiment.hpp"

namespace parabolic {
namespace {

enum class ParamType { Number, Integer, Bool, Text, NumberList, IntegerList };

struct ParamSchema {
  const char* key;
  ParamType type;
  ParamValue fallback;
};

struct KindSchema {
  const char* kind;
  std::vector<ParamSchema> params;
};

using Schemas = std::vector<KindSchema>;
using L = std::vector<double>;

const Schemas& diffusion_schemas() {
  static const Schemas s{
      {"isotropic", {{"c", ParamType::Number, 1.0}}},
      {"diagonal", {{"entries", ParamType::NumberList, L{}}}},
      {"sine", {{"a", ParamType::Number, 1.5}, {"b", ParamType::Number, 1.0}}},
      {"modulated", {{"a", ParamType::Number, 1.0}, {"b", ParamType::Number, 0.5}, {"c", ParamType::Number, 0.3}}},
  };
  return s;
}

std::vector<ParamSchema> mode_params() {
  return {{"wave", ParamType::IntegerList, L{}},
          {"amplitude", ParamType::Number, 1.0},
          {"cosine", ParamType::Bool, false}};
}

const Schemas& initial_schemas() {
  static const Schemas s{
      {"zero", {}},
      {"constant", {{"value", ParamType::Number, 1.0}}},
      {"mode", mode_params()},
      {"multimode", {}},
      {"poisson", {{"radius", ParamType::Number, 0.5}}},
      {"rough",
       {{"decay", ParamType::Number, 0.75}, {"amplitude", ParamType::Number, 1.0}, {"mean", ParamType::Number, 0.0}}},
  };
  return s;
}

const Schemas& forcing_schemas() {
  static const Schemas s = [] {
    Schemas out{
        {"zero", {}},
        {"constant", {{"value", ParamType::Number, 1.0}}},
        {"mode", mode_params()},
        {"multimode", {}},
        {"poisson", {{"radius", ParamType::Number, 0.5}}},
    };
    auto manufactured = mode_params();
    manufactured.insert(manufactured.begin(), {"target", ParamType::Text, std::string("multimode")});
    manufactured.push_back({"radius", ParamType::Number, 0.5});
    out.push_back({"manufactured", manufactured});
    return out;
  }();
  return s;
}

const Schemas& check_schemas() {
  static const Schemas s{
      {"heat_oracle", {{"method", ParamType::Text, std::string("solver")}, {"tolerance", ParamType::Number, 1e-8}}},
      {"galerkin_oracle", {{"modes", ParamType::IntegerList, L{9, 17, 33}}, {"tolerance", ParamType::Number, 1e-6}}},
      {"galerkin_bounds", {{"modes", ParamType::IntegerList, L{9, 17, 33}}, {"spread", ParamType::Number, 0.25}}},
      {"rate_fit",
       {{"orders", ParamType::IntegerList, L{1, 2}},
        {"window", ParamType::NumberList, L{}},
        {"tolerance", ParamType::Number, 0.12},
        {"min_r2", ParamType::Number, 0.98}}},
      {"smoothing_bound",
       {{"orders", ParamType::IntegerList, L{1, 2, 3}},
        {"window", ParamType::NumberList, L{}},
        {"refine", ParamType::Bool, false},
        {"stability", ParamType::Number, 0.25}}},
      {"gronwall", {{"max_constant", ParamType::Number, 5.0}}},
      {"dissipation",
       {{"expect_zero", ParamType::Bool, false},
        {"refine", ParamType::Bool, false},
        {"stability", ParamType::Number, 0.2}}},
      {"monotone_norms", {{"max_order", ParamType::Integer, 4.0}, {"tolerance", ParamType::Number, 1e-12}}},
      {"continuity",
       {{"time", ParamType::Number, 1e-3},
        {"shifts", ParamType::NumberList, L{8e-6, 4e-6, 2e-6, 1e-6}},
        {"tolerance", ParamType::Number, 0.1}}},
      {"uniqueness",
       {{"wave", ParamType::IntegerList, L{}},
        {"amplitude", ParamType::Number, 0.01},
        {"expect", ParamType::Text, std::string("auto")},
        {"tolerance", ParamType::Number, 1e-8}}},
      {"weak_residual",
       {{"test_modes", ParamType::Integer, 9.0},
        {"max_residual", ParamType::Number, 1e-6},
        {"control", ParamType::Bool, true},
        {"control_min", ParamType::Number, 0.1}}},
      {"mass_balance", {{"tolerance", ParamType::Number, 1e-10}}},
      {"spectral_decay", {{"rel_tol", ParamType::Number, 1e-9}}},
  };
  return s;
}

std::string kind_list(const Schemas& schemas) {
  std::string out;
  for (const auto& s : schemas) out += (out.empty() ? "" : ", ") + std::string(s.kind);
  return out;
}

const KindSchema& find_schema(const Schemas& schemas, const std::string& kind, const std::string& field) {
  for (const auto& s : schemas)
    if (kind == s.kind) return s;
  throw ValidationError(field, "unknown kind '" + kind + "'; expected one of: " + kind_list(schemas));
}

[[noreturn]] void invalid(const std::string& field, const std::string& message,
                          ErrorCode cause = ErrorCode::ValidationError) {
  throw ValidationError(field, message, cause);
}

// Scalar readers: yaml-cpp parses the structure, numbers go through
// from_chars so the round trip is exact.

std::string scalar_text(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) invalid(field, "expected a scalar");
  return node.Scalar();
}

double read_number(const YAML::Node& node, const std::string& field) {
  std::string s = scalar_text(node, field);
  if (!s.empty() && s[0] == '+') s.erase(0, 1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v))
    invalid(field, "expected a finite number, got '" + node.Scalar() + "'");
  return v;
}

long long read_integer(const YAML::Node& node, const std::string& field) {
  const double v = read_number(node, field);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) invalid(field, "expected an integer, got '" + node.Scalar() + "'");
  return static_cast<long long>(v);
}

bool read_bool(const YAML::Node& node, const std::string& field) {
  const std::string s = scalar_text(node, field);
  if (s == "true") return true;
  if (s == "false") return false;
  invalid(field, "expected true or false, got '" + s + "'");
}

std::vector<double> read_list(const YAML::Node& node, const std::string& field, bool integer) {
  if (!node.IsSequence()) invalid(field, "expected a list");
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    out.push_back(integer ? static_cast<double>(read_integer(node[i], f)) : read_number(node[i], f));
  }
  return out;
}

void expect_map(const YAML::Node& node, const std::string& field) {
  if (!node.IsMap()) invalid(field, "expected a mapping");
}

void reject_unknown(const YAML::Node& node, const std::string& field, std::initializer_list<std::string_view> known) {
  for (const auto& kv : node) {
    const std::string key = kv.first.Scalar();
    if (std::find(known.begin(), known.end(), key) == known.end())
      invalid(field.empty() ? key : field + "." + key, "unknown key");
  }
}

ParamValue read_param(const YAML::Node& node, ParamType type, const std::string& field) {
  switch (type) {
    case ParamType::Number: return read_number(node, field);
    case ParamType::Integer: return static_cast<double>(read_integer(node, field));
    case ParamType::Bool: return read_bool(node, field);
    case ParamType::Text: return scalar_text(node, field);
    case ParamType::NumberList: return read_list(node, field, false);
    case ParamType::IntegerList: return read_list(node, field, true);
  }
  return 0.0;
}

KindBlock defaults_for(const KindSchema& schema) {
  KindBlock b;
  b.kind = schema.kind;
  for (const auto& p : schema.params) b.params.emplace_back(p.key, p.fallback);
  return b;
}

// A kind block is either a bare name or a mapping with `kind` plus parameters.
// `extra` names keys handled by the caller (e.g. `criterion` on checks).
KindBlock read_block(const YAML::Node& node, const Schemas& schemas, const std::string& field,
                     std::initializer_list<std::string_view> extra = {}) {
  if (node.IsScalar()) return defaults_for(find_schema(schemas, node.Scalar(), field + ".kind"));
  expect_map(node, field);
  if (!node["kind"]) invalid(field + ".kind", "missing");
  const auto& schema = find_schema(schemas, scalar_text(node["kind"], field + ".kind"), field + ".kind");
  KindBlock b = defaults_for(schema);
  for (const auto& kv : node) {
    const std::string key = kv.first.Scalar();
    if (key == "kind" || std::find(extra.begin(), extra.end(), key) != extra.end()) continue;
    const auto it = std::find_if(schema.params.begin(), schema.params.end(),
                                 [&](const ParamSchema& p) { return key == p.key; });
    if (it == schema.params.end()) {
      std::string known;
      for (const auto& p : schema.params) known += (known.empty() ? "" : ", ") + std::string(p.key);
      invalid(field + "." + key, "unknown key for kind '" + b.kind + "'" +
                                     (known.empty() ? std::string(" (takes no parameters)") : "; expected: " + known));
    }
    b.params[it - schema.params.begin()].second = read_param(kv.second, it->type, field + "." + key);
  }
  return b;
}

ParamValue* find_param(KindBlock& b, std::string_view key) {
  for (auto& [k, v] : b.params)
    if (k == key) return &v;
  return nullptr;
}

// Defaults that depend on the dimension.
void resolve_block(KindBlock& b, int dim) {
  for (const char* key : {"wave"}) {
    if (auto* p = find_param(b, key); p != nullptr && std::get<L>(*p).empty()) {
      L wave(dim, 0.0);
      wave[0] = 1.0;
      *p = wave;
    }
  }
  if (b.kind == "diagonal")
    if (auto* p = find_param(b, "entries"); p != nullptr && std::get<L>(*p).empty()) *p = L(dim, 1.0);
}

// Emission.

std::string yaml_string(const std::string& s) {
  static const std::regex plain(R"([A-Za-z_][A-Za-z0-9_./-]*)");
  static const char* reserved[] = {"true", "false", "null", "yes", "no", "on", "off", "y", "n"};
  bool ok = std::regex_match(s, plain);
  for (const char* r : reserved) {
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    ok = ok && lower != r;
  }
  if (ok) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\x%02x", static_cast<unsigned char>(c));
      out += buf;
    } else {
      out += c;
    }
  }
  return out + "\"";
}

std::string emit_list(const L& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_number(v[i]);
  return out + "]";
}

std::string emit_value(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto* s = std::get_if<std::string>(&v)) return yaml_string(*s);
  return emit_list(std::get<L>(v));
}

void emit_block(std::ostringstream& os, const KindBlock& b, const std::string& indent) {
  os << indent << "kind: " << yaml_string(b.kind) << "\n";
  for (const auto& [k, v] : b.params) os << indent << k << ": " << emit_value(v) << "\n";
}

// Validation helpers.

bool is_integral(double v) { return v == std::floor(v); }

void check_wave(const KindBlock& b, const std::string& field, int dim, int points) {
  const auto& wave = b.list("wave");
  if (static_cast<int>(wave.size()) != dim) invalid(field + ".wave", "needs one entry per dimension");
  bool nonzero = false;
  for (double w : wave) {
    if (std::abs(w) >= points / 2.0) invalid(field + ".wave", "entries must satisfy |xi| < N/2");
    nonzero = nonzero || w != 0.0;
  }
  if (!nonzero && b.kind != "mode" && b.kind != "manufactured") invalid(field + ".wave", "must be nonzero");
}

void check_field_block(const KindBlock& b, const std::string& field, const ExperimentConfig& c) {
  if (b.kind == "mode" || (b.kind == "manufactured" && b.text("target") == "mode")) check_wave(b, field, c.dim, c.points);
  if (b.kind == "poisson" || (b.kind == "manufactured" && b.text("target") == "poisson")) {
    const double r = b.number("radius");
    if (!(r >= 0.0 && r < 1.0)) invalid(field + ".radius", "must lie in [0, 1)");
  }
  if (b.kind == "manufactured") {
    const auto& t = b.text("target");
    if (t != "mode" && t != "multimode" && t != "poisson")
      invalid(field + ".target", "unknown target '" + t + "'; expected one of: mode, multimode, poisson");
  }
  if (b.kind == "rough") {
    if (!(b.number("decay") > c.dim / 2.0))
      invalid(field + ".decay", "decay must exceed dim/2 = " + format_number(c.dim / 2.0) + " for L2 data",
              ErrorCode::DecayTooSmall);
    if (b.number("amplitude") < 0.0) invalid(field + ".amplitude", "must be >= 0");
  }
}

bool constant_isotropic(const ExperimentConfig& c) {
  if (c.diffusion.kind == "isotropic") return true;
  if (c.diffusion.kind == "diagonal") {
    const auto& e = c.diffusion.list("entries");
    return std::all_of(e.begin(), e.end(), [&](double v) { return v == e[0]; });
  }
  return false;
}

void check_orders(const std::vector<double>& orders, const std::string& field, int lo, int hi) {
  if (orders.empty()) invalid(field, "must not be empty");
  for (double k : orders)
    if (k < lo || k > hi) invalid(field, "orders must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

void check_window(const std::vector<double>& w, const std::string& field, double horizon) {
  if (w.empty()) return;
  if (w.size() != 2 || !(w[0] > 0.0) || !(w[0] < w[1]) || w[1] > horizon)
    invalid(field, "window must be empty or [lo, hi] with 0 < lo < hi <= horizon");
}

void check_check(const CheckConfig& chk, const std::string& field, const ExperimentConfig& c) {
  const KindBlock& b = chk.block;
  if (chk.criterion < 0 || chk.criterion > 10) invalid(field + ".criterion", "must lie in [0, 10]");
  for (const auto& [key, v] : b.params)
    if (const auto* d = std::get_if<double>(&v); d && key != "time" && *d < 0.0)
      invalid(field + "." + key, "must be >= 0");
  const auto& k = b.kind;
  if (k == "heat_oracle") {
    const auto& m = b.text("method");
    if (m != "solver") parse_method(m);
    if (!constant_isotropic(c))
      invalid(field, "heat_oracle needs constant isotropic diffusion", ErrorCode::MethodMismatch);
  } else if (k == "galerkin_oracle" || k == "galerkin_bounds") {
    const auto modes = b.list("modes");
    if (modes.empty()) invalid(field + ".modes", "must not be empty");
    for (std::size_t i = 0; i < modes.size(); ++i)
      if (modes[i] < 1 || (i > 0 && modes[i] <= modes[i - 1]))
        invalid(field + ".modes", "must be positive and strictly increasing");
  } else if (k == "rate_fit") {
    check_orders(b.list("orders"), field + ".orders", 0, c.max_order);
    check_window(b.list("window"), field + ".window", c.horizon);
  } else if (k == "smoothing_bound") {
    check_orders(b.list("orders"), field + ".orders", 1, c.max_order);
    check_window(b.list("window"), field + ".window", c.horizon);
  } else if (k == "monotone_norms") {
    const double m = b.number("max_order");
    if (m < 0 || m > kMaxSobolevOrder) invalid(field + ".max_order", "must lie in [0, 8]");
  } else if (k == "continuity") {
    const double t = b.number("time");
    const auto& shifts = b.list("shifts");
    if (!(t > 0.0) || t > c.horizon) invalid(field + ".time", "must lie in (0, horizon]");
    if (shifts.size() < 2) invalid(field + ".shifts", "needs at least two shifts");
    for (double s : shifts)
      if (!(s > 0.0) || t + s > c.horizon) invalid(field + ".shifts", "shifts must be > 0 with time + shift <= horizon");
  } else if (k == "uniqueness") {
    check_wave(b, field, c.dim, c.points);
    const auto& e = b.text("expect");
    if (e != "auto" && e != "closed_form" && e != "nonincreasing")
      invalid(field + ".expect", "expected one of: auto, closed_form, nonincreasing");
    if (e == "closed_form" && !constant_isotropic(c))
      invalid(field + ".expect", "closed_form needs constant isotropic diffusion", ErrorCode::MethodMismatch);
  } else if (k == "weak_residual") {
    if (b.number("test_modes") < 1) invalid(field + ".test_modes", "must be >= 1");
  }
}

}  // namespace

double KindBlock::number(std::string_view key) const {
  for (const auto& [k, v] : params)
    if (k == key) return std::get<double>(v);
  throw Error(ErrorCode::InvalidArgument, "no parameter '" + std::string(key) + "' on kind " + kind);
}

bool KindBlock::flag(std::string_view key) const {
  for (const auto& [k, v] : params)
    if (k == key) return std::get<bool>(v);
  throw Error(ErrorCode::InvalidArgument, "no parameter '" + std::string(key) + "' on kind " + kind);
}

const std::string& KindBlock::text(std::string_view key) const {
  for (const auto& [k, v] : params)
    if (k == key) return std::get<std::string>(v);
  throw Error(ErrorCode::InvalidArgument, "no parameter '" + std::string(key) + "' on kind " + kind);
}

const std::vector<double>& KindBlock::list(std::string_view key) const {
  for (const auto& [k, v] : params)
    if (k == key) return std::get<L>(v);
  throw Error(ErrorCode::InvalidArgument, "no parameter '" + std::string(key) + "' on kind " + kind);
}

std::vector<int> KindBlock::integers(std::string_view key) const {
  const auto& l = list(key);
  return std::vector<int>(l.begin(), l.end());
}

std::string format_number(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

Method parse_method(std::string_view name) {
  if (name == "exact") return Method::ExactExponential;
  if (name == "split") return Method::SplitExponential;
  if (name == "rk4") return Method::ReferenceRK;
  throw ValidationError("solver.method", "unknown method '" + std::string(name) + "'; expected one of: exact, split, rk4");
}

ExperimentConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.mark.line + 1, e.mark.column + 1, e.msg);
  }
  ExperimentConfig c;
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  expect_map(root, "(root)");
  reject_unknown(root, "", {"schema_version", "name", "seed", "problem", "solver", "checks", "output"});

  if (root["schema_version"]) c.schema_version = static_cast<int>(read_integer(root["schema_version"], "schema_version"));
  if (root["name"]) c.name = scalar_text(root["name"], "name");
  if (root["seed"]) {
    const std::string s = scalar_text(root["seed"], "seed");
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), c.seed);
    if (ec != std::errc() || end != s.data() + s.size()) invalid("seed", "expected an unsigned 64-bit integer");
  }

  c.length = 2.0 * std::numbers::pi;
  c.diffusion = defaults_for(find_schema(diffusion_schemas(), "isotropic", ""));
  c.forcing = defaults_for(find_schema(forcing_schemas(), "zero", ""));
  c.initial = defaults_for(find_schema(initial_schemas(), "multimode", ""));
  if (const auto p = root["problem"]) {
    expect_map(p, "problem");
    reject_unknown(p, "problem", {"grid", "diffusion", "forcing", "initial"});
    if (const auto g = p["grid"]) {
      expect_map(g, "problem.grid");
      reject_unknown(g, "problem.grid", {"dim", "points", "length"});
      if (g["dim"]) c.dim = static_cast<int>(read_integer(g["dim"], "problem.grid.dim"));
      if (g["points"]) c.points = static_cast<int>(read_integer(g["points"], "problem.grid.points"));
      if (g["length"]) c.length = read_number(g["length"], "problem.grid.length");
    }
    if (p["diffusion"]) c.diffusion = read_block(p["diffusion"], diffusion_schemas(), "problem.diffusion");
    if (p["forcing"]) c.forcing = read_block(p["forcing"], forcing_schemas(), "problem.forcing");
    if (p["initial"]) c.initial = read_block(p["initial"], initial_schemas(), "problem.initial");
  }

  bool first_set = false, last_set = false;
  if (const auto s = root["solver"]) {
    expect_map(s, "solver");
    reject_unknown(s, "solver", {"method", "safety", "horizon", "schedule"});
    if (s["method"]) c.method = scalar_text(s["method"], "solver.method");
    if (s["safety"]) c.safety = read_number(s["safety"], "solver.safety");
    if (s["horizon"]) c.horizon = read_number(s["horizon"], "solver.horizon");
    if (const auto sc = s["schedule"]) {
      expect_map(sc, "solver.schedule");
      reject_unknown(sc, "solver.schedule", {"spacing", "count", "first", "last"});
      if (sc["spacing"]) c.schedule.spacing = scalar_text(sc["spacing"], "solver.schedule.spacing");
      if (sc["count"]) c.schedule.count = static_cast<int>(read_integer(sc["count"], "solver.schedule.count"));
      if (sc["first"]) {
        c.schedule.first = read_number(sc["first"], "solver.schedule.first");
        first_set = true;
      }
      if (sc["last"]) {
        c.schedule.last = read_number(sc["last"], "solver.schedule.last");
        last_set = true;
      }
    }
  }
  if (!last_set) c.schedule.last = c.horizon;
  if (!first_set)
    c.schedule.first = c.schedule.spacing == "linear" ? c.schedule.last / std::max(c.schedule.count, 1)
                                                       : 1e-3 * c.schedule.last;

  if (const auto chk = root["checks"]) {
    if (!chk.IsSequence()) invalid("checks", "expected a list");
    for (std::size_t i = 0; i < chk.size(); ++i) {
      const std::string field = "checks[" + std::to_string(i) + "]";
      CheckConfig cc;
      cc.block = read_block(chk[i], check_schemas(), field, {"criterion"});
      if (chk[i].IsMap() && chk[i]["criterion"])
        cc.criterion = static_cast<int>(read_integer(chk[i]["criterion"], field + ".criterion"));
      c.checks.push_back(std::move(cc));
    }
  }

  c.output_dir = c.name;
  if (const auto o = root["output"]) {
    expect_map(o, "output");
    reject_unknown(o, "output", {"dir", "formats", "max_order"});
    if (o["dir"]) c.output_dir = scalar_text(o["dir"], "output.dir");
    if (o["formats"]) {
      if (!o["formats"].IsSequence()) invalid("output.formats", "expected a list");
      c.formats.clear();
      for (std::size_t i = 0; i < o["formats"].size(); ++i)
        c.formats.push_back(scalar_text(o["formats"][i], "output.formats[" + std::to_string(i) + "]"));
    }
    if (o["max_order"]) c.max_order = static_cast<int>(read_integer(o["max_order"], "output.max_order"));
  }

  if (c.dim >= 1 && c.dim <= 3) {
    resolve_block(c.diffusion, c.dim);
    resolve_block(c.forcing, c.dim);
    resolve_block(c.initial, c.dim);
    for (auto& chk : c.checks) resolve_block(chk.block, c.dim);
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& c) {
  if (c.schema_version != kSchemaVersion)
    invalid("schema_version", "unsupported version " + std::to_string(c.schema_version) + "; expected " +
                                  std::to_string(kSchemaVersion));
  static const std::regex name_re(R"([A-Za-z0-9][A-Za-z0-9_.-]*)");
  if (!std::regex_match(c.name, name_re)) invalid("name", "must match [A-Za-z0-9][A-Za-z0-9_.-]*");

  if (c.dim < 1 || c.dim > 3) invalid("problem.grid.dim", "must be 1, 2 or 3");
  if (c.points < 8 || c.points % 2 != 0) invalid("problem.grid.points", "must be even and >= 8");
  if (!(c.length > 0.0) || !std::isfinite(c.length)) invalid("problem.grid.length", "must be positive");

  const auto& d = c.diffusion;
  find_schema(diffusion_schemas(), d.kind, "problem.diffusion.kind");
  if (d.kind == "isotropic" && !(d.number("c") > 0.0))
    invalid("problem.diffusion.c", "must be positive", ErrorCode::NotElliptic);
  if (d.kind == "diagonal") {
    const auto& e = d.list("entries");
    if (static_cast<int>(e.size()) != c.dim) invalid("problem.diffusion.entries", "needs one entry per dimension");
    for (double v : e)
      if (!(v > 0.0)) invalid("problem.diffusion.entries", "entries must be positive", ErrorCode::NotElliptic);
  }
  if (d.kind == "sine") {
    if (c.dim != 1) invalid("problem.diffusion.kind", "sine diffusion is one-dimensional");
    if (!(d.number("a") > std::abs(d.number("b"))))
      invalid("problem.diffusion", "needs a > |b|", ErrorCode::NotElliptic);
  }
  if (d.kind == "modulated") {
    if (c.dim < 2) invalid("problem.diffusion.kind", "modulated diffusion needs dim >= 2");
    if (!(d.number("a") > std::abs(d.number("b"))))
      invalid("problem.diffusion", "needs a > |b|", ErrorCode::NotElliptic);
    if (d.number("c") < 0.0) invalid("problem.diffusion.c", "must be >= 0");
  }
  find_schema(forcing_schemas(), c.forcing.kind, "problem.forcing.kind");
  find_schema(initial_schemas(), c.initial.kind, "problem.initial.kind");
  check_field_block(c.forcing, "problem.forcing", c);
  check_field_block(c.initial, "problem.initial", c);

  const Method method = parse_method(c.method);
  if (method == Method::ExactExponential && !constant_isotropic(c))
    invalid("solver.method", "exact needs constant isotropic diffusion", ErrorCode::MethodMismatch);
  if (!(c.safety > 0.0) || c.safety > 1.0) invalid("solver.safety", "must lie in (0, 1]");
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) invalid("solver.horizon", "must be positive");
  const auto& s = c.schedule;
  if (s.spacing != "log" && s.spacing != "linear") invalid("solver.schedule.spacing", "expected log or linear");
  if (s.count < 1 || s.count > 100000) invalid("solver.schedule.count", "must lie in [1, 100000]");
  if (!(s.first > 0.0)) invalid("solver.schedule.first", "must be positive");
  if (s.last > c.horizon) invalid("solver.schedule.last", "must not exceed the horizon");
  if (s.count == 1 ? s.first != s.last : !(s.first < s.last))
    invalid("solver.schedule", "needs first < last (first == last for a single sample)");

  if (c.max_order < 1 || c.max_order > kMaxSobolevOrder - 2) invalid("output.max_order", "must lie in [1, 6]");
  if (c.formats.empty()) invalid("output.formats", "must not be empty");
  for (std::size_t i = 0; i < c.formats.size(); ++i) {
    if (c.formats[i] != "csv" && c.formats[i] != "json")
      invalid("output.formats[" + std::to_string(i) + "]", "expected csv or json");
    if (std::find(c.formats.begin(), c.formats.begin() + i, c.formats[i]) != c.formats.begin() + i)
      invalid("output.formats", "duplicate format");
  }
  if (c.output_dir.empty()) invalid("output.dir", "must not be empty");

  for (std::size_t i = 0; i < c.checks.size(); ++i) {
    const std::string field = "checks[" + std::to_string(i) + "]";
    const auto& schema = find_schema(check_schemas(), c.checks[i].block.kind, field + ".kind");
    for (const auto& p : schema.params) {
      if (p.type != ParamType::Integer && p.type != ParamType::IntegerList) continue;
      const auto& v = c.checks[i].block.params;
      const auto it = std::find_if(v.begin(), v.end(), [&](const auto& kv) { return kv.first == p.key; });
      if (it == v.end()) invalid(field + "." + p.key, "missing");
      if (const auto* n = std::get_if<double>(&it->second); n && !is_integral(*n))
        invalid(field + "." + p.key, "expected an integer");
    }
    check_check(c.checks[i], field, c);
  }
}

std::string emit_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "schema_version: " << c.schema_version << "\n";
  os << "name: " << yaml_string(c.name) << "\n";
  os << "seed: " << c.seed << "\n";
  os << "problem:\n";
  os << "  grid:\n";
  os << "    dim: " << c.dim << "\n";
  os << "    points: " << c.points << "\n";
  os << "    length: " << format_number(c.length) << "\n";
  os << "  diffusion:\n";
  emit_block(os, c.diffusion, "    ");
  os << "  forcing:\n";
  emit_block(os, c.forcing, "    ");
  os << "  initial:\n";
  emit_block(os, c.initial, "    ");
  os << "solver:\n";
  os << "  method: " << yaml_string(c.method) << "\n";
  os << "  safety: " << format_number(c.safety) << "\n";
  os << "  horizon: " << format_number(c.horizon) << "\n";
  os << "  schedule:\n";
  os << "    spacing: " << yaml_string(c.schedule.spacing) << "\n";
  os << "    count: " << c.schedule.count << "\n";
  os << "    first: " << format_number(c.schedule.first) << "\n";
  os << "    last: " << format_number(c.schedule.last) << "\n";
  if (c.checks.empty()) {
    os << "checks: []\n";
  } else {
    os << "checks:\n";
    for (const auto& chk : c.checks) {
      os << "  - kind: " << yaml_string(chk.block.kind) << "\n";
      os << "    criterion: " << chk.criterion << "\n";
      for (const auto& [k, v] : chk.block.params) os << "    " << k << ": " << emit_value(v) << "\n";
    }
  }
  os << "output:\n";
  os << "  dir: " << yaml_string(c.output_dir) << "\n";
  os << "  formats: [";
  for (std::size_t i = 0; i < c.formats.size(); ++i) os << (i ? ", " : "") << yaml_string(c.formats[i]);
  os << "]\n";
  os << "  max_order: " << c.max_order << "\n";
  return os.str();
}

CheckConfig default_check(std::string_view kind, int dim) {
  CheckConfig c;
  c.block = defaults_for(find_schema(check_schemas(), std::string(kind), "checks.kind"));
  resolve_block(c.block, dim);
  return c;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : emit_config(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace parabolic
