#include "hormander/experiment.hpp"

#include "hormander/covariance.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace hormander {

using nlohmann::json;

namespace {

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {ExperimentKind::BesovLimit, "besov_limit"},
    {ExperimentKind::PerimeterLimit, "perimeter_limit"},
    {ExperimentKind::FractionalPointwise, "fractional_pointwise"},
    {ExperimentKind::FractionalL1, "fractional_l1"},
    {ExperimentKind::LpLimit, "lp_limit"},
    {ExperimentKind::ResolventCondition, "resolvent_condition"},
    {ExperimentKind::VolumeTable, "volume_table"},
    {ExperimentKind::ClassicalMs, "classical_ms"},
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const char* to_string(ExperimentKind k) {
  for (const auto& e : kKinds)
    if (e.kind == k) return e.name;
  return "unknown";
}

ExperimentKind experiment_from_string(const std::string& name) {
  for (const auto& e : kKinds)
    if (name == e.name) return e.kind;
  throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& e : kKinds) out.emplace_back(e.name);
  return out;
}

ConfigError::ConfigError(const std::string& field, const std::string& message, int line)
    : std::invalid_argument(line > 0 ? "line " + std::to_string(line) + ": " + message
                                     : (field.empty() ? message : "field '" + field + "': " + message)),
      field_(field),
      line_(line) {}

const char* to_string(CheckKind k) {
  switch (k) {
    case CheckKind::Limit: return "limit";
    case CheckKind::UpperBound: return "upper_bound";
    case CheckKind::Decreasing: return "decreasing";
    case CheckKind::EachEquals: return "each_equals";
    case CheckKind::Positive: return "positive";
    case CheckKind::None: return "none";
  }
  return "none";
}

double ExperimentConfig::effective_tolerance() const {
  if (tolerance) return *tolerance;
  const QuadMode mode = seminorm.mode == QuadMode::Auto ? (op.dim <= 4 ? QuadMode::Deterministic : QuadMode::MonteCarlo)
                                                        : seminorm.mode;
  const bool mc = mode == QuadMode::MonteCarlo || experiment == ExperimentKind::ResolventCondition;
  return op.dim <= 2 && !mc ? 0.05 : 0.10;
}

namespace {

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& field, int lo = 1) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  const long long v = j.get<long long>();
  if (v < lo) throw ConfigError(field, "must be >= " + std::to_string(lo));
  return static_cast<int>(v);
}

std::vector<double> number_list(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a non-empty list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

void strictly_decreasing(const std::vector<double>& v, const std::string& field, double lo, double hi) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > lo && v[i] < hi))
      throw ConfigError(field, "values must lie in (" + fmt(lo) + ", " + fmt(hi) + ")");
    if (i > 0 && !(v[i] < v[i - 1])) throw ConfigError(field, "values must be strictly decreasing");
  }
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

OperatorSpec parse_operator(const json& root) {
  if (!root.contains("operator")) return catalog("heat", root.contains("size") ? integer(root["size"], "size") : 1);
  const json& j = root["operator"];
  try {
    if (j.is_string()) return catalog(j.get<std::string>(), root.contains("size") ? integer(root["size"], "size") : 1);
    if (!j.is_object()) throw ConfigError("operator", "expected a catalog name or an object");
    if (j.contains("Q") || j.contains("B")) {
      reject_unknown(j, {"dim", "Q", "B", "name"}, "operator");
      return operator_from_json(j);
    }
    reject_unknown(j, {"name", "size"}, "operator");
    if (!j.contains("name") || !j["name"].is_string()) throw ConfigError("operator.name", "expected a catalog name");
    return catalog(j["name"].get<std::string>(), j.contains("size") ? integer(j["size"], "operator.size") : 1);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("operator", e.what());
  }
}

Vector vector_field(const json& j, const std::string& field, int dim) {
  const std::vector<double> v = number_list(j, field);
  if (static_cast<int>(v.size()) != dim)
    throw ConfigError(field, "expected " + std::to_string(dim) + " entries (operator dimension)");
  return Eigen::Map<const Vector>(v.data(), dim);
}

TestFunction parse_function(const json& root, int dim, std::string& label) {
  if (!root.contains("function")) {
    label = "gaussian";
    return gaussian(dim);
  }
  const json& j = root["function"];
  if (j.is_string()) {
    label = j.get<std::string>();
    try {
      return function_catalog(label, dim);
    } catch (const std::exception& e) {
      throw ConfigError("function", e.what());
    }
  }
  if (!j.is_object()) throw ConfigError("function", "expected a label or an object");
  reject_unknown(j, {"label", "amplitude", "width", "center", "lo", "hi", "value"}, "function");
  if (!j.contains("label") || !j["label"].is_string()) throw ConfigError("function.label", "expected a string");
  label = j["label"].get<std::string>();
  if (label == "gaussian") {
    const double amp = j.contains("amplitude") ? number(j["amplitude"], "function.amplitude") : 1.0;
    const double width = j.contains("width") ? number(j["width"], "function.width") : 1.0;
    if (!(width > 0.0)) throw ConfigError("function.width", "must be positive");
    const Vector c = j.contains("center") ? vector_field(j["center"], "function.center", dim) : Vector::Zero(dim);
    return gaussian(dim, amp, width, c);
  }
  if (label == "indicator_box") {
    if (!j.contains("lo") || !j.contains("hi")) throw ConfigError("function", "indicator_box needs 'lo' and 'hi'");
    Box b{vector_field(j["lo"], "function.lo", dim), vector_field(j["hi"], "function.hi", dim)};
    if (!((b.hi - b.lo).minCoeff() >= 0.0)) throw ConfigError("function.hi", "must be >= lo componentwise");
    return indicator_box(b);
  }
  if (label == "constant") return constant_function(dim, j.contains("value") ? number(j["value"], "function.value") : 1.0);
  try {
    return function_catalog(label, dim);
  } catch (const std::exception& e) {
    throw ConfigError("function.label", e.what());
  }
}

QuadMode parse_mode(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected \"deterministic\", \"monte_carlo\" or \"auto\"");
  const std::string m = j.get<std::string>();
  if (m == "deterministic") return QuadMode::Deterministic;
  if (m == "monte_carlo") return QuadMode::MonteCarlo;
  if (m == "auto") return QuadMode::Auto;
  throw ConfigError(field, "unknown mode '" + m + "'");
}

void parse_quadrature(const json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw ConfigError("quadrature", "expected an object");
  reject_unknown(j,
                 {"x_panels", "x_nodes", "near_nodes", "far_nodes", "t_cut", "box_nodes", "mode", "mc_samples",
                  "error_estimate", "angle_nodes", "r_nodes", "fractional_near_nodes", "fractional_far_nodes",
                  "T_max"},
                 "quadrature");
  auto has = [&](const char* k) { return j.contains(k); };
  if (has("x_panels")) c.seminorm.x_panels = c.gagliardo.x_panels = integer(j["x_panels"], "quadrature.x_panels");
  if (has("x_nodes"))
    c.seminorm.x_nodes_per_panel = c.gagliardo.x_nodes_per_panel = integer(j["x_nodes"], "quadrature.x_nodes");
  if (has("near_nodes")) c.seminorm.near_nodes = integer(j["near_nodes"], "quadrature.near_nodes", 2);
  if (has("far_nodes")) c.seminorm.far_nodes = integer(j["far_nodes"], "quadrature.far_nodes", 2);
  if (has("t_cut")) {
    c.seminorm.t_cut = number(j["t_cut"], "quadrature.t_cut");
    if (!(c.seminorm.t_cut > 0.0 && c.seminorm.t_cut < 1.0)) throw ConfigError("quadrature.t_cut", "must lie in (0, 1)");
  }
  if (has("box_nodes")) {
    const int n = integer(j["box_nodes"], "quadrature.box_nodes", 2);
    c.seminorm.box.nodes = c.fractional.semigroup_quad.box.nodes = n;
  }
  if (has("mode")) c.seminorm.mode = c.fractional.semigroup_quad.mode = parse_mode(j["mode"], "quadrature.mode");
  if (has("mc_samples")) {
    const int n = integer(j["mc_samples"], "quadrature.mc_samples", 2);
    c.seminorm.mc_samples = c.fractional.semigroup_quad.mc_samples = c.mc_samples = static_cast<std::size_t>(n);
  }
  if (has("error_estimate")) {
    if (!j["error_estimate"].is_boolean()) throw ConfigError("quadrature.error_estimate", "expected true or false");
    c.seminorm.error_estimate = c.fractional.error_estimate = j["error_estimate"].get<bool>();
  }
  if (has("angle_nodes")) c.gagliardo.angle_nodes = integer(j["angle_nodes"], "quadrature.angle_nodes", 4);
  if (has("r_nodes")) c.gagliardo.r_nodes = integer(j["r_nodes"], "quadrature.r_nodes", 2);
  if (has("fractional_near_nodes"))
    c.fractional.near_nodes = integer(j["fractional_near_nodes"], "quadrature.fractional_near_nodes", 2);
  if (has("fractional_far_nodes"))
    c.fractional.far_nodes = integer(j["fractional_far_nodes"], "quadrature.fractional_far_nodes", 2);
  if (has("T_max")) c.fractional.T_max = number(j["T_max"], "quadrature.T_max");
}

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const int line = line_of(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError("", msg, line);
  }
  if (!root.is_object()) throw ConfigError("", "configuration must be a JSON object", 1);
  reject_unknown(root,
                 {"experiment", "operator", "size", "function", "s_values", "lambdas", "times", "point", "p",
                  "tolerance", "seed", "output_path", "quadrature"},
                 "");
  ExperimentConfig c;
  if (root.contains("experiment")) {
    if (!root["experiment"].is_string()) throw ConfigError("experiment", "expected a string");
    c.experiment = experiment_from_string(root["experiment"].get<std::string>());
  }
  c.op = parse_operator(root);
  c.function = parse_function(root, c.op.dim, c.function_label);
  c.function_label = c.function.label();
  if (root.contains("s_values")) c.s_values = number_list(root["s_values"], "s_values");
  if (root.contains("lambdas")) c.lambdas = number_list(root["lambdas"], "lambdas");
  if (root.contains("times")) c.times = number_list(root["times"], "times");
  c.point = root.contains("point") ? vector_field(root["point"], "point", c.op.dim) : Vector::Zero(c.op.dim);
  if (root.contains("p")) c.p = number(root["p"], "p");
  if (root.contains("tolerance")) {
    c.tolerance = number(root["tolerance"], "tolerance");
    if (!(*c.tolerance > 0.0)) throw ConfigError("tolerance", "must be positive");
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned() && !(root["seed"].is_number_integer() && root["seed"].get<long long>() >= 0))
      throw ConfigError("seed", "expected a nonnegative integer");
    c.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("output_path")) {
    if (!root["output_path"].is_string()) throw ConfigError("output_path", "expected a string");
    c.output_path = root["output_path"].get<std::string>();
  }
  if (root.contains("quadrature")) parse_quadrature(root["quadrature"], c);
  c.seminorm.seed = c.seed;
  c.fractional.semigroup_quad.seed = c.seed;
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  if (!(c.p >= 1.0) || !std::isfinite(c.p)) throw ConfigError("p", "must be a finite real >= 1");
  const double s_hi = c.experiment == ExperimentKind::PerimeterLimit ? 0.5 : 1.0;
  if (c.experiment != ExperimentKind::VolumeTable && c.experiment != ExperimentKind::ResolventCondition) {
    if (c.s_values.size() < 2) throw ConfigError("s_values", "need at least two values for the extrapolation");
    strictly_decreasing(c.s_values, "s_values", 0.0, s_hi);
  }
  const SpectralClassification cls = classify_spectrum(c.op);
  const bool trace_negative = cls.drift_regime == DriftRegime::TraceNegative;
  auto nonneg = [&] {
    if (c.function.nonneg()) return true;
    if (!c.function.support()) return false;
    const Box& b = *c.function.support();
    const int n = b.dim(), per = n == 1 ? 257 : (n == 2 ? 33 : 5);
    std::vector<int> idx(n, 0);
    Vector x(n);
    while (true) {
      for (int k = 0; k < n; ++k) x(k) = b.lo(k) + (b.hi(k) - b.lo(k)) * idx[k] / (per - 1.0);
      if (c.function(x) < 0.0) return false;
      int k = 0;
      while (k < n && ++idx[k] == per) idx[k++] = 0;
      if (k == n) return true;
    }
  };
  switch (c.experiment) {
    case ExperimentKind::BesovLimit:
      if (trace_negative) throw ConfigError("operator", "besov_limit needs tr B >= 0 (the seminorm is infinite otherwise)");
      if (!c.function.support()) throw ConfigError("function", "needs a support box");
      break;
    case ExperimentKind::PerimeterLimit:
      if (trace_negative) throw ConfigError("operator", "perimeter_limit needs tr B >= 0");
      if (!c.function.indicator()) throw ConfigError("function", "perimeter_limit needs an indicator function");
      break;
    case ExperimentKind::ClassicalMs:
      if (c.op.dim > 2) throw ConfigError("operator", "classical_ms supports N = 1 and N = 2 only");
      break;
    case ExperimentKind::FractionalPointwise:
      break;
    case ExperimentKind::FractionalL1:
      if (trace_negative) throw ConfigError("operator", "fractional_l1 needs tr B >= 0");
      if (!nonneg()) throw ConfigError("function", "fractional_l1 needs a nonnegative function");
      break;
    case ExperimentKind::LpLimit:
      if (trace_negative) throw ConfigError("operator", "lp_limit needs tr B >= 0");
      if (c.p == 1.0 && cls.drift_regime != DriftRegime::TracePositive)
        throw ConfigError("p",
                          "lp_limit with p = 1 requires tr B > 0: when tr B = 0, (-A)^s f has no limit in L1 "
                          "as s -> 0 (its norm tends to 2||f||_1)");
      if (c.p == 1.0 && !nonneg()) throw ConfigError("function", "lp_limit with p = 1 needs a nonnegative function");
      break;
    case ExperimentKind::ResolventCondition:
      for (std::size_t i = 0; i < c.lambdas.size(); ++i) {
        if (!(c.lambdas[i] > 0.0)) throw ConfigError("lambdas", "values must be positive");
        if (i > 0 && !(c.lambdas[i] < c.lambdas[i - 1])) throw ConfigError("lambdas", "values must be strictly decreasing");
      }
      break;
    case ExperimentKind::VolumeTable:
      for (std::size_t i = 0; i < c.times.size(); ++i) {
        if (!(c.times[i] > 0.0)) throw ConfigError("times", "values must be positive");
        if (i > 0 && !(c.times[i] > c.times[i - 1])) throw ConfigError("times", "values must be strictly increasing");
      }
      break;
  }
}

double besov_target(DriftRegime regime, double p, double f_norm_p) {
  switch (regime) {
    case DriftRegime::TraceZero: return 4.0 / p * f_norm_p;
    case DriftRegime::TracePositive: return 2.0 / p * f_norm_p;
    case DriftRegime::TraceNegative: break;
  }
  throw std::invalid_argument("besov_target: no finite limit for tr B < 0");
}

namespace {

LimitReport base_report(const ExperimentConfig& c) {
  const SpectralClassification cls = classify_spectrum(c.op);
  LimitReport r;
  r.experiment = to_string(c.experiment);
  r.operator_name = c.op.name.empty() ? "inline" : c.op.name;
  r.function_label = c.function_label;
  r.drift_regime = to_string(cls.drift_regime);
  r.stability_regime = to_string(cls.stability_regime);
  r.p = c.p;
  r.tolerance = c.effective_tolerance();
  return r;
}

void extrapolate(Series& s) {
  if (s.rows.empty()) return;
  std::vector<double> x, y, e;
  for (const auto& row : s.rows) {
    x.push_back(row.x);
    y.push_back(row.value);
    e.push_back(row.error);
  }
  const auto smallest = std::min_element(x.begin(), x.end()) - x.begin();
  s.smallest_x_value = y[smallest];
  if (x.size() >= 2) {
    const AffineFit fit = affine_fit_smallest(x, y, e, 4);
    s.extrapolated = fit.intercept;
    s.extrapolated_error = fit.intercept_se;
  } else {
    s.extrapolated = y.front();
    s.extrapolated_error = e.front();
  }
}

}  // namespace

void finalize(LimitReport& r) {
  r.pass = !r.series.empty();
  for (Series& s : r.series) {
    s.relative_gap = s.target != 0.0 ? std::abs(s.extrapolated - s.target) / std::abs(s.target)
                                     : std::abs(s.extrapolated - s.target);
    switch (s.check) {
      case CheckKind::Limit: s.pass = s.relative_gap <= r.tolerance; break;
      case CheckKind::UpperBound: s.pass = s.extrapolated <= s.target; break;
      case CheckKind::Decreasing:
        s.pass = true;
        for (std::size_t i = 1; i < s.rows.size(); ++i) s.pass = s.pass && s.rows[i].value < s.rows[i - 1].value;
        break;
      case CheckKind::EachEquals:
        s.pass = true;
        for (const auto& row : s.rows)
          s.pass = s.pass && std::abs(row.value - s.target) <= 3.0 * row.error + 1e-12 * std::abs(s.target);
        break;
      case CheckKind::Positive:
        s.pass = true;
        for (const auto& row : s.rows) s.pass = s.pass && row.value > 0.0;
        break;
      case CheckKind::None: s.pass = true; break;
    }
    r.pass = r.pass && s.pass;
  }
}

LimitReport run_besov_limit(const ExperimentConfig& c) {
  validate(c);
  LimitReport r = base_report(c);
  const SpectralClassification cls = classify_spectrum(c.op);
  const double s_min = *std::min_element(c.s_values.begin(), c.s_values.end());
  const BesovProfile prof = BesovProfile::build(c.op, c.function, c.p, s_min, c.seminorm);
  Series s;
  s.name = "s_times_seminorm_p";
  for (double sv : c.s_values) {
    const SeminormEstimate e = prof.evaluate(sv);
    s.rows.push_back(LimitRow{sv, sv * e.value_p, sv * e.std_error, sv * e.near_part, sv * e.far_part});
  }
  s.target = besov_target(cls.drift_regime, c.p, c.function.lp_norm_pow(c.p));
  extrapolate(s);
  r.series.push_back(s);
  const LimitRow& last = s.rows.back();
  r.notes.push_back("s*near/s*far at smallest s = " + fmt(last.far != 0.0 ? last.near / last.far : 0.0));
  finalize(r);
  return r;
}

LimitReport run_perimeter_limit(const ExperimentConfig& c) {
  validate(c);
  LimitReport r = base_report(c);
  const SpectralClassification cls = classify_spectrum(c.op);
  const double s_min = *std::min_element(c.s_values.begin(), c.s_values.end());
  const BesovProfile prof = BesovProfile::build(c.op, c.function, 1.0, 2.0 * s_min, c.seminorm);
  Series s;
  s.name = "s_times_perimeter";
  for (double sv : c.s_values) {
    const SeminormEstimate e = prof.evaluate(2.0 * sv);
    s.rows.push_back(LimitRow{sv, sv * e.value_p, sv * e.std_error, sv * e.near_part, sv * e.far_part});
  }
  s.target = 0.5 * besov_target(cls.drift_regime, 1.0, c.function.lp_norm_pow(1.0));
  extrapolate(s);
  r.series.push_back(s);
  finalize(r);
  return r;
}

LimitReport run_classical_ms(const ExperimentConfig& c) {
  validate(c);
  LimitReport r = base_report(c);
  const int n = c.op.dim;
  Series s;
  s.name = "s_times_gagliardo_p";
  for (double sv : c.s_values) {
    const GagliardoEstimate e = gagliardo_seminorm(c.function, sv, c.p, n, c.gagliardo);
    s.rows.push_back(LimitRow{sv, sv * e.value_p, 0.0, sv * e.near_part, sv * e.far_part});
  }
  s.target = 2.0 / c.p * unit_sphere_measure(n) * c.function.lp_norm_pow(c.p);
  extrapolate(s);
  r.series.push_back(s);
  finalize(r);
  return r;
}

LimitReport run_fractional_pointwise(const ExperimentConfig& c) {
  validate(c);
  LimitReport r = base_report(c);
  const SpectralClassification cls = classify_spectrum(c.op);
  const LimitSeries sw = pointwise_limit_sweep(c.op, c.function, c.point, c.s_values, c.fractional);
  Series s;
  s.name = "fractional_power";
  for (std::size_t i = 0; i < sw.x.size(); ++i) s.rows.push_back(LimitRow{sw.x[i], sw.value[i], sw.error[i], 0.0, 0.0});
  s.target = c.function(c.point);
  if (cls.stability_regime == StabilityRegime::MaxReNegative)
    s.target -= invariant_mean(c.op, c.function, c.fractional.semigroup_quad);
  extrapolate(s);
  r.series.push_back(s);
  finalize(r);
  return r;
}

LimitReport run_fractional_l1(const ExperimentConfig& c) {
  validate(c);
  LimitReport r = base_report(c);
  const SpectralClassification cls = classify_spectrum(c.op);
  const NormSweep sw = fractional_norm_sweep(c.op, c.function, c.s_values, 1.0, c.fractional);
  const double f1 = c.function.lp_norm_pow(1.0);
  Series norm, diff;
  norm.name = "l1_norm";
  diff.name = "l1_difference";
  for (std::size_t i = 0; i < sw.s.size(); ++i) {
    norm.rows.push_back(LimitRow{sw.s[i], sw.norm[i].value, sw.norm[i].error, sw.norm[i].near_norm, 0.0});
    diff.rows.push_back(LimitRow{sw.s[i], sw.difference[i].value, sw.difference[i].error, sw.difference[i].near_norm, 0.0});
  }
  if (cls.drift_regime == DriftRegime::TraceZero) {
    norm.target = 2.0 * f1;
    diff.target = f1;
    r.notes.push_back("tr B = 0: ||(-A)^s f - f||_1 stays near ||f||_1, so there is no L1 limit");
  } else {
    norm.target = f1;
    diff.check = CheckKind::UpperBound;
    diff.target = r.tolerance * f1;
  }
  extrapolate(norm);
  extrapolate(diff);
  r.series = {norm, diff};
  finalize(r);
  return r;
}

LimitReport run_lp_limit(const ExperimentConfig& c) {
  validate(c);
  LimitReport r = base_report(c);
  const NormSweep sw = fractional_norm_sweep(c.op, c.function, c.s_values, c.p, c.fractional);
  const double fp = c.function.lp_norm(c.p);
  Series diff, norm, near;
  diff.name = "lp_difference";
  norm.name = "lp_norm";
  near.name = "near_part_norm";
  for (std::size_t i = 0; i < sw.s.size(); ++i) {
    diff.rows.push_back(LimitRow{sw.s[i], sw.difference[i].value, sw.difference[i].error, 0.0, 0.0});
    norm.rows.push_back(LimitRow{sw.s[i], sw.norm[i].value, sw.norm[i].error, 0.0, 0.0});
    near.rows.push_back(LimitRow{sw.s[i], sw.norm[i].near_norm, 0.0, 0.0, 0.0});
  }
  diff.check = CheckKind::UpperBound;
  diff.target = r.tolerance * fp;
  norm.target = fp;
  near.check = CheckKind::UpperBound;
  near.target = r.tolerance * fp;
  extrapolate(diff);
  extrapolate(norm);
  extrapolate(near);
  r.series = {diff, norm, near};
  finalize(r);
  return r;
}

LimitReport run_resolvent_condition(const ExperimentConfig& c) {
  validate(c);
  LimitReport r = base_report(c);
  const SpectralClassification cls = classify_spectrum(c.op);
  ResolventConfig rc;
  rc.mc_samples = c.mc_samples;
  rc.seed = c.seed;
  rc.base = c.fractional;
  const LimitSeries sw = balakrishnan_condition(c.op, c.function, c.p, c.lambdas, rc);
  Series s;
  s.name = "lambda_resolvent_norm";
  s.x_name = "lambda";
  for (std::size_t i = 0; i < sw.x.size(); ++i) s.rows.push_back(LimitRow{sw.x[i], sw.value[i], sw.error[i], 0.0, 0.0});
  bool nonneg = c.function.nonneg();
  if (c.p == 1.0 && nonneg && cls.drift_regime == DriftRegime::TraceZero) {
    s.check = CheckKind::EachEquals;
    s.target = c.function.lp_norm_pow(1.0);
    r.notes.push_back("p = 1, tr B = 0, f >= 0: ||lambda R(lambda) f||_1 = ||f||_1 for every lambda");
  } else {
    s.check = CheckKind::Decreasing;
    s.target = 0.0;
  }
  extrapolate(s);
  r.series.push_back(s);
  finalize(r);
  return r;
}

LimitReport run_volume_table(const ExperimentConfig& c) {
  validate(c);
  LimitReport r = base_report(c);
  std::ostringstream os;
  write_volume_table(c.op, c.times, os);
  std::istringstream is(os.str());
  for (std::string line; std::getline(is, line);) r.volume_csv.push_back(line);
  Series s;
  s.name = "volume_over_sqrt_t";
  s.x_name = "t";
  s.check = CheckKind::Positive;
  for (double t : c.times) {
    const double v = volume(c.op, t);
    s.rows.push_back(LimitRow{t, v / std::sqrt(t), 0.0, v, v / t});
  }
  s.extrapolated = s.rows.front().value;
  s.smallest_x_value = s.rows.front().value;
  r.series.push_back(s);
  finalize(r);
  return r;
}

LimitReport run_experiment(const ExperimentConfig& c) {
  switch (c.experiment) {
    case ExperimentKind::BesovLimit: return run_besov_limit(c);
    case ExperimentKind::PerimeterLimit: return run_perimeter_limit(c);
    case ExperimentKind::FractionalPointwise: return run_fractional_pointwise(c);
    case ExperimentKind::FractionalL1: return run_fractional_l1(c);
    case ExperimentKind::LpLimit: return run_lp_limit(c);
    case ExperimentKind::ResolventCondition: return run_resolvent_condition(c);
    case ExperimentKind::VolumeTable: return run_volume_table(c);
    case ExperimentKind::ClassicalMs: return run_classical_ms(c);
  }
  throw std::logic_error("run_experiment: unhandled experiment");
}

std::string report_csv(const LimitReport& r) {
  std::ostringstream os;
  const std::string x = r.series.empty() ? "s" : r.series.front().x_name;
  os << x << ",value,error,near,far,series\n";
  for (const Series& s : r.series)
    for (const LimitRow& row : s.rows)
      os << fmt(row.x) << ',' << fmt(row.value) << ',' << fmt(row.error) << ',' << fmt(row.near) << ','
         << fmt(row.far) << ',' << s.name << '\n';
  return os.str();
}

std::string report_summary_json(const LimitReport& r) {
  json j;
  j["experiment"] = r.experiment;
  j["operator"] = r.operator_name;
  j["function"] = r.function_label;
  j["drift_regime"] = r.drift_regime;
  j["stability_regime"] = r.stability_regime;
  j["p"] = r.p;
  j["tolerance"] = r.tolerance;
  j["verdict"] = r.pass ? "pass" : "fail";
  j["series"] = json::array();
  for (const Series& s : r.series) {
    j["series"].push_back({{"name", s.name},
                           {"check", to_string(s.check)},
                           {"extrapolated", s.extrapolated},
                           {"extrapolated_error", s.extrapolated_error},
                           {"smallest_x_value", s.smallest_x_value},
                           {"target", s.target},
                           {"relative_gap", s.relative_gap},
                           {"verdict", s.pass ? "pass" : "fail"}});
  }
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

std::vector<std::string> emit_report(const LimitReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto write = [&](const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    written.push_back(path.string());
  };
  write(fs::path(dir) / (r.experiment + ".csv"), report_csv(r));
  write(fs::path(dir) / (r.experiment + "_summary.json"), report_summary_json(r));
  for (const Series& s : r.series) {
    std::ostringstream os;
    os << "# " << s.x_name << ' ' << s.name << " error\n";
    for (const LimitRow& row : s.rows) os << fmt(row.x) << ' ' << fmt(row.value) << ' ' << fmt(row.error) << '\n';
    write(fs::path(dir) / (r.experiment + "_" + s.name + ".dat"), os.str());
  }
  if (!r.volume_csv.empty()) {
    std::string text;
    for (const auto& l : r.volume_csv) text += l + "\n";
    write(fs::path(dir) / "volume_table_raw.csv", text);
  }
  return written;
}

}  // namespace hormander
