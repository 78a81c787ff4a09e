#pragma once

#include "hormander/fractional.hpp"
#include "hormander/operator_model.hpp"
#include "hormander/seminorms.hpp"
#include "hormander/test_function.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hormander {

enum class ExperimentKind {
  BesovLimit,
  PerimeterLimit,
  FractionalPointwise,
  FractionalL1,
  LpLimit,
  ResolventCondition,
  VolumeTable,
  ClassicalMs,
};

const char* to_string(ExperimentKind k);
ExperimentKind experiment_from_string(const std::string& name);  // throws ConfigError
std::vector<std::string> experiment_names();

/// Malformed or inconsistent configuration. `field` names the offending key ("" for syntax
/// errors, which carry a line number instead).
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message, int line = 0);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::BesovLimit;
  OperatorSpec op;                 // resolved from "operator"
  std::string function_label = "gaussian";
  TestFunction function = gaussian(1);
  std::vector<double> s_values{0.10, 0.05, 0.02, 0.01};
  std::vector<double> lambdas{1.0, 0.1, 0.01};
  std::vector<double> times{0.01, 0.1, 1.0, 10.0, 100.0};
  Vector point;                    // X for fractional_pointwise; origin by default
  double p = 2.0;
  std::optional<double> tolerance; // relative; default 5% deterministic N <= 2, 10% otherwise
  std::uint64_t seed = 1;
  std::string output_path = "out";
  SeminormConfig seminorm;
  GagliardoConfig gagliardo;
  FractionalConfig fractional;
  std::size_t mc_samples = 100000;  // resolvent Monte Carlo

  double effective_tolerance() const;
};

/// JSON document; unknown keys are rejected. Fields:
///   experiment, operator ("heat" | {"name","size"} | {"dim","Q","B","name"}), size,
///   function ("gaussian" | {"label","amplitude","width","center","lo","hi","value"}),
///   s_values, lambdas, times, point, p, tolerance, seed, output_path, quadrature {...}.
ExperimentConfig parse_config(const std::string& text);

/// Experiment/operator compatibility; parse_config calls it.
void validate(const ExperimentConfig& cfg);

enum class CheckKind {
  Limit,       // extrapolated within tolerance of target
  UpperBound,  // extrapolated <= target
  Decreasing,  // values strictly decrease as x decreases toward 0 ... in list order
  EachEquals,  // every value within 3 standard errors (plus tolerance·target) of target
  Positive,    // every value > 0
  None,
};
const char* to_string(CheckKind k);

struct LimitRow {
  double x = 0.0;
  double value = 0.0;
  double error = 0.0;
  double near = 0.0;
  double far = 0.0;
};

struct Series {
  std::string name;
  std::string x_name = "s";
  std::vector<LimitRow> rows;
  CheckKind check = CheckKind::Limit;
  double extrapolated = 0.0;
  double extrapolated_error = 0.0;
  double smallest_x_value = 0.0;
  double target = 0.0;
  double relative_gap = 0.0;  // |extrapolated − target|/|target|, absolute when target = 0
  bool pass = false;
};

struct LimitReport {
  std::string experiment;
  std::string operator_name;
  std::string function_label;
  std::string drift_regime;
  std::string stability_regime;
  double p = 0.0;
  double tolerance = 0.0;
  std::vector<Series> series;
  std::vector<std::string> notes;
  std::vector<std::string> volume_csv;  // volume_table rows
  bool pass = false;

  const Series& primary() const { return series.front(); }
};

/// Limit target: 4/p·‖f‖_p^p for tr B = 0, 2/p·‖f‖_p^p for tr B > 0; depends on the
/// drift regime alone.
double besov_target(DriftRegime regime, double p, double f_norm_p);

LimitReport run_besov_limit(const ExperimentConfig& cfg);
LimitReport run_perimeter_limit(const ExperimentConfig& cfg);
LimitReport run_classical_ms(const ExperimentConfig& cfg);
LimitReport run_fractional_pointwise(const ExperimentConfig& cfg);
LimitReport run_fractional_l1(const ExperimentConfig& cfg);
LimitReport run_lp_limit(const ExperimentConfig& cfg);
LimitReport run_resolvent_condition(const ExperimentConfig& cfg);
LimitReport run_volume_table(const ExperimentConfig& cfg);
LimitReport run_experiment(const ExperimentConfig& cfg);

/// Applies the check of each series and the overall verdict.
void finalize(LimitReport& report);

/// <dir>/<experiment>.csv, <dir>/<experiment>_summary.json, and one two-column
/// <dir>/<experiment>_<series>.dat per series. Returns the written paths.
std::vector<std::string> emit_report(const LimitReport& report, const std::string& dir);

std::string report_csv(const LimitReport& report);
std::string report_summary_json(const LimitReport& report);

}  // namespace hormander
