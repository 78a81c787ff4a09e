// Command-line runner: one experiment per invocation.
//   hormander <experiment> [--config PATH] [--out DIR] [--seed U64] [--tolerance F] [--threads K]
// Exit codes: 0 pass, 2 fail, 1 usage or configuration error.

#include "hormander/experiment.hpp"
#include "hormander/parallel.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

int run(const std::string& name, const std::string& config_path, const std::string& out_dir,
        const std::optional<std::uint64_t>& seed, const std::optional<double>& tolerance) {
  using namespace hormander;
  std::string text = "{}";
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot read config '" << config_path << "'\n";
      return 1;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  ExperimentConfig cfg;
  try {
    cfg = parse_config(text);
    cfg.experiment = experiment_from_string(name);
    if (seed) {
      cfg.seed = *seed;
      cfg.seminorm.seed = cfg.fractional.semigroup_quad.seed = *seed;
    }
    if (tolerance) {
      if (!(*tolerance > 0.0)) throw ConfigError("tolerance", "must be positive");
      cfg.tolerance = *tolerance;
    }
    if (!out_dir.empty()) cfg.output_path = out_dir;
    validate(cfg);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  LimitReport report;
  try {
    report = run_experiment(cfg);
    for (const auto& path : emit_report(report, cfg.output_path)) std::cout << "wrote " << path << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  for (const Series& s : report.series)
    std::printf("%-24s %-12s extrapolated %.6g  target %.6g  gap %.3g  %s\n", s.name.c_str(), to_string(s.check),
                s.extrapolated, s.target, s.relative_gap, s.pass ? "PASS" : "FAIL");
  std::printf("%s: %s\n", report.experiment.c_str(), report.pass ? "PASS" : "FAIL");
  return report.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional Hörmander-operator experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  int threads = 1;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--tolerance", tolerance, "relative tolerance for the verdict");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  for (const std::string& name : hormander::experiment_names()) app.add_subcommand(name, "run " + name)->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  hormander::set_thread_count(threads);
  return run(app.get_subcommands().front()->get_name(), config_path, out_dir, seed, tolerance);
}
