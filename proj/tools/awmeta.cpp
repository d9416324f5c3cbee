#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "awmeta/analytic.hpp"
#include "awmeta/io.hpp"
#include "awmeta/simharness.hpp"

using namespace awmeta;

namespace {

struct AnalyzeArgs {
  std::string config;
  std::optional<std::string> method;
  std::optional<std::size_t> permutations;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> max_studies;
  std::optional<std::string> out;
  bool one_sided = false;
  bool concordance_filter = false;
  bool full_precision = false;
};

struct SimulateArgs {
  std::string config;
  bool full_reps = false;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> permutations;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
};

struct AnalyticArgs {
  bool power_curve = false;
  bool region_probe = false;
  unsigned studies = 10;
  std::vector<double> thetas{1.2, 1.4};
  double alpha = 0.05;
  std::size_t reps = 10000;
  std::uint64_t seed = 1;
  std::string sided = "one";
  std::string method = "all";
  double extent = 4.0;
  double step = 0.05;
  std::size_t draws = analytic::kDefaultCalibrationDraws;
  std::string out;
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw DataError("failed writing " + path);
}

int run_analyze(const AnalyzeArgs& a) {
  io::AnalysisConfig c = io::load_config(a.config);
  // Flags override scalar values from the config file.
  if (a.method) c.methods = io::parse_methods(*a.method);
  if (a.permutations) c.permutations = *a.permutations;
  if (a.alpha) c.alpha = *a.alpha;
  if (a.seed) c.seed = *a.seed;
  if (a.max_studies) c.max_studies = *a.max_studies;
  if (a.out) c.out = *a.out;
  if (a.one_sided) c.sided = Sidedness::OneSided;
  if (a.concordance_filter) c.concordance_filter = true;
  if (a.full_precision) c.full_precision = true;

  const auto summary = io::run_analysis(c);
  for (const auto& [m, n] : summary.detected)
    std::cerr << combine::method_name(m) << ": " << n << " genes detected at q <= " << c.alpha << "\n";
  for (const auto& p : summary.written) std::cerr << "wrote " << p.string() << "\n";
  return 0;
}

int run_simulate(const SimulateArgs& a) {
  sim::SimScenario s;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw InvalidInput("cannot open scenario config " + a.config);
    std::stringstream ss;
    ss << in.rdbuf();
    s = sim::scenario_from_json(ss.str());
  }
  if (a.full_reps) s.reps = sim::SimScenario::kFullReps;
  if (a.reps) s.reps = *a.reps;
  if (a.permutations) s.permutations = *a.permutations;
  if (a.seed) s.seed = *a.seed;
  if (a.threads) s.threads = *a.threads;
  s.validate();
  std::cerr << "scenario:\n" << sim::scenario_to_json(s);
  emit(sim::format_report(sim::run_scenario(s)), a.out);
  return 0;
}

int run_analytic(const AnalyticArgs& a) {
  if (a.power_curve == a.region_probe) throw InvalidInput("choose exactly one of --power-curve and --region-probe");
  std::string text;
  char buf[64];
  if (a.power_curve) {
    const auto sided = a.sided == "two" ? Sidedness::TwoSided : Sidedness::OneSided;
    const auto cal = analytic::calibrate_null(a.studies, a.alpha, a.draws);
    text = "theta\th";
    for (auto m : combine::kAllMethods) text += "\t" + std::string(combine::method_name(m));
    text += "\n";
    for (const auto& row : analytic::power_curve(a.studies, a.thetas, a.alpha, sided, a.reps, a.seed, cal)) {
      std::snprintf(buf, sizeof buf, "%g\t%u", row.theta, row.h);
      text += buf;
      for (double p : row.power) {
        std::snprintf(buf, sizeof buf, "\t%.4f", p);
        text += buf;
      }
      text += "\n";
    }
  } else {
    const auto methods = io::parse_methods(a.method);
    const auto cal = analytic::calibrate_null(2, a.alpha, a.draws);
    text = "method\tz1\tz2\tinside\n";
    for (auto m : methods) {
      const auto probe = analytic::acceptance_probe(m, a.alpha, a.extent, a.step, cal);
      std::cerr << combine::method_name(m) << ": " << probe.violation_count << " midpoint-convexity violations\n";
      for (std::size_t i = 0; i < probe.side; ++i) {
        for (std::size_t j = 0; j < probe.side; ++j) {
          std::snprintf(buf, sizeof buf, "\t%.6g\t%.6g\t%d\n", probe.coordinate(i), probe.coordinate(j),
                        probe.inside[i * probe.side + j]);
          text += std::string(combine::method_name(m)) + buf;
        }
      }
    }
  }
  emit(text, a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptively weighted meta-analysis of multi-study expression data"};
  app.set_version_flag("--version", AWMETA_VERSION);
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Meta-analyze K studies and write result tables");
  analyze->add_option("--config", an.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  analyze->add_option("--method", an.method, "aw, ew, minp, maxp, pr or all")
      ->check(CLI::IsMember({"aw", "ew", "minp", "maxp", "pr", "all"}));
  analyze->add_option("--permutations", an.permutations, "Permutations per study (B)");
  analyze->add_option("--alpha", an.alpha, "q-value threshold");
  analyze->add_option("--seed", an.seed, "Master seed");
  analyze->add_option("--max-studies", an.max_studies, "Upper bound on K for the AW weight search");
  analyze->add_option("--out", an.out, "Output directory");
  analyze->add_flag("--one-sided", an.one_sided, "Upper-tail per-study p-values");
  analyze->add_flag("--concordance-filter", an.concordance_filter, "Keep only concordant AW detections");
  analyze->add_flag("--full-precision", an.full_precision, "Shortest round-trip numbers instead of 6 digits");

  SimulateArgs sm;
  auto* simulate = app.add_subcommand("simulate", "Run a synthetic multi-study scenario");
  simulate->add_option("--config", sm.config, "JSON scenario")->check(CLI::ExistingFile);
  simulate->add_flag("--full-reps", sm.full_reps, "1000 repetitions instead of 200");
  simulate->add_option("--reps", sm.reps, "Repetitions");
  simulate->add_option("--permutations", sm.permutations, "Permutations per study");
  simulate->add_option("--seed", sm.seed, "Master seed");
  simulate->add_option("--threads", sm.threads, "Worker threads (0: all cores)");
  simulate->add_option("--out", sm.out, "Report file (default stdout)");

  AnalyticArgs ay;
  auto* analytic_cmd = app.add_subcommand("analytic", "Gaussian-model power curves and acceptance regions");
  analytic_cmd->add_flag("--power-curve", ay.power_curve, "Power by h for each theta");
  analytic_cmd->add_flag("--region-probe", ay.region_probe, "K = 2 acceptance-region raster and convexity probe");
  analytic_cmd->add_option("--studies", ay.studies, "K for power curves")->check(CLI::Range(1u, 64u));
  analytic_cmd->add_option("--theta", ay.thetas, "Effect sizes")->delimiter(',');
  analytic_cmd->add_option("--alpha", ay.alpha, "Test level");
  analytic_cmd->add_option("--reps", ay.reps, "Monte Carlo repetitions");
  analytic_cmd->add_option("--seed", ay.seed, "Seed for power draws");
  analytic_cmd->add_option("--sided", ay.sided, "one or two")->check(CLI::IsMember({"one", "two"}));
  analytic_cmd->add_option("--method", ay.method, "Probe method or all")
      ->check(CLI::IsMember({"aw", "ew", "minp", "maxp", "pr", "all"}));
  analytic_cmd->add_option("--extent", ay.extent, "Probe half-width in z units");
  analytic_cmd->add_option("--step", ay.step, "Probe lattice step");
  analytic_cmd->add_option("--draws", ay.draws, "Null calibration draws for AW and PR");
  analytic_cmd->add_option("--out", ay.out, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) return run_analyze(an);
    if (*simulate) return run_simulate(sm);
    if (*analytic_cmd) return run_analytic(ay);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
