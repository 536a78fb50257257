// risbf: experiment driver for joint precoder / RIS phase optimization.
//
//   risbf run <spec.json> [overrides]        Monte-Carlo run, CSV traces + summary
//   risbf lipschitz <spec.json> [overrides]  gradient Lipschitz estimates (n_rx = 1)
//   risbf gradcheck [spec.json] [options]    finite-difference gradient checks
//   risbf validate <spec.json>               lint a spec file

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "risbf/diagnostics.hpp"
#include "risbf/harness/experiment.hpp"

using namespace risbf;
using namespace risbf::harness;

namespace {

struct Overrides {
  std::string output_dir;
  int realizations = 0;
  long long seed = -1;
  int jobs = 0;
  std::vector<std::string> variants;
  int n_ris = 0, n_tx = 0, n_users = 0;
  double power_dbm = std::numeric_limits<double>::quiet_NaN();
  bool save_channels = false;
  std::string replay_dir;
  int pairs = 0;

  void attach(CLI::App* app) {
    app->add_option("-o,--output-dir", output_dir, "Output directory");
    app->add_option("-n,--realizations", realizations, "Number of channel realizations");
    app->add_option("-s,--seed", seed, "Master seed");
    app->add_option("-j,--jobs", jobs, "Worker threads");
    app->add_option("--variants", variants, "Variants to run (comma separated)")->delimiter(',');
    app->add_option("--n-ris", n_ris, "RIS elements");
    app->add_option("--n-tx", n_tx, "BS antennas");
    app->add_option("--n-users", n_users, "Users (weights become equal)");
    app->add_option("--power-dbm", power_dbm, "BS power in dBm");
    app->add_flag("--save-channels", save_channels, "Write channel files for replay");
    app->add_option("--replay-dir", replay_dir, "Read channels from a previous run's output dir");
  }

  void apply(ExperimentSpec& spec) const {
    if (!output_dir.empty()) spec.output_dir = output_dir;
    if (realizations > 0) spec.n_realizations = realizations;
    if (seed >= 0) spec.master_seed = static_cast<std::uint64_t>(seed);
    if (jobs > 0) spec.jobs = jobs;
    if (!variants.empty()) {
      spec.variants.clear();
      for (const auto& v : variants) {
        const auto p = parse_variant(v);
        if (!p) throw std::invalid_argument("unknown variant '" + v + "'");
        spec.variants.push_back(*p);
      }
    }
    if (n_ris > 0) spec.base_config.n_ris = n_ris;
    if (n_tx > 0) spec.base_config.n_tx = n_tx;
    if (n_users > 0) {
      spec.base_config.n_users = n_users;
      spec.base_config.weights.assign(n_users, 1.0 / n_users);
    }
    if (!std::isnan(power_dbm)) spec.base_config.power_bs = dbm_to_watts(power_dbm);
    if (save_channels) spec.save_channels = true;
    if (!replay_dir.empty()) spec.replay_dir = replay_dir;
    if (pairs > 0) spec.lipschitz_pairs = pairs;
  }
};

void print_report(const ValidationReport& rep) {
  for (const auto& i : rep.issues)
    std::printf("%s: %s: %s\n", i.severity == ConfigIssue::Severity::error ? "error" : "warning",
                i.field.c_str(), i.message.c_str());
}

int cmd_run(const std::string& path, const Overrides& ov) {
  ExperimentSpec spec = load_spec(path);
  ov.apply(spec);
  const ValidationReport rep = validate_spec(spec);
  print_report(rep);
  if (!rep.ok()) return 2;
  const ExperimentSummary sum = run_experiment(spec);
  std::printf("%-10s %-12s %-24s %12s %10s %12s %6s %6s\n", "sweep", "value", "variant", "mean_wsr",
              "std_wsr", "mean_cmul", "ok", "fail");
  for (const auto& r : sum.rows)
    std::printf("%-10s %-12s %-24s %12.6f %10.6f %12.4g %6d %6d\n", r.sweep_param.c_str(),
                r.sweep_value.c_str(), std::string(to_string(r.variant)).c_str(), r.mean_wsr,
                r.std_wsr, r.mean_cmul, r.n_ok, r.n_failed);
  for (const auto& r : sum.runs)
    if (!r.ok)
      std::fprintf(stderr, "run failed (point %zu, realization %zu, %s): %s\n", r.sweep_index,
                   r.realization, std::string(to_string(r.variant)).c_str(), r.error.c_str());
  std::printf("wrote %s\n", (spec.output_dir / "summary.csv").c_str());
  return sum.n_failed == 0 ? 0 : 1;
}

int cmd_lipschitz(const std::string& path, const Overrides& ov) {
  ExperimentSpec spec = load_spec(path);
  ov.apply(spec);
  const LipschitzSummary sum = experiment_lipschitz(spec);
  std::printf("realizations            %zu\n", sum.rows.size());
  std::printf("median L (original)     %.6g\n", sum.median_original);
  std::printf("median L (equivalent)   %.6g\n", sum.median_equivalent);
  std::printf("median ratio            %.4f\n", sum.median_ratio);
  std::printf("equivalent larger in    %.1f%% of realizations\n", 100.0 * sum.fraction_equivalent_larger);
  std::printf("no-reflection sanity    %.3g / %.3g\n", sum.sanity_original, sum.sanity_equivalent);
  std::printf("wrote %s\n", (spec.output_dir / "lipschitz.csv").c_str());
  return 0;
}

int cmd_gradcheck(const std::string& path, int instances, int coords, double delta, double tol,
                  long long seed) {
  ExperimentSpec spec;
  if (!path.empty()) spec = load_spec(path);
  const std::uint64_t s = seed >= 0 ? static_cast<std::uint64_t>(seed) : spec.master_seed;

  SystemConfig mimo = spec.base_config;
  const GradCheckReport a = gradcheck_wsr(mimo, spec.geometry, instances, coords, delta, s);
  std::printf("grad_wsr_theta          N_s=%d  instances=%d  max rel error %.3e\n", mimo.n_ris,
              a.instances, a.max_rel_error);

  SystemConfig miso = spec.base_config;
  miso.n_rx = miso.n_streams = 1;
  miso.n_ris = std::min(miso.n_ris, 32);
  const GradCheckReport b = gradcheck_equivalent(miso, spec.geometry, instances, coords, delta, s);
  std::printf("grad_equiv_theta_miso   N_s=%d  instances=%d  max rel error %.3e\n", miso.n_ris,
              b.instances, b.max_rel_error);

  const bool ok = a.max_rel_error <= tol && b.max_rel_error <= tol;
  std::printf("%s (tolerance %.1e)\n", ok ? "ok" : "FAILED", tol);
  return ok ? 0 : 1;
}

int cmd_validate(const std::string& path) {
  ExperimentSpec spec;
  try {
    spec = load_spec(path);
  } catch (const std::exception& e) {
    std::printf("error: %s\n", e.what());
    return 2;
  }
  const ValidationReport rep = validate_spec(spec);
  print_report(rep);
  if (rep.ok()) std::printf("%s: ok\n", path.c_str());
  return rep.ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint precoder and RIS phase optimization experiments"};
  app.require_subcommand(1);

  std::string spec_path;
  Overrides ov;

  auto* run = app.add_subcommand("run", "Run an experiment spec");
  run->add_option("spec", spec_path, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);
  ov.attach(run);

  auto* lip = app.add_subcommand("lipschitz", "Estimate gradient Lipschitz constants");
  lip->add_option("spec", spec_path, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);
  ov.attach(lip);
  lip->add_option("--pairs", ov.pairs, "Sample pairs per realization");

  int instances = 20, coords = 20;
  double delta = 1e-6, tol = 1e-4;
  long long gc_seed = -1;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference checks of the theta gradients");
  gc->add_option("spec", spec_path, "Spec supplying dimensions and geometry (optional)")
      ->check(CLI::ExistingFile);
  gc->add_option("--instances", instances, "Random instances")->check(CLI::PositiveNumber);
  gc->add_option("--coords", coords, "Coordinates per instance")->check(CLI::PositiveNumber);
  gc->add_option("--delta", delta, "Finite-difference step");
  gc->add_option("--tol", tol, "Pass threshold on the max relative error");
  gc->add_option("--seed", gc_seed, "Seed");

  auto* val = app.add_subcommand("validate", "Check a spec file");
  val->add_option("spec", spec_path, "Experiment spec (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(spec_path, ov);
    if (*lip) return cmd_lipschitz(spec_path, ov);
    if (*gc) return cmd_gradcheck(spec_path, instances, coords, delta, tol, gc_seed);
    if (*val) return cmd_validate(spec_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
