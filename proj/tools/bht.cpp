// Command-line front end: run, sweep, spectra, verify.
//
// Exit codes: 0 success, 1 unexpected error, 2 invalid input,
// 3 steady state not converged, 4 verification failed.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "bht/experiment.hpp"
#include "bht/verify.hpp"

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitCheckFailed = 4;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  bool heavy = false;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", opts.overrides, "override a config key, e.g. --set model.U=2.5")->take_all();
  cmd->add_option("-o,--out", opts.out, "output directory");
  cmd->add_flag("--heavy", opts.heavy, "allow Hilbert-space dimensions above 1000");
  cmd->add_option("-j,--jobs", opts.jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
}

bht::ExperimentConfig resolve(const CommonOptions& opts) {
  std::vector<std::string> overrides = opts.overrides;
  if (!opts.out.empty()) overrides.push_back("output.dir=\"" + opts.out + "\"");
  if (opts.heavy) overrides.push_back("heavy=true");
  if (opts.jobs > 0) overrides.push_back("jobs=" + std::to_string(opts.jobs));
  std::optional<std::filesystem::path> path;
  if (!opts.config_path.empty()) path = opts.config_path;
  return bht::load_config(path, overrides);
}

int do_run(const CommonOptions& opts) {
  const bht::ExperimentConfig config = resolve(opts);
  bht::require_heavy_allowed(config, bht::count_states(config.model.sites, config.model.particles));
  const bht::RunRecord record = bht::cmd_run(config);
  std::cout << record.to_json().dump(2) << '\n';
  if (!record.converged) {
    std::cerr << "error: steady state did not converge (residual " << record.residual << ")\n";
    return kExitNotConverged;
  }
  return 0;
}

int do_sweep(const CommonOptions& opts) {
  const bht::SweepResult result = bht::cmd_sweep(resolve(opts));
  int failures = 0;
  int unconverged = 0;
  for (const auto& r : result.records) {
    std::cout << "U=" << r.params.interaction << " N=" << r.params.particles << " dim=" << r.dimension;
    if (!r.error.empty()) {
      std::cout << " error: " << r.error << '\n';
      ++failures;
      continue;
    }
    std::cout << " current=" << r.current << (r.converged ? "" : " (not converged)") << '\n';
    if (!r.converged) ++unconverged;
  }
  std::cout << "summary: " << result.summary_path.string() << '\n';
  if (failures > 0) return 1;
  return unconverged > 0 ? kExitNotConverged : 0;
}

int do_spectra(const CommonOptions& opts) {
  for (const auto& rec : bht::cmd_spectra(resolve(opts)))
    std::cout << "U=" << rec.interaction << " dim=" << rec.dimension << " KS_poisson=" << rec.stats.ks_poisson
              << " KS_gue=" << rec.stats.ks_gue << " -> " << rec.csv_path.string() << '\n';
  return 0;
}

int do_verify(const CommonOptions& opts) {
  const bht::ExperimentConfig config = resolve(opts);
  const bht::VerifyReport report = bht::run_verify(config);
  for (const auto& c : report.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << c.value << "  tol=" << c.tolerance << '\n';
  std::filesystem::create_directories(config.output_dir);
  const auto path = config.output_dir / "verify.json";
  std::ofstream(path) << report.to_json().dump(2) << '\n';
  std::cout << (report.passed() ? "all checks passed" : "verification FAILED") << " (" << path.string() << ")\n";
  return report.passed() ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary-driven Bose-Hubbard chain: steady-state transport and level statistics"};
  app.require_subcommand(1);
  CommonOptions opts;
  CLI::App* run = app.add_subcommand("run", "solve one parameter point");
  CLI::App* sweep = app.add_subcommand("sweep", "scan sweep.U x sweep.N");
  CLI::App* spectra = app.add_subcommand("spectra", "level-spacing statistics of the steady-state deviation");
  CLI::App* verify = app.add_subcommand("verify", "structural identities and solver cross-checks");
  for (CLI::App* cmd : {run, sweep, spectra, verify}) add_common(cmd, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (run->parsed()) return do_run(opts);
    if (sweep->parsed()) return do_sweep(opts);
    if (spectra->parsed()) return do_spectra(opts);
    return do_verify(opts);
  } catch (const bht::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const bht::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
