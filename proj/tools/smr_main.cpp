#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "smr/runner.hpp"
#include "smr/verify.hpp"

namespace {

struct Flag {
  const char* flag;
  const char* key;
  const char* desc;
};

// CLI flags mirror the flat config keys one to one; flags win over the file.
const std::vector<Flag> kRunFlags = {
    {"--model", "model", "preset name (see list-models)"},
    {"--mode", "mode", "reduced | full-spde | coupled | equivalence | covariance-test"},
    {"--scheme", "scheme", "euler_maruyama | heun (default: preset scheme)"},
    {"--h0", "h0", "initial slow coordinate"},
    {"--T", "T", "time horizon"},
    {"--dt", "dt", "time step"},
    {"--n-paths", "n_paths", "ensemble size"},
    {"--seed", "seed", "base RNG seed (path p uses stream p)"},
    {"--series-points", "series_points", "number of recorded time slices"},
    {"--store-paths", "store_paths", "store every Nth path in paths.csv (0 = off)"},
    {"--histogram-bins", "histogram_bins", "final-state histogram bins (0 = automatic)"},
    {"--n-modes", "n_modes", "Galerkin modes for field modes"},
    {"--noise-modes", "noise_modes", "noise truncation for pointwise/covariance runs"},
    {"--output-dir", "output_dir", "output directory (default: $SMR_OUTPUT_DIR or runs/)"},
    {"--eps", "eps", "noise strength"},
    {"--gamma", "gamma", "damping (damped_wave)"},
    {"--delta", "delta", "linear gain (swift_hohenberg)"},
    {"--length", "length", "domain length (allen_cahn)"},
    {"--half-width", "half_width", "half domain width (nls_soliton)"},
    {"--n-points", "n_points", "grid points"},
    {"--diffusion", "diffusion", "channel | pointwise (wave / front presets)"},
    {"--reduced-form", "reduced_form", "closed | pipeline (reduced mode)"},
    {"--compare-stride", "compare_stride", "steps between comparisons (equivalence)"},
    {"--exit-lo", "exit_lo", "lower edge of the first-exit region"},
    {"--exit-hi", "exit_hi", "upper edge of the first-exit region"},
    {"--n-samples", "n_samples", "Monte Carlo samples (covariance-test)"},
    {"--n-probes", "n_probes", "probe pairs (covariance-test)"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slow-manifold reduction toolkit for stochastic PDEs"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "simulate one configuration, write CSV/JSON outputs");
  std::string config_file;
  run->add_option("--config", config_file, "flat key=value config file");
  std::vector<std::string> set_pairs;
  run->add_option("--set", set_pairs, "extra key=value override (repeatable)");
  std::map<std::string, std::string> flag_values;
  for (const auto& f : kRunFlags) run->add_option(f.flag, flag_values[f.key], f.desc);

  auto* list = app.add_subcommand("list-models", "print the preset catalog");
  bool as_json = false;
  list->add_flag("--json", as_json, "machine-readable catalog (config-schema keys)");

  auto* verify = app.add_subcommand("verify", "run the acceptance suite, print pass/fail");
  std::string which;
  verify->add_option("check", which, "run a single check by name or 1-based index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // anything but help is a configuration error
  }

  try {
    if (run->parsed()) {
      smr::ConfigMap cfg;
      if (!config_file.empty()) cfg = smr::ConfigMap::from_file(config_file);
      for (const auto& pair : set_pairs) cfg.set_pair(pair);
      for (const auto& f : kRunFlags)
        if (run->count(f.flag) > 0) cfg.set(f.key, flag_values[f.key]);
      const smr::RunResult result = smr::execute_run(cfg);
      std::cout << "config_hash=" << result.config_hash << "\n";
      std::cout << "output_dir=" << result.output_dir.string() << "\n";
      std::cout << "files=";
      for (std::size_t i = 0; i < result.files.size(); ++i)
        std::cout << (i ? "," : "") << result.files[i];
      std::cout << "\n";
      return 0;
    }
    if (list->parsed()) {
      if (as_json)
        std::cout << smr::model_catalog_json().dump(2) << "\n";
      else
        std::cout << smr::format_model_table();
      return 0;
    }
    if (verify->parsed()) {
      const int failures = smr::run_acceptance(std::cout, which);
      return failures > 0 ? 5 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return smr::exit_code_for(e);
  }
  return 0;
}
