#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "smr/runner.hpp"

using namespace smr;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

bool has_file(const RunResult& r, const std::string& name) {
  return std::find(r.files.begin(), r.files.end(), name) != r.files.end() &&
         std::filesystem::exists(r.output_dir / name);
}

}  // namespace

TEST_CASE("exit codes map error classes to the documented process codes") {
  CHECK(exit_code_for(VerificationError("x")) == 5);
  CHECK(exit_code_for(TubeExitError("x", 1.0)) == 4);
  CHECK(exit_code_for(DegeneracyError("x", {0.0})) == 4);
  CHECK(exit_code_for(DivergenceError("x", 1.0)) == 3);
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(GridMismatchError("x")) == 2);
  CHECK(exit_code_for(InitializationError("x")) == 2);
  CHECK(exit_code_for(UnsupportedError("x")) == 2);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("execute_run rejects malformed configurations") {
  ConfigMap cfg;
  cfg.set("model", "no_such_model");
  CHECK_THROWS_AS(execute_run(cfg), ConfigError);

  ConfigMap no_model;
  no_model.set("mode", "reduced");
  CHECK_THROWS_AS(execute_run(no_model), ConfigError);

  ConfigMap bad_mode;
  bad_mode.set("model", "damped_wave");
  bad_mode.set("mode", "warp");
  CHECK_THROWS_AS(execute_run(bad_mode), ConfigError);

  ConfigMap bad_dt;
  bad_dt.set("model", "swift_hohenberg");
  bad_dt.set_double("dt", 0.0);
  CHECK_THROWS_AS(execute_run(bad_dt), ConfigError);

  ConfigMap half_region;
  half_region.set("model", "swift_hohenberg");
  half_region.set_double("exit_lo", 0.0);
  CHECK_THROWS_MATCHES(execute_run(half_region), ConfigError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("exit_lo and exit_hi")));

  ConfigMap one_slice;
  one_slice.set("model", "swift_hohenberg");
  one_slice.set_u64("series_points", 1);
  CHECK_THROWS_AS(execute_run(one_slice), ConfigError);

  ConfigMap bad_form;
  bad_form.set("model", "swift_hohenberg");
  bad_form.set("reduced_form", "approximate");
  CHECK_THROWS_AS(execute_run(bad_form), ConfigError);
}

TEST_CASE("reduced run on pattern-amplitude defaults reaches the stationary amplitude") {
  ConfigMap cfg;
  cfg.set("model", "swift_hohenberg");
  cfg.set("output_dir", "runner-test/sh-defaults");
  const RunResult r = execute_run(cfg);

  CHECK(r.summary["mode"] == "reduced");
  CHECK(r.summary["model"] == "swift_hohenberg");
  CHECK(r.summary["config_hash"] == r.config_hash);
  CHECK(r.summary["config"]["n_paths"] == "1000");
  CHECK(r.summary["config"]["reduced_form"] == "closed");
  CHECK(r.summary["runtime_seconds"].get<double>() > 0.0);

  const auto& res = r.summary["results"];
  const double h_star = res["h_star"].get<double>();
  CHECK(h_star == Catch::Approx(0.18371).margin(1e-5));
  CHECK(res["relaxation_rate"].get<double>() == Catch::Approx(0.2).margin(1e-12));
  CHECK(res["n_completed"].get<std::size_t>() == 1000);
  const double tavg = res["time_averaged_mean"].get<double>();
  CHECK(std::abs(tavg - h_star) <= 0.05 * h_star);
  CHECK_FALSE(res.contains("exit_times"));  // no exit region configured

  CHECK(has_file(r, "series.csv"));
  CHECK(has_file(r, "histogram.csv"));
  CHECK(has_file(r, "summary.json"));
  const std::string series = read_file(r.output_dir / "series.csv");
  CHECK(series.rfind("# config_hash=" + r.config_hash + "\n# seed=1\n", 0) == 0);
}

TEST_CASE("reduced run with zero coupling is deterministic decay") {
  ConfigMap cfg;
  cfg.set("model", "damped_wave");
  cfg.set_double("eps", 0.0);
  cfg.set_u64("n_paths", 10);
  cfg.set_u64("store_paths", 3);
  cfg.set("output_dir", "runner-test/wave-eps0");
  const RunResult r = execute_run(cfg);

  const auto& res = r.summary["results"];
  CHECK(std::abs(res["final_mean"].get<double>()) < 1e-3);
  CHECK(res["final_variance"].get<double>() == 0.0);
  CHECK(res["n_diverged"].get<std::size_t>() == 0);
  CHECK(has_file(r, "paths.csv"));
}

TEST_CASE("identical configurations produce byte-identical CSV outputs") {
  auto make = [](const std::string& dir) {
    ConfigMap cfg;
    cfg.set("model", "swift_hohenberg");
    cfg.set_u64("n_paths", 50);
    cfg.set_double("T", 50.0);
    cfg.set_u64("seed", 7);
    cfg.set("output_dir", dir);
    return execute_run(cfg);
  };
  const RunResult a = make("runner-test/det-a");
  const RunResult b = make("runner-test/det-b");
  CHECK(a.config_hash == b.config_hash);  // output_dir is not part of the hash
  CHECK(read_file(a.output_dir / "series.csv") == read_file(b.output_dir / "series.csv"));
  CHECK(read_file(a.output_dir / "histogram.csv") ==
        read_file(b.output_dir / "histogram.csv"));
}

TEST_CASE("reduced run reports exit statistics when a region is given") {
  ConfigMap cfg;
  cfg.set("model", "swift_hohenberg");
  cfg.set_u64("n_paths", 20);
  cfg.set_double("T", 100.0);
  cfg.set_double("exit_lo", 0.0);
  cfg.set_double("exit_hi", 1.0);  // wide region: nothing escapes
  cfg.set("output_dir", "runner-test/sh-exit");
  const RunResult r = execute_run(cfg);
  const auto& exits = r.summary["results"]["exit_times"];
  CHECK(exits["count_escaped"].get<std::size_t>() == 0);
  CHECK(exits["count_censored"].get<std::size_t>() == 20);
  CHECK(exits["censored_mean"].get<double>() == 100.0);
  CHECK(exits["horizon"].get<double>() == 100.0);
}

TEST_CASE("covariance-test mode passes and writes its probe table") {
  ConfigMap cfg;
  cfg.set("mode", "covariance-test");
  cfg.set_u64("noise_modes", 8);
  cfg.set_u64("n_samples", 20000);
  cfg.set_u64("n_probes", 6);
  cfg.set_u64("n_points", 128);
  cfg.set_u64("seed", 2);
  cfg.set("output_dir", "runner-test/covariance");
  const RunResult r = execute_run(cfg);

  CHECK(r.summary["mode"] == "covariance-test");
  CHECK(r.summary["results"]["pass"].get<bool>());
  CHECK(r.summary["results"]["worst_stderr_ratio"].get<double>() < 5.0);
  CHECK(has_file(r, "covariance.csv"));
  const std::string table = read_file(r.output_dir / "covariance.csv");
  CHECK(table.find("probe,empirical,exact,stderr,abs_diff,stderr_ratio") != std::string::npos);
  CHECK(count_lines(table) == 3 + 6);  // provenance + header + one row per probe
}

TEST_CASE("model catalog JSON feeds back into execute_run unchanged") {
  const std::set<std::string> known_keys{
      "model", "description", "interpretation", "scheme", "h0",        "T",
      "dt",    "n_paths",     "eps",            "gamma",  "delta",     "length",
      "half_width", "n_points"};
  const auto cat = model_catalog_json();
  REQUIRE(cat.is_array());
  REQUIRE(cat.size() == 4);

  for (const auto& entry : cat) {
    for (const auto& [key, value] : entry.items()) CHECK(known_keys.count(key) == 1);
    CHECK_FALSE(entry["description"].get<std::string>().empty());
    CHECK(entry["interpretation"] == "stratonovich");

    // Two-step round trip: the catalog row, shortened to two steps of two
    // paths, must run through execute_run without edits.
    ConfigMap cfg;
    const std::string name = entry["model"].get<std::string>();
    cfg.set("model", name);
    cfg.set("scheme", entry["scheme"].get<std::string>());
    for (const std::string key : {"eps", "gamma", "delta", "length", "half_width"})
      if (entry.contains(key)) cfg.set_double(key, entry[key].get<double>());
    if (entry.contains("n_points"))
      cfg.set_u64("n_points", static_cast<std::uint64_t>(entry["n_points"].get<double>()));
    cfg.set_double("h0", entry["h0"].get<double>());
    const double dt = entry["dt"].get<double>();
    cfg.set_double("dt", dt);
    cfg.set_double("T", 2.0 * dt);
    cfg.set_u64("n_paths", 2);
    cfg.set_u64("series_points", 2);
    cfg.set("output_dir", "runner-test/cat-" + name);
    const RunResult r = execute_run(cfg);
    CHECK(r.summary["model"] == name);
    CHECK(r.summary["results"]["n_completed"].get<std::size_t>() == 2);
  }
}

TEST_CASE("coupled and full-spde modes run the field simulators") {
  ConfigMap base;
  base.set("model", "damped_wave");
  base.set_double("eps", 0.1);
  base.set_double("T", 0.5);
  base.set_double("dt", 0.01);
  base.set_u64("n_paths", 2);
  base.set_u64("n_modes", 8);
  base.set_u64("series_points", 6);
  base.set_u64("seed", 3);

  ConfigMap coupled = base;
  coupled.set("mode", "coupled");
  coupled.set("output_dir", "runner-test/wave-coupled");
  const RunResult rc = execute_run(coupled);
  CHECK(rc.summary["results"]["n_tube_exits"].get<std::size_t>() == 0);
  CHECK(rc.summary["results"]["n_diverged"].get<std::size_t>() == 0);
  CHECK(rc.summary["results"]["max_ortho_residual"].get<double>() <= 1e-8);
  CHECK(rc.summary["config"]["n_modes"] == "8");

  ConfigMap full = base;
  full.set("mode", "full-spde");
  full.set_u64("store_paths", 1);
  full.set("output_dir", "runner-test/wave-full");
  const RunResult rf = execute_run(full);
  CHECK(rf.summary["results"]["n_tube_exits"].get<std::size_t>() == 0);
  CHECK(rf.summary["results"]["n_completed"].get<std::size_t>() == 2);
  CHECK_FALSE(rf.summary["results"].contains("max_ortho_residual"));
  CHECK(has_file(rf, "paths.csv"));
  CHECK(std::isfinite(rf.summary["results"]["final_mean"].get<double>()));
}

TEST_CASE("equivalence mode compares the two simulators on shared noise") {
  ConfigMap cfg;
  cfg.set("model", "damped_wave");
  cfg.set("mode", "equivalence");
  cfg.set_double("eps", 0.1);
  cfg.set_double("T", 0.3);
  cfg.set_double("dt", 0.01);
  cfg.set_u64("n_paths", 2);
  cfg.set_u64("n_modes", 8);
  cfg.set_u64("compare_stride", 3);
  cfg.set_u64("seed", 5);
  cfg.set("output_dir", "runner-test/wave-equiv");
  const RunResult r = execute_run(cfg);

  const auto& res = r.summary["results"];
  CHECK(res["n_tube_exits"].get<std::size_t>() == 0);
  CHECK(res["n_paths"].get<std::size_t>() == 2);
  CHECK(res["max_sup_field_diff"].get<double>() < 0.05);
  CHECK(std::abs(res["mean_h_full"].get<double>() - res["mean_h_coupled"].get<double>()) <
        5e-3);
  CHECK(has_file(r, "equivalence.csv"));
  const std::string table = read_file(r.output_dir / "equivalence.csv");
  CHECK(table.find("path,sup_field_diff,h_full_final,h_coupled_final,tube_exit,"
                   "tube_exit_time") != std::string::npos);
  CHECK(count_lines(table) == 3 + 2);
}

TEST_CASE("output directory falls back to the environment base") {
  ::setenv("SMR_OUTPUT_DIR", "runner-test/envbase", 1);
  ConfigMap cfg;
  cfg.set("mode", "covariance-test");
  cfg.set_u64("noise_modes", 4);
  cfg.set_u64("n_samples", 2000);
  cfg.set_u64("n_probes", 2);
  cfg.set_u64("n_points", 64);
  const RunResult r = execute_run(cfg);
  ::unsetenv("SMR_OUTPUT_DIR");
  CHECK(r.output_dir.string().rfind("runner-test/envbase/covariance-test-", 0) == 0);
  CHECK(std::filesystem::exists(r.output_dir / "summary.json"));
}
