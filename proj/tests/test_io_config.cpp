#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "smr/config.hpp"
#include "smr/ensemble.hpp"
#include "smr/errors.hpp"
#include "smr/io.hpp"

using namespace smr;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::path("io-test") / name) {
    std::filesystem::create_directories(path);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("format_double emits shortest round-trip decimal") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(10.0) == "10");
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-2.0) == "-2");
  CHECK(format_double(10000.0) == "10000");

  const std::vector<double> values{0.1,   1.0 / 3.0, 1e-300, -2.5e17, 0.0,
                                   42.0, 3.141592653589793, 6.02e23, -1e-9};
  for (double v : values) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);  // exact round trip, not approximate
  }
}

TEST_CASE("format_u64 covers the full range") {
  CHECK(format_u64(0) == "0");
  CHECK(format_u64(7) == "7");
  CHECK(format_u64(18446744073709551615ull) == "18446744073709551615");
}

TEST_CASE("fnv1a_64 matches the published test vectors") {
  CHECK(fnv1a_64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a_64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a_64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("hex_u64 is fixed-width lowercase") {
  CHECK(hex_u64(0) == "0000000000000000");
  CHECK(hex_u64(0x123abcull) == "0000000000123abc");
  CHECK(hex_u64(0xffffffffffffffffull) == "ffffffffffffffff");
}

TEST_CASE("config file parsing trims, skips comments and reports line numbers") {
  const TempDir dir("config");
  const std::string path = dir.file("good.cfg");
  {
    std::ofstream out(path, std::ios::binary);
    out << "# leading comment\n"
        << "\n"
        << "  alpha = 1.5  \n"
        << "beta=2\n"
        << "flag = on\n"
        << "name = damped_wave\n";
  }
  const ConfigMap cfg = ConfigMap::from_file(path);
  CHECK(cfg.get_double("alpha", 0.0) == 1.5);
  CHECK(cfg.get_u64("beta", 0) == 2);
  CHECK(cfg.get_flag("flag", false));
  CHECK(cfg.get_string("name", "") == "damped_wave");
  CHECK_FALSE(cfg.has("missing"));
  CHECK(cfg.get_double("missing", -4.0) == -4.0);

  const std::string bad = dir.file("bad.cfg");
  {
    std::ofstream out(bad, std::ios::binary);
    out << "a=1\n"
        << "this line has no equals\n";
  }
  CHECK_THROWS_MATCHES(ConfigMap::from_file(bad), ConfigError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring(":2: expected key=value")));

  const std::string empty_key = dir.file("empty_key.cfg");
  {
    std::ofstream out(empty_key, std::ios::binary);
    out << "= 3\n";
  }
  CHECK_THROWS_MATCHES(ConfigMap::from_file(empty_key), ConfigError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring(":1: empty key")));

  CHECK_THROWS_AS(ConfigMap::from_file(dir.file("does_not_exist.cfg")), ConfigError);
}

TEST_CASE("config overrides: later set wins") {
  ConfigMap cfg;
  cfg.set("n_paths", "400");
  cfg.set_pair("n_paths = 20");
  CHECK(cfg.get_u64("n_paths", 0) == 20);
  cfg.set_u64("n_paths", 10);
  CHECK(cfg.get_u64("n_paths", 0) == 10);

  CHECK_THROWS_AS(cfg.set_pair("no_equals_here"), ConfigError);
  CHECK_THROWS_AS(cfg.set("", "x"), ConfigError);
}

TEST_CASE("canonical form is sorted and the hash tracks content") {
  ConfigMap a;
  a.set("zeta", "1");
  a.set("alpha", "2");
  a.set_double("mid", 0.25);
  CHECK(a.canonical() == "alpha=2\nmid=0.25\nzeta=1\n");

  ConfigMap b;  // same entries, different insertion order
  b.set_double("mid", 0.25);
  b.set("alpha", "2");
  b.set("zeta", "1");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);

  b.set("zeta", "3");
  CHECK(a.hash() != b.hash());
}

TEST_CASE("typed getters reject junk values") {
  ConfigMap cfg;
  cfg.set("d", "not_a_number");
  cfg.set("u", "-3");
  cfg.set("f", "maybe");
  CHECK_THROWS_AS(cfg.get_double("d", 0.0), ConfigError);
  CHECK_THROWS_AS(cfg.get_u64("u", 0), ConfigError);
  CHECK_THROWS_AS(cfg.get_flag("f", false), ConfigError);

  cfg.set("d", "2.5e-3");
  cfg.set("u", "12");
  cfg.set("f", "false");
  CHECK(cfg.get_double("d", 0.0) == 2.5e-3);
  CHECK(cfg.get_u64("u", 0) == 12);
  CHECK_FALSE(cfg.get_flag("f", true));
}

TEST_CASE("series CSV carries provenance lines, header and exact values") {
  const std::vector<double> times{0.0, 0.5, 1.0};
  const std::vector<std::vector<double>> paths{
      {0.0, 1.0, 2.0}, {0.0, 2.0, 4.0}, {}  // empty = diverged
  };
  const EnsembleStats stats = summarize_series(times, paths, 4, 1);
  CHECK(stats.n_paths == 3);
  CHECK(stats.n_diverged == 1);
  CHECK(stats.mean == std::vector<double>{0.0, 1.5, 3.0});
  CHECK(stats.variance[1] == 0.5);  // unbiased over the two survivors
  CHECK(stats.final_skewness == 0.0);

  const TempDir dir("series");
  const std::string path = dir.file("series.csv");
  write_series_csv(path, stats, "deadbeefdeadbeef", 9);

  const auto lines = lines_of(read_file(path));
  REQUIRE(lines.size() == 2 + 1 + times.size());
  CHECK(lines[0] == "# config_hash=deadbeefdeadbeef");
  CHECK(lines[1] == "# seed=9");
  CHECK(lines[2] == "t,mean,variance,q05,q25,q50,q75,q95");
  CHECK(lines[3].rfind("0,0,0,", 0) == 0);
  CHECK(lines[4].rfind("0.5,1.5,0.5,", 0) == 0);
  CHECK(lines[5].rfind("1,3,2,", 0) == 0);

  // Every numeric cell must round-trip through the shortest-decimal writer.
  for (std::size_t i = 3; i < lines.size(); ++i) {
    std::istringstream row(lines[i]);
    std::string cell;
    while (std::getline(row, cell, ',')) CHECK(format_double(std::stod(cell)) == cell);
  }
}

TEST_CASE("histogram and paths CSV headers and contents") {
  const std::vector<double> times{0.0, 1.0};
  const std::vector<std::vector<double>> paths{{0.0, 1.0}, {0.0, 3.0}};
  const EnsembleStats stats = summarize_series(times, paths, 2, 2);
  REQUIRE(stats.final_histogram.edges.size() == 3);
  REQUIRE(stats.stored_paths.size() == 1);  // stride 2 keeps path 0 only
  CHECK(stats.stored_paths[0].path_index == 0);

  const TempDir dir("csv");
  write_histogram_csv(dir.file("histogram.csv"), stats.final_histogram, "abc", 3);
  auto hist_lines = lines_of(read_file(dir.file("histogram.csv")));
  REQUIRE(hist_lines.size() == 3 + 2);
  CHECK(hist_lines[2] == "bin_left,bin_right,count");
  std::size_t total = 0;
  for (std::size_t i = 3; i < hist_lines.size(); ++i) {
    const auto last_comma = hist_lines[i].rfind(',');
    total += std::stoull(hist_lines[i].substr(last_comma + 1));
  }
  CHECK(total == 2);  // counts sum to the completed paths

  write_paths_csv(dir.file("paths.csv"), stats, "abc", 3);
  auto path_lines = lines_of(read_file(dir.file("paths.csv")));
  REQUIRE(path_lines.size() == 3 + 2);
  CHECK(path_lines[2] == "path,t,h");
  CHECK(path_lines[3] == "0,0,0");
  CHECK(path_lines[4] == "0,1,1");
}

TEST_CASE("generic table writer") {
  const TempDir dir("table");
  write_table_csv(dir.file("table.csv"), "a,b", {{1.0, 0.25}, {2.0, -0.5}}, "cafe", 1);
  const auto lines = lines_of(read_file(dir.file("table.csv")));
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "# config_hash=cafe");
  CHECK(lines[1] == "# seed=1");
  CHECK(lines[2] == "a,b");
  CHECK(lines[3] == "1,0.25");
  CHECK(lines[4] == "2,-0.5");
}

TEST_CASE("open_output refuses unwritable targets") {
  CHECK_THROWS_AS(detail::open_output("definitely/missing/dir/file.csv"), ConfigError);
}
