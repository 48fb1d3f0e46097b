#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "enstrophy/cli.hpp"
#include "helpers.hpp"

using namespace enstrophy;
using namespace testing_helpers;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) { fs::remove_all(path); fs::create_directories(path); }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_config(const fs::path& dir, const json& config) {
  const fs::path file = dir / "config.json";
  std::ofstream(file) << config.dump(2);
  return file;
}

std::string config_error(const json& config) {
  try {
    cli::parse_experiment(config);
  } catch (const cli::ConfigError& e) {
    return e.path;
  }
  return "";
}

json base() { return {{"name", "t"}, {"seed", 1}, {"cutoff", 3}, {"samples", 200}}; }

std::string slurp(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("sha256") {
  CHECK(cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(cli::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("trig terms") {
  const SpectralField f = cli::parse_field(json::parse(R"([{"cos":[1,0]},{"sin":[1,1],"amp":0.5},{"const":2}])"), "phi");
  CHECK(max_abs_diff(f, cos_mode({1, 0}) + sin_mode({1, 1}, 0.5) + [] {
          SpectralField c(0);
          c.set_mean(2.0);
          return c;
        }()) == 0.0);
  // sin(-x) = -sin(x)
  CHECK(max_abs_diff(cli::parse_field(json::parse(R"([{"sin":[-1,0]}])"), "phi"), sin_mode({1, 0}, -1.0)) == 0.0);
  CHECK_THROWS_AS(cli::parse_field(json::parse(R"([{"cos":[0,0]}])"), "phi"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_field(json::parse(R"([{"cos":[1,0],"sin":[1,0]}])"), "phi"), cli::ConfigError);
}

TEST_CASE("config errors name the field") {
  json c = base();
  c["flow"] = {{"dt", 0.03}, {"horizon", 1.0}};
  CHECK(config_error(c) == "flow.horizon");

  c = base();
  c["tests"] = json::array({{{"kind", "invariance"}, {"flow", {{"dt", 0.03}, {"horizon", 0.1}}}, {"observables", json::array({json::array({{{"cos", {1, 0}}}})})}}});
  CHECK(config_error(c) == "tests[0].flow.horizon");

  c = base();
  c["tests"] = json::array({{{"kind", "nonsense"}}});
  CHECK(config_error(c) == "tests[0].kind");

  c = base();
  c["tests"] = json::array({{{"kind", "cauchy"}, {"phi", json::array({{{"cos", {1, 0}}}})}, {"cutoffs", {4, 2}}}});
  CHECK(config_error(c) == "tests[0].cutoffs");

  c = base();
  c["tests"] = json::array({{{"kind", "wick_mean"}, {"kernel", {{"type", "translation"}, {"profile", json::array({{{"sin", {1, 0}}}})}}}}});
  CHECK(config_error(c) == "tests[0].kernel.profile");

  c = base();
  c["tests"] = json::array({{{"kind", "exp_series"}}, {{"kind", "exp_series"}}});
  CHECK(config_error(c) == "tests[1].name");

  c = base();
  c["cutof"] = 3;
  CHECK(config_error(c) == "cutof");

  c = base();
  c["seed"] = -1;
  CHECK(config_error(c) == "seed");

  c = base();
  c["density"] = {{"kind", "gaussian_tilt"}, {"phi", json::array({{{"cos", {5, 0}}}})}};
  CHECK(config_error(c) == "density.phi");

  c = base();
  c["tests"] = json::array({{{"kind", "continuity"}, {"flow", {{"dt", 0.01}, {"horizon", 0.1}}},
                             {"functional", {{"tests", json::array({json::array({{{"cos", {1, 0}}}})})},
                                             {"terms", json::array({{{"test", 3}}})}}}}});
  CHECK(config_error(c) == "tests[0].functional.terms[0].test");
}

TEST_CASE("run: exit codes and artifacts") {
  TempDir tmp("enstrophy_cli_test");
  std::ostringstream log;

  SUBCASE("empty selection") {
    const fs::path cfg = write_config(tmp.path, base());
    CHECK(cli::run(cfg, {tmp.path / "out", std::nullopt}, log) == cli::kExitPass);
    CHECK(slurp(tmp.path / "out" / "summary.csv") == "test,passed,checks,failed_checks\n");
    const json manifest = json::parse(slurp(tmp.path / "out" / "manifest.json"));
    CHECK(manifest["seed"] == 1);
    CHECK(manifest["config_sha256"] == cli::sha256_hex(slurp(cfg)));
  }

  SUBCASE("config error") {
    json c = base();
    c["flow"] = {{"dt", 0.03}, {"horizon", 1.0}};
    CHECK(cli::run(write_config(tmp.path, c), {tmp.path / "out", std::nullopt}, log) == cli::kExitConfigError);
    CHECK(log.str().find("flow.horizon") != std::string::npos);
    std::ofstream(tmp.path / "broken.json") << "{ not json";
    CHECK(cli::run(tmp.path / "broken.json", {}, log) == cli::kExitConfigError);
    CHECK(cli::run(tmp.path / "missing.json", {}, log) == cli::kExitConfigError);
  }

  SUBCASE("passing and failing batteries, manifest hashes, seed override") {
    json c = base();
    c["tests"] = json::array({
        {{"kind", "exp_series"}, {"eps", {0.4}}},
        {{"kind", "invariance"}, {"name", "impossible"}, {"expect_reject", true}, {"flow", {{"dt", 0.01}, {"horizon", 0.02}}},
         {"observables", json::array({json::array({{{"cos", {1, 0}}}})})}},
        {{"kind", "wick_mean"}, {"kernel", {{"type", "rank_one"}, {"a", json::array({{{"cos", {1, 0}}}})}}}},
    });
    const fs::path cfg = write_config(tmp.path, c);
    CHECK(cli::run(cfg, {tmp.path / "out", 99u}, log) == cli::kExitTestFailure);
    const json manifest = json::parse(slurp(tmp.path / "out" / "manifest.json"));
    CHECK(manifest["seed"] == 99);
    CHECK(manifest["files"].size() == 7);
    for (const auto& f : manifest["files"])
      CHECK(cli::sha256_hex(slurp(tmp.path / "out" / f["path"].get<std::string>())) == f["sha256"]);
    const std::string summary = slurp(tmp.path / "out" / "summary.csv");
    CHECK(summary.find("exp_series,true") != std::string::npos);
    CHECK(summary.find("impossible,false") != std::string::npos);
    const json report = json::parse(slurp(tmp.path / "out" / "reports" / "wick_mean.json"));
    CHECK(report["seed"] == 99);
    CHECK_FALSE(report.contains("runtime_seconds"));
    for (const auto& entry : fs::recursive_directory_iterator(tmp.path / "out"))
      CHECK(entry.path().extension() != ".tmp");
  }
}

TEST_CASE("bench") {
  std::ostringstream out;
  CHECK(cli::bench(4, out) == cli::kExitPass);
  CHECK(out.str().find("dealiased") != std::string::npos);
  CHECK_THROWS(cli::bench(-1, out));
}

TEST_CASE("bundled quickcheck config parses") {
  std::ifstream in(fs::path(ENSTROPHY_SOURCE_DIR) / "configs" / "quickcheck.cfg");
  const cli::Experiment e = cli::parse_experiment(json::parse(in));
  CHECK(e.name == "quickcheck");
  CHECK(e.jobs.size() >= 13);
}
