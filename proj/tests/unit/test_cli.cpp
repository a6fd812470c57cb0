#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mflow/cli/config.hpp"
#include "mflow/cli/runner.hpp"
#include "mflow/errors.hpp"

using namespace mflow;
using namespace mflow::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mflow_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "cfg.json";
  std::ofstream(p) << doc.dump(2);
  return p.string();
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "mflow");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return main_entry(static_cast<int>(argv.size()), argv.data());
}

json read_json(const fs::path& p) {
  std::ifstream is(p);
  json j;
  is >> j;
  return j;
}

}  // namespace

TEST_SUITE("cli") {
TEST_CASE("fnv-1a known answers") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("schema rejects bad documents") {
  CHECK_THROWS_AS(validate_schema(json::object()), ConfigError);
  CHECK_THROWS_AS(validate_schema(json{{"spectral", {{"trunc", "8"}}}}), ConfigError);
  CHECK_THROWS_AS(validate_schema(json{{"spectral", {{"tranc", 8}}}}), ConfigError);
  CHECK_THROWS_AS(validate_schema(json{{"spectral", json::object()}, {"extra", 1}}), ConfigError);
  CHECK_NOTHROW(validate_schema(json{{"spectral", {{"trunc", 8}}}, {"seed", 3}}));
}

TEST_CASE("empty config exits with the config code") {
  const fs::path d = scratch("empty");
  const std::string cfg = write_config(d, json::object());
  CHECK(run({"--config", cfg, "spectrum"}) == kExitConfig);
  CHECK(run({"--config", (d / "missing.json").string(), "spectrum"}) == kExitConfig);
}

TEST_CASE("spectrum for alpha=1 N=4") {
  const fs::path d = scratch("spectrum");
  const std::string cfg = write_config(d, json{{"spectral", {{"d", 1}, {"alpha", 1.0}, {"trunc", 4}}}});
  REQUIRE(run({"--config", cfg, "--out", (d / "out").string(), "spectrum"}) == kExitPass);
  const json j = read_json(d / "out" / "spectrum.json");
  CHECK(j.at("data").at("eigenvalues") == json{2.0, 4.0, 6.0, 8.0});
  CHECK(j.at("passed") == true);
  CHECK(fs::exists(d / "out" / "spectrum.csv"));
}

TEST_CASE("seed precedence: flag over file") {
  const json doc{{"spectral", {{"trunc", 4}}}, {"seed", 7}};
  CHECK(config_from_json(doc, {}).seed == 7u);
  Overrides ov;
  ov.seed = 11;
  CHECK(config_from_json(doc, ov).seed == 11u);
}

TEST_CASE("config hash ignores workers but not chunk") {
  const json doc{{"spectral", {{"trunc", 4}}}};
  Overrides a, b, c;
  a.workers = 1;
  b.workers = 4;
  c.chunk = 7;
  CHECK(config_from_json(doc, a).hash == config_from_json(doc, b).hash);
  CHECK(config_from_json(doc, a).hash != config_from_json(doc, c).hash);
}

TEST_CASE("artifacts are identical across worker counts") {
  const fs::path d = scratch("workers");
  const std::string cfg =
      write_config(d, json{{"spectral", {{"trunc", 4}}}, {"potential", {{"name", "entropy"}}},
                           {"gaussian", {{"n_samples", 2000}}}});
  REQUIRE(run({"--config", cfg, "--out", (d / "w1").string(), "--workers", "1", "sample"}) == kExitPass);
  REQUIRE(run({"--config", cfg, "--out", (d / "w3").string(), "--workers", "3", "sample"}) == kExitPass);
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  CHECK(slurp(d / "w1" / "samples.csv") == slurp(d / "w3" / "samples.csv"));
  CHECK(slurp(d / "w1" / "sample.json") == slurp(d / "w3" / "sample.json"));
}

TEST_CASE("unknown check name is a config error") {
  const fs::path d = scratch("check");
  const std::string cfg = write_config(d, json{{"spectral", {{"trunc", 4}}}});
  CHECK(run({"--config", cfg, "--out", (d / "out").string(), "check", "nope"}) == kExitConfig);
  CHECK(run({"--config", cfg, "--out", (d / "out").string(), "check", "k-functional"}) == kExitPass);
  std::ostringstream os;
  CHECK(run_report((d / "out").string(), os) == kExitPass);
  CHECK(os.str().find("k-functional") != std::string::npos);
}

TEST_CASE("cylinder parsing") {
  const json j{{"outer", "tanh_sum"}, {"a", {0.5, -1.0}},
               {"inner", {{{"kind", "hermite"}, {"n", {1}}}, {{"kind", "gaussian"}, {"width", 0.5}}}}};
  const CylinderFunction u = parse_cylinder(j, 1);
  CHECK(u.inner.size() == 2u);
  CHECK_THROWS_AS(parse_cylinder(json{{"outer", "sin"}, {"inner", json::array()}}, 1), ConfigError);
  CHECK_THROWS_AS(parse_cylinder(json{{"outer", "wave"}, {"inner", {{{"kind", "constant"}}}}}, 1), ConfigError);
}
}
