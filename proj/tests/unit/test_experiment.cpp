#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qrotor/experiment.hpp"
#include "qrotor/rdm.hpp"

using namespace qrotor;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("qrotor_unit_" + name);
  fs::remove_all(p);
  return p;
}
}  // namespace

TEST_CASE("defaults and strict keys") {
  const auto c = parse_config(json{{"task", {{"name", "simulate"}}}, {"model", json::object()}});
  CHECK(c.task == "simulate");
  CHECK(c.resolved.at("model").at("beta").get<double>() == 1.0);
  CHECK_THROWS_AS(parse_config(json{{"task", {{"name", "simulate"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"task", {{"name", "simulate"}}}, {"modle", json::object()}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"task", {{"name", "fly"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"task", {{"name", "simulate"}}}, {"model", {{"beta", -1.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"task", {{"name", "simulate"}}}, {"model", {{"beta", "hot"}}}}), ConfigError);
}

TEST_CASE("hash ignores the output block and follows the seed") {
  const json base{{"task", {{"name", "simulate"}}}, {"model", json::object()}, {"run", {{"seed", 4}}}};
  json moved = base;
  moved["output"] = {{"dir", "/tmp/elsewhere"}};
  CHECK(parse_config(base).hash() == parse_config(moved).hash());
  CHECK(parse_config(base).hash().size() == 16);
  Overrides o;
  o.seed = 5;
  const auto c = apply_overrides(parse_config(base), o);
  CHECK(c.seed == 5);
  CHECK(c.hash() != parse_config(base).hash());
  CHECK(parse_config(c.resolved).hash() == c.hash());
}

TEST_CASE("provenance header") {
  const auto c = parse_config(json{{"task", {{"name", "lemma11"}}}});
  const auto h = provenance_header(c, "lemma11");
  CHECK(h.rfind("# qrotor ", 0) == 0);
  CHECK(h.find("# config_hash: " + c.hash()) != std::string::npos);
  CHECK(h.find("\"output\"") == std::string::npos);
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("comments in config files") {
  const auto dir = scratch("cfg");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << "{ // a comment\n \"task\": {\"name\": \"gauge-sweep\"} }\n";
  CHECK(load_config((dir / "c.json").string()).task == "gauge-sweep");
  CHECK_THROWS(load_config((dir / "missing.json").string()));
  fs::remove_all(dir);
}

TEST_CASE("gauge sweep writes a table") {
  const auto dir = scratch("gauge");
  auto c = parse_config(json{{"task", {{"name", "gauge-sweep"}, {"ns", {6, 8}}}}});
  Overrides o;
  o.out_dir = dir.string();
  const auto out = run_experiment(apply_overrides(c, o));
  CHECK(out.pass);
  const auto text = slurp(dir / "psi.csv");
  CHECK(text.find("n,Q,psi,psi_Q") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("replay rejects corrupted dumps") {
  const auto dir = scratch("replay");
  auto c = parse_config(json{{"model", {{"graph", {{"extent", 1}}}}},
                             {"run", {{"sweeps", 200}, {"seed", 3}}},
                             {"task", {{"name", "simulate"}, {"dump", true}}}});
  Overrides o;
  o.out_dir = dir.string();
  run_experiment(apply_overrides(c, o));
  const auto dump = dir / "configs_chain0.qrcf";
  const auto ok = replay({dump.string()}, {{"kind", "energy"}}, (dir / "r").string());
  CHECK(slurp(dir / "r" / "energy.csv") == slurp(dir / "energy.csv"));
  {
    std::fstream f(dump, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(-20, std::ios::end);
    f.put('\x7f');
  }
  CHECK_THROWS(replay({dump.string()}, {{"kind", "energy"}}, (dir / "r2").string()));
  fs::remove_all(dir);
}

TEST_CASE("rdm task at V = 0 reproduces the free kernel") {
  const auto dir = scratch("rdm");
  auto c = parse_config(json{{"model", {{"graph", {{"extent", 1}}}, {"beta", 0.2}, {"potential", {{"kind", "zero"}}}}},
                             {"task", {{"name", "rdm"}, {"samples", 200}, {"batches", 10}, {"m", 4}}}});
  Overrides o;
  o.out_dir = dir.string();
  run_experiment(apply_overrides(c, o));
  std::ifstream in(dir / "rdmk.csv");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    double x, y, mean, err;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &x, &y, &mean, &err) == 4);
    const KernelPair p{{TorusPoint{x}}, {TorusPoint{y}}};
    CHECK(mean == doctest::Approx(free_kernel(p, 0.2)).epsilon(1e-12));
    ++rows;
  }
  CHECK(rows == 16);
  fs::remove_all(dir);
}

TEST_CASE("validate-graph on a square box") {
  const auto dir = scratch("vg");
  auto c = parse_config(json{{"model", {{"graph", {{"extent", 16}}}}}, {"task", {{"name", "validate-graph"}}}});
  Overrides o;
  o.out_dir = dir.string();
  const auto out = run_experiment(apply_overrides(c, o));
  CHECK(out.pass);
  const auto rep = json::parse(slurp(dir / "graph_report.json"));
  CHECK(rep.contains("provenance"));
  fs::remove_all(dir);
}

TEST_CASE("gauge sweep rows") {
  const auto dir = scratch("gauge4");
  auto c = parse_config(json{{"task", {{"name", "gauge-sweep"}, {"ns", {8, 16, 32, 64}}}}});
  Overrides o;
  o.out_dir = dir.string();
  run_experiment(apply_overrides(c, o));
  std::ifstream in(dir / "psi.csv");
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line[0] != 'n') ++rows;
  CHECK(rows == 4);
  fs::remove_all(dir);
}

TEST_CASE("arc replay agrees with the run's own marginal") {
  const auto dir = scratch("arc");
  auto c = parse_config(json{{"model", {{"graph", {{"extent", 1}}}}},
                             {"run", {{"sweeps", 500}, {"chains", 2}, {"seed", 7}}},
                             {"task", {{"name", "simulate"}, {"dump", true}}}});
  Overrides o;
  o.out_dir = dir.string();
  run_experiment(apply_overrides(c, o));
  const auto r = replay({(dir / "configs_chain0.qrcf").string(), (dir / "configs_chain1.qrcf").string()},
                        {{"kind", "arc"}, {"center", 0.025}, {"half_width", 0.025}}, (dir / "r").string());
  std::ifstream in(dir / "marginal.csv");
  std::string line;
  double p0 = -1.0;
  while (std::getline(in, line))
    if (line.rfind("0,", 0) == 0) p0 = std::stod(line.substr(line.rfind(',', line.rfind(',') - 1) + 1));
  CHECK(r.summary.at("p").get<double>() == doctest::Approx(p0).epsilon(1e-15));
  fs::remove_all(dir);
}
