#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef CRYSTALWALK_CLI_PATH
#error "CRYSTALWALK_CLI_PATH must be defined by the build"
#endif

namespace {

int run(const std::string& args) {
  const std::string cmd =
      std::string(CRYSTALWALK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string temp_path(const std::string& name) {
  return std::string("cli_test_") + name;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  nlohmann::json j;
  f >> j;
  return j;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
  CHECK(run("validate --lattice square") == 0);
  CHECK(run("--bogus-flag") == 64);
  CHECK(run("validate") == 2);  // no lattice source
  CHECK(run("validate --input /nonexistent.json") == 2);

  // A structurally broken graph fails validation with exit 1.
  const std::string broken = temp_path("broken.json");
  {
    std::ofstream f(broken);
    f << R"({"dim": 1, "vertices": ["v"],
             "edges": [
               {"id": "e", "from": "v", "to": "v", "translation": [1],
                "p": 0.7, "inverse": "e'"},
               {"id": "e'", "from": "v", "to": "v", "translation": [-1],
                "p": 0.5, "inverse": "e"}
             ]})";
  }
  CHECK(run("validate --input " + broken) == 1);
  std::remove(broken.c_str());
}

TEST_CASE("analyze report") {
  const std::string out = temp_path("analyze.json");
  REQUIRE(run("analyze --lattice square --output " + out) == 0);
  const auto j = read_json(out);
  CHECK(j["schema"] == "crystalwalk/1");
  CHECK(j.contains("version"));
  CHECK(j.contains("walltime_s"));
  CHECK(j["config"]["command"] == "analyze");
  CHECK(j["analysis"]["period_K"] == 2);
  CHECK(j["analysis"]["refinement_index"] == 2);
  CHECK(std::abs(j["analysis"]["volume"].get<double>() - 4.0) < 1e-10);

  // The embedded graph round-trips to identical numeric results.
  const std::string g2 = temp_path("graph.json");
  {
    std::ofstream f(g2);
    f << j["analysis"]["graph"].dump();
  }
  const std::string out2 = temp_path("analyze2.json");
  REQUIRE(run("analyze --input " + g2 + " --output " + out2) == 0);
  const auto j2 = read_json(out2);
  CHECK(j2["analysis"]["volume"].get<double>() ==
        j["analysis"]["volume"].get<double>());
  CHECK(j2["analysis"]["invariant_measure"] ==
        j["analysis"]["invariant_measure"]);
  for (const auto& p : {out, g2, out2}) std::remove(p.c_str());
}

TEST_CASE("a1 report") {
  const std::string out = temp_path("a1.json");
  REQUIRE(run("a1 --lattice square --mode analytic --output " + out) == 0);
  const auto j = read_json(out);
  CHECK(std::abs(j["a1_analytic"].get<double>() + 0.5) < 1e-8);
  std::remove(out.c_str());
}

TEST_CASE("heat csv") {
  const std::string out = temp_path("heat.csv");
  REQUIRE(run("heat --lattice square --n 2 --output " + out) == 0);
  std::ifstream f(out);
  REQUIRE(f.good());
  std::string header;
  std::getline(f, header);
  CHECK(header == "vertex,cell,p");
  int rows = 0;
  double total = 0;
  for (std::string line; std::getline(f, line);) {
    if (line.empty()) continue;
    ++rows;
    total += std::stod(line.substr(line.rfind(',') + 1));
  }
  CHECK(rows > 0);
  CHECK(std::abs(total - 1.0) < 1e-12);
  std::remove(out.c_str());
}

TEST_CASE("lclt csv") {
  const std::string out = temp_path("lclt.csv");
  REQUIRE(run("lclt --lattice square --n-list 16,32 --window 4 --output " +
              out) == 0);
  std::ifstream f(out);
  std::string header;
  std::getline(f, header);
  CHECK(header == "n,U_n,sup_error");
  std::remove(out.c_str());
}

TEST_CASE("realize csv") {
  const std::string out = temp_path("points.csv");
  REQUIRE(run("realize --lattice hexagonal --window 1 --output " + out) == 0);
  std::ifstream f(out);
  std::string header;
  std::getline(f, header);
  CHECK(header == "vertex,cell,x,y");
  std::ifstream e(out + ".edges.csv");
  REQUIRE(e.good());
  std::getline(e, header);
  CHECK(header == "from_row,to_row");
  std::remove(out.c_str());
  std::remove((out + ".edges.csv").c_str());
}

TEST_CASE("clt report") {
  const std::string out = temp_path("clt.json");
  REQUIRE(run("clt --lattice square --mode first --n 16 --t 1 --paths 4000 "
              "--seed 5 --output " + out) == 0);
  const auto j = read_json(out);
  CHECK(j["pass"] == true);
  CHECK(j["per_t"].size() == 1);
  std::remove(out.c_str());
}

}  // TEST_SUITE
