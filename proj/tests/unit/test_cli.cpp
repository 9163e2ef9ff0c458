#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "pstab/io.hpp"

namespace fs = std::filesystem;
using pstab::cli::main_entry;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pstab_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = main_entry(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("constants report") {
  const Run r = run({"constants", "--p", "2", "--p", "3", "--p", "1.5"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("schema") == 1);
  CHECK(j.contains("generated_at"));
  CHECK(j.at("passed") == true);
  CHECK(j.at("results").size() == 3);
  CHECK(j.at("results")[1].at("c1").at("c1").get<double>() == doctest::Approx(2.0 - std::sqrt(2.0)));
  CHECK(j.at("results")[2].contains("c2_c3"));
  const Run quiet = run({"constants", "--p", "2", "--no-timestamp"});
  CHECK_FALSE(nlohmann::json::parse(quiet.out).contains("generated_at"));
}

TEST_CASE("exit codes") {
  CHECK(run({"gap", "--p", "2", "--domain", "interval:0,a"}).code == 1);
  CHECK(run({"gap", "--p", "2", "--domain", "polygon:0,0;1,0;1,0;0,1"}).code == 1);
  CHECK(run({"stability", "--p", "2", "--measure", "uniform"}).code == 1);
  CHECK(run({"stability", "--p", "0.5"}).code == 1);
  CHECK(run({"stability", "--p", "1.5", "--level", "1"}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"constants", "--bogus"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  const Run ok = run({"stability", "--p", "3", "--level", "2", "--fields", "3"});
  CHECK(ok.code == 0);
  const Run bad = run({"stability", "--p", "3", "--level", "2", "--fields", "3", "--inject-constant-factor", "1e9"});
  CHECK(bad.code == 2);
  CHECK(nlohmann::json::parse(bad.out).at("passed") == false);
}

TEST_CASE("files are written and reports are reproducible") {
  TempDir dir;
  const std::string out = dir.file("gap.json");
  const std::string csv = dir.file("gap.csv");
  const std::vector<std::string> args = {"gap", "--p", "2", "--level", "2", "--out", out, "--csv", csv, "--no-timestamp"};
  REQUIRE(run(args).code == 0);
  const std::string first = slurp(out);
  CHECK_FALSE(fs::exists(out + ".tmp"));
  REQUIRE(run(args).code == 0);
  CHECK(slurp(out) == first);
  const std::string table = slurp(csv);
  CHECK(table.rfind(pstab::csv_header() + "\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 2);
}

TEST_CASE("eigen writes a mesh file the report refers to") {
  TempDir dir;
  const std::string out = dir.file("eig.json");
  REQUIRE(run({"eigen", "--p", "2", "--domain", "polygon:0,0;1,0;0,1", "--level", "1", "--out", out}).code == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  const auto& nodal = j.at("results")[0].at("first").at("nodal_values");
  CHECK(nodal.at("mesh_file") == "eig.json.mesh");
  std::ifstream mesh_in(dir.file("eig.json.mesh"));
  REQUIRE(mesh_in);
  const pstab::Mesh mesh = pstab::read_mesh(mesh_in);
  CHECK(mesh.num_nodes() == nodal.at("values").size());
}

TEST_CASE("config file with flag overrides") {
  TempDir dir;
  const std::string cfg = dir.file("run.json");
  std::ofstream(cfg) << R"({"p": [2, 3], "domain": {"interval": [0, 2]}, "level": 1, "measure": "gaussian"})";
  const Run r = run({"gap", "--config", cfg, "--p", "2", "--no-timestamp"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("results").size() == 1);
  CHECK(j.at("diameter").get<double>() == doctest::Approx(2.0));
  CHECK(j.at("config").at("measure") == "gaussian");
  std::ofstream(dir.file("bad.json")) << "{oops";
  CHECK(run({"gap", "--config", dir.file("bad.json")}).code == 1);
  CHECK(run({"gap", "--config", dir.file("missing.json")}).code == 1);
}

TEST_CASE("battery covers every domain and measure") {
  TempDir dir;
  const std::string cfg = dir.file("battery.json");
  std::ofstream(cfg) << R"({"battery": {"domains": ["interval:0,1", "polygon:0,0;1,0;1,1;0,1"],
                                       "measures": ["lebesgue", "gaussian"]}})";
  const Run r = run({"battery", "--config", cfg, "--p", "2", "--p", "3", "--level", "1", "--fields", "4"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("results").size() == 8);
  for (const auto& cell : j.at("results")) CHECK(cell.at("failures") == 0);
}

}
