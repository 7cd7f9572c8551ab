#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run dbclab(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" DBCLAB_EXE "\" " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf;
  for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), p)) > 0;) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("dbclab_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string configs = DBCLAB_CONFIGS;

}  // namespace

TEST_CASE("rates subcommand") {
  auto r = dbclab("rates --omega1 3pi/2 --unconstrained");
  CHECK(r.status == 0);
  CHECK(r.out == "s=0.16667 r=0 (Thm 4.1)\n");
  CHECK(dbclab("rates --omega1 pi/2 --unconstrained --family superconvergent").out == "s=1.5 r=0 (Thm 4.1)\n");
  CHECK(dbclab("rates --omega1 3pi/2 --constrained --no-assumption").out == "s=0.5 log^(1/4) (Thm 5.3)\n");
  CHECK(dbclab("rates --omega1 3pi/2 --constrained --family superconvergent").out == "s=1.3333 r=0 (Thm 5.2)\n");
  CHECK(dbclab("rates --omega1 3pi/2 --special").out == "s=0.83333 r=0 (Thm 4.1, Rem 4.6)\n");

  r = dbclab("rates --table");
  CHECK(r.status == 0);
  CHECK(r.out.find("(Thm 4.1)") != std::string::npos);

  CHECK(dbclab("rates").status == 1);
  CHECK(dbclab("rates --omega1 7").status == 1);
  CHECK(dbclab("rates --omega1 three").status == 1);
  CHECK(dbclab("frobnicate").status == 1);
}

TEST_CASE("study usage errors") {
  CHECK(dbclab("study").status == 1);
  CHECK(dbclab("study --omega1 3pi/2 --levels 2").status == 1);
  CHECK(dbclab("study -c /nonexistent/config.json").status == 1);
}

TEST_CASE("study writes reports and is reproducible for a seed") {
  const auto d1 = scratch("seed1"), d2 = scratch("seed2");
  const std::string base = "study --omega1 3pi/2 --unconstrained --levels 4 --seed 7 --name s7 -q -o ";
  const auto a = dbclab(base + d1.string());
  const auto b = dbclab(base + d2.string());
  REQUIRE(a.status <= 2);
  CHECK(a.status == b.status);
  CHECK(a.out == b.out);
  for (const char* ext : {".csv", ".json", ".dat"}) {
    REQUIRE(fs::exists(d1 / ("s7" + std::string(ext))));
    CHECK(slurp(d1 / ("s7" + std::string(ext))) == slurp(d2 / ("s7" + std::string(ext))));
  }
  const auto j = nlohmann::json::parse(slurp(d1 / "s7.json"));
  CHECK(j["config"]["seed"] == 7);
  CHECK(j["levels"].size() == 4);
}

TEST_CASE("output directory from the environment") {
  const auto d = scratch("env");
  const auto r = dbclab("study --omega1 pi/2 --unconstrained --levels 3 --name envcase -q", "DBCLAB_OUT=" + d.string());
  CHECK(r.status <= 2);
  CHECK(fs::exists(d / "envcase.csv"));
}

TEST_CASE("mesh subcommand") {
  const auto d = scratch("mesh");
  auto r = dbclab("mesh --square --family superconvergent --levels 4 --export --out " + d.string());
  CHECK(r.status == 0);
  CHECK(r.out.find("false") == std::string::npos);
  for (int j = 0; j < 4; ++j) CHECK(fs::exists(d / ("mesh_level" + std::to_string(j) + ".txt")));

  r = dbclab("mesh --omega1 3pi/2 --family generic --levels 4");
  CHECK(r.out.find("false") != std::string::npos);
}

TEST_CASE("check subcommand") {
  auto r = dbclab("check");
  CHECK(r.out.find("PASS gradient-finite-differences") != std::string::npos);
  CHECK(r.out.find("PASS normal-derivative-identity") != std::string::npos);
  CHECK(r.out.find("corner-flattening") != std::string::npos);
  CHECK(r.status == (r.out.find("FAIL") == std::string::npos ? 0 : 2));

  r = dbclab("check --inject-sign-flip");
  CHECK(r.status == 2);
  CHECK(r.out.find("FAIL gradient-finite-differences") != std::string::npos);

  r = dbclab("check --quad-oracle");
  CHECK(r.out.find("projection-unconstrained") != std::string::npos);
  CHECK(r.out.find("target-load-constrained") != std::string::npos);
}

TEST_CASE("shipped configs parse and a short run of each is monotone") {
  const auto list = nlohmann::json::parse(slurp(configs + "/acceptance.json"));
  REQUIRE(list.size() == 8);
  const auto d = scratch("shipped");
  for (const auto& c : list) {
    const std::string name = c["name"];
    REQUIRE(fs::exists(configs + "/" + name + ".json"));
    const auto r = dbclab("study -c " + configs + "/" + name + ".json --levels 4 -q -o " + d.string());
    CHECK(r.status <= 2);
    const auto j = nlohmann::json::parse(slurp(d / (name + ".json")));
    double prev = INFINITY;
    for (const auto& l : j["levels"]) {
      const double e = l["error"];
      CHECK(e < prev);
      prev = e;
    }
  }
}
