#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"

#include "dbc/errors.hpp"
#include "dbc/study.hpp"

using namespace dbc;

namespace {

constexpr double pi = std::numbers::pi;

RateQuery query(double omega1, bool constrained, bool special, MeshFamilyKind fam, bool assumption = true) {
  StudyConfig c;
  c.omega1 = omega1;
  c.constrained = constrained;
  c.lambda_choice = special ? LambdaChoice::Special : LambdaChoice::Leading;
  c.family = fam;
  c.assumption = assumption;
  return rate_query(c);
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("dbc_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

EOCReport synthetic(const std::vector<double>& errors) {
  EOCReport r;
  r.config.omega1 = pi / 2;
  r.rate = theoretical_rate(rate_query(r.config));
  double h = 0.5;
  int level = 1;
  for (double e : errors) {
    LevelRecord l;
    l.level = level++;
    l.h = h;
    l.error = e;
    r.levels.push_back(l);
    h /= 2;
  }
  finalize_report(r);
  return r;
}

}  // namespace

TEST_CASE("angle parsing") {
  CHECK(parse_angle("3pi/2") == doctest::Approx(1.5 * pi));
  CHECK(parse_angle("pi") == doctest::Approx(pi));
  CHECK(parse_angle("0.75pi") == doctest::Approx(0.75 * pi));
  CHECK(parse_angle("3*pi/4") == doctest::Approx(0.75 * pi));
  CHECK(parse_angle("4.712388980384690") == doctest::Approx(1.5 * pi));
  CHECK_THROWS_AS(parse_angle("three"), ParseError);
  CHECK_THROWS_AS(parse_angle("pi/0"), ParseError);
}

TEST_CASE("study config JSON") {
  StudyConfig c;
  c.name = "x";
  c.omega1 = 1.5 * pi;
  c.constrained = true;
  c.family = MeshFamilyKind::Superconvergent;
  c.band = std::pair{0.5, 0.9};
  c.seed = 42;
  const auto back = StudyConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.omega1 == c.omega1);

  const auto parsed = StudyConfig::from_json(nlohmann::json::parse(R"({"omega1": "3pi/2", "levels": 4})"));
  CHECK(parsed.omega1 == doctest::Approx(1.5 * pi));
  CHECK(parsed.levels == 4);
  CHECK(parsed.nu == 1.0);
  CHECK_THROWS_AS(StudyConfig::from_json(nlohmann::json::parse(R"({"omega": 1})")), ParseError);
  CHECK_THROWS_AS(StudyConfig::from_json(nlohmann::json::parse(R"({"levels": "six"})")), ParseError);
  CHECK_THROWS_AS(StudyConfig::from_json(nlohmann::json::parse(R"({"band": [1]})")), ParseError);

  StudyConfig bad = parsed;
  bad.levels = 2;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  bad = parsed;
  bad.omega1 = 2 * pi;
  CHECK_THROWS_AS(bad.validate(), OutOfRange);
}

TEST_CASE("theoretical rates for the reference cases") {
  const auto unc = theoretical_rate(query(1.5 * pi, false, false, MeshFamilyKind::Generic));
  CHECK(unc.s == doctest::Approx(1.0 / 6.0));
  CHECK(unc.r == 0);
  CHECK(unc.describe() == "s=0.16667 r=0 (Thm 4.1)");

  const auto convex_sc = theoretical_rate(query(pi / 2, false, false, MeshFamilyKind::Superconvergent));
  CHECK(convex_sc.s == doctest::Approx(1.5));
  CHECK(convex_sc.r == 0);
  CHECK(convex_sc.lambda == doctest::Approx(2.0));

  const auto convex = theoretical_rate(query(pi / 2, false, false, MeshFamilyKind::Generic));
  CHECK(convex.s == doctest::Approx(1.0));
  CHECK(convex.r == 1);

  const auto special = theoretical_rate(query(1.5 * pi, false, true, MeshFamilyKind::Generic));
  CHECK(special.s == doctest::Approx(5.0 / 6.0));
  CHECK(special.source == "Thm 4.1, Rem 4.6");
  CHECK(theoretical_rate(query(1.5 * pi, false, true, MeshFamilyKind::Superconvergent)).s == doctest::Approx(5.0 / 6.0));

  const auto con = theoretical_rate(query(1.5 * pi, true, false, MeshFamilyKind::Generic));
  CHECK(con.s == doctest::Approx(1.0));
  CHECK(con.r == 1);
  CHECK(con.big_lambda == doctest::Approx(2.0));
  CHECK(con.source == "Thm 5.2");
  CHECK(theoretical_rate(query(1.5 * pi, true, false, MeshFamilyKind::Superconvergent)).s == doctest::Approx(4.0 / 3.0));

  const auto con_special = theoretical_rate(query(1.5 * pi, true, true, MeshFamilyKind::Generic));
  CHECK(con_special.s == doctest::Approx(5.0 / 6.0));
  CHECK(con_special.r == 0);
  CHECK(con_special.big_lambda == doctest::Approx(4.0 / 3.0));

  const auto floor = theoretical_rate(query(1.5 * pi, true, false, MeshFamilyKind::Generic, false));
  CHECK(floor.s == 0.5);
  CHECK(floor.log_quarter);
  CHECK(floor.describe() == "s=0.5 log^(1/4) (Thm 5.3)");

  CHECK(theoretical_rate(query(pi / 2, true, false, MeshFamilyKind::Generic)).source == "Thm 5.1");

  RateQuery bad;
  bad.angles = {2 * pi};
  CHECK_THROWS_AS(theoretical_rate(bad), OutOfRange);
}

TEST_CASE("rate table is total on the angle grid") {
  for (int k = 0; k < 50; ++k) {
    const double w = pi / 3 + k * (2 * pi - pi / 3) / 50;
    for (bool constrained : {false, true})
      for (bool special : {false, true})
        for (auto fam : {MeshFamilyKind::Generic, MeshFamilyKind::Superconvergent})
          for (bool assumption : {false, true}) {
            if (special && w <= pi) continue;
            const auto r = theoretical_rate(query(w, constrained, special, fam, assumption));
            CHECK(r.s > 0.0);
            CHECK((r.r == 0 || r.r == 1));
          }
  }
}

TEST_CASE("EOC arithmetic") {
  const auto e1 = compute_eocs({0.02, 0.01, 0.005});
  CHECK(std::isnan(e1[0]));
  CHECK(e1[1] == 1.0);
  CHECK(e1[2] == 1.0);
  CHECK(compute_eocs({0.1, 0.1})[1] == 0.0);
  for (double s : {0.16, 0.5, 1.0, 4.0 / 3.0})
    for (double c : {1e-3, 1.0, 37.0}) {
      std::vector<double> e, h;
      for (int j = 0; j < 6; ++j) {
        e.push_back(c * std::pow(2.0, -j * s));
        h.push_back(std::pow(2.0, -j));
      }
      const auto eoc = compute_eocs(e);
      for (int j = 1; j < 6; ++j) CHECK(std::abs(eoc[j] - s) <= 1e-12);
      CHECK(std::abs(lsq_slope(h, e) - s) <= 1e-12);
    }
}

TEST_CASE("verdicts and bands") {
  auto r = synthetic({0.1, 0.05, 0.025});
  CHECK(r.headline_eoc == 1.0);
  CHECK(r.band.first == doctest::Approx(1.0 - 0.15 - 0.05));
  CHECK(r.band.second == doctest::Approx(1.17));
  CHECK(r.verdict);
  CHECK(r.verdict_text.find("PASS") != std::string::npos);
  r = synthetic({0.1, 0.05, 0.04});
  CHECK_FALSE(r.verdict);

  EOCReport floor;
  floor.config.omega1 = 1.5 * pi;
  floor.config.constrained = true;
  floor.config.assumption = false;
  floor.rate = theoretical_rate(rate_query(floor.config));
  for (double e : {1.0, 0.5, 0.36, 0.25}) floor.levels.push_back({.error = e});
  for (std::size_t j = 0; j < floor.levels.size(); ++j) floor.levels[j].h = std::pow(0.5, j);
  finalize_report(floor);
  CHECK(floor.verdict);
  floor.levels[3].error = 0.3;
  finalize_report(floor);
  CHECK_FALSE(floor.verdict);
}

TEST_CASE("report files") {
  StudyConfig c;
  c.name = "convex_sc";
  c.omega1 = pi / 2;
  c.family = MeshFamilyKind::Superconvergent;
  c.levels = 4;
  const EOCReport r = run_study(c);
  for (std::size_t j = 1; j < r.levels.size(); ++j) CHECK(r.levels[j].error < r.levels[j - 1].error);
  const auto dir = scratch_dir("report");
  emit_report(r, dir.string(), c.name);

  SUBCASE("CSV parses back exactly") {
    std::ifstream is(dir / "convex_sc.csv");
    std::string line;
    std::getline(is, line);
    CHECK(line == "level,h,dofs,bdofs,error,eoc,toc_s,toc_r,iters,seconds");
    for (const auto& l : r.levels) {
      REQUIRE(std::getline(is, line));
      const auto f = split(line, ',');
      REQUIRE(f.size() == 10);
      CHECK(std::stoi(f[0]) == l.level);
      CHECK(parse_double(f[1]) == l.h);
      CHECK(std::stoi(f[2]) == l.dofs);
      CHECK(std::stoi(f[3]) == l.bdofs);
      CHECK(parse_double(f[4]) == l.error);
      if (l.level > 1) CHECK(parse_double(f[5]) == l.eoc);
      CHECK(parse_double(f[6]) == r.rate.s);
      CHECK(parse_double(f[9]) == 0.0);
    }
  }
  SUBCASE("JSON echoes the config") {
    std::ifstream is(dir / "convex_sc.json");
    const auto j = nlohmann::json::parse(is);
    CHECK(j["config"] == c.to_json());
    CHECK(StudyConfig::from_json(j["config"]).to_json() == c.to_json());
    CHECK(j["levels"].size() == r.levels.size());
  }
  SUBCASE("plot data slope agrees with the headline") {
    std::ifstream is(dir / "convex_sc.dat");
    std::string line;
    std::getline(is, line);
    CHECK(line == "# log10(h) log10(error)");
    std::vector<double> x, y;
    for (double a, b; is >> a >> b;) {
      x.push_back(a);
      y.push_back(b);
    }
    REQUIRE(x.size() == r.levels.size());
    const std::size_t n = 3, first = x.size() - n;
    double mx = 0, my = 0;
    for (std::size_t i = first; i < x.size(); ++i) {
      mx += x[i] / n;
      my += y[i] / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = first; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    CHECK(std::abs(sxy / sxx - r.headline_eoc) <= 0.05);
    CHECK(std::abs(sxy / sxx - r.lsq_slope) <= 1e-9);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("report writing fails cleanly on an unusable directory") {
  const auto file = std::filesystem::temp_directory_path() / "dbc_test_not_a_dir";
  std::ofstream(file) << "x";
  CHECK_THROWS_AS(emit_report(synthetic({0.1, 0.05, 0.025}), file.string(), "r"), IOFailure);
  std::filesystem::remove(file);
}

TEST_CASE("levels are reproducible to the bit") {
  StudyConfig c;
  c.omega1 = 1.5 * pi;
  c.constrained = true;
  const ManufacturedProblem mp(c.manufactured_spec());
  const auto fam = build_family(mp.polygon(), MeshFamilyKind::Generic, 3);
  const auto a = run_level(c, mp, fam[2], 3);
  const auto b = run_level(c, mp, fam[2], 3);
  CHECK(a.record.error == b.record.error);
  CHECK(a.solution.u.values == b.solution.u.values);
  CHECK(a.record.error > 0.0);
  CHECK(a.record.seconds == 0.0);
}

TEST_CASE("zero target gives the interpolant norm as the error") {
  StudyConfig c;
  c.omega1 = 1.5 * pi;
  c.constrained = true;
  const ManufacturedProblem mp(c.manufactured_spec());
  const auto fam = build_family(mp.polygon(), MeshFamilyKind::Generic, 2);
  auto space = std::make_shared<const P1Space>(std::make_shared<const Mesh>(fam[1]));
  ControlProblem p;
  p.space = space;
  p.a = mp.a();
  p.b = mp.b();
  const auto s = solve(ReducedProblem(p));
  CHECK(s.u.values.cwiseAbs().maxCoeff() == 0.0);
  const auto ih = interpolate_control(mp, fam[1]);
  CHECK(space->l2_norm_boundary(TraceFunction{s.u.values - ih.values}) == space->l2_norm_boundary(ih));
}

TEST_CASE("corner flattening report") {
  StudyConfig c;
  c.omega1 = 1.5 * pi;
  c.constrained = true;
  const ManufacturedProblem mp(c.manufactured_spec());
  const auto fam = build_family(mp.polygon(), MeshFamilyKind::Generic, 4);
  const auto out = run_level(c, mp, fam[3], 4);
  const ControlProblem cp = make_control_problem(mp, out.space, build_y_omega(mp, *out.space));
  const auto rep = corner_flattening_report(out.solution, cp, fam[3], 0, 0.1);
  CHECK(rep.nodes > 0);
  CHECK(rep.bound == "lower");
  CHECK(rep.fraction > 0.5);
  CHECK(rep.clamped_radius > 0.05);

  ControlProblem unc = cp;
  unc.a = -kInf;
  unc.b = kInf;
  CHECK_THROWS_AS(corner_flattening_report(out.solution, unc, fam[3], 0, 0.1), PreconditionError);
}
