#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "dbc/checks.hpp"
#include "dbc/errors.hpp"
#include "dbc/study.hpp"

namespace {

using namespace dbc;

constexpr int kPass = 0;
constexpr int kError = 1;
constexpr int kFail = 2;

std::string output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("DBCLAB_OUT"); env && *env) return env;
  return "dbclab-out";
}

struct StudyArgs {
  std::vector<std::string> configs;
  std::string name;
  std::string omega1;
  std::string lambda;
  bool constrained = false;
  bool unconstrained = false;
  std::string family;
  std::optional<int> levels;
  std::optional<double> nu, a, b, kappa, tol, epsilon;
  std::optional<std::uint64_t> seed;
  std::optional<int> coarse;
  bool no_assumption = false;
  bool timings = false;
  int jobs = 1;
  std::string out;
  bool quiet = false;
};

std::vector<StudyConfig> load_configs(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IOFailure("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  std::vector<StudyConfig> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(StudyConfig::from_json(item));
  } else {
    out.push_back(StudyConfig::from_json(j));
  }
  return out;
}

void apply_flags(StudyConfig& c, const StudyArgs& f) {
  if (!f.name.empty()) c.name = f.name;
  if (!f.omega1.empty()) c.omega1 = parse_angle(f.omega1);
  if (!f.lambda.empty()) c.lambda_choice = lambda_choice_from_string(f.lambda);
  if (f.constrained) c.constrained = true;
  if (f.unconstrained) c.constrained = false;
  if (!f.family.empty()) c.family = family_kind_from_string(f.family);
  if (f.levels) c.levels = *f.levels;
  if (f.nu) c.nu = *f.nu;
  if (f.a) c.a = *f.a;
  if (f.b) c.b = *f.b;
  if (f.kappa) c.kappa = *f.kappa;
  if (f.tol) c.tol = *f.tol;
  if (f.seed) c.seed = *f.seed;
  if (f.coarse) c.coarse_refinements = *f.coarse;
  if (f.epsilon) {
    c.epsilon_mode = EpsilonMode::Absolute;
    c.epsilon_relative = *f.epsilon;
  }
  if (f.no_assumption) c.assumption = false;
  if (f.timings) c.record_timings = true;
}

int cmd_study(const StudyArgs& f, const CLI::App& app) {
  std::vector<StudyConfig> cases;
  for (const auto& path : f.configs) {
    auto loaded = load_configs(path);
    cases.insert(cases.end(), loaded.begin(), loaded.end());
  }
  if (cases.empty()) {
    if (f.omega1.empty()) {
      std::cerr << "study: give --config or at least --omega1\n" << app.help();
      return kError;
    }
    cases.emplace_back();
  }
  for (auto& c : cases) {
    apply_flags(c, f);
    c.validate();
  }
  const std::string dir = output_dir(f.out);

  std::vector<std::optional<EOCReport>> reports(cases.size());
  std::vector<std::string> errors(cases.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      try {
        reports[i] = run_study(cases[i]);
        emit_report(*reports[i], dir, cases[i].name);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(f.jobs, static_cast<int>(cases.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kPass;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (!errors[i].empty()) {
      std::cerr << cases[i].name << ": error: " << errors[i] << "\n";
      code = kError;
      continue;
    }
    const EOCReport& r = *reports[i];
    if (!f.quiet) {
      std::cout << "# " << r.config.name << "\n# level h error eoc iters\n";
      for (const auto& l : r.levels)
        std::cout << "  " << l.level << " " << l.h << " " << l.error << " " << l.eoc << " " << l.iterations
                  << "\n";
    }
    std::cout << r.verdict_text << "\n";
    if (!r.verdict && code == kPass) code = kFail;
  }
  return code;
}

struct RatesArgs {
  std::string omega1;
  bool constrained = false;
  bool unconstrained = false;
  bool special = false;
  bool no_assumption = false;
  std::string family = "generic";
  bool table = false;
};

std::string rate_cell(RateQuery q) {
  try {
    return theoretical_rate(q).describe();
  } catch (const UnsupportedRegime&) {
    return "n/a";
  }
}

int cmd_rates(const RatesArgs& f, const CLI::App& app) {
  if (f.table) {
    std::cout << "omega1/pi lambda1 | unconstrained generic | unconstrained superconvergent | constrained "
                 "generic | constrained superconvergent\n";
    for (int k = 4; k < 24; ++k) {
      const double w = k * std::numbers::pi / 12;
      StudyConfig c;
      c.omega1 = w;
      RateQuery q = rate_query(c);
      std::ostringstream row;
      row << std::setprecision(5) << k / 12.0 << " " << std::numbers::pi / w;
      for (bool constrained : {false, true}) {
        for (auto fam : {MeshFamilyKind::Generic, MeshFamilyKind::Superconvergent}) {
          q.constrained = constrained;
          q.family = fam;
          row << " | " << rate_cell(q);
        }
      }
      std::cout << row.str() << "\n";
    }
    return kPass;
  }
  if (f.omega1.empty()) {
    std::cerr << "rates: --omega1 is required without --table\n" << app.help();
    return kError;
  }
  StudyConfig c;
  c.omega1 = parse_angle(f.omega1);
  c.lambda_choice = f.special ? LambdaChoice::Special : LambdaChoice::Leading;
  c.constrained = f.constrained && !f.unconstrained;
  c.family = family_kind_from_string(f.family);
  c.assumption = !f.no_assumption;
  std::cout << theoretical_rate(rate_query(c)).describe() << "\n";
  return kPass;
}

struct MeshArgs {
  std::string omega1;
  bool square = false;
  std::string family = "generic";
  int levels = 4;
  double kappa = 0.2;
  std::uint64_t seed = 1;
  int coarse = 2;
  bool export_files = false;
  std::string out;
};

int cmd_mesh(const MeshArgs& f, const CLI::App& app) {
  PolygonSpec poly;
  if (f.square) {
    poly = make_polygon({Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)});
  } else if (!f.omega1.empty()) {
    poly = build_sector_domain(parse_angle(f.omega1));
  } else {
    std::cerr << "mesh: give --omega1 or --square\n" << app.help();
    return kError;
  }
  FamilyOptions fo;
  fo.kappa = f.kappa;
  fo.seed = f.seed;
  fo.coarse_refinements = f.coarse;
  const auto family = build_family(poly, family_kind_from_string(f.family), f.levels, fo);
  const std::string dir = output_dir(f.out);
  if (f.export_files) std::filesystem::create_directories(dir);
  std::cout << "level vertices triangles h shape max_discrepancy ratio e2_fraction boundary_violations verdict\n";
  for (std::size_t j = 0; j < family.size(); ++j) {
    const Mesh& m = family[j];
    const auto rep = check_h2_irregular(m);
    std::cout << j << " " << m.num_vertices() << " " << m.num_triangles() << " " << m.h << " "
              << m.shape_constant() << " " << rep.max_interior_discrepancy << " " << rep.discrepancy_ratio << " "
              << rep.e2_area_fraction << " " << rep.boundary_vertex_violations << " "
              << (rep.verdict ? "true" : "false") << "\n";
    if (f.export_files) {
      const std::string path = (std::filesystem::path(dir) / ("mesh_level" + std::to_string(j) + ".txt")).string();
      write_mesh_file(path, m);
      std::ostringstream a, b;
      write_mesh(a, m);
      write_mesh(b, read_mesh_file(path));
      if (a.str() != b.str()) throw IOFailure("mesh file " + path + " does not read back identically");
    }
  }
  return kPass;
}

int cmd_check(CheckOptions opts, const std::string& omega1) {
  if (!omega1.empty()) opts.omega1 = parse_angle(omega1);
  int code = kPass;
  for (const auto& r : run_property_checks(opts)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " value=" << r.value << " threshold=" << r.threshold;
    if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
    std::cout << "\n";
    if (!r.passed) code = kFail;
  }
  if (opts.quad_oracle) {
    std::cout << "# order-5 against order-9 quadrature\n";
    for (const auto& r : quadrature_oracle_report(opts))
      std::cout << r.name << " " << r.value << " (" << r.detail << ")\n";
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet boundary control finite element lab"};
  app.require_subcommand(1);

  StudyArgs sa;
  auto* study = app.add_subcommand("study", "run convergence studies and write reports");
  study->add_option("--config,-c", sa.configs, "JSON config file (object or array of objects)");
  study->add_option("--name", sa.name, "case name, also the report file stem");
  study->add_option("--omega1", sa.omega1, "angle at the origin, radians or e.g. 3pi/2");
  study->add_option("--lambda", sa.lambda, "leading|special");
  study->add_flag("--constrained", sa.constrained);
  study->add_flag("--unconstrained", sa.unconstrained);
  study->add_option("--family", sa.family, "generic|superconvergent");
  study->add_option("--levels", sa.levels);
  study->add_option("--nu", sa.nu);
  study->add_option("--a", sa.a, "lower bound");
  study->add_option("--b", sa.b, "upper bound");
  study->add_option("--kappa", sa.kappa, "perturbation size of the generic family");
  study->add_option("--tol", sa.tol);
  study->add_option("--seed", sa.seed);
  study->add_option("--coarse-refinements", sa.coarse);
  study->add_option("--epsilon", sa.epsilon, "fixed corner regularization relative to diam");
  study->add_flag("--no-assumption", sa.no_assumption);
  study->add_flag("--timings", sa.timings, "record wall times (reports are then not reproducible)");
  study->add_option("--jobs,-j", sa.jobs, "cases run concurrently")->check(CLI::PositiveNumber);
  study->add_option("--out,-o", sa.out, "output directory (default $DBCLAB_OUT or dbclab-out)");
  study->add_flag("--quiet,-q", sa.quiet, "print only the verdict lines");

  RatesArgs ra;
  auto* rates = app.add_subcommand("rates", "print theoretical convergence rates");
  rates->add_option("--omega1", ra.omega1);
  rates->add_flag("--constrained", ra.constrained);
  rates->add_flag("--unconstrained", ra.unconstrained);
  rates->add_flag("--special", ra.special, "leading coefficient at the origin vanishes");
  rates->add_flag("--no-assumption", ra.no_assumption);
  rates->add_option("--family", ra.family);
  rates->add_flag("--table", ra.table, "rates over a grid of angles");

  MeshArgs ma;
  auto* mesh = app.add_subcommand("mesh", "build a mesh family and print irregularity diagnostics");
  mesh->add_option("--omega1", ma.omega1);
  mesh->add_flag("--square", ma.square, "unit square instead of the sector domain");
  mesh->add_option("--family", ma.family);
  mesh->add_option("--levels", ma.levels)->check(CLI::PositiveNumber);
  mesh->add_option("--kappa", ma.kappa);
  mesh->add_option("--seed", ma.seed);
  mesh->add_option("--coarse-refinements", ma.coarse);
  mesh->add_flag("--export", ma.export_files, "write mesh_level<j>.txt files");
  mesh->add_option("--out,-o", ma.out);

  CheckOptions co;
  std::string check_omega;
  auto* check = app.add_subcommand("check", "run the property suite on a coarse case");
  check->add_option("--omega1", check_omega);
  check->add_option("--level", co.level);
  check->add_option("--flattening-level", co.flattening_level);
  check->add_option("--seed", co.seed);
  check->add_flag("--quad-oracle", co.quad_oracle);
  check->add_flag("--inject-sign-flip", co.flip_normal_derivative)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  try {
    if (*study) return cmd_study(sa, *study);
    if (*rates) return cmd_rates(ra, *rates);
    if (*mesh) return cmd_mesh(ma, *mesh);
    if (*check) return cmd_check(co, check_omega);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
