#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dbc/control.hpp"
#include "dbc/manufactured.hpp"
#include "dbc/mesh.hpp"

namespace dbc {

/// Parses "3pi/2", "pi", "0.75pi", "3*pi/4" or a plain decimal.
double parse_angle(const std::string& text);

enum class EpsilonMode {
  Mesh,      // epsilon_j = epsilon_mesh_factor * h_j
  Absolute,  // epsilon = epsilon_relative * diam(Omega) on every level
};

struct StudyConfig {
  std::string name = "study";
  double omega1 = 0.0;
  LambdaChoice lambda_choice = LambdaChoice::Leading;
  bool constrained = false;
  MeshFamilyKind family = MeshFamilyKind::Generic;
  int levels = 6;
  double nu = 1.0;
  double a = std::numeric_limits<double>::quiet_NaN();  // NaN: -1/lambda_1
  double b = std::numeric_limits<double>::quiet_NaN();  // NaN: 1
  double tol = 1e-11;
  int pdas_maxit = 30;
  double kappa = 0.2;
  std::uint64_t seed = 1;
  int coarse_refinements = 2;
  EpsilonMode epsilon_mode = EpsilonMode::Mesh;
  double epsilon_relative = 1e-6;
  double epsilon_mesh_factor = 0.25;
  int quad_order = 5;
  int boundary_quad_order = 5;
  bool nodal_target = false;
  bool assumption = true;
  /// Acceptance band for the headline EOC; unset means the default band around s.
  std::optional<std::pair<double, double>> band;
  bool record_timings = false;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys raise ParseError.
  static StudyConfig from_json(const nlohmann::json& j);
  ManufacturedSpec manufactured_spec() const;
};

struct RateQuery {
  std::vector<double> angles;
  bool constrained = false;
  std::vector<char> special;  // per corner: leading coefficient vanishes by construction
  MeshFamilyKind family = MeshFamilyKind::Generic;
  bool assumption = true;
};

struct TheoreticalRate {
  double s = 0.0;
  int r = 0;
  bool log_quarter = false;  // h^{1/2} |log h|^{1/4}
  std::string source;
  double lambda = 0.0;
  double big_lambda = 0.0;

  /// e.g. "s=0.16667 r=0 (Thm 4.1)"
  std::string describe() const;
};

TheoreticalRate theoretical_rate(const RateQuery& q);
RateQuery rate_query(const StudyConfig& cfg);

struct LevelRecord {
  int level = 0;
  double h = 0.0;
  int dofs = 0;
  int bdofs = 0;
  double error = 0.0;
  double eoc = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  int cg_iterations = 0;
  double residual = 0.0;
  double vi_violation = 0.0;
  double epsilon = 0.0;
  double seconds = 0.0;
};

struct EOCReport {
  StudyConfig config;
  std::vector<LevelRecord> levels;
  double headline_eoc = 0.0;
  double lsq_slope = 0.0;  // last three levels
  TheoreticalRate rate;
  std::pair<double, double> band{0.0, 0.0};
  bool verdict = false;
  std::string verdict_text;
};

/// EOC_j = log2(e_{j-1} / e_j) for j >= 1 (entry 0 is NaN).
std::vector<double> compute_eocs(const std::vector<double>& errors);
/// Least-squares slope of -log2 e against log2(1/h) over the last `count` levels.
double lsq_slope(const std::vector<double>& h, const std::vector<double>& errors, int count = 3);
std::pair<double, double> default_band(const TheoreticalRate& rate);

struct LevelOutcome {
  LevelRecord record;
  ControlSolution solution;
  std::shared_ptr<const P1Space> space;
};

LevelOutcome run_level(const StudyConfig& cfg, const ManufacturedProblem& mp, const Mesh& m, int level);
EOCReport run_study(const StudyConfig& cfg);
/// Fills EOCs, headline, slope, band and verdict from the level errors.
void finalize_report(EOCReport& report);

struct FlatteningReport {
  int nodes = 0;
  int at_bound = 0;
  double fraction = 0.0;
  std::string bound;  // "lower", "upper", "mixed" or "none"
  double clamped_radius = 0.0;
};

/// Boundary nodes within rho of corner j. Requires finite bounds.
FlatteningReport corner_flattening_report(const ControlSolution& s, const ControlProblem& p, const Mesh& m,
                                          int corner, double rho);

/// Writes <dir>/<stem>.csv, .json and .dat atomically. Throws IOFailure.
void emit_report(const EOCReport& r, const std::string& dir, const std::string& stem);
std::string report_csv(const EOCReport& r);
nlohmann::json report_json(const EOCReport& r);

}  // namespace dbc
