#include <cctype>
#include <cmath>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

#include "dbc/errors.hpp"
#include "dbc/study.hpp"

namespace dbc {

double parse_angle(const std::string& text) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(static_cast<char>(std::tolower(c)));
  static const std::regex pi_form(R"(^([0-9]*\.?[0-9]*)\*?pi(/([0-9]*\.?[0-9]+))?$)");
  std::smatch mt;
  if (std::regex_match(t, mt, pi_form)) {
    const double num = mt[1].length() ? std::stod(mt[1]) : 1.0;
    const double den = mt[3].length() ? std::stod(mt[3]) : 1.0;
    if (den == 0.0) throw ParseError("angle '" + text + "' divides by zero");
    return num * std::numbers::pi / den;
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) throw ParseError("cannot parse angle '" + text + "'");
  return v;
}

namespace {

std::string epsilon_mode_name(EpsilonMode m) { return m == EpsilonMode::Mesh ? "mesh" : "absolute"; }

EpsilonMode epsilon_mode_from(const std::string& s) {
  if (s == "mesh") return EpsilonMode::Mesh;
  if (s == "absolute") return EpsilonMode::Absolute;
  throw ParseError("unknown epsilon_mode '" + s + "' (expected mesh|absolute)");
}

nlohmann::json number_or_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

double angle_from(const nlohmann::json& v) {
  if (v.is_string()) return parse_angle(v.get<std::string>());
  if (v.is_number()) return v.get<double>();
  throw ParseError("omega1 must be a number or an angle string");
}

}  // namespace

void StudyConfig::validate() const {
  auto fail = [](const std::string& what) { throw PreconditionError("study config: " + what); };
  if (!(omega1 >= std::numbers::pi / 3 - 1e-14 && omega1 < 2 * std::numbers::pi))
    throw OutOfRange("study config: omega1 outside [pi/3, 2pi)");
  if (levels < 3) fail("at least three levels are needed for EOCs");
  if (!(nu > 0.0)) fail("nu must be positive");
  if (!(tol > 0.0)) fail("tol must be positive");
  if (pdas_maxit < 1) fail("pdas_maxit must be positive");
  if (!(kappa >= 0.0 && kappa <= 0.3)) fail("kappa must lie in [0, 0.3]");
  if (coarse_refinements < 0 || coarse_refinements > 4) fail("coarse_refinements must lie in [0, 4]");
  if (!(epsilon_relative > 0.0) || !(epsilon_mesh_factor > 0.0)) fail("epsilon parameters must be positive");
  if (quad_order < 1 || boundary_quad_order < 1) fail("quadrature orders must be positive");
  if (lambda_choice == LambdaChoice::Special && !(omega1 > std::numbers::pi))
    fail("the special exponent needs omega1 > pi");
  if (band && !(band->first < band->second)) fail("band must be increasing");
}

nlohmann::json StudyConfig::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["omega1"] = omega1;
  j["lambda_choice"] = to_string(lambda_choice);
  j["constrained"] = constrained;
  j["family"] = to_string(family);
  j["levels"] = levels;
  j["nu"] = nu;
  j["a"] = number_or_null(a);
  j["b"] = number_or_null(b);
  j["tol"] = tol;
  j["pdas_maxit"] = pdas_maxit;
  j["kappa"] = kappa;
  j["seed"] = seed;
  j["coarse_refinements"] = coarse_refinements;
  j["epsilon_mode"] = epsilon_mode_name(epsilon_mode);
  j["epsilon_relative"] = epsilon_relative;
  j["epsilon_mesh_factor"] = epsilon_mesh_factor;
  j["quad_order"] = quad_order;
  j["boundary_quad_order"] = boundary_quad_order;
  j["nodal_target"] = nodal_target;
  j["assumption"] = assumption;
  j["band"] = band ? nlohmann::json::array({band->first, band->second}) : nlohmann::json(nullptr);
  j["record_timings"] = record_timings;
  return j;
}

StudyConfig StudyConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("study config must be a JSON object");
  static const std::set<std::string> known{
      "name", "omega1", "lambda_choice", "constrained", "family", "levels", "nu", "a", "b", "tol",
      "pdas_maxit", "kappa", "seed", "coarse_refinements", "epsilon_mode", "epsilon_relative",
      "epsilon_mesh_factor", "quad_order", "boundary_quad_order", "nodal_target", "assumption", "band",
      "record_timings"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ParseError("unknown study config key '" + key + "'");

  StudyConfig c;
  try {
    if (j.contains("name")) c.name = j["name"].get<std::string>();
    if (j.contains("omega1")) c.omega1 = angle_from(j["omega1"]);
    if (j.contains("lambda_choice")) c.lambda_choice = lambda_choice_from_string(j["lambda_choice"]);
    if (j.contains("constrained")) c.constrained = j["constrained"].get<bool>();
    if (j.contains("family")) c.family = family_kind_from_string(j["family"]);
    if (j.contains("levels")) c.levels = j["levels"].get<int>();
    if (j.contains("nu")) c.nu = j["nu"].get<double>();
    if (j.contains("a")) c.a = j["a"].is_null() ? std::nan("") : j["a"].get<double>();
    if (j.contains("b")) c.b = j["b"].is_null() ? std::nan("") : j["b"].get<double>();
    if (j.contains("tol")) c.tol = j["tol"].get<double>();
    if (j.contains("pdas_maxit")) c.pdas_maxit = j["pdas_maxit"].get<int>();
    if (j.contains("kappa")) c.kappa = j["kappa"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("coarse_refinements")) c.coarse_refinements = j["coarse_refinements"].get<int>();
    if (j.contains("epsilon_mode")) c.epsilon_mode = epsilon_mode_from(j["epsilon_mode"]);
    if (j.contains("epsilon_relative")) c.epsilon_relative = j["epsilon_relative"].get<double>();
    if (j.contains("epsilon_mesh_factor")) c.epsilon_mesh_factor = j["epsilon_mesh_factor"].get<double>();
    if (j.contains("quad_order")) c.quad_order = j["quad_order"].get<int>();
    if (j.contains("boundary_quad_order")) c.boundary_quad_order = j["boundary_quad_order"].get<int>();
    if (j.contains("nodal_target")) c.nodal_target = j["nodal_target"].get<bool>();
    if (j.contains("assumption")) c.assumption = j["assumption"].get<bool>();
    if (j.contains("band") && !j["band"].is_null()) {
      const auto& bd = j["band"];
      if (!bd.is_array() || bd.size() != 2) throw ParseError("band must be a two-element array");
      c.band = std::pair{bd[0].get<double>(), bd[1].get<double>()};
    }
    if (j.contains("record_timings")) c.record_timings = j["record_timings"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("study config: ") + e.what());
  }
  return c;
}

ManufacturedSpec StudyConfig::manufactured_spec() const {
  ManufacturedSpec ms;
  ms.omega1 = omega1;
  ms.lambda_choice = lambda_choice;
  ms.constrained = constrained;
  ms.nu = nu;
  ms.a = a;
  ms.b = b;
  ms.epsilon_relative = epsilon_relative;
  return ms;
}

}  // namespace dbc
