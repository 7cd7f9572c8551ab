#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dbc {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured quantity
  double threshold = 0.0;  // what it is compared against
  std::string detail;
};

struct CheckOptions {
  double omega1 = 0.0;  // 0 selects 3pi/2
  int level = 2;        // mesh level of the coarse case
  int flattening_level = 4;
  std::uint64_t seed = 12345;
  bool quad_oracle = false;
  /// Mutation hook: flips the sign of the discrete normal derivative in the gradient.
  bool flip_normal_derivative = false;
};

/// Runs the fast invariant suite on a coarse manufactured case.
std::vector<CheckResult> run_property_checks(const CheckOptions& opts);

/// Order-5 against order-9 quadrature for the data of the coarse case.
std::vector<CheckResult> quadrature_oracle_report(const CheckOptions& opts);

}  // namespace dbc
