#pragma once

#include <array>
#include <vector>

namespace dbc {

/// Quadrature on a reference element.
///
/// Triangle rules live on {(x,y): x,y >= 0, x+y <= 1} with weights summing to
/// 1/2; edge rules live on [0,1] with weights summing to 1. `order` is the
/// polynomial degree integrated exactly.
struct QuadratureRule {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
  int order = 0;

  std::size_t size() const { return weights.size(); }
};

/// Order 5 is the 7-point symmetric rule; other orders use a collapsed
/// Gauss-Legendre product rule.
const QuadratureRule& triangle_rule(int order);

/// Gauss-Legendre with ceil((order+1)/2) points (points[i][1] is unused).
const QuadratureRule& edge_rule(int order);

}  // namespace dbc
