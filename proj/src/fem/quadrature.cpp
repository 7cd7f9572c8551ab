#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "dbc/errors.hpp"
#include "dbc/quadrature.hpp"

namespace dbc {

namespace {

struct Gauss01 {
  std::vector<double> x, w;
};

template <unsigned N>
Gauss01 gauss_fixed() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& wt = G::weights();
  Gauss01 g;
  // boost stores the non-negative half of the symmetric rule on [-1,1]
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      g.x.push_back(0.5);
      g.w.push_back(0.5 * wt[i]);
      continue;
    }
    g.x.push_back(0.5 * (1.0 - a[i]));
    g.w.push_back(0.5 * wt[i]);
    g.x.push_back(0.5 * (1.0 + a[i]));
    g.w.push_back(0.5 * wt[i]);
  }
  return g;
}

Gauss01 gauss01(int n) {
  switch (n) {
    case 1: return gauss_fixed<1>();
    case 2: return gauss_fixed<2>();
    case 3: return gauss_fixed<3>();
    case 4: return gauss_fixed<4>();
    case 5: return gauss_fixed<5>();
    case 6: return gauss_fixed<6>();
    case 7: return gauss_fixed<7>();
    case 8: return gauss_fixed<8>();
    case 9: return gauss_fixed<9>();
    case 10: return gauss_fixed<10>();
    case 11: return gauss_fixed<11>();
    case 12: return gauss_fixed<12>();
    default: break;
  }
  std::ostringstream msg;
  msg << "no Gauss-Legendre rule with " << n << " points";
  throw QuadratureFailure(msg.str());
}

QuadratureRule seven_point() {
  const double s15 = std::sqrt(15.0);
  const double a = (6.0 - s15) / 21.0, wa = (155.0 - s15) / 2400.0;
  const double b = (6.0 + s15) / 21.0, wb = (155.0 + s15) / 2400.0;
  QuadratureRule q;
  q.order = 5;
  q.points = {{1.0 / 3.0, 1.0 / 3.0}, {a, a}, {1.0 - 2.0 * a, a}, {a, 1.0 - 2.0 * a},
              {b, b}, {1.0 - 2.0 * b, b}, {b, 1.0 - 2.0 * b}};
  q.weights = {9.0 / 80.0, wa, wa, wa, wb, wb, wb};
  return q;
}

// Duffy collapse of the square onto the triangle; the Jacobian adds one degree in s.
QuadratureRule collapsed(int order) {
  const auto gs = gauss01((order + 3) / 2);
  const auto gt = gauss01((order + 2) / 2);
  QuadratureRule q;
  q.order = order;
  for (std::size_t i = 0; i < gs.x.size(); ++i) {
    for (std::size_t j = 0; j < gt.x.size(); ++j) {
      const double s = gs.x[i], t = gt.x[j];
      q.points.push_back({s, (1.0 - s) * t});
      q.weights.push_back(gs.w[i] * gt.w[j] * (1.0 - s));
    }
  }
  return q;
}

QuadratureRule gauss_edge(int order) {
  const auto g = gauss01((order + 2) / 2);
  QuadratureRule q;
  q.order = order;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    q.points.push_back({g.x[i], 0.0});
    q.weights.push_back(g.w[i]);
  }
  return q;
}

template <class Make>
const QuadratureRule& cached(std::map<int, QuadratureRule>& cache, int order, Make make) {
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, make(order)).first;
  return it->second;
}

}  // namespace

const QuadratureRule& triangle_rule(int order) {
  static std::map<int, QuadratureRule> cache;
  if (order < 1) throw QuadratureFailure("quadrature order must be positive");
  return cached(cache, order, [](int o) { return o == 5 ? seven_point() : collapsed(o); });
}

const QuadratureRule& edge_rule(int order) {
  static std::map<int, QuadratureRule> cache;
  if (order < 1) throw QuadratureFailure("quadrature order must be positive");
  return cached(cache, order, gauss_edge);
}

}  // namespace dbc
