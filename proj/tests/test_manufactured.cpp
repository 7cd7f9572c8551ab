#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "dbc/errors.hpp"
#include "dbc/manufactured.hpp"
#include "dbc/quadrature.hpp"

using namespace dbc;

namespace {

constexpr double pi = std::numbers::pi;

ManufacturedProblem make(double omega1, bool constrained, LambdaChoice c = LambdaChoice::Leading) {
  ManufacturedSpec s;
  s.omega1 = omega1;
  s.constrained = constrained;
  s.lambda_choice = c;
  return ManufacturedProblem(s);
}

// a point on side j at parameter t in (0,1)
Point on_side(const PolygonSpec& p, int j, double t) { return (1 - t) * p.corner(j) + t * p.corner(j + 1); }

double fd_laplacian(const std::function<double(const Point&)>& f, const Point& x, double h) {
  return (f(x + Point(h, 0)) + f(x - Point(h, 0)) + f(x + Point(0, h)) + f(x - Point(0, h)) - 4 * f(x)) / (h * h);
}

// uniformly random interior point at distance >= rmin from the origin
Point interior_sample(const PolygonSpec& p, std::mt19937_64& rng, double rmin) {
  std::uniform_real_distribution<double> d(-1, 1);
  for (;;) {
    const Point x(d(rng), d(rng));
    if (x.norm() >= rmin && p.contains(x) && x.norm() > 0) {
      bool clear = true;
      for (int j = 0; j < p.size(); ++j) {
        const Point t = p.side_direction(j);
        const Point r = x - p.corner(j);
        if (std::abs(t.x() * r.y() - t.y() * r.x()) < 2e-4) clear = false;
      }
      if (clear) return x;
    }
  }
}

}  // namespace

TEST_CASE("singular function values") {
  const PolygonSpec l = build_sector_domain(3 * pi / 2);
  const double lam = 2.0 / 3.0;
  CHECK(eval_singular(lam, l, 0, Point(std::cos(3 * pi / 4), std::sin(3 * pi / 4))).value ==
        doctest::Approx(1.0).epsilon(1e-14));
  for (double r : {0.1, 0.5, 0.9}) CHECK(eval_singular(lam, l, 0, Point(r, 0)).value == 0.0);
  CHECK_THROWS_AS(eval_singular(lam, l, 0, Point(0, 0), true), CornerSingularity);
  CHECK(eval_singular(lam, l, 0, Point(0, 0), false).value == 0.0);
  CHECK_NOTHROW(eval_singular(2.0, build_sector_domain(pi / 2), 0, Point(0, 0), true));
}

TEST_CASE("singular function gradient and harmonicity against finite differences") {
  const PolygonSpec l = build_sector_domain(3 * pi / 2);
  std::mt19937_64 rng(2);
  for (double lam : {2.0 / 3.0, 4.0 / 3.0}) {
    auto s = [&](const Point& x) { return eval_singular(lam, l, 0, x, false).value; };
    for (int k = 0; k < 20; ++k) {
      const Point x = interior_sample(l, rng, 0.1);
      const double r = x.norm();
      if (k < 5) {
        const double h = 1e-6 * r;
        const Point g = eval_singular(lam, l, 0, x).gradient;
        const Point fd((s(x + Point(h, 0)) - s(x - Point(h, 0))) / (2 * h),
                       (s(x + Point(0, h)) - s(x - Point(0, h))) / (2 * h));
        CHECK((fd - g).norm() <= 1e-7 * g.norm());
      }
      const double lap = fd_laplacian(s, x, 1e-4);
      CHECK(std::abs(lap) <= 1e-5 * std::max(1.0, std::abs(s(x)) / (r * r)));
    }
  }
}

TEST_CASE("bubbles") {
  CHECK(bubble(2, 0.6 * pi, Point(1, 0.3)).value == 0.0);
  CHECK(bubble(1, pi / 3, Point(1, 0)).value == doctest::Approx(0.0));
  const auto b4 = bubble(4, 1.5 * pi, Point(0, 0));
  CHECK(b4.value == 1.0);
  CHECK(b4.laplacian == -4.0);
  // case 3 at (0.5, 0.5): (1 - x^2)(1 - y), gradient (-2x(1-y), -(1-x^2)), laplacian -2(1-y)
  const auto b3 = bubble(3, pi, Point(0.5, 0.5));
  CHECK(b3.value == doctest::Approx(0.375));
  CHECK(b3.gradient.x() == doctest::Approx(-0.5));
  CHECK(b3.gradient.y() == doctest::Approx(-0.75));
  CHECK(b3.laplacian == doctest::Approx(-1.0));
  CHECK(bubble_case_for(pi / 2) == 1);
  CHECK(bubble_case_for(0.7 * pi) == 2);
  CHECK(bubble_case_for(pi) == 3);
  CHECK(bubble_case_for(1.25 * pi) == 3);
  CHECK(bubble_case_for(1.5 * pi) == 4);
  CHECK_THROWS_AS(bubble(4, pi / 2, Point(0, 0)), CaseMismatch);
  CHECK_THROWS_AS(bubble(1, 1.5 * pi, Point(0, 0)), CaseMismatch);
}

TEST_CASE("adjoint vanishes on the boundary across all bubble cases") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> t(0, 1);
  for (double w : {pi / 3, 0.45 * pi, pi / 2, 0.6 * pi, 0.75 * pi, pi, 1.2 * pi, 1.25 * pi, 1.5 * pi, 1.9 * pi}) {
    const auto mp = make(w, false);
    const auto& p = mp.polygon();
    double scale = 0.0;
    for (int k = 0; k < 50; ++k) scale = std::max(scale, std::abs(mp.phi(interior_sample(p, rng, 0.05))));
    for (int k = 0; k < 200; ++k) {
      const int side = static_cast<int>(t(rng) * p.size()) % p.size();
      CHECK(std::abs(mp.phi(on_side(p, side, t(rng)))) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("Laplacian of the adjoint against a five-point stencil") {
  std::mt19937_64 rng(6);
  for (auto [w, c] : {std::pair{1.5 * pi, LambdaChoice::Leading}, std::pair{1.5 * pi, LambdaChoice::Special},
                      std::pair{pi / 2, LambdaChoice::Leading}, std::pair{0.7 * pi, LambdaChoice::Leading}}) {
    const auto mp = make(w, false, c);
    for (int k = 0; k < 10; ++k) {
      const Point x = interior_sample(mp.polygon(), rng, 0.1);
      const double fd = fd_laplacian([&](const Point& y) { return mp.phi(y); }, x, 1e-4);
      CHECK(std::abs(fd - mp.laplace_phi(x)) <= 1e-5 * std::max(1.0, std::abs(mp.laplace_phi(x))));
    }
  }
}

TEST_CASE("exact control is the projection of the normal derivative") {
  const auto mp = make(1.5 * pi, true);
  CHECK(mp.a() == doctest::Approx(-1.5));
  CHECK(mp.b() == 1.0);
  const auto& p = mp.polygon();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> t(0, 1);
  int inactive = 0;
  for (int k = 0; k < 200; ++k) {
    const int side = static_cast<int>(t(rng) * p.size()) % p.size();
    const Point x = on_side(p, side, t(rng));
    const double u = mp.u(x, side);
    CHECK(u >= mp.a());
    CHECK(u <= mp.b());
    CHECK(std::clamp(u, mp.a(), mp.b()) == u);
    CHECK(u == std::clamp(mp.dn_phi(x, side) / mp.nu(), mp.a(), mp.b()));
    if (u > mp.a() && u < mp.b()) {
      ++inactive;
      CHECK(std::abs(mp.d(x, side)) <= 1e-12 * std::max(1.0, std::abs(u)));
    }
  }
  CHECK(inactive > 0);
  // clamped at the lower bound right next to the reentrant corner on both rays
  for (double r : {1e-4, 5e-4, 9e-4}) {
    CHECK(mp.u(Point(r, 0), 0) == mp.a());
    CHECK(mp.u(Point(0, -r), p.size() - 1) == mp.a());
  }
}

TEST_CASE("manufactured spec preconditions") {
  ManufacturedSpec s;
  s.omega1 = 0.75 * pi;
  s.lambda_choice = LambdaChoice::Special;
  CHECK_THROWS_AS(ManufacturedProblem{s}, PreconditionError);
  s.omega1 = 1.5 * pi;
  s.nu = 0;
  CHECK_THROWS_AS(ManufacturedProblem{s}, PreconditionError);
  CHECK(lambda_choice_from_string(to_string(LambdaChoice::Special)) == LambdaChoice::Special);
  CHECK_THROWS_AS(lambda_choice_from_string("other"), ParseError);
}

TEST_CASE("target data") {
  const auto mp = make(1.5 * pi, true);
  auto fam = build_family(mp.polygon(), MeshFamilyKind::Generic, 3);
  const P1Space sp(std::make_shared<const Mesh>(fam.back()));
  const TargetData td = build_y_omega(mp, sp);

  SUBCASE("independent recomputation") {
    const auto ybar = sp.harmonic_extension(mp.u_field());
    std::mt19937_64 rng(10);
    for (int k = 0; k < 100; ++k) {
      const Point x = interior_sample(mp.polygon(), rng, 0.01);
      const FieldPoint fp = sp.locate(x);
      REQUIRE(fp.triangle >= 0);
      const double expect = sp.evaluate(ybar, fp) + mp.laplace_phi(x);
      CHECK(std::abs(td.field(fp) - expect) <= 1e-10 * std::max(1.0, std::abs(expect)));
    }
  }
  SUBCASE("finite at all quadrature points") {
    const Eigen::VectorXd load = assemble_load(sp.mesh(), td.field, 5);
    CHECK(load.allFinite());
  }
  SUBCASE("zero adjoint hook") {
    ManufacturedSpec s = mp.spec();
    s.zero_adjoint = true;
    const ManufacturedProblem z(s);
    const TargetData tz = build_y_omega(z, sp);
    CHECK(tz.discrete_state.values.cwiseAbs().maxCoeff() == 0.0);
    const FieldPoint fp = sp.locate(Point(0.4, 0.3));
    CHECK(tz.field(fp) == 0.0);
  }
}

TEST_CASE("control interpolation") {
  SUBCASE("continuous control is interpolated nodally") {
    const auto mp = make(1.5 * pi, true);
    const Mesh m = build_family(mp.polygon(), MeshFamilyKind::Superconvergent, 3).back();
    const auto ih = interpolate_control(mp, m);
    for (int i = 0; i < m.num_boundary_vertices(); ++i) {
      const auto& e = m.boundary_edges[i];
      const Point& x = m.vertices[e.v0];
      if (x.norm() == 0.0) {
        CHECK(ih.values[i] == mp.a());
        continue;
      }
      bool corner = false;
      for (int j = 0; j < mp.polygon().size(); ++j) corner = corner || (x - mp.polygon().corner(j)).norm() == 0.0;
      if (!corner) CHECK(ih.values[i] == mp.u(x, e.segment));
    }
  }
  SUBCASE("singular corner uses the substitution point, independent of the level") {
    const auto mp = make(1.5 * pi, false);
    const auto fam = build_family(mp.polygon(), MeshFamilyKind::Generic, 3);
    const double expect = mp.u(Point(mp.epsilon(), 0), 0);
    CHECK(std::isfinite(expect));
    CHECK(std::abs(expect) > 10.0);
    for (const auto& m : fam) CHECK(interpolate_control(mp, m).values[0] == expect);
  }
}

TEST_CASE("modified Lagrange interpolant") {
  const Mesh m = build_family(build_sector_domain(1.5 * pi), MeshFamilyKind::Generic, 3).back();
  const int nb = m.num_boundary_vertices();
  const BoundaryField inside = [](const Point& x, int) { return 0.3 * x.x(); };
  TraceFunction nodal{Eigen::VectorXd(nb)};
  for (int i = 0; i < nb; ++i) nodal.values[i] = 0.3 * m.vertices[m.boundary_edges[i].v0].x();
  CHECK(modified_lagrange_interpolant(inside, nodal, m, -1, 1).values == nodal.values);

  const auto mp = make(1.5 * pi, true);
  const auto ml = modified_lagrange_interpolant(mp.u_field(), interpolate_control(mp, m), m, mp.a(), mp.b());
  CHECK(ml.values[0] == mp.a());
  CHECK(ml.values.minCoeff() >= mp.a());
  CHECK(ml.values.maxCoeff() <= mp.b());

  const BoundaryField both = [](const Point& x, int) { return x.x() > 0.5 ? 1.0 : -1.0; };
  CHECK_THROWS_AS(modified_lagrange_interpolant(both, TraceFunction{Eigen::VectorXd::Zero(nb)}, m, -1, 1),
                  AmbiguousBounds);
}

TEST_CASE("Casas-Raymond interpolant") {
  const Mesh m = build_family(build_sector_domain(1.5 * pi), MeshFamilyKind::Generic, 3).back();
  const int nb = m.num_boundary_vertices();
  const BoundaryField c = [](const Point&, int) { return 0.25; };
  const BoundaryField d1 = [](const Point& x, int) { return 1.0 + x.x() * x.x(); };
  const auto cr = casas_raymond_interpolant(c, d1, m);
  CHECK((cr.values.array() - 0.25).abs().maxCoeff() < 1e-15);

  // zero weight: arithmetic average over the two adjacent edges of an affine u
  const BoundaryField u = [](const Point& x, int) { return 2 * x.x() + x.y(); };
  const BoundaryField zero = [](const Point&, int) { return 0.0; };
  const auto avg = casas_raymond_interpolant(u, zero, m);
  auto f = [](const Point& x) { return 2 * x.x() + x.y(); };
  for (int j = 0; j < nb; ++j) {
    const auto& e_in = m.boundary_edges[(j + nb - 1) % nb];
    const auto& e_out = m.boundary_edges[j];
    const Point a = m.vertices[e_in.v0], x = m.vertices[e_out.v0], b = m.vertices[e_out.v1];
    const double la = (x - a).norm(), lb = (b - x).norm();
    const double expect = (la * 0.5 * (f(a) + f(x)) + lb * 0.5 * (f(x) + f(b))) / (la + lb);
    CHECK(avg.values[j] == doctest::Approx(expect).epsilon(1e-13));
  }

  // orthogonality of the weighted branch
  const auto mp = make(1.5 * pi, true);
  const auto w = casas_raymond_interpolant(mp.u_field(), mp.d_field(), m, 9, mp.a(), mp.b());
  CHECK(w.values.minCoeff() >= mp.a());
  CHECK(w.values.maxCoeff() <= mp.b());
  const auto& rule = edge_rule(9);
  double defect = 0.0, dn = 0.0, un = 0.0;
  for (int i = 0; i < nb; ++i) {
    const auto& e = m.boundary_edges[i];
    const Point p = m.vertices[e.v0], dv = m.vertices[e.v1] - p;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double s = rule.points[q][0], wq = rule.weights[q] * dv.norm();
      const double uq = mp.u(p + s * dv, e.segment), dq = mp.d(p + s * dv, e.segment);
      defect += wq * dq * ((1 - s) * w.values[i] + s * w.values[(i + 1) % nb] - uq);
      dn += wq * dq * dq;
      un += wq * uq * uq;
    }
  }
  CHECK(std::abs(defect) <= 1e-8 * std::sqrt(dn * un));
}
