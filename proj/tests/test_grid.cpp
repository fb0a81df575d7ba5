#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stochagg/grid.hpp"
#include "stochagg/model.hpp"

using namespace stochagg;

namespace {

Field random_field(const Grid2D& g, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  Field f(g);
  for (double& v : f.values()) v = U(rng);
  return f;
}

// int_a^b exp(-c (x - m)^2) dx
double gauss_1d(double c, double m, double a, double b) {
  const double s = std::sqrt(c);
  return 0.5 * std::sqrt(std::numbers::pi / c) * (std::erf(s * (b - m)) - std::erf(s * (a - m)));
}

}  // namespace

TEST_CASE("node coordinates") {
  const Grid2D g = Grid2D::square(128);
  CHECK(g.nx == 129);
  CHECK(g.dx() == 8.0 / 128);
  CHECK(g.node_coords(0, 0).first == -4.0);
  CHECK(g.node_coords(128, 0).first == 4.0);
  CHECK(g.node_coords(64, 0).first == 0.0);
  CHECK(g.node_coords(0, 128).second == 4.0);
  CHECK(g.index(3, 2) == 2u * 129u + 3u);
}

TEST_CASE("midpoint averages") {
  const Grid2D g = Grid2D::square(8);
  Field c(g, 1.7);
  CHECK(midpoint_avg(c, Axis::X, 2, 3) == 1.7);
  CHECK(midpoint_avg(c, Axis::Y, 2, 3) == 1.7);

  Field u(g);
  u(4, 4) = 0.0;
  u(5, 4) = 2.0;
  CHECK(midpoint_avg(u, Axis::X, 4, 4) == 1.0);

  Field lin(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) lin(i, j) = g.node_coords(i, j).first;
  for (int i = 0; i + 1 < g.nx; ++i) CHECK(midpoint_avg(lin, Axis::X, i, 3) == doctest::Approx(-4.0 + (i + 0.5) * g.dx()));
}

TEST_CASE("integration") {
  for (int cells : {8, 32, 100}) {
    const Grid2D g = Grid2D::square(cells);
    const double corr = double(cells + 1) * (cells + 1) / (double(cells) * cells);
    CHECK(integrate(Field(g, 2.5)) == doctest::Approx(2.5 * 64.0 * corr).epsilon(1e-13));
    CHECK(integrate(Field(g)) == 0.0);
  }

  const Grid2D g = Grid2D::square(40);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Field u = random_field(g, s), v = random_field(g, s + 100);
    const double a = 0.7, b = -2.3;
    Field w(g);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = a * u[k] + b * v[k];
    const double lhs = integrate(w), rhs = a * integrate(u) + b * integrate(v);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("three bumps integral against the analytic value") {
  const double L = -4, R = 4;
  const double exact = 8.0 * 2.0 * std::exp(-0.5) * gauss_1d(2.0, -0.5, L, R) +
                       1.5 * gauss_1d(1.0, 0.0, L, R) * gauss_1d(1.0, 1.0, L, R) +
                       2.0 * gauss_1d(1.0, 1.5, L, R) * gauss_1d(1.0, -1.0, L, R);
  const Grid2D g = Grid2D::square(256);
  ModelSpec s;
  const double got = integrate(initial_condition(g, s));
  MESSAGE("nodal sum " << got << " exact " << exact << " rel " << std::abs(got - exact) / exact);
  CHECK(std::abs(got - exact) <= 1e-3 * exact);

  // The gap is the full weight the nodal sum gives boundary nodes; halving it recovers the integral.
  const Field u = initial_condition(g, s);
  double trap = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      trap += u(i, j) * (i == 0 || i == g.nx - 1 ? 0.5 : 1.0) * (j == 0 || j == g.ny - 1 ? 0.5 : 1.0);
  trap *= g.cell_area();
  CHECK(std::abs(trap - exact) <= 1e-6 * exact);
}

TEST_CASE("norms") {
  const Grid2D g = Grid2D::square(16);
  const Norms one = norms(Field(g, 1.0));
  CHECK(one.l1 == doctest::Approx(quadrature_area(g)));
  CHECK(one.linf == 1.0);
  const Norms zero = norms(Field(g));
  CHECK(zero.l1 == 0.0);
  CHECK(zero.l2 == 0.0);
  CHECK(zero.linf == 0.0);
  Field spike(g);
  spike(3, 7) = 1.0;
  CHECK(norms(spike).linf == 1.0);
  CHECK(norms(spike).min == 0.0);

  for (std::uint64_t s = 0; s < 10; ++s) {
    const Field u = random_field(g, s);
    Field neg(g);
    for (std::size_t k = 0; k < u.size(); ++k) neg[k] = -u[k];
    const Norms n = norms(u);
    CHECK(norms(neg).linf == n.linf);
    CHECK(n.l2 * n.l2 <= n.l1 * n.linf * (1 + 1e-14));
  }
}

TEST_CASE("non-finite values are rejected") {
  Field u(Grid2D::square(4));
  CHECK_NOTHROW(u.require_finite("u"));
  u(1, 2) = std::nan("");
  CHECK_THROWS_AS(u.require_finite("u"), std::domain_error);
}
