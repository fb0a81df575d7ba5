#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stochagg/model.hpp"

using namespace stochagg;

namespace {

ModelSpec base() {
  ModelSpec s;
  s.ubar = 4.0;
  return s;
}

// Composite Simpson; exact for the polynomial a and A used here.
template <class F>
double simpson(F f, double lo, double hi, int panels = 64) {
  const double h = (hi - lo) / (2 * panels);
  double s = f(lo) + f(hi);
  for (int k = 1; k < 2 * panels; ++k) s += (k % 2 ? 4.0 : 2.0) * f(lo + k * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("diffusion endpoints and values") {
  ModelSpec s = base();
  CHECK(diffusion_a(0.0, s) == 0.0);
  CHECK(diffusion_a(4.0, s) == 0.0);
  CHECK(diffusion_a(1.0, s) == doctest::Approx(3.0).epsilon(1e-15));
  for (double ub : {0.5, 1.0, 3.7, 10.0}) {
    s.ubar = ub;
    CHECK(diffusion_a(0.0, s) == 0.0);
    CHECK(diffusion_a(ub, s) == 0.0);
  }
}

TEST_CASE("antiderivatives") {
  ModelSpec s = base();
  CHECK(antiderivative_A(4.0, s) == doctest::Approx(32.0 - 64.0 / 3.0).epsilon(1e-14));
  CHECK(antiderivative_AA(1.0, s) == doctest::Approx(7.0 / 12.0).epsilon(1e-14));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 4.0);
  for (int k = 0; k < 1000; ++k) {
    const double u = U(rng);
    const double A = antiderivative_A(u, s);
    CHECK(std::abs(A - simpson([&](double r) { return diffusion_a(r, s); }, 0.0, u)) <= 1e-9 * (1 + std::abs(A)));
    const double AA = antiderivative_AA(u, s);
    CHECK(std::abs(AA - simpson([&](double r) { return antiderivative_A(r, s); }, 0.0, u)) <=
          1e-9 * (1 + std::abs(AA)));
  }

  ModelSpec c = base();
  c.diffusion = DiffusionKind::Constant;
  c.diffusion_a0 = 2.5;
  CHECK(diffusion_a(3.0, c) == 2.5);
  CHECK(antiderivative_A(2.0, c) == doctest::Approx(5.0));
}

TEST_CASE("reaction and truncation") {
  ModelSpec s = base();
  CHECK(reaction_f(1.0, s) == doctest::Approx(-0.1).epsilon(1e-14));
  CHECK(reaction_f(0.0, s) == 0.0);
  CHECK(reaction_truncated(50.0, s, 3.0) == 3.0);
  CHECK(reaction_truncated(-50.0, s, 3.0) == -3.0);
  CHECK(reaction_truncated(1.0, s, 3.0) == reaction_f(1.0, s));

  const ModelSpec v = validate(s, Grid2D::square(32));
  REQUIRE(v.trunc_M.has_value());
  CHECK(*v.trunc_M == doctest::Approx(2.0 * std::max(4.0, max_abs_reaction(s))));
  for (int k = 0; k <= 400; ++k) {
    const double u = 4.0 * k / 400.0;
    CHECK(reaction_truncated(u, v) == reaction_f(u, s));
  }
}

TEST_CASE("noise coefficients") {
  ModelSpec s = base();
  s.noise = NoiseKind::PropShifted;
  s.noise_amplitude = 1.2;
  CHECK(noise_sigma(0.0, s) == 0.0);
  CHECK(noise_sigma(4.0, s) == 0.0);
  CHECK(noise_sigma(1.0, s) == doctest::Approx(1.2));
  CHECK(noise_sigma_prime(2.0, s) == 0.0);
  CHECK(noise_sigma_prime(1.0, s) == doctest::Approx(1.2));
  CHECK(noise_sigma_prime(3.0, s) == doctest::Approx(-1.2));

  s.noise = NoiseKind::Periodic;
  CHECK(noise_sigma(0.0, s) == 0.0);
  CHECK(noise_sigma(4.0, s) == 0.0);
  CHECK(noise_sigma_prime(0.0, s) == doctest::Approx(1.2 * std::numbers::pi / 4.0).epsilon(1e-14));

  s.noise = NoiseKind::Zero;
  CHECK(noise_sigma(1.3, s) == 0.0);
  CHECK(noise_sigma_prime(1.3, s) == 0.0);
}

TEST_CASE("sigma prime matches central differences") {
  for (NoiseKind kind : {NoiseKind::PropShifted, NoiseKind::Periodic}) {
    ModelSpec s = base();
    s.noise = kind;
    const double h = 1e-5;
    for (int k = 1; k < 400; ++k) {
      const double u = 4.0 * k / 400.0;
      if (std::abs(u - 2.0) <= 1e-3) continue;
      const double fd = (noise_sigma(u + h, s) - noise_sigma(u - h, s)) / (2 * h);
      const double an = noise_sigma_prime(u, s);
      CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST_CASE("kernel") {
  CHECK(kernel_value(0, 0) == doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-15));
  for (auto [x, y] : {std::pair{0.3, -1.7}, {2.0, 0.5}, {-3.1, 1.1}}) {
    CHECK(kernel_value(x, y) == kernel_value(y, x));
    CHECK(kernel_value(x, y) == kernel_value(-x, -y));
  }
  CHECK(kernel_value(1, 0) < kernel_value(0.5, 0));
  double sum = 0;
  const double h = 0.02;
  for (int i = -600; i <= 600; ++i)
    for (int j = -600; j <= 600; ++j) sum += kernel_value(i * h, j * h);
  CHECK(std::abs(sum * h * h - 1.0) <= 1e-6);
}

TEST_CASE("initial conditions") {
  // Nodes at x = -4 + i/8 on 64 cells; (0, 1) is node (32, 40).
  const Grid2D g = Grid2D::square(64);
  ModelSpec s = base();
  const Field u = initial_condition(g, s);
  CHECK(u(32, 40) == doctest::Approx(2 * std::exp(-1.0) + 1.5 + 2 * std::exp(-6.25)).epsilon(1e-14));

  s.init.kind = InitKind::Constant;
  s.init.value = 0.7;
  const auto const_init = initial_condition(g, s);
  for (double v : const_init.values()) CHECK(v == 0.7);

  s.init.kind = InitKind::SingleCosine;
  s.init.mode_x = 1;
  s.init.mode_y = 0;
  s.init.amplitude = 0.05;
  s.init.offset = 1.0;
  const Field c = initial_condition(g, s);
  for (int j = 0; j < g.ny; j += 7)
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.node_coords(i, j).first;
      CHECK(c(i, j) == doctest::Approx(1.0 + 0.05 * std::cos(std::numbers::pi * (x + 4) / 8)).epsilon(1e-13));
    }
}

TEST_CASE("perturbed initial condition") {
  const Grid2D g = Grid2D::square(8);
  ModelSpec s = base();
  const Field u0 = initial_condition(g, s);
  RngStream st(3);
  CHECK(perturb_initial(u0, 0.0, 4.0, 1e-3, st) == u0);

  const int node = static_cast<int>(g.index(4, 5));
  const double target = u0[node];
  const double delta = 0.1;
  const int n = 10000;
  double sum = 0;
  for (int p = 0; p < n; ++p) {
    RngStream r = derive_stream(99, p);
    const Field w = perturb_initial(u0, delta, 4.0, 1e-3, r);
    for (double v : w.values()) {
      CHECK(v >= 0.0);
      CHECK(v < 4.0);
    }
    sum += w[node];
  }
  const double se = target * delta / std::sqrt(n);
  CHECK(std::abs(sum / n - target) <= 3 * se);
}

TEST_CASE("validation") {
  const Grid2D g = Grid2D::square(64);
  ModelSpec s = base();
  CHECK(check(s, g).ok());

  s.ubar = 2.0;
  auto r = check(s, g);
  REQUIRE_FALSE(r.ok());
  CHECK(r.message().find("initial condition exceeds ubar") != std::string::npos);

  s = base();
  s.alpha = -1;
  r = check(s, g);
  REQUIRE_FALSE(r.ok());
  CHECK(r.message().find("alpha must be nonnegative") != std::string::npos);
  CHECK_THROWS_AS(validate(s, g), ValidationError);
}
