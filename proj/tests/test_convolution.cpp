#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stochagg/convolution.hpp"

using namespace stochagg;

namespace {

Field random_field(const Grid2D& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 4.0);
  Field f(g);
  for (double& v : f.values()) v = U(rng);
  return f;
}

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

Field delta_at(const Grid2D& g, int i0, int j0) {
  Field u(g);
  u(i0, j0) = 1.0 / g.cell_area();
  return u;
}

}  // namespace

TEST_CASE("kernel table") {
  const Grid2D g = Grid2D::square(32);
  const KernelTable t = build_table(g, ModelSpec{});
  CHECK(t.at(0, 0) == doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-15));
  for (int p = -t.max_px(); p <= t.max_px(); ++p)
    for (int q = -t.max_py(); q <= t.max_py(); ++q) {
      CHECK(t.at(p, q) == t.at(-p, -q));
      CHECK(t.at(p, q) == t.at(q, p));
      CHECK(t.at(p, q) >= 0.0);
    }
  for (int p = 0; p < t.max_px(); ++p) CHECK(t.at(p + 1, 0) <= t.at(p, 0));

  ModelSpec off;
  off.kernel = KernelKind::Disabled;
  const auto off_table = build_table(g, off);
  for (double v : off_table.values()) CHECK(v == 0.0);
}

TEST_CASE("direct convolution examples") {
  const Grid2D g = Grid2D::square(16);
  const KernelTable t = build_table(g, ModelSpec{});
  const int i0 = 5, j0 = 9;
  const Field v = convolve_direct(delta_at(g, i0, j0), t);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) CHECK(v(i, j) == doctest::Approx(t.at(i - i0, j - j0)).epsilon(1e-14));

  const auto v_zero = convolve_direct(Field(g), t);
  for (double x : v_zero.values()) CHECK(x == 0.0);

  const Grid2D wide = Grid2D::square(64);
  const Field ones = convolve_fft(Field(wide, 1.0), build_table(wide, ModelSpec{}));
  CHECK(std::abs(ones(32, 32) - 1.0) <= 1e-3);
}

TEST_CASE("fft matches direct summation") {
  for (int cells : {15, 31, 63}) {
    const Grid2D g = Grid2D::square(cells);
    const KernelTable t = build_table(g, ModelSpec{});
    FftConvolver fft(t);
    CHECK(fft.padded_x() >= 2 * g.nx - 1);
    CHECK(fft.padded_y() >= 2 * g.ny - 1);
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Field u = random_field(g, 1000 * cells + s);
      CHECK(max_abs_diff(fft.apply(u), convolve_direct(u, t)) <= 1e-10);
    }
  }
}

TEST_CASE("fft delta, linearity, positivity, translation") {
  const Grid2D g = Grid2D::square(32);
  const KernelTable t = build_table(g, ModelSpec{});
  const Field v = convolve_fft(delta_at(g, 10, 20), t);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) CHECK(std::abs(v(i, j) - t.at(i - 10, j - 20)) <= 1e-12);

  const Field u = random_field(g, 1), w = random_field(g, 2);
  Field uw(g);
  for (std::size_t k = 0; k < u.size(); ++k) uw[k] = u[k] + w[k];
  const Field a = convolve_fft(uw, t), b = convolve_fft(u, t), c = convolve_fft(w, t);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k] - c[k]) <= 1e-10);

  const auto v_pos = convolve_direct(u, t);
  for (double x : v_pos.values()) CHECK(x >= 0.0);

  const Field r1 = convolve_direct(delta_at(g, 14, 15), t);
  const Field r2 = convolve_direct(delta_at(g, 16, 18), t);
  for (int j = 10; j < 20; ++j)
    for (int i = 10; i < 20; ++i) CHECK(r2(i + 2, j + 3) == doctest::Approx(r1(i, j)).epsilon(1e-14));
}

TEST_CASE("grid mismatch and backends") {
  const Grid2D g = Grid2D::square(16), h = Grid2D::square(8);
  const KernelTable t = build_table(g, ModelSpec{});
  CHECK_THROWS_AS(convolve_direct(Field(h, 1.0), t), GridMismatch);
  CHECK_THROWS_AS(convolve_fft(Field(h, 1.0), t), GridMismatch);

  const Field u = random_field(g, 5);
  Convolver d(t, ConvBackend::Direct), f(t, ConvBackend::Fft);
  Field vd(g), vf(g);
  d.apply(u, vd);
  f.apply(u, vf);
  CHECK(max_abs_diff(vd, vf) <= 1e-10);

  CHECK(fft_friendly_size(97) == 98);
  CHECK(fft_friendly_size(128) == 128);
  CHECK(parse_conv_backend("direct") == ConvBackend::Direct);
  CHECK_FALSE(parse_conv_backend("gpu").has_value());
}
