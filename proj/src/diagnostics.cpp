#include "stochagg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace stochagg {

double stampacchia_R(double u, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("stampacchia_R: nu must be positive");
  if (u >= 0.0) return 0.0;
  if (u < -nu) return u * u - nu * nu / 6.0;
  return -(u * u * u * u) / (2.0 * nu * nu) - 4.0 * u * u * u / (3.0 * nu);
}

double grad_A_l2_sq(const Field& u, const ModelSpec& spec) {
  const Grid2D& g = u.grid();
  std::vector<double> A(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) A[k] = antiderivative_A(u[k], spec);
  const double dx = g.dx(), dy = g.dy();
  double sx = 0.0, sy = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double d = (A[g.index(i + 1, j)] - A[g.index(i, j)]) / dx;
      sx += d * d;
    }
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double d = (A[g.index(i, j + 1)] - A[g.index(i, j)]) / dy;
      sy += d * d;
    }
  return (sx + sy) * dx * dy;
}

DiagnosticsRow evaluate_row(const Field& u, const ModelSpec& spec, double nu, double t, std::uint64_t clamp_count) {
  u.require_finite("diagnostics sample");
  DiagnosticsRow r;
  r.t = t;
  r.clamp_count = clamp_count;
  const double w = u.grid().cell_area();
  double mass = 0.0, l2 = 0.0, aa = 0.0, sn = 0.0, su = 0.0;
  double mn = u.size() ? u[0] : 0.0, mx = mn;
  for (double v : u.values()) {
    mass += v;
    l2 += v * v;
    aa += std::abs(antiderivative_AA(v, spec));
    sn += stampacchia_R(v, nu);
    su += stampacchia_R(spec.ubar - v, nu);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  r.mass = mass * w;
  r.l2_sq = l2 * w;
  r.energy_A_l1 = aa * w;
  r.stamp_neg = sn * w;
  r.stamp_upper = su * w;
  r.min_u = mn;
  r.max_u = mx;
  r.grad_A_l2_sq = grad_A_l2_sq(u, spec);
  return r;
}

std::string series_header() {
  return "t,mass,min_u,max_u,l2_sq,energy_A_l1,grad_A_l2_sq,stamp_neg,stamp_upper,clamp_count";
}

std::string series_line(const DiagnosticsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%llu", r.t, r.mass, r.min_u,
                r.max_u, r.l2_sq, r.energy_A_l1, r.grad_A_l2_sq, r.stamp_neg, r.stamp_upper,
                static_cast<unsigned long long>(r.clamp_count));
  return buf;
}

BoundMonitor::BoundMonitor(double ubar, double tol) : ubar_(ubar) { s_.tol = tol; }

void BoundMonitor::observe(const Field& u, double t) {
  const Grid2D& g = u.grid();
  s_.node_steps += u.size();
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double v = u[k];
    if (v < -s_.tol) {
      if (s_.below == 0 || v < s_.worst_below.value)
        s_.worst_below = {v, t, static_cast<int>(k % g.nx), static_cast<int>(k / g.nx)};
      ++s_.below;
    } else if (v > ubar_ + s_.tol) {
      if (s_.above == 0 || v > s_.worst_above.value)
        s_.worst_above = {v, t, static_cast<int>(k % g.nx), static_cast<int>(k / g.nx)};
      ++s_.above;
    }
  }
}

BoundViolationSummary bound_violation_report(std::span<const TimedField> trajectory, double ubar, double tol) {
  BoundMonitor m(ubar, tol);
  for (const auto& tf : trajectory) m.observe(tf.u, tf.t);
  return m.summary();
}

}  // namespace stochagg
