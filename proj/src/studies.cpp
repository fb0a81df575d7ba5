#include "stochagg/studies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "stochagg/config.hpp"
#include "stochagg/noise.hpp"

namespace stochagg {

ModelSpec heat_spec(double a0, int mode_x, int mode_y, double amplitude, double offset) {
  ModelSpec s;
  s.alpha = 0.0;
  s.mu = 0.0;
  s.ubar = 4.0;
  s.diffusion = DiffusionKind::Constant;
  s.diffusion_a0 = a0;
  s.kernel = KernelKind::Disabled;
  s.noise = NoiseKind::Zero;
  s.init.kind = InitKind::SingleCosine;
  s.init.mode_x = mode_x;
  s.init.mode_y = mode_y;
  s.init.amplitude = amplitude;
  s.init.offset = offset;
  return s;
}

Field heat_exact(const Grid2D& grid, const ModelSpec& spec, double t) {
  const double lx = grid.xmax - grid.xmin, ly = grid.ymax - grid.ymin;
  const double kx = spec.init.mode_x * std::numbers::pi / lx, ky = spec.init.mode_y * std::numbers::pi / ly;
  const double decay = std::exp(-spec.diffusion_a0 * (kx * kx + ky * ky) * t);
  Field u(grid);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const auto [x, y] = grid.node_coords(i, j);
      u(i, j) = spec.init.offset +
                spec.init.amplitude * decay * std::cos(kx * (x - grid.xmin)) * std::cos(ky * (y - grid.ymin));
    }
  return u;
}

double relative_l2(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "relative_l2");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    num += d * d;
    den += b[k] * b[k];
  }
  return std::sqrt(num / den);
}

HeatRun heat_mode_error(int cells, double T, double dt_fraction, const ModelSpec& spec_in, ConvBackend backend) {
  const Grid2D grid = Grid2D::square(cells);
  const ModelSpec spec = validate(spec_in, grid);
  RunConfig rc;
  rc.T = T;
  rc.record_times = {T};
  rc.dt = aligned_dt(T, dt_fraction * stability_bound(spec, grid), rc.record_times);
  rc.backend = backend;
  RngStream stream = derive_stream(0, 0);
  const PathResult r = run_path(initial_condition(grid, spec), spec, rc, stream);
  if (r.blowup) throw BlowUpError(*r.blowup);
  HeatRun h;
  h.cells = cells;
  h.dt = rc.dt;
  h.steps = rc.num_steps();
  h.rel_l2_error = relative_l2(r.final_field, heat_exact(grid, spec, T));
  return h;
}

std::vector<HeatRun> heat_convergence(const std::vector<int>& cells, double T, double dt_fraction,
                                      const ModelSpec& spec, ConvBackend backend) {
  std::vector<HeatRun> rows;
  for (int c : cells) {
    rows.push_back(heat_mode_error(c, T, dt_fraction, spec, backend));
    if (rows.size() > 1) rows.back().ratio = rows[rows.size() - 2].rel_l2_error / rows.back().rel_l2_error;
  }
  return rows;
}

std::string heat_convergence_csv(const std::vector<HeatRun>& rows) {
  std::ostringstream os;
  os << "cells,dt,steps,rel_l2_error,ratio\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%lld,%.17g,%.17g\n", r.cells, r.dt, static_cast<long long>(r.steps),
                  r.rel_l2_error, r.ratio);
    os << buf;
  }
  return os.str();
}

double scalar_milstein_step(double u, double dW, double dt, const ModelSpec& spec, double M) {
  const double s = noise_sigma(u, spec);
  return u + dt * reaction_truncated(u, spec, M) + s * dW + 0.5 * s * noise_sigma_prime(u, spec) * (dW * dW - dt);
}

double scalar_euler_step(double u, double dW, double dt, const ModelSpec& spec, double M) {
  return u + dt * reaction_truncated(u, spec, M) + noise_sigma(u, spec) * dW;
}

double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_log_slope: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

StrongOrderStudy milstein_strong_order(const ModelSpec& spec, const StrongOrderOptions& o) {
  if (o.coarsest_exp > o.finest_exp || o.ref_factor < 1 || o.paths < 1)
    throw std::invalid_argument("milstein_strong_order: bad options");
  const double M = spec.resolved_trunc_M();
  const std::int64_t fine_per_unit = (std::int64_t{1} << o.finest_exp) * o.ref_factor;
  const double ref_dt = 1.0 / static_cast<double>(fine_per_unit);
  const auto nfine = static_cast<std::int64_t>(std::llround(o.T * static_cast<double>(fine_per_unit)));
  if (std::abs(static_cast<double>(nfine) * ref_dt - o.T) > 1e-12 * o.T)
    throw std::invalid_argument("milstein_strong_order: T must be a multiple of the reference step");

  const int levels = o.finest_exp - o.coarsest_exp + 1;
  std::vector<double> err_m(levels, 0.0), err_e(levels, 0.0);
  std::vector<double> dw(static_cast<std::size_t>(nfine));
  for (std::size_t p = 0; p < o.paths; ++p) {
    RngStream stream = derive_stream(o.seed, p);
    fill_gaussian(stream, ref_dt, dw);
    double ref = o.u0;
    for (double w : dw) ref = scalar_milstein_step(ref, w, ref_dt, spec, M);
    for (int l = 0; l < levels; ++l) {
      const std::int64_t block = fine_per_unit >> (o.coarsest_exp + l);
      const double dt = static_cast<double>(block) * ref_dt;
      double um = o.u0, ue = o.u0;
      for (std::int64_t s = 0; s < nfine; s += block) {
        double w = 0.0;
        for (std::int64_t k = 0; k < block; ++k) w += dw[static_cast<std::size_t>(s + k)];
        um = scalar_milstein_step(um, w, dt, spec, M);
        ue = scalar_euler_step(ue, w, dt, spec, M);
      }
      err_m[l] += std::abs(um - ref);
      err_e[l] += std::abs(ue - ref);
    }
  }
  StrongOrderStudy st;
  st.ref_dt = ref_dt;
  st.paths = o.paths;
  std::vector<double> dts, em, ee;
  for (int l = 0; l < levels; ++l) {
    StrongOrderRow row;
    row.dt = std::ldexp(1.0, -(o.coarsest_exp + l));
    row.milstein_error = err_m[l] / static_cast<double>(o.paths);
    row.euler_error = err_e[l] / static_cast<double>(o.paths);
    st.rows.push_back(row);
    dts.push_back(row.dt);
    em.push_back(row.milstein_error);
    ee.push_back(row.euler_error);
  }
  st.milstein_order = fit_log_slope(dts, em);
  st.euler_order = fit_log_slope(dts, ee);
  return st;
}

std::string strong_order_csv(const StrongOrderStudy& st) {
  std::ostringstream os;
  os << "dt,milstein_error,euler_error\n";
  char buf[160];
  for (const auto& r : st.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.dt, r.milstein_error, r.euler_error);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "# milstein_order=%.6f euler_order=%.6f paths=%zu ref_dt=%.17g\n", st.milstein_order,
                st.euler_order, st.paths, st.ref_dt);
  os << buf;
  return os.str();
}

int count_clusters(const Field& u, double threshold) {
  const Grid2D& g = u.grid();
  std::vector<int> label(u.size(), -1);
  std::vector<std::size_t> stack;
  int n = 0;
  for (std::size_t start = 0; start < u.size(); ++start) {
    if (label[start] >= 0 || u[start] < threshold) continue;
    label[start] = n;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      const int i = static_cast<int>(k % g.nx), j = static_cast<int>(k / g.nx);
      const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[0] >= g.nx || q[1] < 0 || q[1] >= g.ny) continue;
        const std::size_t m = g.index(q[0], q[1]);
        if (label[m] < 0 && u[m] >= threshold) {
          label[m] = n;
          stack.push_back(m);
        }
      }
    }
    ++n;
  }
  return n;
}

int count_clusters(const Field& u) {
  const auto [lo, hi] = std::minmax_element(u.values().begin(), u.values().end());
  return count_clusters(u, 0.5 * (*lo + *hi));
}

}  // namespace stochagg
