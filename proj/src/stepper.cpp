#include "stochagg/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

namespace stochagg {

std::string_view to_string(StabilityMode m) { return m == StabilityMode::Strict ? "strict" : "warn"; }
std::string_view to_string(ClipMode m) { return m == ClipMode::Off ? "off" : "clip_to_bounds"; }

std::optional<StabilityMode> parse_stability_mode(std::string_view s) {
  if (s == "strict") return StabilityMode::Strict;
  if (s == "warn") return StabilityMode::Warn;
  return std::nullopt;
}

std::optional<ClipMode> parse_clip_mode(std::string_view s) {
  if (s == "off") return ClipMode::Off;
  if (s == "clip_to_bounds") return ClipMode::ClipToBounds;
  return std::nullopt;
}

std::int64_t RunConfig::num_steps() const {
  if (T == 0.0) return 0;
  return static_cast<std::int64_t>(std::llround(T / dt));
}

std::vector<std::int64_t> RunConfig::record_steps() const {
  std::vector<std::int64_t> out;
  out.reserve(record_times.size());
  for (double t : record_times) out.push_back(static_cast<std::int64_t>(std::llround(t / dt)));
  return out;
}

void RunConfig::check() const {
  if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("T must be finite and nonnegative");
  if (T > 0.0 && !(dt > 0.0 && dt <= T)) throw std::invalid_argument("dt must satisfy 0 < dt <= T");
  if (T > 0.0) {
    const double n = T / dt;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
      throw std::invalid_argument("dt must divide T");
  }
  double prev = -1.0;
  for (double t : record_times) {
    if (t < 0.0 || t > T * (1.0 + 1e-12)) throw std::invalid_argument("record time outside [0, T]");
    if (t <= prev) throw std::invalid_argument("record times must be strictly increasing");
    if (T > 0.0) {
      const double gap = t - std::max(prev, 0.0);
      const double n = gap / dt;
      if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
        throw std::invalid_argument("dt must divide the gaps between record times");
    }
    prev = t;
  }
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (!(bound_tol >= 0.0)) throw std::invalid_argument("bound_tol must be nonnegative");
  if (!(perturb_margin >= 0.0)) throw std::invalid_argument("perturb_margin must be nonnegative");
}

void compute_fluxes(const Field& u, const Field& v, const ModelSpec& spec, FluxPair& out) {
  const Grid2D& g = u.grid();
  require_same_grid(g, v.grid(), "compute_fluxes");
  if (!(out.grid == g)) out = FluxPair(g);
  const double dx = g.dx(), dy = g.dy();
  for (int j = 0; j < g.ny; ++j) {
    out.x_face(0, j) = 0.0;
    out.x_face(g.nx, j) = 0.0;
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double ul = u(i, j), ur = u(i + 1, j);
      const double a_half = 0.5 * (diffusion_a(ur, spec) + diffusion_a(ul, spec));
      out.x_face(i + 1, j) = a_half * (ur - ul) / dx - 0.5 * (ur + ul) * (v(i + 1, j) - v(i, j)) / dx;
    }
  }
  for (int i = 0; i < g.nx; ++i) {
    out.y_face(i, 0) = 0.0;
    out.y_face(i, g.ny) = 0.0;
  }
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double ub = u(i, j), ut = u(i, j + 1);
      const double a_half = 0.5 * (diffusion_a(ut, spec) + diffusion_a(ub, spec));
      out.y_face(i, j + 1) = a_half * (ut - ub) / dy - 0.5 * (ut + ub) * (v(i, j + 1) - v(i, j)) / dy;
    }
  }
}

FluxPair compute_fluxes(const Field& u, const Field& v, const ModelSpec& spec) {
  FluxPair f(u.grid());
  compute_fluxes(u, v, spec, f);
  return f;
}

Field divergence(const FluxPair& fl) {
  const Grid2D& g = fl.grid;
  Field d(g);
  const double dx = g.dx(), dy = g.dy();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      d(i, j) = (fl.x_face(i + 1, j) - fl.x_face(i, j)) / dx + (fl.y_face(i, j + 1) - fl.y_face(i, j)) / dy;
  return d;
}

double stability_bound(const ModelSpec& spec, const Grid2D& grid) {
  const double amax = max_diffusion(spec);
  if (!(amax > 0.0)) return std::numeric_limits<double>::infinity();
  const double h = std::min(grid.dx(), grid.dy());
  return kStabilitySafety * h * h / (2.0 * 2.0 * amax);
}

StabilityCheck check_stability(const ModelSpec& spec, const Grid2D& grid, const RunConfig& config) {
  StabilityCheck c;
  c.dt_max = stability_bound(spec, grid);
  if (config.dt <= c.dt_max) return c;
  std::ostringstream os;
  os << "dt = " << config.dt << " exceeds the explicit stability bound " << c.dt_max;
  c.message = os.str();
  c.status = config.stability == StabilityMode::Strict ? StabilityCheck::Status::Error : StabilityCheck::Status::Warning;
  return c;
}

std::string BlowUpReport::message() const {
  std::ostringstream os;
  os << "blow-up at step " << step << " (t = " << t << "): node (" << i << ", " << j << ") = " << value;
  return os.str();
}

Stepper::Stepper(const ModelSpec& spec, const Grid2D& grid, const RunConfig& config)
    : spec_(spec),
      grid_(grid),
      dt_(config.dt),
      noise_scale_(config.white_noise_scaling ? 1.0 / std::sqrt(grid.cell_area()) : 1.0),
      M_(spec.resolved_trunc_M()),
      clip_(config.clip),
      conv_(build_table(grid, spec), config.backend),
      v_(grid),
      next_(grid),
      flux_(grid),
      a_(grid.size()) {}

std::uint64_t Stepper::step(Field& u, const Field& dW) {
  require_same_grid(u.grid(), grid_, "milstein_step");
  require_same_grid(dW.grid(), grid_, "milstein_step increments");
  const Grid2D& g = grid_;
  const int nx = g.nx, ny = g.ny;
  const double dx = g.dx(), dy = g.dy();

  // Convolution of the current state, once per step.
  conv_.apply(u, v_);

  const std::span<const double> uv = u.values();
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] = diffusion_a(uv[k], spec_);

  const std::span<const double> vv = v_.values();
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    double* fx = &flux_.fx[static_cast<std::size_t>(j) * (nx + 1)];
    fx[0] = 0.0;
    fx[nx] = 0.0;
    for (int i = 0; i + 1 < nx; ++i) {
      const std::size_t l = row + i, r = l + 1;
      fx[i + 1] = 0.5 * (a_[r] + a_[l]) * (uv[r] - uv[l]) / dx - 0.5 * (uv[r] + uv[l]) * (vv[r] - vv[l]) / dx;
    }
  }
  std::fill_n(flux_.fy.begin(), nx, 0.0);
  std::fill_n(flux_.fy.begin() + static_cast<std::ptrdiff_t>(ny) * nx, nx, 0.0);
  for (int j = 0; j + 1 < ny; ++j) {
    double* fy = &flux_.fy[static_cast<std::size_t>(j + 1) * nx];
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    for (int i = 0; i < nx; ++i) {
      const std::size_t b = row + i, t = b + nx;
      fy[i] = 0.5 * (a_[t] + a_[b]) * (uv[t] - uv[b]) / dy - 0.5 * (uv[t] + uv[b]) * (vv[t] - vv[b]) / dy;
    }
  }

  const double dt = dt_;
  const double var = noise_scale_ * noise_scale_ * dt;
  const bool noisy = spec_.noise != NoiseKind::Zero;
  const std::span<double> out = next_.values();
  const std::span<const double> w = dW.values();
  std::uint64_t clamped = 0;
  for (int j = 0; j < ny; ++j) {
    const double* fx = &flux_.fx[static_cast<std::size_t>(j) * (nx + 1)];
    const double* fy0 = &flux_.fy[static_cast<std::size_t>(j) * nx];
    const double* fy1 = fy0 + nx;
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nx + i;
      const double un = uv[k];
      const double lh = (fx[i + 1] - fx[i]) / dx + (fy1[i] - fy0[i]) / dy;
      double next = un + dt * (lh + reaction_truncated(un, spec_, M_));
      if (noisy) {
        const double s = noise_sigma(un, spec_);
        const double dw = noise_scale_ * w[k];
        next += s * dw + 0.5 * s * noise_sigma_prime(un, spec_) * (dw * dw - var);
      }
      if (!std::isfinite(next)) {
        BlowUpReport rep;
        rep.i = i;
        rep.j = j;
        rep.value = next;
        throw BlowUpError(rep);
      }
      if (clip_ == ClipMode::ClipToBounds) {
        if (next < 0.0) {
          next = 0.0;
          ++clamped;
        } else if (next > spec_.ubar) {
          next = spec_.ubar;
          ++clamped;
        }
      }
      out[k] = next;
    }
  }
  std::swap(u.storage(), next_.storage());
  return clamped;
}

Field milstein_step(const Field& u, const Field& dW, const ModelSpec& spec, const RunConfig& config) {
  Stepper s(spec, u.grid(), config);
  Field out = u;
  s.step(out, dW);
  return out;
}

namespace {

struct StepSummary {
  double mass, mn, mx, l2;
};

StepSummary summarize(const Field& u) {
  double m = 0.0, l2 = 0.0;
  double mn = u[0], mx = u[0];
  for (double v : u.values()) {
    m += v;
    l2 += v * v;
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  const double w = u.grid().cell_area();
  return {m * w, mn, mx, l2 * w};
}

}  // namespace

PathResult run_path(const Field& u0, const ModelSpec& spec, const RunConfig& config, RngStream& stream,
                    const std::vector<PathSink*>& sinks) {
  config.check();
  u0.require_finite("initial condition");
  const Grid2D& grid = u0.grid();
  const StabilityCheck sc = check_stability(spec, grid, config);
  if (sc.status == StabilityCheck::Status::Error) throw StabilityError(sc.message);
  if (sc.status == StabilityCheck::Status::Warning) std::clog << "warning: " << sc.message << "\n";

  const std::int64_t nsteps = config.num_steps();
  const std::vector<std::int64_t> rec = config.record_steps();
  std::size_t next_rec = 0;

  PathResult res;
  res.bounds.tol = config.bound_tol;
  res.times.reserve(static_cast<std::size_t>(nsteps) + 1);
  res.mass.reserve(res.times.capacity());
  res.min_u.reserve(res.times.capacity());
  res.max_u.reserve(res.times.capacity());

  Stepper stepper(spec, grid, config);
  BoundMonitor monitor(spec.ubar, config.bound_tol);
  Field u = u0;
  Field dW(grid);
  std::uint64_t clamp_since_record = 0;

  auto observe = [&](std::int64_t n) {
    const double t = static_cast<double>(n) * config.dt;
    const StepSummary s = summarize(u);
    res.times.push_back(t);
    res.mass.push_back(s.mass);
    res.min_u.push_back(s.mn);
    res.max_u.push_back(s.mx);
    res.sup_l2_sq_steps = std::max(res.sup_l2_sq_steps, s.l2);
    monitor.observe(u, t);
    if (next_rec < rec.size() && rec[next_rec] == n) {
      // Report the configured record time rather than n*dt.
      DiagnosticsRow row = evaluate_row(u, spec, config.nu, config.record_times[next_rec], clamp_since_record);
      clamp_since_record = 0;
      res.sup_l2_sq_records = std::max(res.sup_l2_sq_records, row.l2_sq);
      res.records.push_back(row);
      for (PathSink* sink : sinks) sink->record(row, u);
      ++next_rec;
    }
  };

  observe(0);
  for (std::int64_t n = 0; n < nsteps; ++n) {
    res.grad_A_time_integral += config.dt * grad_A_l2_sq(u, spec);
    fill_gaussian(stream, config.dt, dW.values());
    try {
      const std::uint64_t c = stepper.step(u, dW);
      res.clamp_total += c;
      clamp_since_record += c;
    } catch (BlowUpError& e) {
      BlowUpReport rep = e.report;
      rep.step = n + 1;
      rep.t = static_cast<double>(n + 1) * config.dt;
      res.blowup = rep;
      break;
    }
    observe(n + 1);
  }

  for (PathSink* sink : sinks) sink->flush();
  res.bounds = monitor.summary();
  res.final_time = res.times.back();
  res.final_field = std::move(u);
  return res;
}

}  // namespace stochagg
