#include "stochagg/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace stochagg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void sample_axis(int n, int nodes, double lo, double hi, MatrixXd& b, MatrixXd& d, VectorXd& w) {
  const double L = hi - lo;
  const double h = L / (nodes - 1);
  b.resize(n, nodes);
  d.resize(n, nodes);
  w.resize(nodes);
  for (int i = 0; i < nodes; ++i) w(i) = (i == 0 || i == nodes - 1) ? 0.5 * h : h;
  for (int k = 0; k < n; ++k) {
    const double c = k == 0 ? 1.0 / std::sqrt(L) : std::sqrt(2.0 / L);
    const double omega = k * std::numbers::pi / L;
    for (int i = 0; i < nodes; ++i) {
      const double s = omega * (i * h);
      b(k, i) = c * std::cos(s);
      d(k, i) = -c * omega * std::sin(s);
    }
  }
}

Eigen::Map<const MatrixXd> as_matrix(const Field& f) {
  return Eigen::Map<const MatrixXd>(f.values().data(), f.grid().nx, f.grid().ny);
}

Field to_field(const Grid2D& g, const MatrixXd& m) {
  Field f(g);
  Eigen::Map<MatrixXd>(f.values().data(), g.nx, g.ny) = m;
  return f;
}

}  // namespace

SpectralBasis::SpectralBasis(const Grid2D& grid, int modes_per_axis) : grid_(grid), n_(modes_per_axis) {
  if (n_ < 1) throw std::invalid_argument("galerkin: need at least one mode per axis");
  if (4 * n_ > grid.cells_x() || 4 * n_ > grid.cells_y()) {
    std::ostringstream os;
    os << "galerkin: " << n_ << " modes per axis need at least " << 4 * n_ << " cells per axis (grid has "
       << grid.cells_x() << "x" << grid.cells_y() << ")";
    throw std::invalid_argument(os.str());
  }
  sample_axis(n_, grid.nx, grid.xmin, grid.xmax, bx_, dx_, wx_);
  sample_axis(n_, grid.ny, grid.ymin, grid.ymax, by_, dy_, wy_);
  bxw_ = bx_ * wx_.asDiagonal();
  dxw_ = dx_ * wx_.asDiagonal();
  byw_ = by_ * wy_.asDiagonal();
  dyw_ = dy_ * wy_.asDiagonal();

  const double lx = grid.xmax - grid.xmin, ly = grid.ymax - grid.ymin;
  modes_.reserve(static_cast<std::size_t>(n_) * n_);
  for (int kx = 0; kx < n_; ++kx)
    for (int ky = 0; ky < n_; ++ky) {
      const double ax = kx * std::numbers::pi / lx, ay = ky * std::numbers::pi / ly;
      modes_.push_back({kx, ky, ax * ax + ay * ay});
    }
  std::stable_sort(modes_.begin(), modes_.end(), [](const SpectralMode& a, const SpectralMode& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.kx < b.kx;
  });
}

Field SpectralBasis::mode_field(std::size_t m) const {
  const SpectralMode& md = modes_.at(m);
  Field f(grid_);
  for (int j = 0; j < grid_.ny; ++j)
    for (int i = 0; i < grid_.nx; ++i) f(i, j) = bx_(md.kx, i) * by_(md.ky, j);
  return f;
}

MatrixXd SpectralBasis::to_matrix(std::span<const double> coeffs) const {
  if (coeffs.size() != modes_.size()) throw std::invalid_argument("galerkin: coefficient count mismatch");
  MatrixXd c = MatrixXd::Zero(n_, n_);
  for (std::size_t m = 0; m < modes_.size(); ++m) c(modes_[m].kx, modes_[m].ky) = coeffs[m];
  return c;
}

std::vector<double> SpectralBasis::from_matrix(const MatrixXd& c) const {
  std::vector<double> out(modes_.size());
  for (std::size_t m = 0; m < modes_.size(); ++m) out[m] = c(modes_[m].kx, modes_[m].ky);
  return out;
}

MatrixXd SpectralBasis::synthesize(const MatrixXd& c, bool dx_deriv, bool dy_deriv) const {
  const MatrixXd& bx = dx_deriv ? dx_ : bx_;
  const MatrixXd& by = dy_deriv ? dy_ : by_;
  return bx.transpose() * c * by;
}

MatrixXd SpectralBasis::analyze(const MatrixXd& g, bool dx_deriv, bool dy_deriv) const {
  const MatrixXd& bx = dx_deriv ? dxw_ : bxw_;
  const MatrixXd& by = dy_deriv ? dyw_ : byw_;
  return bx * g * by.transpose();
}

std::vector<double> SpectralBasis::project(const Field& u) const {
  require_same_grid(u.grid(), grid_, "galerkin project");
  return from_matrix(analyze(as_matrix(u)));
}

Field SpectralBasis::reconstruct(std::span<const double> coeffs) const {
  return to_field(grid_, synthesize(to_matrix(coeffs)));
}

MatrixXd SpectralBasis::gram() const {
  const std::size_t n = modes_.size();
  MatrixXd g(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      const SpectralMode &ma = modes_[a], &mb = modes_[b];
      const double gx = (bx_.row(ma.kx).array() * bx_.row(mb.kx).array() * wx_.transpose().array()).sum();
      const double gy = (by_.row(ma.ky).array() * by_.row(mb.ky).array() * wy_.transpose().array()).sum();
      g(a, b) = g(b, a) = gx * gy;
    }
  return g;
}

GalerkinSystem::GalerkinSystem(const SpectralBasis& basis, const ModelSpec& spec)
    : basis_(&basis), spec_(spec), M_(spec.resolved_trunc_M()), kernel_active_(spec.kernel != KernelKind::Disabled) {
  if (!kernel_active_) return;
  const Grid2D& g = basis.grid();
  // Keep the gradient tables consistent with build_table's normalization and cutoff.
  const double scale = build_table(g, spec).at(0, 0) / kernel_value(0.0, 0.0);
  const double cutoff = spec.kernel_cutoff;
  auto grad = [scale, cutoff](double x, double y, double dir) {
    if (cutoff > 0.0 && x * x + y * y > cutoff * cutoff) return 0.0;
    return -dir * scale * kernel_value(x, y);
  };
  grad_x_ = std::make_unique<FftConvolver>(sample_table(g, [&](double x, double y) { return grad(x, y, x); }));
  grad_y_ = std::make_unique<FftConvolver>(sample_table(g, [&](double x, double y) { return grad(x, y, y); }));
}

GalerkinRhs GalerkinSystem::rhs(const GalerkinState& state) {
  const SpectralBasis& b = *basis_;
  const Grid2D& g = b.grid();
  const MatrixXd c = b.to_matrix(state.c);
  const MatrixXd u = b.synthesize(c);
  if (!u.allFinite()) throw std::domain_error("galerkin: non-finite reconstruction");
  const MatrixXd ux = b.synthesize(c, true, false);
  const MatrixXd uy = b.synthesize(c, false, true);

  MatrixXd gx(g.nx, g.ny), gy(g.nx, g.ny), fm(g.nx, g.ny);
  GalerkinRhs out;
  out.sigma = Field(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double uij = u(i, j);
      const double a = diffusion_a(uij, spec_) + state.epsilon;
      gx(i, j) = a * ux(i, j);
      gy(i, j) = a * uy(i, j);
      fm(i, j) = reaction_truncated(uij, spec_, M_);
      out.sigma(i, j) = noise_sigma(uij, spec_);
    }

  if (kernel_active_) {
    // Trapezoidal quadrature inside the convolution: pre-weight the density.
    Field weighted(g);
    const double area = g.cell_area();
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) weighted(i, j) = u(i, j) * b.weight(i, j) / area;
    const Field vx = grad_x_->apply(weighted);
    const Field vy = grad_y_->apply(weighted);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        gx(i, j) -= u(i, j) * vx(i, j);
        gy(i, j) -= u(i, j) * vy(i, j);
      }
  }

  const MatrixXd drift = -b.analyze(gx, true, false) - b.analyze(gy, false, true) + b.analyze(fm);
  out.drift = b.from_matrix(drift);
  return out;
}

std::vector<double> GalerkinSystem::noise_increment(const Field& sigma, std::span<const double> dW) const {
  const SpectralBasis& b = *basis_;
  const MatrixXd w = b.synthesize(b.to_matrix(dW));
  const MatrixXd prod = as_matrix(sigma).array() * w.array();
  return b.from_matrix(b.analyze(prod));
}

MatrixXd GalerkinSystem::noise_coefficients(const GalerkinState& state) const {
  const SpectralBasis& b = *basis_;
  const MatrixXd u = b.synthesize(b.to_matrix(state.c));
  MatrixXd s(u.rows(), u.cols());
  for (Eigen::Index k = 0; k < u.size(); ++k) s(k) = noise_sigma(u(k), spec_);
  const std::size_t n = b.size();
  MatrixXd out(n, n);
  std::vector<double> unit(n, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    unit[l] = 1.0;
    const MatrixXd prod = s.array() * b.synthesize(b.to_matrix(unit)).array();
    const std::vector<double> col = b.from_matrix(b.analyze(prod));
    for (std::size_t k = 0; k < n; ++k) out(k, l) = col[k];
    unit[l] = 0.0;
  }
  return out;
}

double GalerkinSystem::stable_dt(double epsilon) const {
  double lmax = 0.0;
  for (const auto& m : basis_->modes()) lmax = std::max(lmax, m.lambda);
  const double a = max_diffusion(spec_) + epsilon;
  if (!(lmax > 0.0) || !(a > 0.0)) return std::numeric_limits<double>::infinity();
  return 0.9 / (a * lmax);
}

GalerkinState initial_state(const SpectralBasis& basis, const Field& u0, double epsilon) {
  GalerkinState s;
  s.c = basis.project(u0);
  s.epsilon = epsilon;
  s.t = 0.0;
  return s;
}

GalerkinTrajectory run_galerkin(const GalerkinState& state0, GalerkinSystem& system, const RunConfig& config,
                                const GalerkinOptions& options, RngStream& stream) {
  config.check();
  GalerkinTrajectory traj;
  traj.epsilon = state0.epsilon;

  double dt = 0.0;
  if (options.dt) {
    dt = *options.dt;
  } else if (config.T > 0.0) {
    const double limit = system.stable_dt(state0.epsilon);
    const double m = std::max(1.0, std::ceil(config.dt / limit));
    dt = config.dt / m;
  }
  RunConfig inner = config;
  if (config.T > 0.0) {
    inner.dt = dt;
    inner.check();
  }
  traj.dt = dt;

  const SpectralBasis& basis = system.basis();
  const std::int64_t nsteps = inner.num_steps();
  const std::vector<std::int64_t> rec = inner.record_steps();
  std::size_t next_rec = 0;

  GalerkinState s = state0;
  std::vector<double> dW(basis.size());
  auto record = [&](std::int64_t n) {
    if (next_rec < rec.size() && rec[next_rec] == n) {
      traj.times.push_back(config.record_times[next_rec]);
      traj.states.push_back(s);
      traj.fields.push_back(basis.reconstruct(s.c));
      ++next_rec;
    }
  };

  record(0);
  for (std::int64_t n = 0; n < nsteps; ++n) {
    GalerkinRhs r;
    try {
      r = system.rhs(s);
    } catch (const std::domain_error&) {
      traj.blowup = BlowUpReport{n, s.t, -1, -1, std::numeric_limits<double>::quiet_NaN()};
      break;
    }
    std::vector<double> next = s.c;
    for (std::size_t k = 0; k < next.size(); ++k) next[k] += dt * r.drift[k];
    {
      // One increment per mode every step, whether or not sigma vanishes.
      fill_gaussian(stream, dt, dW);
      const bool any_sigma = std::any_of(r.sigma.values().begin(), r.sigma.values().end(),
                                         [](double v) { return v != 0.0; });
      if (any_sigma) {
        const std::vector<double> inc = system.noise_increment(r.sigma, dW);
        for (std::size_t k = 0; k < next.size(); ++k) next[k] += inc[k];
      }
    }
    const auto bad = std::find_if(next.begin(), next.end(), [](double v) { return !std::isfinite(v); });
    if (bad != next.end()) {
      traj.blowup = BlowUpReport{n + 1, (n + 1) * dt, static_cast<int>(bad - next.begin()), -1, *bad};
      break;
    }
    s.c = std::move(next);
    s.t = static_cast<double>(n + 1) * dt;
    record(n + 1);
  }
  return traj;
}

}  // namespace stochagg
