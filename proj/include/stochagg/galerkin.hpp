#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "stochagg/convolution.hpp"
#include "stochagg/grid.hpp"
#include "stochagg/model.hpp"
#include "stochagg/noise.hpp"
#include "stochagg/stepper.hpp"

namespace stochagg {

struct SpectralMode {
  int kx = 0;
  int ky = 0;
  double lambda = 0.0;
};

// Neumann cosine eigenbasis of the rectangle sampled on a grid,
//   l_{kx,ky}(x,y) = c_kx cos(kx pi (x-xmin)/Lx) c_ky cos(ky pi (y-ymin)/Ly),
// c_0 = 1/sqrt(L), c_k = sqrt(2/L). Modes are ordered by eigenvalue, ties by kx.
// Inner products use trapezoidal weights, under which the sampled modes are
// exactly orthonormal (DCT-I).
class SpectralBasis {
 public:
  // Requires 4 * modes_per_axis <= cells on each axis.
  SpectralBasis(const Grid2D& grid, int modes_per_axis);

  const Grid2D& grid() const { return grid_; }
  int modes_per_axis() const { return n_; }
  std::size_t size() const { return modes_.size(); }
  const std::vector<SpectralMode>& modes() const { return modes_; }

  Field mode_field(std::size_t m) const;
  std::vector<double> project(const Field& u) const;
  Field reconstruct(std::span<const double> coeffs) const;
  // Gram matrix of the sampled modes under the basis quadrature.
  Eigen::MatrixXd gram() const;

  // Coefficient vector (sorted order) <-> n x n matrix indexed (kx, ky).
  Eigen::MatrixXd to_matrix(std::span<const double> coeffs) const;
  std::vector<double> from_matrix(const Eigen::MatrixXd& c) const;

  // Grid values (nx x ny, entry (i,j)) of sum c_{kx,ky} l; derivative flags select d/dx or d/dy.
  Eigen::MatrixXd synthesize(const Eigen::MatrixXd& c, bool dx_deriv = false, bool dy_deriv = false) const;
  // <G, l> (or <G, d l/dx>, <G, d l/dy>) for every mode, as an n x n matrix.
  Eigen::MatrixXd analyze(const Eigen::MatrixXd& g, bool dx_deriv = false, bool dy_deriv = false) const;

  // Trapezoidal node weight including dx*dy.
  double weight(int i, int j) const { return wx_(i) * wy_(j); }

 private:
  Grid2D grid_;
  int n_ = 0;
  std::vector<SpectralMode> modes_;
  Eigen::MatrixXd bx_, dx_, by_, dy_;     // n x nx / n x ny samples of 1D modes and derivatives
  Eigen::VectorXd wx_, wy_;               // trapezoid weights times spacing
  Eigen::MatrixXd bxw_, dxw_, byw_, dyw_; // weighted copies for analysis
};

struct GalerkinState {
  std::vector<double> c;
  double epsilon = 0.0;
  double t = 0.0;
};

struct GalerkinOptions {
  int modes_per_axis = 16;
  // Default 1 / (number of retained modes).
  std::optional<double> epsilon;
  // Default: largest dt_run / m below the explicit limit of the projected system.
  std::optional<double> dt;
};

struct GalerkinRhs {
  std::vector<double> drift;
  // sigma(u) on the grid; noise coefficients are <sigma(u) l_l, l_k>.
  Field sigma;
};

// Pseudo-spectral evaluation of the projected drift and noise for one basis.
class GalerkinSystem {
 public:
  GalerkinSystem(const SpectralBasis& basis, const ModelSpec& spec);

  const SpectralBasis& basis() const { return *basis_; }
  double default_epsilon() const { return 1.0 / static_cast<double>(basis_->size()); }

  // drift_k = -<a_eps(u) grad u - u grad(K*u), grad l_k> + <f_M(u), l_k>
  GalerkinRhs rhs(const GalerkinState& state);
  // sum_l <sigma(u) l_l, l_k> dW_l = <sigma(u) * sum_l dW_l l_l, l_k>.
  std::vector<double> noise_increment(const Field& sigma, std::span<const double> dW) const;
  // Full matrix <sigma(u) l_l, l_k>; O(n^2) inner products, for inspection.
  Eigen::MatrixXd noise_coefficients(const GalerkinState& state) const;
  // Explicit step limit 0.9 / ((max a + eps) lambda_max).
  double stable_dt(double epsilon) const;

 private:
  const SpectralBasis* basis_;
  ModelSpec spec_;
  double M_;
  bool kernel_active_;
  std::unique_ptr<FftConvolver> grad_x_, grad_y_;
};

struct GalerkinTrajectory {
  std::vector<double> times;
  std::vector<GalerkinState> states;
  std::vector<Field> fields;
  std::optional<BlowUpReport> blowup;
  double dt = 0.0;
  double epsilon = 0.0;
  bool ok() const { return !blowup.has_value(); }
};

GalerkinState initial_state(const SpectralBasis& basis, const Field& u0, double epsilon);

// Euler-Maruyama on the coefficient system from 0 to config.T, recording
// reconstructed fields at config.record_times.
GalerkinTrajectory run_galerkin(const GalerkinState& state0, GalerkinSystem& system, const RunConfig& config,
                                const GalerkinOptions& options, RngStream& stream);

}  // namespace stochagg
