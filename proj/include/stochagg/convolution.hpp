#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "stochagg/grid.hpp"
#include "stochagg/model.hpp"

namespace stochagg {

enum class ConvBackend { Direct, Fft };
std::string_view to_string(ConvBackend b);
std::optional<ConvBackend> parse_conv_backend(std::string_view s);

// Kernel samples K(p*dx, q*dy) for p in [-(nx-1), nx-1], q in [-(ny-1), ny-1].
class KernelTable {
 public:
  KernelTable() = default;
  KernelTable(const Grid2D& grid, std::vector<double> values);

  const Grid2D& grid() const { return grid_; }
  int max_px() const { return grid_.nx - 1; }
  int max_py() const { return grid_.ny - 1; }
  int width() const { return 2 * max_px() + 1; }
  int height() const { return 2 * max_py() + 1; }
  double at(int p, int q) const { return values_[static_cast<std::size_t>(q + max_py()) * width() + (p + max_px())]; }
  const std::vector<double>& values() const { return values_; }

 private:
  Grid2D grid_;
  std::vector<double> values_;
};

// Samples an arbitrary kernel on the offset lattice of grid.
KernelTable sample_table(const Grid2D& grid, const std::function<double(double, double)>& kernel);

// Normalized Gaussian table for the spec; all zeros when the kernel is disabled.
// Applies the optional radial cutoff and the discrete-sum normalization flag.
KernelTable build_table(const Grid2D& grid, const ModelSpec& spec);

// v_ij = sum_pq K_{i-p, j-q} u_pq dx dy, O((nx ny)^2).
Field convolve_direct(const Field& u, const KernelTable& table);

// Same sum through a zero-padded FFT (no wrap-around). Owns its plans and
// workspace; one instance per worker.
class FftConvolver {
 public:
  explicit FftConvolver(const KernelTable& table);
  ~FftConvolver();
  FftConvolver(FftConvolver&&) noexcept;
  FftConvolver& operator=(FftConvolver&&) noexcept;
  FftConvolver(const FftConvolver&) = delete;
  FftConvolver& operator=(const FftConvolver&) = delete;

  const Grid2D& grid() const;
  int padded_x() const;
  int padded_y() const;

  void apply(const Field& u, Field& out);
  Field apply(const Field& u);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Field convolve_fft(const Field& u, const KernelTable& table);

// Smallest 2^a 3^b 5^c 7^d >= n.
int fft_friendly_size(int n);

// Backend-agnostic evaluator for v = K * u, reused across steps.
class Convolver {
 public:
  Convolver(const KernelTable& table, ConvBackend backend);
  // Disabled kernel: apply() yields zeros without work.
  bool active() const { return active_; }
  void apply(const Field& u, Field& out);

 private:
  KernelTable table_;
  ConvBackend backend_;
  bool active_ = true;
  std::unique_ptr<FftConvolver> fft_;
};

}  // namespace stochagg
