#pragma once

#include <array>
#include <cstdint>

#include "stochagg/grid.hpp"

namespace stochagg {

inline constexpr const char* kGeneratorVersion = "philox4x32-10/box-muller/v1";

// SplitMix64 finalizer; full 64-bit avalanche.
std::uint64_t mix64(std::uint64_t x);

// One Philox4x32-10 block.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

// Counter-based normal stream. The j-th draw is a pure function of (key, j):
// block j/2 of Philox with counter (j/2 lo, j/2 hi, 0, 0), Box-Muller on its
// two 53-bit uniforms, cosine branch for even j and sine branch for odd j.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(std::uint64_t key) : key_(key) {}

  double next_normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t draws() const { return draws_; }
  // Jump to an absolute draw position.
  void seek(std::uint64_t draw) { draws_ = draw; }

  bool operator==(const RngStream& o) const { return key_ == o.key_ && draws_ == o.draws_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t draws_ = 0;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  double cached_[2] = {0.0, 0.0};
};

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t path_index);

// Independent N(0, dt) per node in Field layout order.
Field gaussian_field(RngStream& stream, const Grid2D& grid, double dt);
void fill_gaussian(RngStream& stream, double dt, std::span<double> out);

// Stateless alternative: increment for (seed, path, step, node), N(0, dt).
double increment_at(std::uint64_t master_seed, std::uint64_t path_index, std::uint64_t step, std::uint64_t node,
                    double dt);

}  // namespace stochagg
