#include "stochagg/noise.hpp"

#include <cmath>
#include <numbers>

namespace stochagg {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// Counter word 2 tags the consumer so streaming and stateless draws never share blocks.
constexpr std::uint32_t kStreamTag = 0u;
constexpr std::uint32_t kStatelessTag = 0x5EEDu;

std::array<std::uint32_t, 2> split_key(std::uint64_t k) {
  return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

// 53-bit uniform in (0, 1].
double to_unit_open_low(std::uint64_t bits) { return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53; }

std::array<double, 2> box_muller(const std::array<std::uint32_t, 4>& r) {
  const std::uint64_t a = (static_cast<std::uint64_t>(r[1]) << 32) | r[0];
  const std::uint64_t b = (static_cast<std::uint64_t>(r[3]) << 32) | r[2];
  const double u1 = to_unit_open_low(a);
  const double u2 = to_unit_open_low(b);
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {rad * std::cos(theta), rad * std::sin(theta)};
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

double RngStream::next_normal() {
  const std::uint64_t block = draws_ >> 1;
  if (block != cached_block_) {
    const auto r = philox4x32({static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), kStreamTag, 0u},
                              split_key(key_));
    const auto z = box_muller(r);
    cached_[0] = z[0];
    cached_[1] = z[1];
    cached_block_ = block;
  }
  return cached_[draws_++ & 1u];
}

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t path_index) {
  return RngStream(mix64(master_seed ^ mix64(path_index ^ 0x6A09E667F3BCC909ull)));
}

void fill_gaussian(RngStream& stream, double dt, std::span<double> out) {
  const double s = std::sqrt(dt);
  for (double& x : out) x = s * stream.next_normal();
}

Field gaussian_field(RngStream& stream, const Grid2D& grid, double dt) {
  Field f(grid);
  fill_gaussian(stream, dt, f.values());
  return f;
}

double increment_at(std::uint64_t master_seed, std::uint64_t path_index, std::uint64_t step, std::uint64_t node,
                    double dt) {
  const RngStream base = derive_stream(master_seed, path_index);
  const auto r = philox4x32({static_cast<std::uint32_t>(node), static_cast<std::uint32_t>(step),
                             static_cast<std::uint32_t>(step >> 32), kStatelessTag ^ static_cast<std::uint32_t>(node >> 32)},
                            split_key(base.key()));
  return std::sqrt(dt) * box_muller(r)[0];
}

}  // namespace stochagg
