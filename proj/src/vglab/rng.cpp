#include "vglab/rng.hpp"

#include <cmath>

namespace vglab {

namespace {

constexpr std::uint64_t kM0 = 0xD2E7470EE14C6C93ull;
constexpr std::uint64_t kM1 = 0xCA5A826395121157ull;
constexpr std::uint64_t kW0 = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kW1 = 0xBB67AE8584CAA73Bull;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

}  // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t stream)
    : key_{seed, stream},
      counter_{0, 0, 0, 0},
      block_pos_(4),
      cached_normal_(0.0),
      have_cached_normal_(false) {}

void Philox::refill() {
  std::uint64_t c0 = counter_[0], c1 = counter_[1], c2 = counter_[2],
                c3 = counter_[3];
  std::uint64_t k0 = key_[0], k1 = key_[1];
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c0, hi0, lo0);
    mulhilo(kM1, c2, hi1, lo1);
    std::uint64_t n0 = hi1 ^ c1 ^ k0;
    std::uint64_t n1 = lo1;
    std::uint64_t n2 = hi0 ^ c3 ^ k1;
    std::uint64_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += kW0;
    k1 += kW1;
  }
  block_ = {c0, c1, c2, c3};
  block_pos_ = 0;
  // 256-bit little-endian counter increment.
  if (++counter_[0] == 0)
    if (++counter_[1] == 0)
      if (++counter_[2] == 0) ++counter_[3];
}

std::uint64_t Philox::next_u64() {
  if (block_pos_ == 4) refill();
  return block_[block_pos_++];
}

double Philox::next_uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
}

double Philox::next_normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = next_uniform();
  double u2 = next_uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 6.283185307179586477 * u2;
  cached_normal_ = r * std::sin(a);
  have_cached_normal_ = true;
  return r * std::cos(a);
}

void Philox::fill_normals(double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = next_normal();
}

}  // namespace vglab
