#pragma once
#include <array>
#include <cstdint>

namespace vglab {

// Philox4x64-10 counter-based generator. A (key, counter) pair maps to four
// 64-bit words through ten bijective rounds; streams never overlap as long as
// their keys differ. Stream keying convention used across the project:
//
//   key0 = master seed
//   key1 = stream id = (purpose << 48) | (T index << 32) | replication
//
// so replication r of horizon index ti under purpose p is an independent
// stream regardless of thread scheduling: results depend only on (seed, id).
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream);

  // Next raw 64-bit word.
  std::uint64_t next_u64();

  // Uniform on (0,1): ((x >> 11) + 0.5) * 2^-53, never exactly 0 or 1.
  double next_uniform();

  // Standard normal via Box-Muller; generates pairs, returns them in order.
  double next_normal();

  // Fill an array with standard normals.
  void fill_normals(double* out, std::size_t n);

 private:
  void refill();

  std::uint64_t key_[2];
  std::uint64_t counter_[4];
  std::array<std::uint64_t, 4> block_;
  int block_pos_;

  double cached_normal_;
  bool have_cached_normal_;
};

// Stream-id packing helpers (see keying convention above).
constexpr std::uint64_t stream_id(std::uint64_t purpose, std::uint64_t t_index,
                                  std::uint64_t replication) {
  return (purpose << 48) | ((t_index & 0xffffu) << 32) |
         (replication & 0xffffffffu);
}

// Purpose tags; keep stable, they are part of the reproducibility contract.
enum : std::uint64_t {
  kStreamPaths = 1,        // Monte Carlo path simulation
  kStreamPairSamples = 2,  // correlated pair sampling (product-formula checks)
  kStreamStepFns = 3,      // random step-function generation
  kStreamMisc = 4,
};

}  // namespace vglab
