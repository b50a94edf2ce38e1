#pragma once

// Counter-based random number generation (Philox4x32-10) and the Gaussian
// noise streams built on top of it.  Every draw is a pure function of
// (seed, stream, step, block), so replicate substreams are reproducible
// bit-for-bit regardless of execution order or thread schedule.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Core>

namespace plmc {

namespace philox {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// One 4x32 block: 10 rounds over a 128-bit counter with a 64-bit key.
inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace philox

// Addressable stream of doubles keyed by (seed, stream).  Normal draws use
// blocks [0, 2^31); uniform draws use blocks [2^31, 2^32) so the two kinds
// never collide at the same step index.
class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, std::uint32_t stream)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  // Two independent N(0,1) draws from one counter block (Box-Muller).
  std::array<double, 2> normal_pair(std::uint64_t step,
                                    std::uint32_t blk) const {
    const auto w = raw(step, blk);
    const std::uint64_t u1 =
        (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
    const std::uint64_t u2 =
        (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
    // u1 mapped into (0,1] so the log is finite; u2 into [0,1).
    const double d1 = static_cast<double>((u1 >> 11) + 1) * 0x1p-53;
    const double d2 = static_cast<double>(u2 >> 11) * 0x1p-53;
    const double rad = std::sqrt(-2.0 * std::log(d1));
    const double ang = 2.0 * std::numbers::pi * d2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
  }

  // Fills out with one standard Gaussian vector for the given step.
  void fill_normals(std::uint64_t step, Eigen::VectorXd& out) const {
    const Eigen::Index p = out.size();
    for (Eigen::Index i = 0; i < p; i += 2) {
      const auto z = normal_pair(step, static_cast<std::uint32_t>(i / 2));
      out[i] = z[0];
      if (i + 1 < p) out[i + 1] = z[1];
    }
  }

  // One uniform draw in the open interval (0,1).
  double uniform(std::uint64_t step, std::uint32_t idx) const {
    const auto w = raw(step, 0x80000000u | idx);
    const std::uint64_t u =
        (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
    return (static_cast<double>(u >> 11) + 0.5) * 0x1p-53;
  }

  std::array<std::uint32_t, 4> raw(std::uint64_t step,
                                   std::uint32_t blk) const {
    return philox::block({static_cast<std::uint32_t>(step),
                          static_cast<std::uint32_t>(step >> 32), blk,
                          stream_},
                         key_);
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_;
};

}  // namespace plmc
