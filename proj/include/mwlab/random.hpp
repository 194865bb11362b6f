#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mwlab {

/// Philox4x32-10 block function. Stateless: output depends only on the
/// 128-bit counter and 64-bit key.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Independent random streams used by the library; part of the counter so
/// that transitions and Brownian increments never share draws.
enum class Stream : std::uint32_t { Transition = 0, Brownian = 1 };

/// Random numbers addressed by (seed, stream, path_id, step). Two draws with
/// the same address are bit-identical regardless of which thread asks.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  std::uint64_t seed() const {
    return (static_cast<std::uint64_t>(key_[1]) << 32) | key_[0];
  }

  Philox4x32::Counter block(Stream stream, std::uint32_t path_id, std::uint64_t step) const {
    return Philox4x32::apply({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                              path_id, static_cast<std::uint32_t>(stream)},
                             key_);
  }

  /// Two uniforms in (0, 1), 53 bits each.
  std::array<double, 2> uniform2(Stream stream, std::uint32_t path_id, std::uint64_t step) const {
    const auto b = block(stream, path_id, step);
    return {to_open_unit((static_cast<std::uint64_t>(b[0]) << 32) | b[1]),
            to_open_unit((static_cast<std::uint64_t>(b[2]) << 32) | b[3])};
  }

  double uniform(Stream stream, std::uint32_t path_id, std::uint64_t step) const {
    return uniform2(stream, path_id, step)[0];
  }

  /// Two independent standard normals (Box-Muller on one block).
  std::array<double, 2> normal2(Stream stream, std::uint32_t path_id, std::uint64_t step) const {
    const auto [u1, u2] = uniform2(stream, path_id, step);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  static double to_open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  Philox4x32::Key key_;
};

/// Derives the seed of an independent replicate from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  const auto b = Philox4x32::apply({static_cast<std::uint32_t>(index),
                                    static_cast<std::uint32_t>(index >> 32), 0x5eedu, 0x5eedu},
                                   {static_cast<std::uint32_t>(master),
                                    static_cast<std::uint32_t>(master >> 32)});
  return (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
}

}  // namespace mwlab
