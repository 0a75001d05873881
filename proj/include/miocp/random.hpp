#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace miocp {

// Deterministic random stream with counter-based substream derivation:
// the sequence is a pure function of (seed, stream_id), so per-path streams
// can be created in any order, or in parallel, and reproduce bit-exactly.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : RandomStream(seed, 0) {}
  RandomStream(std::uint64_t seed, std::uint64_t stream_id)
      : engine_(mix(seed, stream_id)) {}

  // Standard normal via Box-Muller; the cached spare is part of the stream
  // state.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open01();
    const double u2 = uniform_open01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Uniform on (0, 1].
  double uniform_open01() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  static std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream_id) {
    return splitmix64(splitmix64(seed) ^
                      splitmix64(stream_id ^ 0x5851f42d4c957f2dULL));
  }

  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace miocp
