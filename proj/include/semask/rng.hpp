#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace semask {

/// xoshiro256** seeded through splitmix64. Used instead of <random>
/// distributions, whose output differs between standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform in [0, n). Requires n > 0.
  std::size_t below(std::size_t n);

  using State = std::array<std::uint64_t, 4>;
  State state() const noexcept { return state_; }
  void set_state(const State& s) noexcept { state_ = s; }

 private:
  State state_;
};

}  // namespace semask
