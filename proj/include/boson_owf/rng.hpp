#pragma once

#include <cstdint>
#include <limits>

namespace boson_owf {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

constexpr std::uint64_t mix_pair(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t s = a ^ rotl(b, 17) ^ 0x6a09e667f3bcc909ULL;
  std::uint64_t first = splitmix64(s);
  s ^= b;
  return first ^ splitmix64(s);
}

}  // namespace detail

/// Reproducible random stream keyed by (seed, stream_id).
///
/// The generator is xoshiro256** whose state is expanded from the key with
/// splitmix64. Child streams are derived by hashing a child index into the
/// stream id, so each parallel task can own an independent stream whose
/// contents do not depend on scheduling. Satisfies
/// std::uniform_random_bit_generator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t sm = detail::mix_pair(seed, stream_id);
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Independent stream for sub-task `child`; does not advance this stream.
  [[nodiscard]] RngStream derive(std::uint64_t child) const noexcept {
    return RngStream(seed_, detail::mix_pair(stream_id_, child + 1));
  }

  /// Uniform integer in [0, bound) by Lemire's multiply-shift rejection.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_[4]{};
};

}  // namespace boson_owf
