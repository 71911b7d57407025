#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "boson_owf/errors.hpp"

namespace boson_owf {

/// Index of a configuration inside the configuration space. 128 bits so that
/// C(M, N) stays representable well past desk scale.
using Rank = unsigned __int128;
using Port = std::uint32_t;
using BinLabel = std::uint32_t;

inline std::string to_string(Rank value) {
  if (value == 0) return "0";
  std::string digits;
  while (value != 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  return {digits.rbegin(), digits.rend()};
}

inline Rank parse_rank(std::string_view text) {
  if (text.empty()) throw ArgumentError("empty rank string");
  constexpr Rank kMax = ~Rank{0};
  Rank value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw ArgumentError("rank must be a decimal string");
    const auto digit = static_cast<unsigned>(c - '0');
    if (value > (kMax - digit) / 10) throw CapacityError("rank exceeds 128 bits");
    value = value * 10 + digit;
  }
  return value;
}

/// C(n, k) in 128 bits; throws CapacityError on overflow.
inline Rank binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  Rank result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // result * (n - k + i) / i is exact at every step; divide out the gcd
    // first so the intermediate product fits whenever the result does.
    Rank numerator = n - k + i;
    Rank denominator = i;
    Rank g = result;
    Rank b = denominator;
    while (b != 0) {
      const Rank t = g % b;
      g = b;
      b = t;
    }
    const Rank reduced = result / g;
    denominator /= g;
    numerator /= denominator;  // exact: denominator now divides numerator
    if (numerator != 0 && reduced > (~Rank{0}) / numerator) {
      throw CapacityError("binomial coefficient C(" + std::to_string(n) + ", " +
                          std::to_string(k) + ") exceeds 128 bits");
    }
    result = reduced * numerator;
  }
  return result;
}

/// Strictly increasing tuple of occupied ports.
struct Configuration {
  std::vector<Port> ports;

  [[nodiscard]] std::size_t size() const noexcept { return ports.size(); }
  bool operator==(const Configuration&) const = default;
  auto operator<=>(const Configuration&) const = default;
};

/// |S| = C(M, N); throws CapacityError past 128 bits.
inline Rank space_size(std::uint32_t modes, std::uint32_t bosons) {
  if (bosons < 1 || bosons > modes) {
    throw ArgumentError("space_size requires 1 <= N <= M");
  }
  return binomial(modes, bosons);
}

/// n = N * (floor(log2 M) + 1): bits needed to write down the occupied ports.
inline std::uint64_t bit_length(std::uint32_t modes, std::uint32_t bosons) {
  if (modes < 1 || bosons < 1) throw ArgumentError("bit_length requires M, N >= 1");
  std::uint64_t port_bits = 0;
  for (std::uint32_t m = modes; m != 0; m >>= 1) ++port_bits;
  return static_cast<std::uint64_t>(bosons) * port_bits;
}

/// The set of collision-free N-boson configurations over M ports, ordered
/// lexicographically and identified with Z_|S| through rank()/unrank().
class ConfigSpace {
 public:
  ConfigSpace(std::uint32_t modes, std::uint32_t bosons)
      : modes_(modes), bosons_(bosons), size_(space_size(modes, bosons)) {
    // Pascal table C(x, k) for x <= M, k <= N. Entries rank/unrank touch are
    // bounded by |S|; the rest saturate instead of wrapping.
    table_.assign(static_cast<std::size_t>(modes_ + 1) * (bosons_ + 1), 0);
    constexpr Rank kSaturated = ~Rank{0};
    for (std::uint32_t x = 0; x <= modes_; ++x) {
      at(x, 0) = 1;
      for (std::uint32_t k = 1; k <= std::min(x, bosons_); ++k) {
        const Rank a = at(x - 1, k - 1);
        const Rank b = k <= x - 1 ? at(x - 1, k) : 0;
        at(x, k) = a > kSaturated - b ? kSaturated : a + b;
      }
    }
  }

  [[nodiscard]] std::uint32_t modes() const noexcept { return modes_; }
  [[nodiscard]] std::uint32_t bosons() const noexcept { return bosons_; }
  [[nodiscard]] Rank size() const noexcept { return size_; }

  /// Size as a 64-bit count; throws when the space cannot be enumerated.
  [[nodiscard]] std::uint64_t size_u64() const {
    if (size_ > Rank{UINT64_MAX}) throw CapacityError("|S| exceeds 64 bits");
    return static_cast<std::uint64_t>(size_);
  }

  [[nodiscard]] Rank choose(std::uint32_t x, std::uint32_t k) const noexcept {
    if (k > x || x > modes_ || k > bosons_) return 0;
    return table_[static_cast<std::size_t>(x) * (bosons_ + 1) + k];
  }

  void validate(const Configuration& cfg) const {
    if (cfg.ports.size() != bosons_) {
      throw ValidationError("configuration has " + std::to_string(cfg.ports.size()) +
                            " ports, expected " + std::to_string(bosons_));
    }
    for (std::size_t i = 0; i < cfg.ports.size(); ++i) {
      if (cfg.ports[i] >= modes_) {
        throw ValidationError("port " + std::to_string(cfg.ports[i]) +
                              " outside [0, " + std::to_string(modes_) + ")");
      }
      if (i > 0 && cfg.ports[i] <= cfg.ports[i - 1]) {
        throw ValidationError("configuration ports must be strictly increasing");
      }
    }
  }

  /// Lexicographic position, via the combinatorial number system applied to
  /// the reflected tuple (M-1-s_N, ..., M-1-s_1).
  [[nodiscard]] Rank rank(const Configuration& cfg) const {
    validate(cfg);
    Rank colex = 0;
    for (std::uint32_t i = 0; i < bosons_; ++i) {
      colex += choose(modes_ - 1 - cfg.ports[i], bosons_ - i);
    }
    return size_ - 1 - colex;
  }

  [[nodiscard]] Configuration unrank(Rank index) const {
    if (index >= size_) {
      throw BoundsError("rank " + to_string(index) + " outside [0, " +
                        to_string(size_) + ")");
    }
    Configuration cfg;
    cfg.ports.resize(bosons_);
    Rank remaining = size_ - 1 - index;
    std::uint32_t x = modes_;
    for (std::uint32_t i = 0; i < bosons_; ++i) {
      const std::uint32_t k = bosons_ - i;
      // Largest x with C(x, k) <= remaining; x strictly decreases with i.
      do {
        --x;
      } while (choose(x, k) > remaining);
      remaining -= choose(x, k);
      cfg.ports[i] = modes_ - 1 - x;
    }
    return cfg;
  }

  [[nodiscard]] Configuration first() const {
    Configuration cfg;
    cfg.ports.resize(bosons_);
    for (std::uint32_t i = 0; i < bosons_; ++i) cfg.ports[i] = i;
    return cfg;
  }

  /// Advances to the lexicographic successor; false once past the last one.
  bool next(Configuration& cfg) const noexcept {
    std::uint32_t i = bosons_;
    while (i > 0) {
      --i;
      if (cfg.ports[i] < modes_ - bosons_ + i) {
        ++cfg.ports[i];
        for (std::uint32_t j = i + 1; j < bosons_; ++j) cfg.ports[j] = cfg.ports[j - 1] + 1;
        return true;
      }
    }
    return false;
  }

 private:
  Rank& at(std::uint32_t x, std::uint32_t k) {
    return table_[static_cast<std::size_t>(x) * (bosons_ + 1) + k];
  }

  std::uint32_t modes_;
  std::uint32_t bosons_;
  Rank size_;
  std::vector<Rank> table_;
};

enum class BinStrategy { ContiguousBlocks, RankModulo };

inline std::string_view to_string(BinStrategy strategy) {
  return strategy == BinStrategy::ContiguousBlocks ? "contiguous" : "modulo";
}

inline BinStrategy parse_bin_strategy(std::string_view name) {
  if (name == "contiguous") return BinStrategy::ContiguousBlocks;
  if (name == "modulo") return BinStrategy::RankModulo;
  throw ArgumentError("unknown binning strategy '" + std::string(name) + "'");
}

/// Partition of Z_|S| into d bins whose sizes differ by at most one.
struct BinningScheme {
  std::uint32_t bins = 1;
  BinStrategy strategy = BinStrategy::ContiguousBlocks;

  void validate(const ConfigSpace& space) const {
    if (bins < 1 || Rank{bins} > space.size()) {
      throw ArgumentError("number of bins must satisfy 1 <= d <= |S|");
    }
  }
};

inline BinLabel bin_of(Rank index, const ConfigSpace& space, const BinningScheme& scheme) {
  if (index >= space.size()) throw BoundsError("rank outside the configuration space");
  if (scheme.strategy == BinStrategy::RankModulo) {
    return static_cast<BinLabel>(index % scheme.bins);
  }
  if (index != 0 && scheme.bins > (~Rank{0}) / index) {
    throw CapacityError("rank * d overflows 128 bits");
  }
  return static_cast<BinLabel>(index * scheme.bins / space.size());
}

/// Number of ranks falling into each bin.
inline std::vector<Rank> bin_sizes(const ConfigSpace& space, const BinningScheme& scheme) {
  scheme.validate(space);
  const Rank total = space.size();
  const Rank d = scheme.bins;
  std::vector<Rank> sizes(scheme.bins);
  for (std::uint32_t b = 0; b < scheme.bins; ++b) {
    if (scheme.strategy == BinStrategy::RankModulo) {
      sizes[b] = total / d + (Rank{b} < total % d ? 1 : 0);
    } else {
      // Bin b holds the ranks i with b*|S| <= i*d < (b+1)*|S|.
      auto ceil_div = [](Rank a, Rank b2) { return (a + b2 - 1) / b2; };
      sizes[b] = ceil_div((Rank{b} + 1) * total, d) - ceil_div(Rank{b} * total, d);
    }
  }
  return sizes;
}

}  // namespace boson_owf
