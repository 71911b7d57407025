#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <vector>

#include "boson_owf/config_space.hpp"
#include "boson_owf/rng.hpp"

using namespace boson_owf;

namespace {

// Binomial by direct product in long double; exact well past the sizes used.
long double product_binomial(unsigned n, unsigned k) {
  long double r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST(SpaceSize, DirectProductOracle) {
  EXPECT_EQ(space_size(10, 4), Rank{210});
  EXPECT_EQ(static_cast<long double>(space_size(10, 4)), product_binomial(10, 4));
  for (unsigned m = 1; m <= 60; ++m) {
    for (unsigned n = 1; n <= std::min(m, 12u); ++n) {
      EXPECT_EQ(static_cast<long double>(space_size(m, n)), std::round(product_binomial(m, n)));
    }
  }
}

TEST(SpaceSize, DiluteLimitBound) {
  EXPECT_EQ(space_size(26, 3), Rank{2600});
  EXPECT_GE(2600.0, std::pow(26.0 / 3.0, 3));
}

TEST(SpaceSize, FullConfiguration) {
  for (unsigned m = 1; m <= 50; ++m) EXPECT_EQ(space_size(m, m), Rank{1});
}

TEST(SpaceSize, Errors) {
  EXPECT_THROW(space_size(5, 0), ArgumentError);
  EXPECT_THROW(space_size(5, 6), ArgumentError);
  EXPECT_THROW(space_size(400, 200), CapacityError);
}

TEST(SpaceSize, WideButRepresentable) {
  // C(441, 21) ~ 1e35 still fits in 128 bits (N = 21, M = N^2).
  const Rank s = space_size(441, 21);
  EXPECT_NEAR(std::log10(static_cast<double>(s)), std::log10(product_binomial(441, 21)), 1e-9);
}

TEST(Rank, SmallExamples) {
  const ConfigSpace space(4, 2);
  EXPECT_EQ(space.rank(Configuration{{0, 1}}), Rank{0});
  EXPECT_EQ(space.rank(Configuration{{1, 2}}), Rank{3});
  EXPECT_EQ(space.rank(Configuration{{2, 3}}), Rank{5});
  const std::vector<Configuration> listed = {{{0, 1}}, {{0, 2}}, {{0, 3}},
                                             {{1, 2}}, {{1, 3}}, {{2, 3}}};
  for (std::size_t i = 0; i < listed.size(); ++i) {
    EXPECT_EQ(space.rank(listed[i]), Rank{i});
    EXPECT_EQ(space.unrank(i), listed[i]);
  }
}

TEST(Unrank, FirstConfiguration) {
  const ConfigSpace space(26, 3);
  EXPECT_EQ(space.unrank(0), (Configuration{{0, 1, 2}}));
  EXPECT_EQ(space.unrank(0), space.first());
  EXPECT_EQ(space.unrank(2599), (Configuration{{23, 24, 25}}));
}

TEST(Unrank, RoundTrip10x4) {
  const ConfigSpace space(10, 4);
  for (Rank r = 0; r < 210; ++r) EXPECT_EQ(space.rank(space.unrank(r)), r);
}

// Every (M, N) with M <= 100 and |S| <= 1e5, walked in lexicographic order
// with next(): the walk index must equal rank, and unrank must invert it.
TEST(Rank, ExhaustiveBijectionAndMonotonicity) {
  std::size_t spaces = 0;
  for (std::uint32_t m = 1; m <= 100; ++m) {
    for (std::uint32_t n = 1; n <= m; ++n) {
      if (binomial(m, n) > Rank{100000}) continue;
      const ConfigSpace space(m, n);
      Configuration cfg = space.first();
      Configuration prev = cfg;
      std::uint64_t index = 0;
      do {
        ASSERT_EQ(space.rank(cfg), Rank{index}) << "M=" << m << " N=" << n;
        ASSERT_EQ(space.unrank(index), cfg);
        if (index > 0) ASSERT_TRUE(std::lexicographical_compare(prev.ports.begin(), prev.ports.end(),
                                                                cfg.ports.begin(), cfg.ports.end()));
        prev = cfg;
        ++index;
      } while (space.next(cfg));
      ASSERT_EQ(Rank{index}, space.size());
      ++spaces;
    }
  }
  EXPECT_EQ(spaces, 795u);  // every qualifying (M, N) pair was walked
}

TEST(Rank, WideSpaceRoundTrip) {
  const ConfigSpace space(441, 21);
  RngStream rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    Configuration cfg;
    std::vector<Port> all(441);
    for (Port p = 0; p < 441; ++p) all[p] = p;
    for (int i = 0; i < 21; ++i) {
      const auto j = i + rng.uniform_below(441 - i);
      std::swap(all[i], all[j]);
      cfg.ports.push_back(all[i]);
    }
    std::sort(cfg.ports.begin(), cfg.ports.end());
    EXPECT_EQ(space.unrank(space.rank(cfg)), cfg);
  }
  EXPECT_EQ(space.rank(space.unrank(space.size() - 1)), space.size() - 1);
}

TEST(Rank, ValidationErrors) {
  const ConfigSpace space(5, 2);
  EXPECT_THROW((void)space.rank(Configuration{{2, 1}}), ValidationError);
  EXPECT_THROW((void)space.rank(Configuration{{1, 1}}), ValidationError);
  EXPECT_THROW((void)space.rank(Configuration{{1, 5}}), ValidationError);
  EXPECT_THROW((void)space.rank(Configuration{{1}}), ValidationError);
  EXPECT_THROW((void)space.unrank(10), BoundsError);
}

TEST(BitLength, Examples) {
  EXPECT_EQ(bit_length(26, 3), 15u);
  EXPECT_EQ(bit_length(10, 4), 16u);
  EXPECT_EQ(bit_length(1, 1), 1u);
}

TEST(RankText, RoundTrip) {
  const Rank big = space_size(441, 21);
  EXPECT_EQ(parse_rank(to_string(big)), big);
  EXPECT_EQ(to_string(Rank{0}), "0");
  EXPECT_THROW(parse_rank("12x"), ArgumentError);
  EXPECT_THROW(parse_rank(""), ArgumentError);
}

TEST(BinOf, Examples) {
  const ConfigSpace space(26, 3);
  EXPECT_EQ(bin_of(0, space, {51, BinStrategy::ContiguousBlocks}), 0u);
  EXPECT_EQ(bin_of(0, space, {51, BinStrategy::RankModulo}), 0u);
  EXPECT_EQ(bin_of(2599, space, {51, BinStrategy::ContiguousBlocks}), 50u);
  EXPECT_EQ(bin_of(2599, space, {51, BinStrategy::RankModulo}), 2599u % 51);
  EXPECT_THROW(bin_of(2600, space, {51, BinStrategy::ContiguousBlocks}), BoundsError);
}

TEST(BinOf, CensusFor2600By51) {
  const ConfigSpace space(26, 3);
  for (auto strategy : {BinStrategy::ContiguousBlocks, BinStrategy::RankModulo}) {
    std::vector<std::uint64_t> census(51, 0);
    for (Rank r = 0; r < 2600; ++r) ++census[bin_of(r, space, {51, strategy})];
    for (auto c : census) EXPECT_TRUE(c == 50 || c == 51);
  }
}

TEST(BinOf, PartitionPropertyAndSizes) {
  RngStream rng(17);
  for (int rep = 0; rep < 40; ++rep) {
    const std::uint32_t m = 3 + static_cast<std::uint32_t>(rng.uniform_below(20));
    const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.uniform_below(std::min(m, 4u)));
    const ConfigSpace space(m, n);
    const auto total = space.size_u64();
    const auto d = 1 + static_cast<std::uint32_t>(rng.uniform_below(std::min<std::uint64_t>(total, 200)));
    for (auto strategy : {BinStrategy::ContiguousBlocks, BinStrategy::RankModulo}) {
      const BinningScheme scheme{d, strategy};
      std::vector<std::uint64_t> census(d, 0);
      for (std::uint64_t r = 0; r < total; ++r) {
        const auto b = bin_of(r, space, scheme);
        ASSERT_LT(b, d);
        ++census[b];
      }
      const auto sizes = bin_sizes(space, scheme);
      for (std::uint32_t b = 0; b < d; ++b) {
        EXPECT_EQ(Rank{census[b]}, sizes[b]);
        EXPECT_TRUE(census[b] == total / d || census[b] == (total + d - 1) / d);
      }
    }
  }
}

TEST(BinOf, ContiguousIsMonotone) {
  const ConfigSpace space(15, 3);
  const BinningScheme scheme{31, BinStrategy::ContiguousBlocks};
  for (Rank r = 1; r < space.size(); ++r) {
    EXPECT_GE(bin_of(r, space, scheme), bin_of(r - 1, space, scheme));
  }
}

TEST(BinningScheme, Validation) {
  const ConfigSpace space(4, 2);
  EXPECT_THROW(BinningScheme({0, BinStrategy::ContiguousBlocks}).validate(space), ArgumentError);
  EXPECT_THROW(BinningScheme({7, BinStrategy::ContiguousBlocks}).validate(space), ArgumentError);
  EXPECT_NO_THROW(BinningScheme({6, BinStrategy::RankModulo}).validate(space));
  EXPECT_EQ(parse_bin_strategy("modulo"), BinStrategy::RankModulo);
  EXPECT_THROW(parse_bin_strategy("zigzag"), ArgumentError);
}
