#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "boson_owf/bootstrap.hpp"
#include "boson_owf/stats.hpp"

using namespace boson_owf;

namespace {

SampleRecord record_from_counts(const std::vector<std::uint64_t>& counts) {
  SampleRecord r{static_cast<std::uint32_t>(counts.size()), {}};
  for (std::size_t b = 0; b < counts.size(); ++b) r.labels.insert(r.labels.end(), counts[b], b);
  return r;
}

}  // namespace

TEST(Frequencies, Examples) {
  EXPECT_EQ(frequencies({2, {0, 0, 1, 1}}), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(frequencies({5, {3, 3, 3}}), (std::vector<double>{0, 0, 0, 1, 0}));
}

TEST(Frequencies, SecondPassOracle) {
  RngStream rng(3);
  SampleRecord r{13, {}};
  for (int i = 0; i < 5000; ++i) r.labels.push_back(static_cast<BinLabel>(rng.uniform_below(13)));
  const auto f = frequencies(r);
  for (BinLabel b = 0; b < 13; ++b) {
    const auto n = std::count(r.labels.begin(), r.labels.end(), b);
    EXPECT_EQ(f[b], static_cast<double>(n) / 5000.0);
  }
}

TEST(Percentile, Examples) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_EQ(percentile(v, 0.5), 2.0);
  EXPECT_EQ(percentile(v, 1.0), 4.0);
  EXPECT_EQ(percentile(v, 0.0), 1.0);
  EXPECT_EQ(percentile(v, 0.26), 2.0);
  EXPECT_EQ(percentile(v, 0.25), 1.0);
  EXPECT_THROW(percentile(std::vector<double>{}, 0.5), ArgumentError);
  EXPECT_THROW(percentile(v, 1.5), ArgumentError);
}

TEST(Percentile, NoRoundingDriftAtCiLevels) {
  std::vector<double> v(10000);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_EQ(percentile(v, 1.0 - 1e-3 / 2), 9995.0);
  EXPECT_EQ(percentile(v, 1e-3 / 2), 5.0);
}

TEST(Bootstrap, DeltaSample) {
  const auto s = bootstrap_analyze({4, std::vector<BinLabel>(1000, 2)}, 1000, 1e-3, RngStream(1));
  EXPECT_EQ(s.omega[2], 1.0);
  EXPECT_EQ(s.omega_max, 1.0);
  EXPECT_EQ(s.mu_tilde, 2u);
  EXPECT_EQ(s.ci_width, 0.0);
  EXPECT_EQ(s.p_max, 1.0);
}

TEST(Bootstrap, ClearTwoBinSplit) {
  // Flipping the maximum needs a resample with >= 500 draws from a 10% bin;
  // P[Bin(1000, 0.1) >= 500] is far below 1e-100.
  const auto s = bootstrap_analyze(record_from_counts({900, 100}), 10000, 1e-3, RngStream(2));
  EXPECT_GE(s.omega[0], 0.999);
  EXPECT_NEAR(s.p_max, 0.9, 1e-15);
  EXPECT_LE(s.ci_low, 0.9);
  EXPECT_GE(s.ci_high, 0.9);
}

TEST(Bootstrap, OmegaSumsToOneAndMaxIsConsistent) {
  const auto s = bootstrap_analyze(record_from_counts({310, 300, 290, 100}), 2000, 1e-2, RngStream(5));
  EXPECT_NEAR(std::accumulate(s.omega.begin(), s.omega.end(), 0.0), 1.0, 1e-12);
  EXPECT_EQ(s.omega_max, *std::max_element(s.omega.begin(), s.omega.end()));
  EXPECT_EQ(s.omega[s.mu_tilde], s.omega_max);
  EXPECT_GT(s.omega[1], 0.0);  // close runner-up wins some resamples
  EXPECT_GE(s.ci_width, 0.0);
  EXPECT_NEAR(s.ci_high - s.ci_low, s.ci_width, 1e-15);
}

TEST(Bootstrap, MpbSequenceOnRequest) {
  const auto rec = record_from_counts({50, 60, 40});
  const auto s = bootstrap_analyze(rec, 500, 0.1, RngStream(1), {ResampleMethod::Indices, true, 1});
  ASSERT_EQ(s.mpb_sequence.size(), 500u);
  std::vector<double> omega(3, 0.0);
  for (auto l : s.mpb_sequence) omega[l] += 1.0 / 500;
  for (int b = 0; b < 3; ++b) EXPECT_NEAR(omega[b], s.omega[b], 1e-12);
  EXPECT_TRUE(bootstrap_analyze(rec, 500, 0.1, RngStream(1)).mpb_sequence.empty());
}

TEST(Bootstrap, PermutationInvariance) {
  RngStream gen(8);
  SampleRecord rec{6, {}};
  const std::vector<double> p{0.1, 0.05, 0.45, 0.15, 0.15, 0.1};
  const AliasSampler sampler(p);
  rec = draw_bins(sampler, 3000, gen);
  const std::vector<BinLabel> pi{4, 0, 5, 1, 3, 2};
  SampleRecord permuted{6, rec.labels};
  for (auto& l : permuted.labels) l = pi[l];
  const BootstrapOptions opts{ResampleMethod::Indices, false, 1};
  const auto a = bootstrap_analyze(rec, 1000, 1e-2, RngStream(4), opts);
  const auto b = bootstrap_analyze(permuted, 1000, 1e-2, RngStream(4), opts);
  EXPECT_EQ(b.mu_tilde, pi[a.mu_tilde]);
  EXPECT_EQ(b.mpb_empirical, pi[a.mpb_empirical]);
  EXPECT_EQ(a.ci_width, b.ci_width);
  EXPECT_EQ(a.ci_low, b.ci_low);
  for (BinLabel l = 0; l < 6; ++l) EXPECT_EQ(b.omega[pi[l]], a.omega[l]);
}

TEST(Bootstrap, ThreadCountDoesNotMatter) {
  const auto rec = record_from_counts({500, 480, 20});
  for (auto method : {ResampleMethod::Indices, ResampleMethod::Multinomial}) {
    const auto a = bootstrap_analyze(rec, 3000, 1e-3, RngStream(6), {method, true, 1});
    const auto b = bootstrap_analyze(rec, 3000, 1e-3, RngStream(6), {method, true, 3});
    EXPECT_EQ(a.mpb_sequence, b.mpb_sequence);
    EXPECT_EQ(a.ci_low, b.ci_low);
    EXPECT_EQ(a.ci_high, b.ci_high);
  }
}

// Indices and Multinomial resampling produce the same law of bootstrap
// counts; compare the resulting Omega and CI-width statistics.
TEST(Bootstrap, ResampleMethodsAgreeInDistribution) {
  const auto rec = record_from_counts({520, 500, 300, 180});
  std::vector<double> omega_idx, omega_mul, width_idx, width_mul;
  for (int r = 0; r < 40; ++r) {
    const auto a = bootstrap_analyze(rec, 1000, 0.05, RngStream(100 + r), {ResampleMethod::Indices, false, 1});
    const auto b = bootstrap_analyze(rec, 1000, 0.05, RngStream(900 + r), {ResampleMethod::Multinomial, false, 1});
    omega_idx.push_back(a.omega[0]);
    omega_mul.push_back(b.omega[0]);
    width_idx.push_back(a.ci_width);
    width_mul.push_back(b.ci_width);
  }
  EXPECT_NEAR(stats::mean(omega_idx), stats::mean(omega_mul), 0.02);
  EXPECT_NEAR(stats::mean(width_idx), stats::mean(width_mul), 0.1 * stats::mean(width_idx));
}

TEST(Bootstrap, CiWidthShrinksWithSampleSize) {
  const std::vector<double> p{0.3, 0.2, 0.2, 0.15, 0.15};
  std::vector<double> sizes, widths;
  for (std::uint64_t n : {1000u, 10000u, 100000u, 1000000u}) {
    std::vector<double> w;
    for (int r = 0; r < 30; ++r) {
      RngStream draw(7, 1000 * n + r);
      const auto counts = draw_bin_counts(p, n, draw);
      w.push_back(bootstrap_from_counts(counts, {}, 1000, 1e-3, RngStream(8, r)).ci_width);
    }
    sizes.push_back(static_cast<double>(n));
    widths.push_back(stats::median(w));
  }
  for (std::size_t i = 1; i < widths.size(); ++i) EXPECT_LT(widths[i], widths[i - 1]);
  const auto fit = stats::fit_power_law(sizes, widths);
  EXPECT_GT(fit.alpha, 0.0);
  EXPECT_GT(fit.beta, 0.0);
  EXPECT_LT(fit.beta, 1.0);
}

// Omega concentrates on the true MPB once the gap is resolved: with gap
// 0.05 at p ~ 0.3 and N = 5000 the bootstrap difference sits ~5 sigma out.
TEST(Bootstrap, OmegaConcentratesOnTrueMpb) {
  const std::vector<double> p{0.25, 0.3, 0.25, 0.2};
  int hits = 0;
  for (int r = 0; r < 50; ++r) {
    RngStream draw(31, r);
    const auto counts = draw_bin_counts(p, 5000, draw);
    const auto s = bootstrap_from_counts(counts, {}, 1000, 1e-3, RngStream(32, r));
    hits += s.mu_tilde == 1 && s.omega[1] >= 0.9;
  }
  EXPECT_GE(hits, 45);
}

TEST(Bootstrap, Errors) {
  const auto rec = record_from_counts({3, 4});
  EXPECT_THROW(bootstrap_analyze(rec, 99, 0.1, RngStream(1)), ArgumentError);
  EXPECT_THROW(bootstrap_analyze(rec, 100, 0.0, RngStream(1)), ArgumentError);
  EXPECT_THROW(bootstrap_analyze({2, {}}, 100, 0.1, RngStream(1)), ValidationError);
  const std::vector<std::uint64_t> counts{3, 4};
  EXPECT_THROW(bootstrap_from_counts(counts, {}, 100, 0.1, RngStream(1), {ResampleMethod::Indices, false, 1}),
               ArgumentError);
}
