#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "boson_owf/experiments.hpp"
#include "boson_owf/mpb_estimator.hpp"

using namespace boson_owf;

namespace {

Algo1Params small_params(std::uint64_t m, std::uint64_t dn, std::uint32_t rounds, double xi = 1e-2) {
  Algo1Params p;
  p.num_bootstraps = m;
  p.delta_n = dn;
  p.max_rounds = rounds;
  p.xi = xi;
  p.threads = 1;
  return p;
}

Algo1Outcome ended(BinLabel label) {
  Algo1Outcome o;
  o.status = Algo1Status::End;
  o.mu_tilde = label;
  o.rounds_used = 1;
  o.total_samples = 10;
  return o;
}

Algo1Outcome aborted() {
  Algo1Outcome o;
  o.rounds_used = 3;
  o.total_samples = 30;
  return o;
}

// Exact binomial pmf via lgamma.
double binom_pmf(std::uint64_t n, std::uint64_t k, double p) {
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double lg = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(lg + k * std::log(p) + (n - k) * std::log1p(-p));
}

// Probability that a bootstrap resample of n draws with n0 zeros makes label
// 0 the winner (ties to the smaller label): P[Bin(n, n0/n) >= n/2].
double omega_zero(std::uint64_t n, std::uint64_t n0) {
  const double p = static_cast<double>(n0) / n;
  double total = 0.0;
  for (std::uint64_t x = (n + 1) / 2; x <= n; ++x) total += binom_pmf(n, x, p);
  return total;
}

// Upper bound on P[some round of a fair two-bin run has max Omega >= level],
// summing the per-round probability over rounds. By symmetry the label-1 side
// doubles the label-0 side (ties only help label 0, so this still bounds it).
double fair_split_end_bound(std::uint64_t delta_n, std::uint32_t rounds, double level) {
  double bound = 0.0;
  for (std::uint32_t l = 1; l <= rounds; ++l) {
    const std::uint64_t n = l * delta_n;
    // Omega_0 is increasing in n0; find the first n0 that clears the level.
    std::uint64_t threshold = n / 2;
    while (threshold <= n && omega_zero(n, threshold) < level) ++threshold;
    double tail = 0.0;
    for (std::uint64_t k = threshold; k <= n; ++k) tail += binom_pmf(n, k, 0.5);
    bound += 2.0 * tail;
  }
  return bound;
}

}  // namespace

TEST(EstimateMpb, DeltaEndsInFirstRound) {
  const AliasSampler source(std::vector<double>{0.0, 0.0, 1.0, 0.0});
  const auto out = estimate_mpb(source, 4, small_params(200, 1000, 5), RngStream(1));
  EXPECT_EQ(out.status, Algo1Status::End);
  ASSERT_TRUE(out.mu_tilde.has_value());
  EXPECT_EQ(*out.mu_tilde, 2u);
  EXPECT_EQ(out.rounds_used, 1u);
  EXPECT_EQ(out.total_samples, 1000u);
  EXPECT_EQ(out.omega_max, 1.0);
}

TEST(EstimateMpb, FairSplitAborts) {
  const AliasSampler source(std::vector<double>{0.5, 0.5});
  const auto params = small_params(10000, 20000, 3);
  const auto single = estimate_mpb(source, 2, params, RngStream(2));
  EXPECT_EQ(single.status, Algo1Status::Abort);
  EXPECT_FALSE(single.mu_tilde.has_value());
  EXPECT_EQ(single.rounds_used, 3u);
  EXPECT_EQ(single.total_samples, 60000u);

  // Slack from 0.99 to 0.985 covers five sigma of Monte-Carlo error at M = 1e4.
  const double end_bound = fair_split_end_bound(20000, 3, 0.985);
  ASSERT_LT(end_bound, 0.12);
  int aborts = 0;
  constexpr int runs = 200;
  for (int r = 0; r < runs; ++r) {
    aborts += estimate_mpb(source, 2, params, RngStream(3, r)).status == Algo1Status::Abort;
  }
  const double floor = 1.0 - end_bound;
  EXPECT_GE(aborts / double(runs), floor - 3.0 * std::sqrt(floor * (1 - floor) / runs));
}

TEST(EstimateMpb, SourceFailureIsNotAnAbort) {
  const FunctionSource throwing([](std::span<BinLabel>, RngStream&) {
    throw std::runtime_error("detector offline");
  });
  EXPECT_THROW(estimate_mpb(throwing, 3, small_params(100, 200, 2), RngStream(1)), SourceError);

  const FunctionSource out_of_range([](std::span<BinLabel> out, RngStream&) {
    for (auto& l : out) l = 7;
  });
  EXPECT_THROW(estimate_mpb(out_of_range, 3, small_params(100, 200, 2), RngStream(1)), SourceError);
}

TEST(EstimateMpb, BudgetLawAndStopRule) {
  const AliasSampler source(std::vector<double>{0.26, 0.25, 0.25, 0.24});
  for (int r = 0; r < 10; ++r) {
    const auto params = small_params(500, 1000, 8);
    const auto out = estimate_mpb(source, 4, params, RngStream(40, r));
    EXPECT_LE(out.total_samples, params.budget());
    EXPECT_EQ(out.total_samples, out.rounds_used * params.delta_n);
    ASSERT_EQ(out.omega_history.size(), out.rounds_used);
    for (std::size_t l = 0; l + 1 < out.omega_history.size(); ++l) {
      EXPECT_LT(out.omega_history[l], 1.0 - params.xi);
    }
    const bool accepted = out.omega_history.back() >= 1.0 - params.xi;
    EXPECT_EQ(out.status == Algo1Status::End, accepted);
    EXPECT_EQ(out.mu_tilde.has_value(), accepted);
  }
}

TEST(EstimateMpb, ReproducibleAndMethodsBothWork) {
  const AliasSampler source(std::vector<double>{0.1, 0.5, 0.4});
  auto params = small_params(300, 1000, 6);
  const auto a = estimate_mpb(source, 3, params, RngStream(9));
  const auto b = estimate_mpb(source, 3, params, RngStream(9));
  EXPECT_EQ(a.omega_history, b.omega_history);
  params.method = ResampleMethod::Indices;
  const auto c = estimate_mpb(source, 3, params, RngStream(9));
  EXPECT_EQ(c.status, Algo1Status::End);
  EXPECT_EQ(*c.mu_tilde, 1u);
}

TEST(EstimateMpb, ParameterValidation) {
  const AliasSampler source(std::vector<double>{1.0});
  EXPECT_THROW(estimate_mpb(source, 1, small_params(99, 1000, 1), RngStream(1)), ArgumentError);
  EXPECT_THROW(estimate_mpb(source, 1, small_params(100, 100, 1), RngStream(1)), ArgumentError);
  EXPECT_THROW(estimate_mpb(source, 1, small_params(100, 200, 0), RngStream(1)), ArgumentError);
  EXPECT_THROW(estimate_mpb(source, 1, small_params(100, 200, 1, 0.5), RngStream(1)), ArgumentError);
  EXPECT_THROW(estimate_mpb(source, 0, small_params(100, 200, 1), RngStream(1)), ArgumentError);
}

TEST(MajorityVote, Examples) {
  const std::vector<Algo1Outcome> same{ended(4), ended(4), ended(4)};
  auto v = majority_vote(same);
  EXPECT_EQ(v.status, Algo1Status::End);
  EXPECT_EQ(*v.mu_tilde, 4u);
  EXPECT_EQ(v.total_samples, 30u);

  const std::vector<Algo1Outcome> two_one{ended(1), ended(1), ended(2)};
  v = majority_vote(two_one);
  EXPECT_EQ(v.status, Algo1Status::End);
  EXPECT_EQ(*v.mu_tilde, 1u);

  const std::vector<Algo1Outcome> split{ended(1), ended(2), aborted()};
  v = majority_vote(split);
  EXPECT_EQ(v.status, Algo1Status::Abort);
  EXPECT_FALSE(v.mu_tilde.has_value());

  // Two of five is a plurality, not a majority.
  const std::vector<Algo1Outcome> plurality{ended(3), ended(3), ended(1), aborted(), aborted()};
  EXPECT_EQ(majority_vote(plurality).status, Algo1Status::Abort);
  EXPECT_THROW(majority_vote(std::span<const Algo1Outcome>{}), ArgumentError);
}

TEST(MajorityVote, Wrapper) {
  const AliasSampler source(std::vector<double>{0.0, 1.0});
  const auto v = estimate_mpb_majority(source, 2, small_params(100, 200, 2), 3, RngStream(5));
  EXPECT_EQ(v.status, Algo1Status::End);
  EXPECT_EQ(*v.mu_tilde, 1u);
  EXPECT_EQ(v.total_samples, 600u);
  EXPECT_THROW(estimate_mpb_majority(source, 2, small_params(100, 200, 2), 4, RngStream(5)),
               ArgumentError);
  EXPECT_THROW(estimate_mpb_majority(source, 2, small_params(100, 200, 2), 1, RngStream(5)),
               ArgumentError);
}

TEST(RecommendedBudget, Examples) {
  EXPECT_EQ(recommended_budget(1), Rank{180000});
  const long double oracle = std::ceil(1.8e5L * std::pow(51.0L, 3.5L));
  EXPECT_EQ(static_cast<long double>(recommended_budget(51)), oracle);
  EXPECT_NEAR(static_cast<double>(recommended_budget(51)), 1.7e11, 0.01e11);
  Rank prev = 0;
  for (std::uint32_t d = 1; d <= 2000; ++d) {
    const Rank b = recommended_budget(d);
    ASSERT_GT(b, prev);
    prev = b;
  }
  EXPECT_THROW(recommended_budget(0), ArgumentError);
  EXPECT_THROW(recommended_budget(4000000000u), CapacityError);
}

TEST(StatusProbabilities, Delta) {
  const auto coarse = make_coarse({0.0, 1.0, 0.0});
  const auto s = status_probabilities(coarse, small_params(100, 200, 2), 20, RngStream(1));
  EXPECT_EQ(s.p_success, 1.0);
  EXPECT_EQ(s.p_failure, 0.0);
  EXPECT_EQ(s.p_inconclusive, 0.0);
}

TEST(StatusProbabilities, FairCoinTinyBudgetIsInconclusive) {
  const auto coarse = make_coarse({0.5, 0.5});
  const auto s = status_probabilities(coarse, small_params(500, 1000, 1), 200, RngStream(2));
  EXPECT_GE(s.p_inconclusive, 0.9);
  EXPECT_EQ(s.successes + s.failures + s.aborts, s.repetitions);
  EXPECT_EQ(s.p_success + s.p_failure + s.p_inconclusive, 1.0);
}

TEST(StatusProbabilities, AccountingAndThreads) {
  const auto coarse = make_coarse({0.3, 0.28, 0.22, 0.2});
  const auto params = small_params(500, 2000, 4);
  const auto a = status_probabilities(coarse, params, 40, RngStream(3), 1);
  const auto b = status_probabilities(coarse, params, 40, RngStream(3), 3);
  EXPECT_EQ(a.successes + a.failures + a.aborts, 40u);
  EXPECT_EQ(a.samples_used, b.samples_used);
  EXPECT_EQ(a.successes, b.successes);
  EXPECT_THROW(status_probabilities(coarse, params, 0, RngStream(3)), ArgumentError);
}

// p_? falls and p_s rises as the round cap grows, with p_f at the xi level.
TEST(StatusProbabilities, ConvergesWithBudget) {
  const auto coarse = make_coarse({0.22, 0.2, 0.2, 0.19, 0.19});
  const auto report = experiments::fig4(coarse, small_params(1000, 2000, 1), {1, 4, 16, 64}, 100,
                                        RngStream(4));
  const auto& rows = report["rows"];
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LE(rows[i]["p_inconclusive"].get<double>(), rows[i - 1]["p_inconclusive"].get<double>() + 0.05);
    EXPECT_GE(rows[i]["p_s"].get<double>(), rows[i - 1]["p_s"].get<double>() - 0.05);
  }
  EXPECT_GE(rows[0]["p_inconclusive"].get<double>(), 0.8);
  EXPECT_GE(rows[3]["p_s"].get<double>(), 0.9);
  for (const auto& row : rows) EXPECT_LE(row["p_f"].get<double>(), 0.05);
}

// Sweep d for one unitary and input: the budget needed for p_s = 1 tracks 1/gap,
// and never exceeds the recommended budget.
TEST(RequiredBudget, TracksInverseGapAndStaysUnderRecommendation) {
  const auto u = haar_random_unitary(15, 11);
  const experiments::Scale scale{15, 3, 51, BinStrategy::ContiguousBlocks};
  const auto report = experiments::fig10(u, scale, 16, {2, 3, 5, 8, 13, 21, 34, 51},
                                         small_params(500, 2000, 100), 10, RngStream(6));
  ASSERT_FALSE(report["spearman_inverse_gap_vs_budget"].is_null());
  EXPECT_GT(report["spearman_inverse_gap_vs_budget"].get<double>(), 0.5);
  int resolved = 0;
  for (const auto& row : report["rows"]) {
    if (row["required_budget"].is_null()) continue;
    ++resolved;
    EXPECT_LE(row["required_budget"].get<double>(), row["recommended_budget"].get<double>());
  }
  EXPECT_GE(resolved, 3);
}
