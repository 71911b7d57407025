#pragma once

// Data drivers behind `boson_owf experiment <name>`. Each returns a JSON
// document holding the series needed to re-plot one figure; nothing here
// plots.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "boson_owf/bootstrap.hpp"
#include "boson_owf/boson_dist.hpp"
#include "boson_owf/config_space.hpp"
#include "boson_owf/io.hpp"
#include "boson_owf/matrix.hpp"
#include "boson_owf/mpb_estimator.hpp"
#include "boson_owf/owf.hpp"
#include "boson_owf/rng.hpp"
#include "boson_owf/sampler.hpp"
#include "boson_owf/security.hpp"
#include "boson_owf/stats.hpp"

namespace boson_owf::experiments {

using io::Json;

/// Seed of the i-th unitary in a multi-unitary experiment.
inline std::uint64_t unitary_seed(std::uint64_t base, std::uint64_t index) {
  return detail::mix_pair(base, index);
}

struct Scale {
  std::uint32_t modes = 26;
  std::uint32_t bosons = 3;
  std::uint32_t bins = 51;
  BinStrategy strategy = BinStrategy::ContiguousBlocks;

  [[nodiscard]] ConfigSpace space() const { return {modes, bosons}; }
  [[nodiscard]] BinningScheme scheme() const { return {bins, strategy}; }
};

/// Exact coarse distribution for one input of `u`.
inline CoarseDistribution coarse_for(const UnitaryMatrix& u, const Scale& scale, Rank input_rank,
                                     unsigned threads = 0) {
  const ConfigSpace space = scale.space();
  const auto dist = exact_output_distribution(u, space, space.unrank(input_rank),
                                              kDefaultEnumerationCap, threads);
  return coarse_grain(dist, scale.scheme());
}

/// Original-sample counts drawn directly from the coarse distribution. Same
/// law as counting `size` alias draws, at O(d) cost.
inline std::vector<std::uint64_t> sample_counts(const CoarseDistribution& coarse, std::uint64_t size,
                                                RngStream& rng) {
  return draw_bin_counts(coarse.probs, size, rng);
}

// fig1: bootstrap CIs of P_max and per-bin frequencies at a few sample sizes.
inline Json fig1(const CoarseDistribution& coarse, const std::vector<std::uint64_t>& sizes,
                 std::uint64_t num_bootstraps, double gamma, const RngStream& rng,
                 unsigned threads = 0) {
  Json out;
  out["exact"] = io::to_json(coarse);
  Json rows = Json::array();
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    RngStream draw = rng.derive(2 * i);
    const auto counts = sample_counts(coarse, sizes[i], draw);
    const auto summary =
        bootstrap_from_counts(counts, {}, num_bootstraps, gamma, rng.derive(2 * i + 1),
                              {ResampleMethod::Multinomial, false, threads});
    std::vector<double> freq(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b) {
      freq[b] = static_cast<double>(counts[b]) / static_cast<double>(sizes[i]);
    }
    Json row;
    row["sample_size"] = sizes[i];
    row["frequencies"] = freq;
    row["summary"] = io::to_json(summary);
    row["covers_true_p_max"] = summary.ci_low <= coarse.p_max && coarse.p_max <= summary.ci_high;
    rows.push_back(std::move(row));
  }
  out["rows"] = std::move(rows);
  return out;
}

struct WidthScaling {
  std::vector<std::uint64_t> sizes;
  std::vector<double> width_min, width_median, width_max;
  std::vector<double> coverage;  // fraction of runs whose CI holds the true P_max
  stats::PowerLawFit fit;        // on the medians
};

// fig2: CI width against sample size, `runs` independent samples per size.
inline WidthScaling ci_width_scaling(const CoarseDistribution& coarse,
                                     const std::vector<std::uint64_t>& sizes, std::uint64_t runs,
                                     std::uint64_t num_bootstraps, double gamma,
                                     const RngStream& rng, unsigned threads = 0) {
  WidthScaling result;
  result.sizes = sizes;
  std::vector<double> xs;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    std::vector<double> widths(runs);
    std::vector<char> covered(runs);
    parallel_for(
        runs,
        [&](std::size_t r) {
          const RngStream base = rng.derive(i).derive(r);
          RngStream draw = base.derive(0);
          const auto counts = sample_counts(coarse, sizes[i], draw);
          const auto s = bootstrap_from_counts(counts, {}, num_bootstraps, gamma, base.derive(1),
                                               {ResampleMethod::Multinomial, false, 1});
          widths[r] = s.ci_width;
          covered[r] = s.ci_low <= coarse.p_max && coarse.p_max <= s.ci_high;
        },
        threads);
    result.width_min.push_back(*std::min_element(widths.begin(), widths.end()));
    result.width_max.push_back(*std::max_element(widths.begin(), widths.end()));
    result.width_median.push_back(stats::median(widths));
    std::uint64_t hits = 0;
    for (char c : covered) hits += c != 0;
    result.coverage.push_back(static_cast<double>(hits) / static_cast<double>(runs));
    xs.push_back(static_cast<double>(sizes[i]));
  }
  if (sizes.size() >= 2) result.fit = stats::fit_power_law(xs, result.width_median);
  return result;
}

inline Json to_json(const WidthScaling& w) {
  Json out;
  out["sample_sizes"] = w.sizes;
  out["ci_width_min"] = w.width_min;
  out["ci_width_median"] = w.width_median;
  out["ci_width_max"] = w.width_max;
  out["coverage"] = w.coverage;
  out["fit"] = {{"alpha", w.fit.alpha}, {"beta", w.fit.beta}};
  return out;
}

// fig3: distribution of Omega_beta over `runs` samples of one size.
inline Json fig3(const CoarseDistribution& coarse, std::uint64_t size, std::uint64_t runs,
                 std::uint64_t num_bootstraps, const RngStream& rng, unsigned threads = 0) {
  std::vector<std::vector<double>> omega(runs);
  parallel_for(
      runs,
      [&](std::size_t r) {
        const RngStream base = rng.derive(r);
        RngStream draw = base.derive(0);
        const auto counts = sample_counts(coarse, size, draw);
        omega[r] = bootstrap_from_counts(counts, {}, num_bootstraps, 1e-3, base.derive(1),
                                         {ResampleMethod::Multinomial, false, 1})
                       .omega;
      },
      threads);
  Json bins = Json::array();
  for (BinLabel b = 0; b < coarse.bins; ++b) {
    std::vector<double> column(runs);
    for (std::size_t r = 0; r < runs; ++r) column[r] = omega[r][b];
    bins.push_back({{"bin", b},
                    {"probability", coarse.probs[b]},
                    {"q1", stats::quantile(column, 0.25)},
                    {"median", stats::quantile(column, 0.5)},
                    {"q3", stats::quantile(column, 0.75)},
                    {"min", stats::quantile(column, 0.0)},
                    {"max", stats::quantile(column, 1.0)}});
  }
  Json out;
  out["sample_size"] = size;
  out["runs"] = runs;
  out["mpb_label"] = coarse.mpb_label;
  out["bins"] = std::move(bins);
  return out;
}

// fig4: p_s, p_f, p_? as the round cap L (hence the budget) grows.
inline Json fig4(const CoarseDistribution& coarse, Algo1Params params,
                 const std::vector<std::uint32_t>& round_caps, std::uint64_t repetitions,
                 const RngStream& rng, unsigned threads = 0) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < round_caps.size(); ++i) {
    params.max_rounds = round_caps[i];
    const auto s = status_probabilities(coarse, params, repetitions, rng.derive(i), threads);
    Json row = io::to_json(s);
    row["max_rounds"] = round_caps[i];
    row["budget"] = params.budget();
    rows.push_back(std::move(row));
  }
  Json out;
  out["gap"] = coarse.gap;
  out["delta_n"] = params.delta_n;
  out["num_bootstraps"] = params.num_bootstraps;
  out["xi"] = params.xi;
  out["rows"] = std::move(rows);
  return out;
}

struct EpsCensus {
  std::vector<double> eps;
  std::vector<std::vector<double>> fraction;  // [unitary][eps]
  std::vector<double> q_max;
  std::vector<double> q_mean;
  std::vector<double> bound;  // 2 d eps^0.8
};

// fig5: fraction of inputs with an eps-close runner-up, over many unitaries.
inline EpsCensus eps_census(const Scale& scale, std::uint64_t unitaries,
                            const std::vector<double>& eps, std::uint64_t seed,
                            unsigned threads = 0) {
  EpsCensus result;
  result.eps = eps;
  const ConfigSpace space = scale.space();
  for (std::uint64_t i = 0; i < unitaries; ++i) {
    const auto u = haar_random_unitary(scale.modes, unitary_seed(seed, i));
    const auto table = build_coarse_table(u, space, scale.scheme(), kDefaultEnumerationCap, threads);
    std::vector<double> row;
    for (double e : eps) row.push_back(eps_close_fraction(table, e));
    result.fraction.push_back(std::move(row));
  }
  for (std::size_t k = 0; k < eps.size(); ++k) {
    double hi = 0.0, sum = 0.0;
    for (const auto& row : result.fraction) {
      hi = std::max(hi, row[k]);
      sum += row[k];
    }
    result.q_max.push_back(hi);
    result.q_mean.push_back(result.fraction.empty() ? 0.0 : sum / result.fraction.size());
    result.bound.push_back(2.0 * scale.bins * std::pow(eps[k], 0.8));
  }
  return result;
}

inline Json to_json(const EpsCensus& c) {
  Json out;
  out["eps"] = c.eps;
  out["q_max"] = c.q_max;
  out["q_mean"] = c.q_mean;
  out["bound_2d_eps08"] = c.bound;
  out["per_unitary"] = c.fraction;
  return out;
}

/// Full-domain exact outputs of F for a seeded unitary.
inline std::vector<std::uint64_t> full_domain(const Scale& scale, std::uint64_t unitary_seed_value,
                                              unsigned threads = 0) {
  OwfParams params;
  params.unitary = std::make_shared<const UnitaryMatrix>(
      haar_random_unitary(scale.modes, unitary_seed_value));
  params.bosons = scale.bosons;
  params.scheme = scale.scheme();
  params.mode = OwfMode::Exact;
  return evaluate_exact_full_domain(params, threads);
}

struct CensusSweep {
  std::vector<CollisionReport> reports;
  double image_fraction_mean = 0.0;
  double image_fraction_spread = 0.0;  // (max - min) / mean
  std::uint64_t nu_max = 0;            // over all unitaries
};

// fig7: collision census over several unitaries.
inline CensusSweep census_sweep(const Scale& scale, std::uint64_t unitaries, std::uint64_t seed,
                                unsigned threads = 0) {
  CensusSweep sweep;
  std::vector<double> fractions;
  for (std::uint64_t i = 0; i < unitaries; ++i) {
    const auto outputs = full_domain(scale, unitary_seed(seed, i), threads);
    auto report = collision_census(outputs);
    fractions.push_back(static_cast<double>(report.image_size) / report.space_size);
    sweep.nu_max = std::max(sweep.nu_max, report.nu_max);
    sweep.reports.push_back(std::move(report));
  }
  if (!fractions.empty()) {
    sweep.image_fraction_mean = stats::mean(fractions);
    const auto [lo, hi] = std::minmax_element(fractions.begin(), fractions.end());
    sweep.image_fraction_spread = (*hi - *lo) / sweep.image_fraction_mean;
  }
  return sweep;
}

inline Json to_json(const CensusSweep& s) {
  Json out;
  Json per = Json::array();
  for (const auto& r : s.reports) per.push_back(io::to_json(r));
  out["per_unitary"] = std::move(per);
  out["image_fraction_mean"] = s.image_fraction_mean;
  out["image_fraction_spread"] = s.image_fraction_spread;
  out["nu_max"] = s.nu_max;
  return out;
}

// fig9: birthday attack pooled over several unitaries, `repetitions` each.
inline BirthdayReport birthday_sweep(const Scale& scale, std::uint64_t unitaries,
                                     std::uint64_t repetitions, std::uint64_t seed,
                                     unsigned threads = 0) {
  std::vector<std::optional<std::uint64_t>> theta;
  std::uint64_t size = 0;
  const RngStream rng(seed, 9);
  for (std::uint64_t i = 0; i < unitaries; ++i) {
    const auto outputs = full_domain(scale, unitary_seed(seed, i), threads);
    size = outputs.size();
    const auto report = birthday_simulate(std::span<const std::uint64_t>(outputs), repetitions,
                                          rng.derive(i), threads);
    theta.insert(theta.end(), report.theta.begin(), report.theta.end());
  }
  return summarize_birthday(size, std::move(theta));
}

struct BudgetPoint {
  std::uint32_t bins = 0;
  double gap = 0.0;
  double p_max = 0.0;
  /// Smallest budget at which every realization ended with the true MPB;
  /// nullopt if some realization failed or never ended within the cap.
  std::optional<std::uint64_t> required_budget;
  std::uint64_t failures = 0;
  std::uint64_t aborts = 0;
  double recommended = 0.0;
};

/// Runs estimate_mpb `repetitions` times with a generous round cap. A run with
/// a smaller cap is a prefix of the same run, so the smallest budget giving
/// p_s = 1 is the largest END sample count, provided every END is correct.
inline BudgetPoint required_budget(const CoarseDistribution& coarse, const Algo1Params& params,
                                   std::uint64_t repetitions, const RngStream& rng,
                                   unsigned threads = 0) {
  const auto s = status_probabilities(coarse, params, repetitions, rng, threads);
  BudgetPoint point;
  point.bins = coarse.bins;
  point.gap = coarse.gap;
  point.p_max = coarse.p_max;
  point.failures = s.failures;
  point.aborts = s.aborts;
  point.recommended = static_cast<double>(recommended_budget(coarse.bins));
  if (s.failures == 0 && s.aborts == 0) {
    point.required_budget = *std::max_element(s.samples_used.begin(), s.samples_used.end());
  }
  return point;
}

// fig10: sweep d for one unitary and input, reporting gap and the budget
// needed for p_s = 1.
inline Json fig10(const UnitaryMatrix& u, const Scale& base, Rank input_rank,
                  const std::vector<std::uint32_t>& bins, const Algo1Params& params,
                  std::uint64_t repetitions, const RngStream& rng, unsigned threads = 0) {
  const ConfigSpace space = base.space();
  const auto dist = exact_output_distribution(u, space, space.unrank(input_rank),
                                              kDefaultEnumerationCap, threads);
  Json rows = Json::array();
  std::vector<double> inv_gap, budget;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const auto coarse = coarse_grain(dist, {bins[i], base.strategy});
    const auto p = required_budget(coarse, params, repetitions, rng.derive(i), threads);
    Json row;
    row["d"] = p.bins;
    row["gap"] = p.gap;
    row["p_max"] = p.p_max;
    row["required_budget"] = p.required_budget ? Json(*p.required_budget) : Json(nullptr);
    row["failures"] = p.failures;
    row["aborts"] = p.aborts;
    row["recommended_budget"] = p.recommended;
    rows.push_back(std::move(row));
    if (p.gap > 0.0) {
      inv_gap.push_back(1.0 / p.gap);
      // Unresolved points count as needing more than the whole cap.
      budget.push_back(p.required_budget ? static_cast<double>(*p.required_budget)
                                         : 2.0 * static_cast<double>(params.budget()));
    }
  }
  Json out;
  out["input_rank"] = to_string(input_rank);
  out["budget_cap"] = params.budget();
  out["rows"] = std::move(rows);
  out["spearman_inverse_gap_vs_budget"] =
      inv_gap.size() >= 2 ? Json(stats::spearman(inv_gap, budget)) : Json(nullptr);
  return out;
}

}  // namespace boson_owf::experiments
