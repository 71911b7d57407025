#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "boson_owf/config_space.hpp"
#include "boson_owf/errors.hpp"
#include "boson_owf/parallel.hpp"
#include "boson_owf/rng.hpp"
#include "boson_owf/sampler.hpp"

namespace boson_owf {

/// How a bootstrap sample is drawn from the original record.
enum class ResampleMethod {
  /// Draw N record indices uniformly with replacement and count labels.
  Indices,
  /// Draw the bootstrap label counts directly from Multinomial(N, n_b / N),
  /// which is the exact law of the counts produced by Indices at O(d) cost.
  Multinomial,
};

struct BootstrapOptions {
  ResampleMethod method = ResampleMethod::Multinomial;
  bool keep_mpb_sequence = false;
  unsigned threads = 0;
};

struct BootstrapSummary {
  double p_max = 0.0;
  BinLabel mpb_empirical = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double ci_width = 0.0;
  std::vector<double> omega;  // frequency of each label in the most-frequent-bin sequence
  double omega_max = 0.0;
  BinLabel mu_tilde = 0;
  std::uint64_t num_bootstraps = 0;
  double gamma = 0.0;
  std::uint64_t sample_size = 0;
  std::vector<BinLabel> mpb_sequence;  // only when requested
};

inline std::vector<std::uint64_t> label_counts(const SampleRecord& sample) {
  std::vector<std::uint64_t> counts(sample.bins, 0);
  for (BinLabel label : sample.labels) ++counts.at(label);
  return counts;
}

/// p_b = n_b / N.
inline std::vector<double> frequencies(const SampleRecord& sample) {
  if (sample.labels.empty()) throw ArgumentError("frequencies of an empty sample");
  const auto counts = label_counts(sample);
  const auto total = static_cast<double>(sample.labels.size());
  std::vector<double> freq(counts.size());
  for (std::size_t b = 0; b < counts.size(); ++b) freq[b] = static_cast<double>(counts[b]) / total;
  return freq;
}

/// Nearest-rank percentile: element ceil(zeta * n) - 1, clamped to the list.
inline double percentile(std::span<const double> sorted_values, double zeta) {
  if (sorted_values.empty()) throw ArgumentError("percentile of an empty list");
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw ArgumentError("percentile requires zeta in [0, 1]");
  const auto n = static_cast<double>(sorted_values.size());
  // The small offset keeps products like 0.9995 * 10000 from rounding up.
  const double position = std::ceil(zeta * n - 1e-9) - 1.0;
  const double clamped = std::clamp(position, 0.0, n - 1.0);
  return sorted_values[static_cast<std::size_t>(clamped)];
}

namespace detail {

struct BootstrapDraw {
  std::uint64_t max_count = 0;
  BinLabel label = 0;
};

inline BootstrapDraw max_of(std::span<const std::uint64_t> counts) {
  BootstrapDraw best;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    if (counts[b] > best.max_count) {
      best.max_count = counts[b];
      best.label = static_cast<BinLabel>(b);
    }
  }
  return best;
}

inline BootstrapDraw multinomial_resample(std::span<const std::uint64_t> counts,
                                          std::uint64_t total, RngStream& rng,
                                          std::vector<std::uint64_t>& scratch) {
  scratch.assign(counts.size(), 0);
  std::uint64_t remaining_draws = total;
  std::uint64_t remaining_weight = total;
  for (std::size_t b = 0; b < counts.size() && remaining_draws > 0; ++b) {
    if (counts[b] == 0) continue;
    if (counts[b] == remaining_weight) {
      scratch[b] = remaining_draws;
      break;
    }
    const double p = static_cast<double>(counts[b]) / static_cast<double>(remaining_weight);
    scratch[b] = draw_binomial(remaining_draws, p, rng);
    remaining_draws -= scratch[b];
    remaining_weight -= counts[b];
  }
  return max_of(scratch);
}

inline BootstrapDraw index_resample(std::span<const BinLabel> labels, std::uint32_t bins,
                                    RngStream& rng, std::vector<std::uint64_t>& scratch) {
  scratch.assign(bins, 0);
  const std::uint64_t n = labels.size();
  for (std::uint64_t i = 0; i < n; ++i) ++scratch[labels[rng.uniform_below(n)]];
  return max_of(scratch);
}

}  // namespace detail

/// Percentile bootstrap over a record summarised by its label counts.
///
/// Bootstrap b uses rng.derive(b), so results do not depend on threads.
/// `labels` is required only for ResampleMethod::Indices.
inline BootstrapSummary bootstrap_from_counts(std::span<const std::uint64_t> counts,
                                              std::span<const BinLabel> labels,
                                              std::uint64_t num_bootstraps, double gamma,
                                              const RngStream& rng,
                                              const BootstrapOptions& options = {}) {
  if (num_bootstraps < 100) throw ArgumentError("bootstrap requires M >= 100");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ArgumentError("bootstrap requires 0 < gamma < 1");
  if (counts.empty()) throw ArgumentError("bootstrap needs d >= 1");
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw ArgumentError("bootstrap of an empty sample");
  if (options.method == ResampleMethod::Indices && labels.size() != total) {
    throw ArgumentError("index resampling needs the full label record");
  }
  const auto bins = static_cast<std::uint32_t>(counts.size());

  BootstrapSummary summary;
  summary.num_bootstraps = num_bootstraps;
  summary.gamma = gamma;
  summary.sample_size = total;
  const auto original = detail::max_of(counts);
  summary.p_max = static_cast<double>(original.max_count) / static_cast<double>(total);
  summary.mpb_empirical = original.label;

  std::vector<std::uint64_t> max_counts(num_bootstraps);
  std::vector<BinLabel> mpb_sequence(num_bootstraps);
  constexpr std::size_t kGrain = 256;
  parallel_for_chunked(
      num_bootstraps, kGrain,
      [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint64_t> scratch;
        for (std::size_t b = begin; b < end; ++b) {
          RngStream stream = rng.derive(b);
          const auto draw =
              options.method == ResampleMethod::Multinomial
                  ? detail::multinomial_resample(counts, total, stream, scratch)
                  : detail::index_resample(labels, bins, stream, scratch);
          max_counts[b] = draw.max_count;
          mpb_sequence[b] = draw.label;
        }
      },
      options.threads);

  // Delta* = p*_max - p_max, computed from integer counts.
  std::vector<double> deltas(num_bootstraps);
  for (std::size_t b = 0; b < num_bootstraps; ++b) {
    deltas[b] = (static_cast<double>(max_counts[b]) - static_cast<double>(original.max_count)) /
                static_cast<double>(total);
  }
  std::sort(deltas.begin(), deltas.end());
  const double upper = percentile(deltas, 1.0 - gamma / 2.0);
  const double lower = percentile(deltas, gamma / 2.0);
  summary.ci_low = summary.p_max - upper;
  summary.ci_high = summary.p_max - lower;
  summary.ci_width = upper - lower;

  std::vector<std::uint64_t> omega_counts(bins, 0);
  for (BinLabel label : mpb_sequence) ++omega_counts[label];
  summary.omega.resize(bins);
  std::uint64_t best = 0;
  for (BinLabel b = 0; b < bins; ++b) {
    summary.omega[b] = static_cast<double>(omega_counts[b]) / static_cast<double>(num_bootstraps);
    if (omega_counts[b] > omega_counts[best]) best = b;
  }
  summary.mu_tilde = static_cast<BinLabel>(best);
  summary.omega_max = summary.omega[best];
  if (options.keep_mpb_sequence) summary.mpb_sequence = std::move(mpb_sequence);
  return summary;
}

inline BootstrapSummary bootstrap_analyze(const SampleRecord& sample,
                                          std::uint64_t num_bootstraps, double gamma,
                                          const RngStream& rng,
                                          const BootstrapOptions& options = {}) {
  sample.validate();
  const auto counts = label_counts(sample);
  return bootstrap_from_counts(counts, sample.labels, num_bootstraps, gamma, rng, options);
}

}  // namespace boson_owf
