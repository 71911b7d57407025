#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boson_owf/bootstrap.hpp"
#include "boson_owf/boson_dist.hpp"
#include "boson_owf/errors.hpp"
#include "boson_owf/parallel.hpp"
#include "boson_owf/rng.hpp"
#include "boson_owf/sampler.hpp"

namespace boson_owf {

/// Anything that can fill a buffer with bin labels, e.g. an AliasSampler
/// built from an exact coarse distribution or a wrapper around device data.
template <typename S>
concept BinSource = requires(const S& source, std::span<BinLabel> out, RngStream& rng) {
  source.draw(out, rng);
};

/// Adapts a callable `void(std::span<BinLabel>, RngStream&)` to BinSource.
class FunctionSource {
 public:
  using Fn = std::function<void(std::span<BinLabel>, RngStream&)>;
  explicit FunctionSource(Fn fn) : fn_(std::move(fn)) {}
  void draw(std::span<BinLabel> out, RngStream& rng) const { fn_(out, rng); }

 private:
  Fn fn_;
};

struct Algo1Params {
  std::uint64_t num_bootstraps = 10000;  // M
  std::uint64_t delta_n = 10000;         // labels added per round
  std::uint32_t max_rounds = 100;        // L
  double xi = 1e-2;
  double ci_gamma = 1e-3;  // only shapes the reported CI, not the decision
  ResampleMethod method = ResampleMethod::Multinomial;
  bool keep_mpb_sequence = false;  // final round's per-bootstrap labels
  unsigned threads = 0;

  void validate() const {
    if (num_bootstraps < 100) throw ArgumentError("estimate_mpb requires M >= 100");
    if (delta_n <= num_bootstraps) throw ArgumentError("estimate_mpb requires dN > M");
    if (max_rounds < 1) throw ArgumentError("estimate_mpb requires L >= 1");
    if (!(xi > 0.0 && xi < 0.5)) throw ArgumentError("estimate_mpb requires 0 < xi < 0.5");
  }

  [[nodiscard]] std::uint64_t budget() const noexcept { return max_rounds * delta_n; }
};

enum class Algo1Status { End, Abort };

inline const char* to_string(Algo1Status status) {
  return status == Algo1Status::End ? "END" : "ABORT";
}

struct Algo1Outcome {
  Algo1Status status = Algo1Status::Abort;
  std::optional<BinLabel> mu_tilde;  // set iff status == End
  std::uint32_t rounds_used = 0;
  std::uint64_t total_samples = 0;
  double omega_max = 0.0;
  BootstrapSummary final_summary;
  std::vector<double> omega_history;  // Omega_max after each round
};

namespace detail {

inline bool omega_accepts(double omega_max, std::uint64_t num_bootstraps, double xi) {
  // Compare on the count scale: Omega_max * M >= (1 - xi) * M.
  const double count = omega_max * static_cast<double>(num_bootstraps);
  return count >= (1.0 - xi) * static_cast<double>(num_bootstraps) - 1e-9;
}

}  // namespace detail

/// Adaptive MPB estimation.
///
/// Each round draws dN fresh labels, appends them to the cumulative record and
/// bootstraps the whole record. END as soon as Omega_max >= 1 - xi, ABORT once
/// L rounds pass without that. Any exception from the source surfaces as a
/// SourceError; ABORT is an outcome, never an exception.
template <BinSource Source>
Algo1Outcome estimate_mpb(const Source& source, std::uint32_t bins, const Algo1Params& params,
                          const RngStream& rng) {
  params.validate();
  if (bins < 1) throw ArgumentError("estimate_mpb requires d >= 1");

  std::vector<std::uint64_t> counts(bins, 0);
  std::vector<BinLabel> record;
  std::vector<BinLabel> batch(params.delta_n);
  RngStream sampling = rng.derive(0);
  const BootstrapOptions options{params.method, params.keep_mpb_sequence, params.threads};

  Algo1Outcome outcome;
  for (std::uint32_t round = 1; round <= params.max_rounds; ++round) {
    try {
      source.draw(std::span<BinLabel>(batch), sampling);
    } catch (const SourceError&) {
      throw;
    } catch (const std::exception& e) {
      throw SourceError(std::string("bin source failed: ") + e.what());
    }
    for (BinLabel label : batch) {
      if (label >= bins) throw SourceError("bin source emitted label outside Z_d");
      ++counts[label];
    }
    if (params.method == ResampleMethod::Indices) {
      record.insert(record.end(), batch.begin(), batch.end());
    }

    outcome.rounds_used = round;
    outcome.total_samples = round * params.delta_n;
    outcome.final_summary = bootstrap_from_counts(counts, record, params.num_bootstraps, params.ci_gamma,
                                                  rng.derive(round), options);
    outcome.omega_max = outcome.final_summary.omega_max;
    outcome.omega_history.push_back(outcome.omega_max);
    if (detail::omega_accepts(outcome.omega_max, params.num_bootstraps, params.xi)) {
      outcome.status = Algo1Status::End;
      outcome.mu_tilde = outcome.final_summary.mu_tilde;
      return outcome;
    }
  }
  outcome.status = Algo1Status::Abort;
  return outcome;
}

/// END with label a iff more than r/2 of the runs ended with a.
inline Algo1Outcome majority_vote(std::span<const Algo1Outcome> runs) {
  if (runs.empty()) throw ArgumentError("majority vote over zero runs");
  std::map<BinLabel, std::size_t> votes;
  Algo1Outcome combined;
  for (const auto& run : runs) {
    combined.rounds_used += run.rounds_used;
    combined.total_samples += run.total_samples;
    if (run.status == Algo1Status::End && run.mu_tilde) ++votes[*run.mu_tilde];
  }
  combined.status = Algo1Status::Abort;
  combined.final_summary = runs.back().final_summary;
  combined.omega_max = runs.back().omega_max;
  for (const auto& [label, count] : votes) {
    if (2 * count > runs.size()) {
      combined.status = Algo1Status::End;
      combined.mu_tilde = label;
      for (const auto& run : runs) {
        if (run.mu_tilde == label) {
          combined.final_summary = run.final_summary;
          combined.omega_max = run.omega_max;
          break;
        }
      }
    }
  }
  return combined;
}

/// Runs estimate_mpb r times on independent streams and majority-decodes.
template <BinSource Source>
Algo1Outcome estimate_mpb_majority(const Source& source, std::uint32_t bins,
                                   const Algo1Params& params, std::uint32_t repeats,
                                   const RngStream& rng) {
  if (repeats < 3 || repeats % 2 == 0) {
    throw ArgumentError("majority decoding needs an odd r >= 3");
  }
  std::vector<Algo1Outcome> runs(repeats);
  for (std::uint32_t i = 0; i < repeats; ++i) {
    runs[i] = estimate_mpb(source, bins, params, rng.derive(i));
  }
  return majority_vote(runs);
}

/// Budget ceil(1.8e5 * d^3.5) that keeps the abort probability around 0.1.
inline Rank recommended_budget(std::uint32_t bins) {
  if (bins < 1) throw ArgumentError("recommended_budget requires d >= 1");
  const long double d = bins;
  const long double value = 1.8e5L * d * d * d * std::sqrt(d);
  if (value >= 0x1.0p127L) throw CapacityError("recommended budget exceeds 128 bits");
  const long double rounded = std::ceil(value);
  // Split so the conversion works past 64 bits.
  const long double high = std::floor(rounded / 0x1.0p64L);
  const long double low = rounded - high * 0x1.0p64L;
  return (static_cast<Rank>(static_cast<std::uint64_t>(high)) << 64) +
         static_cast<std::uint64_t>(low);
}

struct StatusProbabilities {
  double p_success = 0.0;
  double p_failure = 0.0;
  double p_inconclusive = 0.0;
  std::uint64_t successes = 0;
  std::uint64_t failures = 0;
  std::uint64_t aborts = 0;
  std::uint64_t repetitions = 0;
  std::vector<std::uint64_t> samples_used;  // per repetition
};

/// Success / failure / inconclusive rates of estimate_mpb against a sampler
/// for a distribution whose true MPB is known.
inline StatusProbabilities status_probabilities(const CoarseDistribution& coarse,
                                                const Algo1Params& params,
                                                std::uint64_t repetitions, const RngStream& rng,
                                                unsigned threads = 0) {
  if (repetitions < 1) throw ArgumentError("status_probabilities requires R >= 1");
  params.validate();
  const AliasSampler sampler(coarse);
  Algo1Params inner = params;
  inner.threads = 1;  // parallelism lives at the repetition level here

  std::vector<Algo1Outcome> outcomes(repetitions);
  parallel_for(
      repetitions,
      [&](std::size_t i) { outcomes[i] = estimate_mpb(sampler, coarse.bins, inner, rng.derive(i)); },
      threads);

  StatusProbabilities result;
  result.repetitions = repetitions;
  for (const auto& outcome : outcomes) {
    result.samples_used.push_back(outcome.total_samples);
    if (outcome.status == Algo1Status::Abort) {
      ++result.aborts;
    } else if (*outcome.mu_tilde == coarse.mpb_label) {
      ++result.successes;
    } else {
      ++result.failures;
    }
  }
  const auto r = static_cast<double>(repetitions);
  result.p_success = static_cast<double>(result.successes) / r;
  result.p_failure = static_cast<double>(result.failures) / r;
  result.p_inconclusive = static_cast<double>(result.aborts) / r;
  return result;
}

}  // namespace boson_owf
