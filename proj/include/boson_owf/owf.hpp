#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "boson_owf/boson_dist.hpp"
#include "boson_owf/config_space.hpp"
#include "boson_owf/errors.hpp"
#include "boson_owf/matrix.hpp"
#include "boson_owf/mpb_estimator.hpp"
#include "boson_owf/parallel.hpp"
#include "boson_owf/rng.hpp"
#include "boson_owf/sampler.hpp"

namespace boson_owf {

enum class OwfMode {
  /// MPB read off the exact coarse distribution (smallest label on ties).
  Exact,
  /// MPB estimated adaptively (estimate_mpb) from simulated samples, with abort-retry.
  Sampled,
};

inline const char* to_string(OwfMode mode) { return mode == OwfMode::Exact ? "exact" : "sampled"; }

struct OwfParams {
  std::shared_ptr<const UnitaryMatrix> unitary;
  std::uint32_t bosons = 0;
  BinningScheme scheme;
  OwfMode mode = OwfMode::Exact;
  Algo1Params algo1;
  /// Abort-substitutions allowed per round; 0 means |S|.
  Rank retry_cap = 0;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
  /// Optional precomputed coarse distributions for every input rank; must
  /// match `unitary` and `scheme`. Read-only once attached.
  std::shared_ptr<const CoarseTable> table;

  [[nodiscard]] ConfigSpace space() const {
    if (!unitary) throw ArgumentError("OWF parameters need a unitary");
    return {static_cast<std::uint32_t>(unitary->modes()), bosons};
  }
};

struct OwfRound {
  Rank scheduled_kappa = 0;
  std::uint64_t substitutions = 0;  // aborts replaced by kappa + 1
  Rank kappa = 0;                   // value actually used, and chained from
  BinLabel mu_tilde = 0;
  std::uint64_t samples = 0;
};

struct OwfTrace {
  std::vector<OwfRound> rounds;
  std::vector<BinLabel> mu_tilde;
  std::vector<Port> phi;  // occupation order produced by the strike-out
  Rank y = 0;
};

struct OwfResult {
  Rank y = 0;
  OwfTrace trace;
};

/// kappa_j = (kappa_{j-1} + int(|S| * |sin(j - 1)|)) mod |S|, sin in radians,
/// int() truncating. Double precision below 2^53, long double beyond.
inline Rank next_kappa(Rank kappa_prev, std::uint32_t round, Rank space_size) {
  if (round < 1) throw ArgumentError("rounds are numbered from 1");
  if (kappa_prev >= space_size) throw BoundsError("kappa outside Z_|S|");
  Rank step = 0;
  if (space_size <= (Rank{1} << 53)) {
    const double product = static_cast<double>(space_size) *
                           std::fabs(std::sin(static_cast<double>(round - 1)));
    step = static_cast<Rank>(static_cast<std::uint64_t>(product));
  } else {
    const long double product = static_cast<long double>(space_size) *
                                std::fabs(std::sin(static_cast<long double>(round - 1)));
    const long double high = std::floor(product / 0x1.0p64L);
    const long double low = std::floor(product - high * 0x1.0p64L);
    step = (static_cast<Rank>(static_cast<std::uint64_t>(high)) << 64) +
           static_cast<std::uint64_t>(low);
  }
  step %= space_size;
  // Modular add without overflowing 128 bits.
  return kappa_prev >= space_size - step ? kappa_prev - (space_size - step) : kappa_prev + step;
}

/// Strike-out post-processing: for round j keep the ascending list of free
/// ports, take m = mu_j mod (M - j + 1) and remove the m-th remaining port
/// (zero-based, from the low end).
inline std::vector<Port> fisher_yates_map(std::span<const BinLabel> mu_tilde, std::uint32_t modes) {
  if (mu_tilde.size() > modes) throw ArgumentError("more bosons than ports");
  std::vector<Port> free_ports(modes);
  for (std::uint32_t p = 0; p < modes; ++p) free_ports[p] = p;
  std::vector<Port> phi;
  phi.reserve(mu_tilde.size());
  for (BinLabel mu : mu_tilde) {
    const std::size_t m = mu % free_ports.size();
    phi.push_back(free_ports[m]);
    free_ports.erase(free_ports.begin() + static_cast<std::ptrdiff_t>(m));
  }
  return phi;
}

/// Rank of the sorted occupation sequence produced from mu_tilde.
inline Rank output_from_mu(std::span<const BinLabel> mu_tilde, const ConfigSpace& space) {
  if (mu_tilde.size() != space.bosons()) throw ArgumentError("need one MPB per boson");
  Configuration cfg{fisher_yates_map(mu_tilde, space.modes())};
  std::sort(cfg.ports.begin(), cfg.ports.end());
  return space.rank(cfg);
}

namespace detail {

inline CoarseDistribution coarse_for_input(const OwfParams& params, const ConfigSpace& space,
                                           Rank kappa) {
  if (params.table) {
    if (params.table->by_input.size() != space.size()) {
      throw ArgumentError("attached coarse table does not match the configuration space");
    }
    return params.table->by_input[static_cast<std::size_t>(kappa)];
  }
  const auto dist = exact_output_distribution(*params.unitary, space, space.unrank(kappa),
                                              params.enumeration_cap, 1);
  return coarse_grain(dist, params.scheme);
}

}  // namespace detail

/// y = F(x). Exact mode ignores `rng`.
inline OwfResult evaluate(Rank x, const OwfParams& params, const RngStream& rng) {
  const ConfigSpace space = params.space();
  params.scheme.validate(space);
  if (x >= space.size()) throw BoundsError("input outside Z_|S|");
  if (params.mode == OwfMode::Sampled) params.algo1.validate();
  const Rank retry_cap = params.retry_cap == 0 ? space.size() : params.retry_cap;

  OwfResult result;
  Rank kappa = x;
  for (std::uint32_t j = 1; j <= space.bosons(); ++j) {
    OwfRound round;
    round.scheduled_kappa = next_kappa(kappa, j, space.size());
    round.kappa = round.scheduled_kappa;
    for (std::uint64_t attempt = 0;; ++attempt) {
      const CoarseDistribution coarse = detail::coarse_for_input(params, space, round.kappa);
      if (params.mode == OwfMode::Exact) {
        round.mu_tilde = coarse.mpb_label;
        break;
      }
      const AliasSampler sampler(coarse);
      const auto outcome =
          estimate_mpb(sampler, coarse.bins, params.algo1, rng.derive(j).derive(attempt));
      round.samples += outcome.total_samples;
      if (outcome.status == Algo1Status::End) {
        round.mu_tilde = *outcome.mu_tilde;
        break;
      }
      if (Rank{round.substitutions} >= retry_cap) {
        throw EvaluationError("round " + std::to_string(j) + " aborted " +
                              std::to_string(round.substitutions + 1) +
                              " times; retry cap exhausted");
      }
      ++round.substitutions;
      round.kappa = round.kappa + 1 == space.size() ? 0 : round.kappa + 1;
    }
    kappa = round.kappa;
    result.trace.mu_tilde.push_back(round.mu_tilde);
    result.trace.rounds.push_back(round);
  }
  result.trace.phi = fisher_yates_map(result.trace.mu_tilde, space.modes());
  result.y = output_from_mu(result.trace.mu_tilde, space);
  result.trace.y = result.y;
  return result;
}

/// F(x) for every x in Z_|S| in Exact mode. Builds (or reuses) the frozen
/// coarse table, so each input's distribution is computed exactly once.
inline std::vector<std::uint64_t> evaluate_exact_full_domain(const OwfParams& params,
                                                             unsigned threads = 0) {
  if (params.mode != OwfMode::Exact) {
    throw ArgumentError("full-domain evaluation runs in exact mode");
  }
  const ConfigSpace space = params.space();
  check_enumeration_cap(space, params.enumeration_cap);
  OwfParams frozen = params;
  if (!frozen.table) {
    frozen.table = std::make_shared<const CoarseTable>(build_coarse_table(
        *params.unitary, space, params.scheme, params.enumeration_cap, threads));
  }
  const std::uint64_t total = space.size_u64();
  std::vector<std::uint64_t> outputs(total);
  const RngStream unused(0);
  parallel_for_chunked(
      total, 256,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t x = begin; x < end; ++x) {
          outputs[x] = static_cast<std::uint64_t>(evaluate(x, frozen, unused).y);
        }
      },
      threads);
  return outputs;
}

}  // namespace boson_owf
