#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "boson_owf/config_space.hpp"
#include "boson_owf/errors.hpp"
#include "boson_owf/matrix.hpp"
#include "boson_owf/parallel.hpp"

namespace boson_owf {

inline constexpr std::uint64_t kDefaultEnumerationCap = 100000;

/// Output probabilities over every collision-free configuration for one
/// input, renormalised over the collision-free subspace.
struct OutputDistribution {
  ConfigSpace space;
  Rank input_rank = 0;
  std::vector<double> probs;  // indexed by output rank
  double raw_mass = 0.0;      // collision-free |Per|^2 mass before renormalising
};

/// Per-bin probabilities with the most probable bin (MPB) and its margin.
struct CoarseDistribution {
  std::uint32_t bins = 0;
  std::vector<double> probs;
  BinLabel mpb_label = 0;
  double p_max = 0.0;
  double gap = 0.0;  // p_max minus the runner-up; 1.0 when d == 1
};

inline void check_enumeration_cap(const ConfigSpace& space, std::uint64_t cap) {
  if (space.size() > Rank{cap}) {
    throw CapacityError("|S| = " + to_string(space.size()) + " exceeds the enumeration cap " +
                        std::to_string(cap) +
                        "; exact distributions are unavailable, use sampled mode");
  }
}

namespace detail {

/// |Per|^2 for every output rank in [begin, end) given the fixed input ports.
inline void fill_raw_probabilities(const ComplexMatrix& u, const ConfigSpace& space,
                                   const Configuration& input_cfg, std::uint64_t begin,
                                   std::uint64_t end, std::span<double> out) {
  const std::size_t n = space.bosons();
  std::vector<Complex> block(n * n);
  Configuration output = space.unrank(begin);
  for (std::uint64_t r = begin; r < end; ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        block[j * n + k] = u(output.ports[j], input_cfg.ports[k]);
      }
    }
    out[r] = std::norm(permanent_ryser(block, n));
    if (r + 1 < end) space.next(output);
  }
}

}  // namespace detail

/// Exact output distribution for `input_cfg`; parallel over output ranks with
/// a serial, rank-ordered reduction so results do not depend on `threads`.
inline OutputDistribution exact_output_distribution(
    const UnitaryMatrix& u, const ConfigSpace& space, const Configuration& input_cfg,
    std::uint64_t cap = kDefaultEnumerationCap, unsigned threads = 0) {
  if (u.modes() != space.modes()) throw DimensionError("unitary dimension differs from M");
  space.validate(input_cfg);
  check_enumeration_cap(space, cap);
  const std::uint64_t total = space.size_u64();

  OutputDistribution dist{space, space.rank(input_cfg), std::vector<double>(total), 0.0};
  constexpr std::uint64_t kGrain = 2048;
  parallel_for_chunked(
      total, kGrain,
      [&](std::size_t begin, std::size_t end) {
        detail::fill_raw_probabilities(u.matrix(), space, input_cfg, begin, end, dist.probs);
      },
      threads);

  double mass = 0.0;
  for (double p : dist.probs) mass += p;
  if (!(mass > 0.0)) throw EvaluationError("collision-free output mass is zero");
  dist.raw_mass = mass;
  for (double& p : dist.probs) p /= mass;
  return dist;
}

inline OutputDistribution exact_output_distribution(const UnitaryMatrix& u,
                                                    const Configuration& input_cfg,
                                                    std::uint64_t cap = kDefaultEnumerationCap,
                                                    unsigned threads = 0) {
  const ConfigSpace space(static_cast<std::uint32_t>(u.modes()),
                          static_cast<std::uint32_t>(input_cfg.size()));
  return exact_output_distribution(u, space, input_cfg, cap, threads);
}

/// Fills mpb_label (smallest label among ties), p_max and gap from probs.
inline void summarize_peaks(CoarseDistribution& coarse) {
  const auto& p = coarse.probs;
  BinLabel best = 0;
  for (BinLabel b = 1; b < p.size(); ++b) {
    if (p[b] > p[best]) best = b;
  }
  coarse.mpb_label = best;
  coarse.p_max = p[best];
  if (p.size() == 1) {
    coarse.gap = 1.0;
    return;
  }
  double runner_up = -1.0;
  for (BinLabel b = 0; b < p.size(); ++b) {
    if (b != best) runner_up = std::max(runner_up, p[b]);
  }
  coarse.gap = coarse.p_max - runner_up;
}

inline CoarseDistribution make_coarse(std::vector<double> probs) {
  if (probs.empty()) throw ArgumentError("coarse distribution needs at least one bin");
  CoarseDistribution coarse;
  coarse.bins = static_cast<std::uint32_t>(probs.size());
  coarse.probs = std::move(probs);
  summarize_peaks(coarse);
  return coarse;
}

namespace detail {

/// Bin label of every rank, precomputed once per (space, scheme).
inline std::vector<BinLabel> bin_labels(const ConfigSpace& space, const BinningScheme& scheme) {
  scheme.validate(space);
  const std::uint64_t total = space.size_u64();
  std::vector<BinLabel> labels(total);
  for (std::uint64_t r = 0; r < total; ++r) labels[r] = bin_of(r, space, scheme);
  return labels;
}

inline CoarseDistribution coarse_from_fine(std::span<const double> fine,
                                           std::span<const BinLabel> labels,
                                           std::uint32_t bins) {
  std::vector<double> probs(bins, 0.0);
  for (std::size_t r = 0; r < fine.size(); ++r) probs[labels[r]] += fine[r];
  return make_coarse(std::move(probs));
}

}  // namespace detail

inline CoarseDistribution coarse_grain(const OutputDistribution& dist,
                                       const BinningScheme& scheme) {
  const auto labels = detail::bin_labels(dist.space, scheme);
  return detail::coarse_from_fine(dist.probs, labels, scheme.bins);
}

/// Coarse distributions for every input rank of a space, one table per
/// binning scheme; each fine distribution is built once and shared.
struct CoarseTable {
  BinningScheme scheme;
  std::vector<CoarseDistribution> by_input;  // indexed by input rank
};

inline std::vector<CoarseTable> build_coarse_tables(const UnitaryMatrix& u,
                                                    const ConfigSpace& space,
                                                    std::span<const BinningScheme> schemes,
                                                    std::uint64_t cap = kDefaultEnumerationCap,
                                                    unsigned threads = 0) {
  if (u.modes() != space.modes()) throw DimensionError("unitary dimension differs from M");
  check_enumeration_cap(space, cap);
  const std::uint64_t total = space.size_u64();

  std::vector<std::vector<BinLabel>> labels;
  std::vector<CoarseTable> tables;
  for (const auto& scheme : schemes) {
    labels.push_back(detail::bin_labels(space, scheme));
    tables.push_back({scheme, std::vector<CoarseDistribution>(total)});
  }

  parallel_for(
      total,
      [&](std::size_t input) {
        const Configuration cfg = space.unrank(input);
        std::vector<double> fine(total);
        detail::fill_raw_probabilities(u.matrix(), space, cfg, 0, total, fine);
        double mass = 0.0;
        for (double p : fine) mass += p;
        if (!(mass > 0.0)) throw EvaluationError("collision-free output mass is zero");
        for (double& p : fine) p /= mass;
        for (std::size_t s = 0; s < tables.size(); ++s) {
          tables[s].by_input[input] =
              detail::coarse_from_fine(fine, labels[s], tables[s].scheme.bins);
        }
      },
      threads);
  return tables;
}

inline CoarseTable build_coarse_table(const UnitaryMatrix& u, const ConfigSpace& space,
                                      const BinningScheme& scheme,
                                      std::uint64_t cap = kDefaultEnumerationCap,
                                      unsigned threads = 0) {
  auto tables = build_coarse_tables(u, space, std::span(&scheme, 1), cap, threads);
  return std::move(tables.front());
}

/// Fraction of inputs whose coarse distribution has gap <= eps.
inline double eps_close_fraction(const CoarseTable& table, double eps) {
  if (table.by_input.empty()) return 0.0;
  std::uint64_t close = 0;
  for (const auto& coarse : table.by_input) {
    if (coarse.gap <= eps) ++close;
  }
  return static_cast<double>(close) / static_cast<double>(table.by_input.size());
}

inline double eps_close_fraction(const UnitaryMatrix& u, const ConfigSpace& space,
                                 const BinningScheme& scheme, double eps,
                                 std::uint64_t cap = kDefaultEnumerationCap,
                                 unsigned threads = 0) {
  return eps_close_fraction(build_coarse_table(u, space, scheme, cap, threads), eps);
}

}  // namespace boson_owf
