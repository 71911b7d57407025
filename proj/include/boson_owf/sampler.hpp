#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "boson_owf/boson_dist.hpp"
#include "boson_owf/config_space.hpp"
#include "boson_owf/errors.hpp"
#include "boson_owf/rng.hpp"

namespace boson_owf {

/// Recorded coarse-grained data a_1 ... a_N, each label in Z_d.
struct SampleRecord {
  std::uint32_t bins = 0;
  std::vector<BinLabel> labels;

  void validate() const {
    if (bins < 1) throw ValidationError("sample record needs d >= 1");
    if (labels.empty()) throw ValidationError("sample record is empty");
    for (BinLabel label : labels) {
      if (label >= bins) {
        throw ValidationError("label " + std::to_string(label) + " outside Z_" +
                              std::to_string(bins));
      }
    }
  }
};

/// Walker/Vose alias table: O(d) build, O(1) per draw.
class AliasSampler {
 public:
  explicit AliasSampler(std::span<const double> probs) : accept_(probs.size()), alias_(probs.size()) {
    const std::size_t d = probs.size();
    if (d == 0) throw ArgumentError("alias table needs at least one label");
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw ArgumentError("probabilities must be finite and >= 0");
      total += p;
    }
    if (!(total > 0.0)) throw ArgumentError("probabilities sum to zero");

    std::vector<double> scaled(d);
    std::vector<std::uint32_t> small;
    std::vector<std::uint32_t> large;
    for (std::size_t i = 0; i < d; ++i) {
      scaled[i] = probs[i] / total * static_cast<double>(d);
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      small.pop_back();
      const std::uint32_t l = large.back();
      accept_[s] = scaled[s];
      alias_[s] = l;
      // Subtract in the order that keeps the leftover mass exact.
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::uint32_t i : large) {
      accept_[i] = 1.0;
      alias_[i] = i;
    }
    for (std::uint32_t i : small) {  // numerical leftovers
      accept_[i] = 1.0;
      alias_[i] = i;
    }
  }

  explicit AliasSampler(const CoarseDistribution& coarse) : AliasSampler(coarse.probs) {}

  [[nodiscard]] std::uint32_t bins() const noexcept {
    return static_cast<std::uint32_t>(accept_.size());
  }

  BinLabel draw(RngStream& rng) const noexcept {
    const auto column = static_cast<BinLabel>(rng.uniform_below(accept_.size()));
    return rng.uniform01() < accept_[column] ? column : alias_[column];
  }

  void draw(std::span<BinLabel> out, RngStream& rng) const noexcept {
    for (auto& label : out) label = draw(rng);
  }

  /// Per-label probability implied by the table.
  [[nodiscard]] std::vector<double> implied_probabilities() const {
    const std::size_t d = accept_.size();
    std::vector<double> probs(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      probs[i] += accept_[i];
      if (alias_[i] != i) probs[alias_[i]] += 1.0 - accept_[i];
    }
    for (double& p : probs) p /= static_cast<double>(d);
    return probs;
  }

 private:
  std::vector<double> accept_;
  std::vector<BinLabel> alias_;
};

inline SampleRecord draw_bins(const AliasSampler& sampler, std::uint64_t count, RngStream& rng) {
  if (count < 1) throw ArgumentError("draw_bins requires count >= 1");
  SampleRecord record{sampler.bins(), std::vector<BinLabel>(count)};
  sampler.draw(record.labels, rng);
  return record;
}

/// Binomial(trials, p) draw; exact for p in {0, 1}.
inline std::uint64_t draw_binomial(std::uint64_t trials, double p, RngStream& rng) {
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::binomial_distribution<std::uint64_t> binomial(trials, p);
  return binomial(rng);
}

/// Per-label counts of `count` i.i.d. draws from `probs`, generated as a
/// chain of conditional binomials. Same law as counting draw_bins output.
inline std::vector<std::uint64_t> draw_bin_counts(std::span<const double> probs,
                                                  std::uint64_t count, RngStream& rng) {
  std::vector<std::uint64_t> counts(probs.size(), 0);
  double remaining_mass = 0.0;
  std::size_t last = 0;
  for (std::size_t b = 0; b < probs.size(); ++b) {
    remaining_mass += probs[b];
    if (probs[b] > 0.0) last = b;
  }
  std::uint64_t remaining = count;
  for (std::size_t b = 0; b <= last && remaining > 0; ++b) {
    if (b == last) {
      counts[b] = remaining;
      break;
    }
    const double conditional = remaining_mass > 0.0 ? probs[b] / remaining_mass : 0.0;
    counts[b] = draw_binomial(remaining, conditional, rng);
    remaining -= counts[b];
    remaining_mass -= probs[b];
  }
  return counts;
}

/// Chernoff-bound sample size ceil(12 d ln(2/gamma) / eps^2).
inline std::uint64_t chernoff_sample_size(std::uint32_t bins, double eps, double gamma) {
  if (bins < 1) throw ArgumentError("chernoff_sample_size requires d >= 1");
  if (!(eps > 0.0) || !(eps < 1.0 / static_cast<double>(bins))) {
    throw ArgumentError("chernoff_sample_size requires 0 < eps < 1/d");
  }
  if (!(gamma > 0.0) || !(gamma < 1.0)) {
    throw ArgumentError("chernoff_sample_size requires 0 < gamma < 1");
  }
  const double size = 12.0 * bins * std::log(2.0 / gamma) / (eps * eps);
  if (size >= 0x1.0p64) throw CapacityError("Chernoff sample size exceeds 64 bits");
  return static_cast<std::uint64_t>(std::ceil(size));
}

/// One ASCII label per line, preceded by an optional "# d=<int>" header.
inline void write_sample_record(std::ostream& out, const SampleRecord& record) {
  out << "# d=" << record.bins << '\n';
  for (BinLabel label : record.labels) out << label << '\n';
}

inline SampleRecord read_sample_record(std::istream& in) {
  SampleRecord record;
  std::uint64_t max_label = 0;
  bool header = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto pos = line.find("d=");
      if (pos == std::string::npos) continue;
      try {
        record.bins = static_cast<std::uint32_t>(std::stoul(line.substr(pos + 2)));
      } catch (const std::exception&) {
        throw ValidationError("malformed header on line " + std::to_string(line_no));
      }
      header = true;
      continue;
    }
    std::size_t consumed = 0;
    unsigned long long value = 0;
    try {
      value = std::stoull(line, &consumed);
    } catch (const std::exception&) {
      throw ValidationError("non-numeric label on line " + std::to_string(line_no));
    }
    if (consumed != line.size() || line.front() == '-' ||
        value > std::numeric_limits<BinLabel>::max()) {
      throw ValidationError("invalid label on line " + std::to_string(line_no));
    }
    record.labels.push_back(static_cast<BinLabel>(value));
    max_label = std::max<std::uint64_t>(max_label, value);
  }
  if (!header) record.bins = static_cast<std::uint32_t>(max_label + 1);
  record.validate();
  return record;
}

}  // namespace boson_owf
