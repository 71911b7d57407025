#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "boson_owf/config_space.hpp"
#include "boson_owf/errors.hpp"
#include "boson_owf/parallel.hpp"
#include "boson_owf/rng.hpp"

namespace boson_owf {

struct CollisionReport {
  std::uint64_t space_size = 0;
  std::vector<std::uint64_t> occurrence;           // nu(y) for every y
  std::uint64_t image_size = 0;                    // |Y| = #{y : nu(y) >= 1}
  std::uint64_t nu_max = 0;
  std::map<std::uint64_t, std::uint64_t> histogram;  // nu -> number of outputs with that nu
};

/// Preimage counts of a full-domain output table.
inline CollisionReport collision_census(std::span<const std::uint64_t> outputs) {
  if (outputs.empty()) throw ArgumentError("census of an empty output table");
  CollisionReport report;
  report.space_size = outputs.size();
  report.occurrence.assign(outputs.size(), 0);
  for (std::uint64_t y : outputs) {
    if (y >= outputs.size()) throw BoundsError("output outside Z_|S|");
    ++report.occurrence[y];
  }
  for (std::uint64_t nu : report.occurrence) {
    ++report.histogram[nu];
    if (nu > 0) ++report.image_size;
    report.nu_max = std::max(report.nu_max, nu);
  }
  return report;
}

/// Probability that t uniformly chosen distinct inputs all miss the nu
/// preimages of a target: prod_{j=1..t} (1 - nu / (|S| - j + 1)), and 0 once
/// t exceeds t* = |S| - nu. Accumulated in log space.
inline double exhaustive_failure_prob(std::uint64_t trials, std::uint64_t nu,
                                      std::uint64_t space_size) {
  if (nu < 1 || nu >= space_size) throw ArgumentError("requires 1 <= nu < |S|");
  const std::uint64_t t_star = space_size - nu;
  if (trials > t_star) return 0.0;
  double log_p = 0.0;
  for (std::uint64_t j = 1; j <= trials; ++j) {
    const double remaining = static_cast<double>(space_size - j + 1);
    log_p += std::log1p(-static_cast<double>(nu) / remaining);
  }
  return std::exp(log_p);
}

/// Lower bound exp(-t nu / (|S| - t + 1 - nu)) on exhaustive_failure_prob.
inline double exhaustive_failure_lower_bound(std::uint64_t trials, std::uint64_t nu,
                                             std::uint64_t space_size) {
  const double denom = static_cast<double>(space_size) - static_cast<double>(trials) + 1.0 -
                       static_cast<double>(nu);
  if (denom <= 0.0) return 0.0;
  return std::exp(-static_cast<double>(trials) * static_cast<double>(nu) / denom);
}

/// ceil((|S| + 1 - nu_max) |ln eta| / (nu_max + |ln eta|)).
inline std::uint64_t t_min(std::uint64_t space_size, std::uint64_t nu_max, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw ArgumentError("t_min requires 0 < eta < 1");
  if (nu_max < 1 || nu_max >= space_size) throw ArgumentError("t_min requires 1 <= nu_max < |S|");
  const long double log_eta = std::fabs(std::log(static_cast<long double>(eta)));
  const long double value =
      (static_cast<long double>(space_size) + 1.0L - static_cast<long double>(nu_max)) *
      log_eta / (static_cast<long double>(nu_max) + log_eta);
  return static_cast<std::uint64_t>(std::ceil(value));
}

/// 1 - exp(-theta (theta - 1) / (2 |W|)).
inline double birthday_success_model(double theta, double effective_size) {
  return 1.0 - std::exp(-theta * (theta - 1.0) / (2.0 * effective_size));
}

struct BirthdayReport {
  std::uint64_t space_size = 0;
  std::uint64_t repetitions = 0;
  /// Collision index of each repetition: number of distinct inputs evaluated
  /// when the first repeated output appeared. nullopt if none ever did.
  std::vector<std::optional<std::uint64_t>> theta;
  /// P_hat(theta) for theta = 1 .. max observed theta (index 0 is theta = 1).
  std::vector<double> success_curve;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double effective_size = std::numeric_limits<double>::quiet_NaN();  // |W| = sigma |S|
  std::optional<std::uint64_t> theta_star;  // smallest theta with P_hat >= 1/2
  double theta_star_fit = std::numeric_limits<double>::quiet_NaN();
  double max_deviation = std::numeric_limits<double>::quiet_NaN();
};

/// Least-squares fit of the birthday law to P_hat at the observed thetas,
/// with |W| = sigma |S| as the only free parameter.
inline void fit_birthday_law(BirthdayReport& report) {
  std::vector<std::uint64_t> observed;
  for (const auto& t : report.theta) {
    if (t) observed.push_back(*t);
  }
  if (observed.empty() || report.success_curve.empty()) return;
  std::sort(observed.begin(), observed.end());
  observed.erase(std::unique(observed.begin(), observed.end()), observed.end());

  const auto space = static_cast<double>(report.space_size);
  auto loss = [&](double log_sigma) {
    const double w = std::exp(log_sigma) * space;
    double sum = 0.0;
    for (std::uint64_t t : observed) {
      const double r = report.success_curve[t - 1] - birthday_success_model(static_cast<double>(t), w);
      sum += r * r;
    }
    return sum;
  };

  // Coarse scan in log sigma, then golden-section refinement around the best.
  double best = -12.0;
  double best_loss = loss(best);
  for (double s = -12.0; s <= 6.0; s += 0.05) {
    const double l = loss(s);
    if (l < best_loss) {
      best_loss = l;
      best = s;
    }
  }
  double lo = best - 0.05;
  double hi = best + 0.05;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - ratio * (hi - lo);
  double b = lo + ratio * (hi - lo);
  double fa = loss(a);
  double fb = loss(b);
  for (int iter = 0; iter < 100; ++iter) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - ratio * (hi - lo);
      fa = loss(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + ratio * (hi - lo);
      fb = loss(b);
    }
  }
  report.sigma = std::exp(0.5 * (lo + hi));
  report.effective_size = report.sigma * space;
  report.theta_star_fit =
      0.5 * (1.0 + std::sqrt(1.0 + 8.0 * report.effective_size * std::log(2.0)));

  double deviation = 0.0;
  for (std::size_t i = 0; i < report.success_curve.size(); ++i) {
    const double theta = static_cast<double>(i + 1);
    deviation = std::max(deviation, std::fabs(report.success_curve[i] -
                                              birthday_success_model(theta, report.effective_size)));
  }
  report.max_deviation = deviation;
}

/// Builds P_hat and the fit from per-repetition collision indices.
inline BirthdayReport summarize_birthday(std::uint64_t space_size,
                                         std::vector<std::optional<std::uint64_t>> theta) {
  BirthdayReport report;
  report.space_size = space_size;
  report.repetitions = theta.size();
  report.theta = std::move(theta);
  std::uint64_t max_theta = 0;
  for (const auto& t : report.theta) {
    if (t) max_theta = std::max(max_theta, *t);
  }
  if (max_theta > 0 && report.repetitions > 0) {
    std::vector<std::uint64_t> hits(max_theta + 1, 0);
    for (const auto& t : report.theta) {
      if (t) ++hits[*t];
    }
    report.success_curve.resize(max_theta);
    std::uint64_t cumulative = 0;
    for (std::uint64_t t = 1; t <= max_theta; ++t) {
      cumulative += hits[t];
      report.success_curve[t - 1] =
          static_cast<double>(cumulative) / static_cast<double>(report.repetitions);
      if (!report.theta_star && 2 * cumulative >= report.repetitions) report.theta_star = t;
    }
  }
  fit_birthday_law(report);
  return report;
}

/// One birthday attack against `f`: random inputs with replacement, repeated
/// inputs discarded, stop at the first repeated output.
template <typename Function>
std::optional<std::uint64_t> birthday_attack_once(const Function& f, std::uint64_t space_size,
                                                  RngStream& rng) {
  std::unordered_set<std::uint64_t> inputs;
  std::unordered_set<std::uint64_t> images;
  while (inputs.size() < space_size) {
    const std::uint64_t x = rng.uniform_below(space_size);
    if (!inputs.insert(x).second) continue;
    if (!images.insert(f(x)).second) return inputs.size();
  }
  return std::nullopt;
}

/// Repeats the attack; repetition i uses rng.derive(i).
template <typename Function>
BirthdayReport birthday_simulate(const Function& f, std::uint64_t space_size,
                                 std::uint64_t repetitions, const RngStream& rng,
                                 unsigned threads = 0) {
  if (repetitions < 1) throw ArgumentError("birthday_simulate needs at least one repetition");
  std::vector<std::optional<std::uint64_t>> theta(repetitions);
  parallel_for(
      repetitions,
      [&](std::size_t i) {
        RngStream stream = rng.derive(i);
        theta[i] = birthday_attack_once(f, space_size, stream);
      },
      threads);
  return summarize_birthday(space_size, std::move(theta));
}

/// Birthday attack against a precomputed full-domain table.
inline BirthdayReport birthday_simulate(std::span<const std::uint64_t> outputs,
                                        std::uint64_t repetitions, const RngStream& rng,
                                        unsigned threads = 0) {
  return birthday_simulate([outputs](std::uint64_t x) { return outputs[x]; }, outputs.size(),
                           repetitions, rng, threads);
}

struct CostEstimate {
  double omega_flops = 0.0;
  double n_cpu = 0.0;
  double space_size = 0.0;
  double nu_max = 0.0;
  /// d^3.5 N^2 2^N / (omega n_cpu): seconds per evaluation of F.
  double classical_eval_ops = 0.0;
  std::uint64_t t_min_trials = 0;
  /// t_min(|S|, nu_max, 0.01) evaluations at classical_eval_ops each.
  double exhaustive_ops = 0.0;
  /// Leading-order exhaustive-search time (2N)^N / (omega n_cpu).
  double exhaustive_leading_order = 0.0;
  double grover_queries = 0.0;  // sqrt(|S| / nu_max)
};

/// log C(M, N), usable where the exact binomial exceeds 128 bits.
inline double log_space_size(std::uint32_t modes, std::uint32_t bosons) {
  return std::lgamma(modes + 1.0) - std::lgamma(bosons + 1.0) - std::lgamma(modes - bosons + 1.0);
}

inline CostEstimate cost_estimates(std::uint32_t modes, std::uint32_t bosons, std::uint32_t bins,
                                   double omega_flops, double n_cpu, double nu_max) {
  if (modes < 1 || bosons < 1 || bosons > modes || bins < 1) {
    throw ArgumentError("cost_estimates requires 1 <= N <= M and d >= 1");
  }
  if (!(omega_flops > 0.0) || !(n_cpu > 0.0) || !(nu_max >= 1.0)) {
    throw ArgumentError("cost_estimates requires positive omega, n_cpu and nu_max >= 1");
  }
  CostEstimate est;
  est.omega_flops = omega_flops;
  est.n_cpu = n_cpu;
  est.nu_max = nu_max;
  try {
    est.space_size = static_cast<double>(space_size(modes, bosons));
  } catch (const CapacityError&) {
    est.space_size = std::exp(log_space_size(modes, bosons));
  }
  const double d = bins;
  const double n = bosons;
  est.classical_eval_ops = std::pow(d, 3.5) * n * n * std::exp2(n) / (omega_flops * n_cpu);

  const double log_eta = std::fabs(std::log(0.01));
  const double trials = std::ceil((est.space_size + 1.0 - nu_max) * log_eta / (nu_max + log_eta));
  est.t_min_trials = trials < 0x1.0p64 ? static_cast<std::uint64_t>(trials)
                                       : std::numeric_limits<std::uint64_t>::max();
  est.exhaustive_ops = trials * est.classical_eval_ops;
  est.exhaustive_leading_order = std::pow(2.0 * n, n) / (omega_flops * n_cpu);
  est.grover_queries = std::sqrt(est.space_size / nu_max);
  return est;
}

}  // namespace boson_owf
