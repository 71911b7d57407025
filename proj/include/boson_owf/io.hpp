#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstring>
#include <filesystem>
#include <optional>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "boson_owf/bootstrap.hpp"
#include "boson_owf/boson_dist.hpp"
#include "boson_owf/config_space.hpp"
#include "boson_owf/errors.hpp"
#include "boson_owf/matrix.hpp"
#include "boson_owf/mpb_estimator.hpp"
#include "boson_owf/owf.hpp"
#include "boson_owf/security.hpp"

namespace boson_owf::io {

using Json = nlohmann::ordered_json;

/// 17 significant digits: enough for a bit-exact round trip of any double.
inline std::string format_double(double value) {
  std::array<char, 40> buffer{};
  std::snprintf(buffer.data(), buffer.size(), "%.17g", value);
  return buffer.data();
}

inline std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream hex;
  hex << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < length; ++i) hex << std::setw(2) << static_cast<int>(digest[i]);
  return hex.str();
}

/// Canonical entry serialization hashed into the unitary checksum: one
/// "re,im\n" line per entry in row-major order, 17 significant digits.
inline std::string canonical_entries(const ComplexMatrix& m) {
  std::string out;
  for (const auto& z : m.entries()) {
    out += format_double(z.real());
    out += ',';
    out += format_double(z.imag());
    out += '\n';
  }
  return out;
}

inline std::string unitary_checksum(const UnitaryMatrix& u) {
  return sha256_hex(canonical_entries(u.matrix()));
}

/// Writes {"M", "seed", "entries": [[re, im], ...], "checksum"} by hand so
/// that every entry carries exactly 17 significant digits.
inline void write_unitary(std::ostream& out, const UnitaryMatrix& u) {
  out << "{\n  \"M\": " << u.modes() << ",\n  \"seed\": " << u.seed() << ",\n  \"entries\": [";
  const auto entries = u.matrix().entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out << (i == 0 ? "\n    [" : ",\n    [") << format_double(entries[i].real()) << ", "
        << format_double(entries[i].imag()) << ']';
  }
  out << "\n  ],\n  \"checksum\": \"" << unitary_checksum(u) << "\"\n}\n";
}

inline UnitaryMatrix read_unitary(std::istream& in) {
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw IntegrityError(std::string("unitary file is not valid JSON: ") + e.what());
  }
  try {
    const auto modes = doc.at("M").get<std::size_t>();
    const auto seed = doc.at("seed").get<std::uint64_t>();
    const auto& entries = doc.at("entries");
    if (!entries.is_array() || entries.size() != modes * modes) {
      throw IntegrityError("unitary file has the wrong number of entries");
    }
    std::vector<Complex> values;
    values.reserve(entries.size());
    for (const auto& pair : entries) {
      if (!pair.is_array() || pair.size() != 2) throw IntegrityError("entries must be [re, im] pairs");
      values.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
    ComplexMatrix matrix(modes, modes, std::move(values));
    const std::string expected = doc.at("checksum").get<std::string>();
    const std::string actual = sha256_hex(canonical_entries(matrix));
    if (expected != actual) {
      throw IntegrityError("checksum mismatch: file says " + expected + ", entries hash to " + actual);
    }
    return UnitaryMatrix(std::move(matrix), seed);
  } catch (const Json::exception& e) {
    throw IntegrityError(std::string("malformed unitary file: ") + e.what());
  } catch (const DimensionError& e) {
    throw IntegrityError(std::string("malformed unitary file: ") + e.what());
  }
}

inline void save_unitary(const std::string& path, const UnitaryMatrix& u) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_unitary(out, u);
}

inline UnitaryMatrix load_unitary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open unitary file " + path);
  return read_unitary(in);
}

// Distribution cache: raw doubles behind a magic word and a count. A file
// that fails either check is ignored and rebuilt.
inline constexpr std::uint64_t kCacheMagic = 0x313046574f4e5342ULL;

inline void save_doubles(const std::filesystem::path& path, std::span<const double> values) {
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write cache file " + tmp);
    const std::uint64_t header[2] = {kCacheMagic, values.size()};
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size_bytes()));
    if (!out) throw Error("cannot write cache file " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline std::optional<std::vector<double>> load_doubles(const std::filesystem::path& path,
                                                       std::uint64_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::uint64_t header[2] = {0, 0};
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in || header[0] != kCacheMagic || header[1] != expected) return std::nullopt;
  std::vector<double> values(expected);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(expected * sizeof(double)));
  if (!in) return std::nullopt;
  return values;
}

/// Coarse table for (u, N, scheme), read from `cache_dir` when present there
/// and written back after a fresh build. Empty `cache_dir` disables caching.
inline CoarseTable cached_coarse_table(const UnitaryMatrix& u, const ConfigSpace& space,
                                       const BinningScheme& scheme, const std::string& cache_dir,
                                       std::uint64_t cap = kDefaultEnumerationCap,
                                       unsigned threads = 0) {
  check_enumeration_cap(space, cap);
  std::filesystem::path path;
  const std::uint64_t inputs = space.size_u64();
  if (!cache_dir.empty()) {
    const std::string key = unitary_checksum(u) + "|N=" + std::to_string(space.bosons()) +
                            "|d=" + std::to_string(scheme.bins) + "|" +
                            std::string(to_string(scheme.strategy));
    path = std::filesystem::path(cache_dir) / ("coarse-" + sha256_hex(key).substr(0, 32) + ".bin");
    if (auto flat = load_doubles(path, inputs * scheme.bins)) {
      CoarseTable table;
      table.scheme = scheme;
      table.by_input.reserve(inputs);
      for (std::uint64_t x = 0; x < inputs; ++x) {
        const auto first = flat->begin() + static_cast<std::ptrdiff_t>(x * scheme.bins);
        table.by_input.push_back(make_coarse({first, first + scheme.bins}));
      }
      return table;
    }
  }
  auto table = build_coarse_table(u, space, scheme, cap, threads);
  if (!path.empty()) {
    std::vector<double> flat;
    flat.reserve(inputs * scheme.bins);
    for (const auto& c : table.by_input) flat.insert(flat.end(), c.probs.begin(), c.probs.end());
    save_doubles(path, flat);
  }
  return table;
}

inline Json to_json(const Configuration& cfg) { return Json(cfg.ports); }
inline Json rank_json(Rank r) { return to_string(r); }

inline Json to_json(const BootstrapSummary& s, bool emit_mpb_sequence = false) {
  Json j;
  j["p_max"] = s.p_max;
  j["mpb_empirical"] = s.mpb_empirical;
  j["ci_low"] = s.ci_low;
  j["ci_high"] = s.ci_high;
  j["ci_width"] = s.ci_width;
  j["omega"] = s.omega;
  j["omega_max"] = s.omega_max;
  j["mu_tilde"] = s.mu_tilde;
  j["num_bootstraps"] = s.num_bootstraps;
  j["gamma"] = s.gamma;
  j["sample_size"] = s.sample_size;
  if (emit_mpb_sequence) j["mpb_sequence"] = s.mpb_sequence;
  return j;
}

inline Json to_json(const Algo1Outcome& o, bool emit_mpb_sequence = false) {
  Json j;
  j["status"] = to_string(o.status);
  j["mu_tilde"] = o.mu_tilde ? Json(*o.mu_tilde) : Json(nullptr);
  j["rounds_used"] = o.rounds_used;
  j["total_samples"] = o.total_samples;
  j["omega_max"] = o.omega_max;
  j["omega_history"] = o.omega_history;
  j["final_summary"] = to_json(o.final_summary, emit_mpb_sequence);
  return j;
}

inline Json to_json(const CoarseDistribution& c) {
  Json j;
  j["d"] = c.bins;
  j["probs"] = c.probs;
  j["mpb_label"] = c.mpb_label;
  j["p_max"] = c.p_max;
  j["gap"] = c.gap;
  return j;
}

inline Json to_json(const OwfTrace& t, const ConfigSpace& space) {
  Json rounds = Json::array();
  for (const auto& r : t.rounds) {
    Json jr;
    jr["scheduled_kappa"] = rank_json(r.scheduled_kappa);
    jr["substitutions"] = r.substitutions;
    jr["kappa"] = rank_json(r.kappa);
    jr["input"] = to_json(space.unrank(r.kappa));
    jr["mu_tilde"] = r.mu_tilde;
    jr["samples"] = r.samples;
    rounds.push_back(std::move(jr));
  }
  Json j;
  j["rounds"] = std::move(rounds);
  j["mu_tilde"] = t.mu_tilde;
  j["phi"] = t.phi;
  j["y"] = rank_json(t.y);
  j["chaining"] = "substituted";
  return j;
}

inline Json to_json(const CollisionReport& r) {
  Json j;
  j["space_size"] = r.space_size;
  j["image_size"] = r.image_size;
  j["image_fraction"] = static_cast<double>(r.image_size) / static_cast<double>(r.space_size);
  j["nu_max"] = r.nu_max;
  Json hist = Json::object();
  for (const auto& [nu, outputs] : r.histogram) hist[std::to_string(nu)] = outputs;
  j["histogram"] = std::move(hist);
  return j;
}

inline Json optional_number(double value) {
  return std::isfinite(value) ? Json(value) : Json(nullptr);
}

inline Json to_json(const BirthdayReport& r) {
  Json j;
  j["space_size"] = r.space_size;
  j["repetitions"] = r.repetitions;
  Json theta = Json::array();
  for (const auto& t : r.theta) theta.push_back(t ? Json(*t) : Json("inf"));
  j["theta"] = std::move(theta);
  j["success_curve"] = r.success_curve;
  j["sigma"] = optional_number(r.sigma);
  j["effective_size"] = optional_number(r.effective_size);
  j["theta_star"] = r.theta_star ? Json(*r.theta_star) : Json(nullptr);
  j["theta_star_fit"] = optional_number(r.theta_star_fit);
  j["max_deviation"] = optional_number(r.max_deviation);
  return j;
}

inline Json to_json(const CostEstimate& c) {
  Json j;
  j["omega_flops"] = c.omega_flops;
  j["n_cpu"] = c.n_cpu;
  j["space_size"] = c.space_size;
  j["nu_max"] = c.nu_max;
  j["classical_eval_ops"] = c.classical_eval_ops;
  j["t_min"] = c.t_min_trials;
  j["exhaustive_ops"] = c.exhaustive_ops;
  j["exhaustive_leading_order"] = c.exhaustive_leading_order;
  j["exhaustive_leading_order_years"] = c.exhaustive_leading_order / (365.25 * 24 * 3600);
  j["grover_queries"] = c.grover_queries;
  return j;
}

inline Json to_json(const StatusProbabilities& s) {
  Json j;
  j["p_s"] = s.p_success;
  j["p_f"] = s.p_failure;
  j["p_inconclusive"] = s.p_inconclusive;
  j["successes"] = s.successes;
  j["failures"] = s.failures;
  j["aborts"] = s.aborts;
  j["repetitions"] = s.repetitions;
  return j;
}

inline void write_fine_csv(std::ostream& out, const OutputDistribution& dist) {
  out << "rank,probability\n";
  for (std::size_t r = 0; r < dist.probs.size(); ++r) out << r << ',' << format_double(dist.probs[r]) << '\n';
}

inline void write_coarse_csv(std::ostream& out, const CoarseDistribution& coarse) {
  out << "bin,probability\n";
  for (std::size_t b = 0; b < coarse.probs.size(); ++b) {
    out << b << ',' << format_double(coarse.probs[b]) << '\n';
  }
}

inline void write_census_csv(std::ostream& out, const CollisionReport& r) {
  out << "y,count\n";
  for (std::size_t y = 0; y < r.occurrence.size(); ++y) out << y << ',' << r.occurrence[y] << '\n';
}

inline void write_table_csv(std::ostream& out, std::span<const std::uint64_t> outputs) {
  out << "x,y\n";
  for (std::size_t x = 0; x < outputs.size(); ++x) out << x << ',' << outputs[x] << '\n';
}

}  // namespace boson_owf::io
