// boson_owf: command-line front end over the header-only library.
//
// Exit codes: 0 success, 2 when MPB estimation (or a majority of runs) ended in
// ABORT, 1 on any error. Errors are printed to stderr as {"error": ...}.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "boson_owf.hpp"

namespace {

using namespace boson_owf;
using io::Json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAbort = 2;

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Globals {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out;
  std::string format = "json";
};

// Unitary source shared by every command that needs one: a file, or M plus
// a generator seed.
struct UnitaryArgs {
  std::string path;
  std::uint32_t modes = 0;
  std::optional<std::uint64_t> unitary_seed;

  void add(CLI::App* cmd) {
    cmd->add_option("--unitary", path, "Unitary JSON file");
    cmd->add_option("--M", modes, "Modes (with --unitary-seed, instead of a file)");
    cmd->add_option("--unitary-seed", unitary_seed, "Seed for the Haar unitary");
  }

  [[nodiscard]] UnitaryMatrix load() const {
    if (!path.empty()) return io::load_unitary(path);
    if (modes == 0 || !unitary_seed) {
      throw UsageError("give --unitary FILE, or --M together with --unitary-seed");
    }
    return haar_random_unitary(modes, *unitary_seed);
  }
};

struct ScaleArgs {
  std::uint32_t bosons = 0;
  std::uint32_t bins = 0;
  std::string strategy = "contiguous";

  void add(CLI::App* cmd, bool need_bins) {
    cmd->add_option("--N", bosons, "Bosons")->required();
    auto* d = cmd->add_option("--d", bins, "Number of bins");
    if (need_bins) d->required();
    cmd->add_option("--strategy", strategy, "Binning: contiguous|modulo")
        ->check(CLI::IsMember({"contiguous", "modulo"}));
  }

  [[nodiscard]] BinningScheme scheme() const { return {bins, parse_bin_strategy(strategy)}; }
};

struct InputArgs {
  std::string rank;
  std::vector<Port> ports;

  void add(CLI::App* cmd) {
    cmd->add_option("--input", rank, "Input rank in Z_|S|");
    cmd->add_option("--input-ports", ports, "Input configuration as sorted ports")->delimiter(',');
  }

  [[nodiscard]] Rank resolve(const ConfigSpace& space) const {
    if (!ports.empty()) return space.rank(Configuration{ports});
    if (rank.empty()) throw UsageError("give --input RANK or --input-ports P1,P2,...");
    const Rank r = parse_rank(rank);
    if (r >= space.size()) throw BoundsError("input rank outside Z_|S|");
    return r;
  }
};

struct Algo1Args {
  Algo1Params params;
  std::string method = "multinomial";

  void add(CLI::App* cmd) {
    cmd->add_option("--bootstraps", params.num_bootstraps, "Bootstrap resamples per round (M)");
    cmd->add_option("--delta-n", params.delta_n, "Samples added per round");
    cmd->add_option("--rounds", params.max_rounds, "Round cap L");
    cmd->add_option("--xi", params.xi, "Acceptance threshold: END when Omega_max >= 1 - xi");
    cmd->add_option("--gamma", params.ci_gamma, "CI level parameter (1 - gamma coverage)");
    cmd->add_option("--method", method, "Resampling: multinomial|indices")
        ->check(CLI::IsMember({"multinomial", "indices"}));
  }

  [[nodiscard]] Algo1Params get() const {
    Algo1Params p = params;
    p.method = method == "indices" ? ResampleMethod::Indices : ResampleMethod::Multinomial;
    return p;
  }
};

std::string cache_dir() {
  const char* dir = std::getenv("BOSON_OWF_CACHE_DIR");
  return dir ? dir : "";
}

std::uint64_t require_seed(const Globals& g, const std::string& what) {
  if (!g.seed) throw UsageError(what + " is stochastic; --seed is required");
  return *g.seed;
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream file(g.out, std::ios::binary);
  if (!file) throw Error("cannot open " + g.out + " for writing");
  file << text;
}

void emit_json(const Globals& g, const Json& j) { emit(g, j.dump(2) + "\n"); }

bool csv(const Globals& g) { return g.format == "csv"; }

std::shared_ptr<const CoarseTable> table_for(const UnitaryMatrix& u, const ConfigSpace& space,
                                             const BinningScheme& scheme) {
  return std::make_shared<const CoarseTable>(
      io::cached_coarse_table(u, space, scheme, cache_dir()));
}

std::vector<std::uint64_t> full_domain(const UnitaryMatrix& u, const ScaleArgs& scale) {
  const ConfigSpace space(static_cast<std::uint32_t>(u.modes()), scale.bosons);
  OwfParams params;
  params.unitary = std::make_shared<const UnitaryMatrix>(u);
  params.bosons = scale.bosons;
  params.scheme = scale.scheme();
  params.mode = OwfMode::Exact;
  params.table = table_for(u, space, params.scheme);
  return evaluate_exact_full_domain(params);
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<std::uint64_t>(std::stod(item)));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

// Recorded labels replayed in order, one dN batch per round. Running out of
// data is a source failure, not an abort.
class RecordSource {
 public:
  explicit RecordSource(const SampleRecord& record) : record_(record) {}
  void draw(std::span<BinLabel> out, RngStream&) const {
    if (next_ + out.size() > record_.labels.size()) {
      throw SourceError("recorded sample exhausted after " + std::to_string(next_) + " labels");
    }
    std::copy_n(record_.labels.begin() + static_cast<std::ptrdiff_t>(next_), out.size(),
                out.begin());
    next_ += out.size();
  }

 private:
  const SampleRecord& record_;
  mutable std::size_t next_ = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boson-sampling one-way function toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master seed (required by stochastic commands)");
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware)");
  app.add_option("--out", g.out, "Write the primary output here instead of stdout");
  app.add_option("--format", g.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

  int exit_code = kExitOk;
  std::function<void()> action;

  // unitary gen|show
  auto* unitary = app.add_subcommand("unitary", "Generate or inspect a Haar unitary");
  unitary->require_subcommand(1);
  std::uint32_t gen_modes = 0;
  auto* gen = unitary->add_subcommand("gen", "Generate a Haar random unitary");
  gen->add_option("--M", gen_modes, "Modes")->required();
  gen->callback([&] {
    action = [&] {
      const auto u = haar_random_unitary(gen_modes, require_seed(g, "unitary gen"));
      std::ostringstream text;
      io::write_unitary(text, u);
      emit(g, text.str());
    };
  });
  std::string show_path;
  auto* show = unitary->add_subcommand("show", "Verify and summarise a unitary file");
  show->add_option("path", show_path, "Unitary JSON file")->required();
  show->callback([&] {
    action = [&] {
      const auto u = io::load_unitary(show_path);
      Json j;
      j["M"] = u.modes();
      j["seed"] = u.seed();
      j["checksum"] = io::unitary_checksum(u);
      j["unitarity_defect"] = u.unitarity_defect();
      j["verified"] = true;
      emit_json(g, j);
    };
  });

  // dist
  UnitaryArgs dist_u;
  ScaleArgs dist_scale;
  InputArgs dist_in;
  auto* dist = app.add_subcommand("dist", "Exact output distribution, fine or coarse-grained");
  dist_u.add(dist);
  dist_scale.add(dist, false);
  dist_in.add(dist);
  dist->callback([&] {
    action = [&] {
      const auto u = dist_u.load();
      const ConfigSpace space(static_cast<std::uint32_t>(u.modes()), dist_scale.bosons);
      const Rank input = dist_in.resolve(space);
      const auto fine = exact_output_distribution(u, space, space.unrank(input));
      if (dist_scale.bins == 0) {
        if (csv(g)) {
          std::ostringstream text;
          io::write_fine_csv(text, fine);
          emit(g, text.str());
        } else {
          Json j;
          j["input_rank"] = to_string(input);
          j["raw_mass"] = fine.raw_mass;
          j["probs"] = fine.probs;
          emit_json(g, j);
        }
        return;
      }
      const auto coarse = coarse_grain(fine, dist_scale.scheme());
      if (csv(g)) {
        std::ostringstream text;
        io::write_coarse_csv(text, coarse);
        emit(g, text.str());
      } else {
        Json j = io::to_json(coarse);
        j["input_rank"] = to_string(input);
        j["raw_mass"] = fine.raw_mass;
        emit_json(g, j);
      }
    };
  });

  // sample
  UnitaryArgs sample_u;
  ScaleArgs sample_scale;
  InputArgs sample_in;
  std::uint64_t sample_count = 0;
  auto* sample = app.add_subcommand("sample", "Draw coarse-grained bin labels");
  sample_u.add(sample);
  sample_scale.add(sample, true);
  sample_in.add(sample);
  sample->add_option("--count", sample_count, "Number of labels")->required();
  sample->callback([&] {
    action = [&] {
      const std::uint64_t seed = require_seed(g, "sample");
      const auto u = sample_u.load();
      const ConfigSpace space(static_cast<std::uint32_t>(u.modes()), sample_scale.bosons);
      const auto coarse = coarse_grain(
          exact_output_distribution(u, space, space.unrank(sample_in.resolve(space))),
          sample_scale.scheme());
      RngStream rng(seed);
      const auto record = draw_bins(AliasSampler(coarse), sample_count, rng);
      std::ostringstream text;
      write_sample_record(text, record);
      emit(g, text.str());
    };
  });

  // mpb
  UnitaryArgs mpb_u;
  ScaleArgs mpb_scale;
  InputArgs mpb_in;
  Algo1Args mpb_algo;
  std::string mpb_samples;
  bool mpb_analyze_only = false;
  bool mpb_emit_sequence = false;
  std::uint32_t mpb_majority = 1;
  auto* mpb = app.add_subcommand("mpb", "Adaptive most-probable-bin estimation");
  mpb_u.add(mpb);
  mpb->add_option("--N", mpb_scale.bosons, "Bosons");
  mpb->add_option("--d", mpb_scale.bins, "Number of bins");
  mpb->add_option("--strategy", mpb_scale.strategy, "Binning: contiguous|modulo")
      ->check(CLI::IsMember({"contiguous", "modulo"}));
  mpb_in.add(mpb);
  mpb_algo.add(mpb);
  mpb->add_option("--samples", mpb_samples, "Recorded sample file used instead of simulation");
  mpb->add_flag("--analyze-only", mpb_analyze_only, "Bootstrap the whole recorded sample once");
  mpb->add_flag("--emit-mpb-sequence", mpb_emit_sequence, "Include per-bootstrap MPB labels");
  mpb->add_option("--majority", mpb_majority, "Independent runs r for majority decoding (odd)");
  mpb->callback([&] {
    action = [&] {
      const std::uint64_t seed = require_seed(g, "mpb");
      const RngStream rng(seed);
      Algo1Params params = mpb_algo.get();
      params.keep_mpb_sequence = mpb_emit_sequence;
      if (!mpb_samples.empty()) {
        std::ifstream in(mpb_samples);
        if (!in) throw Error("cannot open sample file " + mpb_samples);
        const auto record = read_sample_record(in);
        if (mpb_analyze_only) {
          const BootstrapOptions options{params.method, mpb_emit_sequence, 0};
          const auto s =
              bootstrap_analyze(record, params.num_bootstraps, params.ci_gamma, rng, options);
          emit_json(g, io::to_json(s, mpb_emit_sequence));
          return;
        }
        const auto outcome = estimate_mpb(RecordSource(record), record.bins, params, rng);
        emit_json(g, io::to_json(outcome, mpb_emit_sequence));
        if (outcome.status == Algo1Status::Abort) exit_code = kExitAbort;
        return;
      }
      if (mpb_scale.bosons == 0 || mpb_scale.bins == 0) {
        throw UsageError("simulated mpb needs --N and --d (or --samples FILE)");
      }
      const auto u = mpb_u.load();
      const ConfigSpace space(static_cast<std::uint32_t>(u.modes()), mpb_scale.bosons);
      const Rank input = mpb_in.resolve(space);
      const auto coarse =
          coarse_grain(exact_output_distribution(u, space, space.unrank(input)), mpb_scale.scheme());
      const AliasSampler sampler(coarse);
      Algo1Outcome outcome;
      if (mpb_majority > 1) {
        outcome = estimate_mpb_majority(sampler, coarse.bins, params, mpb_majority, rng);
      } else {
        outcome = estimate_mpb(sampler, coarse.bins, params, rng);
      }
      Json j = io::to_json(outcome, mpb_emit_sequence);
      j["input_rank"] = to_string(input);
      j["true_mpb"] = coarse.mpb_label;
      j["true_gap"] = coarse.gap;
      emit_json(g, j);
      if (outcome.status == Algo1Status::Abort) exit_code = kExitAbort;
    };
  });

  // owf eval|table
  auto* owf = app.add_subcommand("owf", "Evaluate the one-way function");
  owf->require_subcommand(1);
  UnitaryArgs owf_u;
  ScaleArgs owf_scale;
  InputArgs owf_in;
  Algo1Args owf_algo;
  std::string owf_mode = "exact";
  std::string owf_retry_cap = "0";
  auto* eval = owf->add_subcommand("eval", "y = F(x) with its round trace");
  owf_u.add(eval);
  owf_scale.add(eval, true);
  owf_in.add(eval);
  owf_algo.add(eval);
  eval->add_option("--mode", owf_mode, "exact|sampled")->check(CLI::IsMember({"exact", "sampled"}));
  eval->add_option("--retry-cap", owf_retry_cap, "Abort substitutions per round (0 = |S|)");
  eval->callback([&] {
    action = [&] {
      OwfParams params;
      params.unitary = std::make_shared<const UnitaryMatrix>(owf_u.load());
      params.bosons = owf_scale.bosons;
      params.scheme = owf_scale.scheme();
      params.mode = owf_mode == "sampled" ? OwfMode::Sampled : OwfMode::Exact;
      params.algo1 = owf_algo.get();
      params.retry_cap = parse_rank(owf_retry_cap);
      const ConfigSpace space = params.space();
      std::uint64_t seed = 0;
      if (params.mode == OwfMode::Sampled) seed = require_seed(g, "owf eval --mode sampled");
      const Rank x = owf_in.resolve(space);
      const auto result = evaluate(x, params, RngStream(seed));
      Json j;
      j["x"] = to_string(x);
      j["y"] = to_string(result.y);
      j["output"] = io::to_json(space.unrank(result.y));
      j["mode"] = to_string(params.mode);
      j["trace"] = io::to_json(result.trace, space);
      emit_json(g, j);
    };
  });
  UnitaryArgs table_u;
  ScaleArgs table_scale;
  auto* table = owf->add_subcommand("table", "Exact-mode F over the whole domain");
  table_u.add(table);
  table_scale.add(table, true);
  table->callback([&] {
    action = [&] {
      const auto outputs = full_domain(table_u.load(), table_scale);
      if (csv(g)) {
        std::ostringstream text;
        io::write_table_csv(text, outputs);
        emit(g, text.str());
      } else {
        emit_json(g, Json{{"space_size", outputs.size()}, {"outputs", outputs}});
      }
    };
  });

  // analyze census|tmin|birthday|cost
  auto* analyze = app.add_subcommand("analyze", "Security analysis");
  analyze->require_subcommand(1);
  UnitaryArgs census_u;
  ScaleArgs census_scale;
  auto* census = analyze->add_subcommand("census", "Preimage census of exact-mode F");
  census_u.add(census);
  census_scale.add(census, true);
  census->callback([&] {
    action = [&] {
      const auto report = collision_census(full_domain(census_u.load(), census_scale));
      if (csv(g)) {
        std::ostringstream text;
        io::write_census_csv(text, report);
        emit(g, text.str());
      } else {
        emit_json(g, io::to_json(report));
      }
    };
  });
  std::uint64_t tmin_size = 0, tmin_nu = 0;
  double tmin_eta = 0.01;
  auto* tmin = analyze->add_subcommand("tmin", "Trials needed by exhaustive search");
  tmin->add_option("--S", tmin_size, "|S|")->required();
  tmin->add_option("--nu-max", tmin_nu, "Largest preimage count")->required();
  tmin->add_option("--eta", tmin_eta, "Target failure probability");
  tmin->callback([&] {
    action = [&] {
      const auto t = t_min(tmin_size, tmin_nu, tmin_eta);
      Json j{{"space_size", tmin_size}, {"nu_max", tmin_nu}, {"eta", tmin_eta}, {"t_min", t},
             {"fraction_of_space", static_cast<double>(t) / static_cast<double>(tmin_size)}};
      emit_json(g, j);
    };
  });
  UnitaryArgs bday_u;
  ScaleArgs bday_scale;
  std::uint64_t bday_reps = 500;
  auto* bday = analyze->add_subcommand("birthday", "Birthday collision attack on exact-mode F");
  bday_u.add(bday);
  bday_scale.add(bday, true);
  bday->add_option("--repetitions", bday_reps, "Independent attacks");
  bday->callback([&] {
    action = [&] {
      const std::uint64_t seed = require_seed(g, "analyze birthday");
      const auto outputs = full_domain(bday_u.load(), bday_scale);
      const auto report =
          birthday_simulate(std::span<const std::uint64_t>(outputs), bday_reps, RngStream(seed));
      emit_json(g, io::to_json(report));
    };
  });
  std::uint32_t cost_m = 0, cost_n = 0, cost_d = 0;
  double cost_omega = 1e21, cost_ncpu = 1e4, cost_nu = 1;
  auto* cost = analyze->add_subcommand("cost", "Classical and quantum attack cost estimates");
  cost->add_option("--M", cost_m, "Modes")->required();
  cost->add_option("--N", cost_n, "Bosons")->required();
  cost->add_option("--d", cost_d, "Bins")->required();
  cost->add_option("--omega", cost_omega, "FLOP/s per CPU");
  cost->add_option("--ncpu", cost_ncpu, "CPUs");
  cost->add_option("--nu-max", cost_nu, "Largest preimage count");
  cost->callback([&] {
    action = [&] {
      emit_json(g, io::to_json(cost_estimates(cost_m, cost_n, cost_d, cost_omega, cost_ncpu, cost_nu)));
    };
  });

  // experiment <name>
  std::string exp_name;
  experiments::Scale exp_scale;
  std::string exp_strategy = "contiguous";
  std::uint64_t exp_unitaries = 20, exp_unitary_seed = 1, exp_runs = 100, exp_reps = 200;
  std::string exp_input = "16";
  std::string exp_sizes, exp_eps = "1e-4,1e-3,1e-2", exp_rounds, exp_bins;
  Algo1Args exp_algo;
  auto* experiment = app.add_subcommand("experiment", "Emit the data series behind a figure");
  experiment->add_option("name", exp_name, "fig1|fig2|fig3|fig4|fig5|fig7|fig9|fig10")->required();
  experiment->add_option("--M", exp_scale.modes, "Modes");
  experiment->add_option("--N", exp_scale.bosons, "Bosons");
  experiment->add_option("--d", exp_scale.bins, "Bins");
  experiment->add_option("--strategy", exp_strategy)->check(CLI::IsMember({"contiguous", "modulo"}));
  experiment->add_option("--unitaries", exp_unitaries, "Unitaries (fig5, fig7, fig9)");
  experiment->add_option("--unitary-seed", exp_unitary_seed, "Seed of the (first) unitary");
  experiment->add_option("--input", exp_input, "Input rank (fig1-4, fig10)");
  experiment->add_option("--runs", exp_runs, "Independent samples per point (fig2, fig3)");
  experiment->add_option("--repetitions", exp_reps, "Repetitions (fig4, fig9, fig10)");
  experiment->add_option("--sizes", exp_sizes, "Comma-separated sample sizes (fig1-3)");
  experiment->add_option("--eps", exp_eps, "Comma-separated eps values (fig5)");
  experiment->add_option("--round-caps", exp_rounds, "Comma-separated L values (fig4)");
  experiment->add_option("--bins-list", exp_bins, "Comma-separated d values (fig10)");
  exp_algo.add(experiment);
  experiment->callback([&] {
    action = [&] {
      exp_scale.strategy = parse_bin_strategy(exp_strategy);
      const auto params = exp_algo.get();
      auto single = [&] {
        const auto u = haar_random_unitary(exp_scale.modes, exp_unitary_seed);
        return experiments::coarse_for(u, exp_scale, parse_rank(exp_input));
      };
      auto sizes_or = [&](const std::vector<std::uint64_t>& fallback) {
        return exp_sizes.empty() ? fallback : parse_u64_list(exp_sizes);
      };
      Json j;
      if (exp_name == "fig1") {
        const RngStream rng(require_seed(g, "experiment fig1"));
        j = experiments::fig1(single(), sizes_or({10000, 100000}), params.num_bootstraps,
                              params.ci_gamma, rng);
      } else if (exp_name == "fig2") {
        const RngStream rng(require_seed(g, "experiment fig2"));
        j = experiments::to_json(experiments::ci_width_scaling(
            single(), sizes_or({10000, 100000, 1000000, 10000000}), exp_runs,
            params.num_bootstraps, params.ci_gamma, rng));
      } else if (exp_name == "fig3") {
        const RngStream rng(require_seed(g, "experiment fig3"));
        j = experiments::fig3(single(), sizes_or({100000}).front(), exp_runs,
                              params.num_bootstraps, rng);
      } else if (exp_name == "fig4") {
        const RngStream rng(require_seed(g, "experiment fig4"));
        std::vector<std::uint32_t> caps;
        for (auto v : exp_rounds.empty() ? std::vector<std::uint64_t>{1, 2, 5, 10, 20, 50}
                                         : parse_u64_list(exp_rounds)) {
          caps.push_back(static_cast<std::uint32_t>(v));
        }
        j = experiments::fig4(single(), params, caps, exp_reps, rng);
      } else if (exp_name == "fig5") {
        j = experiments::to_json(experiments::eps_census(exp_scale, exp_unitaries,
                                                         parse_double_list(exp_eps),
                                                         exp_unitary_seed));
      } else if (exp_name == "fig7") {
        j = experiments::to_json(
            experiments::census_sweep(exp_scale, exp_unitaries, exp_unitary_seed));
      } else if (exp_name == "fig9") {
        const std::uint64_t seed = require_seed(g, "experiment fig9");
        std::vector<std::optional<std::uint64_t>> theta;
        std::uint64_t size = 0;
        for (std::uint64_t i = 0; i < exp_unitaries; ++i) {
          const auto outputs = experiments::full_domain(
              exp_scale, experiments::unitary_seed(exp_unitary_seed, i));
          size = outputs.size();
          const auto r = birthday_simulate(std::span<const std::uint64_t>(outputs), exp_reps,
                                           RngStream(seed).derive(i));
          theta.insert(theta.end(), r.theta.begin(), r.theta.end());
        }
        j = io::to_json(summarize_birthday(size, std::move(theta)));
      } else if (exp_name == "fig10") {
        const RngStream rng(require_seed(g, "experiment fig10"));
        std::vector<std::uint32_t> bins;
        for (auto v : exp_bins.empty() ? std::vector<std::uint64_t>{11, 21, 31, 41, 51, 61, 71}
                                       : parse_u64_list(exp_bins)) {
          bins.push_back(static_cast<std::uint32_t>(v));
        }
        const auto u = haar_random_unitary(exp_scale.modes, exp_unitary_seed);
        j = experiments::fig10(u, exp_scale, parse_rank(exp_input), bins, params, exp_reps, rng);
      } else {
        throw UsageError("unknown experiment '" + exp_name +
                         "'; expected fig1|fig2|fig3|fig4|fig5|fig7|fig9|fig10");
      }
      j["experiment"] = exp_name;
      emit_json(g, j);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << Json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return kExitError;
  }

  try {
    if (g.threads != 0) default_thread_count() = g.threads;
    action();
  } catch (const UsageError& e) {
    std::cerr << Json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return kExitError;
  } catch (const IntegrityError& e) {
    std::cerr << Json{{"error", "integrity"}, {"message", e.what()}}.dump() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", "runtime"}, {"message", e.what()}}.dump() << '\n';
    return kExitError;
  }
  return exit_code;
}
