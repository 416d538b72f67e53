#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qkdmm/attack_sim.hpp"
#include "qkdmm/characterization.hpp"
#include "qkdmm/detector_spec.hpp"
#include "qkdmm/errors.hpp"
#include "qkdmm/eve_optimizer.hpp"
#include "qkdmm/keyrate.hpp"
#include "qkdmm/sweep.hpp"
#include "qkdmm/virtual_filter.hpp"

namespace qkdmm::cli {
namespace {

using nlohmann::json;

struct CommonFlags {
  std::string spec_path;
  bool json = false;
  std::uint64_t seed = 1;
  int starts = 64;
  int rank = 1;
  double tol = 1e-5;
  int max_iters = 500;
  double penalty_init = 10.0;
  bool symmetric = false;
  int threads = 0;

  SolverConfig solver() const {
    SolverConfig c;
    c.starts = starts;
    c.rank = rank;
    c.seed = seed;
    c.max_iters = max_iters;
    c.penalty_init = penalty_init;
    c.constraint_tol = tol;
    c.symmetric_attack = symmetric;
    c.threads = threads;
    return c;
  }
};

struct AnalyzeFlags {
  std::string knowledge = "full";
  std::optional<double> e_obs;
};

struct SweepFlags {
  double e_max = 0.1;
  int steps = 20;
  bool bounds_only = false;
  std::string out_path;
};

struct CharacterizeFlags {
  std::string csv0;
  std::string csv1;
  double bandwidth_ghz = 1.0;
  std::string gate_ns;
  bool diagonal_only = false;
  std::string out_path;
};

struct AttackFlags {
  std::vector<std::string> shifts;
  std::int64_t n = 100000;
};

// Human-readable number with `digits` significant figures.
std::string sig(double x, int digits = 4) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  std::ostringstream s;
  s << std::showpoint << std::setprecision(digits) << x;
  return s.str();
}

std::string sig_list(const RealVector& v, int digits) {
  std::string text = "[";
  for (Index i = 0; i < v.size(); ++i) {
    if (i > 0) text += ", ";
    text += sig(v(i), digits);
  }
  return text + "]";
}

json to_json(const RealVector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

void add_common_flags(CLI::App& cmd, CommonFlags& f, bool solver_flags) {
  cmd.add_flag("--json", f.json, "Machine-readable output");
  cmd.add_option("--seed", f.seed, "Random seed");
  cmd.add_option("--threads", f.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  if (!solver_flags) return;
  cmd.add_option("--starts", f.starts, "Random restarts per solve")->check(CLI::PositiveNumber);
  cmd.add_option("--rank", f.rank, "Rank of Eve's state (0 = best of 1, 2, 4d)")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--tol", f.tol, "Constraint tolerance")->check(CLI::PositiveNumber);
  cmd.add_option("--max-iters", f.max_iters, "Inner iteration cap")->check(CLI::PositiveNumber);
  cmd.add_option("--penalty-init", f.penalty_init, "Initial penalty weight")
      ->check(CLI::PositiveNumber);
  cmd.add_flag("--symmetric", f.symmetric, "Restrict to bit-flip symmetric attacks");
}

DetectorPair load_spec_pair(const std::string& path) {
  const DetectorSpec spec = read_detector_spec(path);
  return load_pair(spec.e0, spec.e1);
}

std::string rank_word(bool full) { return full ? "full" : "singular"; }

int cmd_analyze(const CommonFlags& common, const AnalyzeFlags& flags, std::ostream& out) {
  const DetectorSpec spec = read_detector_spec(common.spec_path);
  const DetectorPair pair = load_pair(spec.e0, spec.e1);
  const Knowledge knowledge =
      flags.knowledge == "diagonal" ? Knowledge::DiagonalOnly : Knowledge::FullMatrices;
  const NoiselessRate noiseless = special_case_rate(pair, knowledge);

  json report;
  report["d"] = pair.dim();
  report["full_rank"] = {pair.full_rank[0], pair.full_rank[1]};
  report["knowledge"] = flags.knowledge;
  report["R_noiseless"] = noiseless.rate;
  report["zero_reason"] = nullptr;

  std::ostringstream human;
  human << "d = " << pair.dim() << '\n';
  human << "rank: " << spec.label0 << ' ' << rank_word(pair.full_rank[0]) << ", " << spec.label1
        << ' ' << rank_word(pair.full_rank[1]) << '\n';

  if (noiseless.zero_reason) {
    const std::string reason(to_string(*noiseless.zero_reason));
    report["zero_reason"] = reason;
    human << "R_noiseless = " << sig(0.0) << '\n';
    human << "zero-rate reason: " << reason << '\n';
    out << (common.json ? report.dump(2) + "\n" : human.str());
    return kExitZeroRate;
  }

  // Singular detectors with a shared nullspace are analysed on their common range.
  DetectorPair working = pair;
  if (!pair.both_full_rank()) {
    working = *reduce_to_common_range(pair);
    human << "reduced to common range: d = " << working.dim() << '\n';
    report["reduced_d"] = working.dim();
  }
  const MismatchSpectrum spectrum = mismatch_spectrum(working);
  const VirtualFilter filter = compute_virtual_filter(spectrum, working);
  const SuboptimalBounds bounds = suboptimal_bounds(spectrum);

  // The spectrum is quoted at three figures, like the ratios it is compared against.
  human << "D = " << sig_list(spectrum.ratios, 3) << '\n';
  human << "R_noiseless = " << sig(noiseless.rate) << '\n';
  human << "p_succ bound = " << sig(bounds.p_succ_lower) << '\n';
  human << "e_p/e_p' bound = " << sig(bounds.ep_ratio_upper) << '\n';
  human << "C validity margin = " << sig(filter.validity_margin) << '\n';
  report["D"] = to_json(spectrum.ratios);
  report["p_succ_bound"] = bounds.p_succ_lower;
  report["ep_ratio_bound"] = bounds.ep_ratio_upper;
  report["validity_margin"] = filter.validity_margin;

  if (flags.e_obs) {
    const double e = *flags.e_obs;
    const ObservedRates observed{e, e};
    const SolverConfig config = common.solver();
    const ConstrainedSolution p1 = minimize_filtering_probability(working, filter, observed, config);
    const ConstrainedSolution p2 = maximize_virtual_phase_error(working, filter, observed, config);
    const KeyRateReport opt = noisy_rate(p1.value, p2.value, e, RateMethod::NoisyOptimized);
    const KeyRateReport bound =
        noisy_rate(bounds.p_succ_lower, bounds.ep_ratio_upper * e, e, RateMethod::NoisyBounds);
    const KeyRateReport four = four_phase_rate(e, e);
    human << "e_obs = " << sig(e) << '\n';
    human << "p_succ opt = " << sig(p1.value) << '\n';
    human << "e_p opt = " << sig(p2.value) << '\n';
    human << "rate opt = " << sig(opt.rate) << '\n';
    human << "rate bound = " << sig(bound.rate) << '\n';
    human << "rate four-phase = " << sig(four.rate) << '\n';
    report["e_obs"] = e;
    report["p_succ_opt"] = p1.value;
    report["e_p_opt"] = p2.value;
    report["rate_opt"] = opt.rate;
    report["rate_bound"] = bound.rate;
    report["rate_4phase"] = four.rate;
    report["constraint_residual"] = std::max(p1.constraint_residual, p2.constraint_residual);
  }

  out << (common.json ? report.dump(2) + "\n" : human.str());
  return kExitOk;
}

int cmd_sweep(const CommonFlags& common, const SweepFlags& flags, std::ostream& out) {
  const DetectorPair pair = load_spec_pair(common.spec_path);
  SweepOptions options;
  options.e_max = flags.e_max;
  options.steps = flags.steps;
  options.bounds_only = flags.bounds_only;
  options.solver = common.solver();
  options.threads = common.threads;
  const std::vector<SweepRow> rows = run_sweep(pair, options);

  std::ofstream file;
  std::ostream* sink = &out;
  if (!flags.out_path.empty()) {
    file.open(flags.out_path);
    if (!file) throw Error(ErrorCode::ParseError, "cannot write " + flags.out_path);
    sink = &file;
  }
  if (common.json) {
    json doc = json::array();
    for (const SweepRow& r : rows) {
      doc.push_back({{"e_obs", r.e_obs},
                     {"p_succ_bound", r.p_succ_bound},
                     {"p_succ_opt", r.p_succ_opt},
                     {"e_p_bound", r.e_p_bound},
                     {"e_p_opt", r.e_p_opt},
                     {"rate_bound", r.rate_bound},
                     {"rate_opt", r.rate_opt},
                     {"rate_4phase", r.rate_4phase},
                     {"status", r.status}});
    }
    *sink << doc.dump(2) << '\n';
  } else {
    write_sweep_csv(*sink, rows);
  }
  return kExitOk;
}

std::pair<double, double> parse_gate(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::InvalidGate, "--gate-ns expects START:END");
  }
  try {
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidGate, "cannot parse gate \"" + text + "\"");
  }
}

int cmd_characterize(const CommonFlags& common, const CharacterizeFlags& flags,
                     std::ostream& out) {
  const auto [start_ns, end_ns] = parse_gate(flags.gate_ns);
  const FilteredGate gate = sample_grid(flags.bandwidth_ghz * 1e9, start_ns * 1e-9, end_ns * 1e-9);
  const ContinuousResponse r0 = read_response_csv(flags.csv0);
  const ContinuousResponse r1 = read_response_csv(flags.csv1);
  const auto build = [&](const ContinuousResponse& r) {
    return flags.diagonal_only ? diagonal_only_response(r, gate) : discretize_response(r, gate);
  };
  const EfficiencyResponse e0 = build(r0);
  const EfficiencyResponse e1 = build(r1);

  DetectorSpec spec;
  spec.e0 = e0.matrix();
  spec.e1 = e1.matrix();
  std::ofstream file(flags.out_path);
  if (!file) throw Error(ErrorCode::ParseError, "cannot write " + flags.out_path);
  write_detector_spec(file, spec);
  file.close();

  const DetectorPair pair = load_pair(spec.e0, spec.e1);
  json report;
  report["d"] = gate.dim();
  report["spacing_ns"] = gate.spacing_s() * 1e9;
  json times = json::array();
  for (double t : gate.sample_times_s) times.push_back(t * 1e9);
  report["sample_times_ns"] = times;
  report["diagonal_only"] = flags.diagonal_only;
  report["full_rank"] = {pair.full_rank[0], pair.full_rank[1]};
  report["out"] = flags.out_path;
  report["D"] = nullptr;

  std::ostringstream human;
  human << "d = " << gate.dim() << '\n';
  human << "spacing = " << sig(gate.spacing_s() * 1e9) << " ns\n";
  human << "E0 spectrum in [" << sig(min_eigenvalue(spec.e0)) << ", "
        << sig(max_eigenvalue(spec.e0)) << "]\n";
  human << "E1 spectrum in [" << sig(min_eigenvalue(spec.e1)) << ", "
        << sig(max_eigenvalue(spec.e1)) << "]\n";
  if (pair.both_full_rank()) {
    const MismatchSpectrum spectrum = mismatch_spectrum(pair);
    human << "D = " << sig_list(spectrum.ratios, 3) << '\n';
    report["D"] = to_json(spectrum.ratios);
  } else {
    human << "rank: detector0 " << rank_word(pair.full_rank[0]) << ", detector1 "
          << rank_word(pair.full_rank[1]) << '\n';
  }
  human << "wrote " << flags.out_path << '\n';
  out << (common.json ? report.dump(2) + "\n" : human.str());
  return kExitOk;
}

std::vector<ShiftChoice> parse_strategy(const std::vector<std::string>& shifts) {
  std::vector<ShiftChoice> strategy;
  std::vector<bool> explicit_prob;
  double assigned = 0.0;
  for (const std::string& text : shifts) {
    const auto colon = text.find(':');
    ShiftChoice choice;
    try {
      choice.index = std::stol(text.substr(0, colon));
      if (colon != std::string::npos) {
        choice.probability = std::stod(text.substr(colon + 1));
        assigned += choice.probability;
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::DomainError, "cannot parse shift \"" + text + "\"");
    }
    explicit_prob.push_back(colon != std::string::npos);
    strategy.push_back(choice);
  }
  // Shifts given without a probability share whatever the explicit ones leave.
  const auto open = static_cast<double>(std::count(explicit_prob.begin(), explicit_prob.end(), false));
  for (std::size_t k = 0; k < strategy.size(); ++k) {
    if (!explicit_prob[k]) strategy[k].probability = (1.0 - assigned) / open;
  }
  return strategy;
}

int cmd_attack(const CommonFlags& common, const AttackFlags& flags, std::ostream& out) {
  TimeShiftScenario scenario{load_spec_pair(common.spec_path), parse_strategy(flags.shifts),
                             flags.n, common.seed, common.threads};
  const AttackOutcome result = simulate_time_shift(scenario);
  if (common.json) {
    json report = {{"detected_fraction", result.detected_fraction},
                   {"eve_guess_prob", result.eve_guess_prob},
                   {"eve_guess_prob_empirical", result.eve_guess_prob_empirical},
                   {"eve_guess_stddev", result.eve_guess_stddev},
                   {"detections", result.detections},
                   {"naive_rate", result.naive_rate},
                   {"aware_rate", result.aware_rate},
                   {"eve_leak_bits", result.eve_leak_bits}};
    out << report.dump(2) << '\n';
    return kExitOk;
  }
  out << "signals = " << flags.n << ", detections = " << result.detections << '\n';
  out << "detected_fraction = " << sig(result.detected_fraction) << '\n';
  out << "eve_guess_prob = " << sig(result.eve_guess_prob) << " (empirical "
      << sig(result.eve_guess_prob_empirical) << " +/- " << sig(result.eve_guess_stddev, 2)
      << ")\n";
  out << "eve_leak_bits = " << sig(result.eve_leak_bits) << '\n';
  out << "naive_rate = " << sig(result.naive_rate) << '\n';
  out << "aware_rate = " << sig(result.aware_rate) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Key-rate analysis for BB84 receivers with detector efficiency mismatch", "qkdmm"};
  app.require_subcommand(1);

  CommonFlags common;
  AnalyzeFlags analyze_flags;
  SweepFlags sweep_flags;
  CharacterizeFlags characterize_flags;
  AttackFlags attack_flags;

  CLI::App* analyze = app.add_subcommand("analyze", "Mismatch spectrum, noiseless rate and bounds");
  analyze->add_option("--spec", common.spec_path, "Detector spec JSON")->required();
  add_common_flags(*analyze, common, true);
  analyze->add_option("--knowledge", analyze_flags.knowledge, "What is known about the detectors")
      ->check(CLI::IsMember({"full", "diagonal"}));
  analyze->add_option("--e-obs", analyze_flags.e_obs,
                      "Also solve for the rate at e_b = e_p' = X")
      ->check(CLI::Range(0.0, 0.5));

  CLI::App* sweep = app.add_subcommand("sweep", "Rate against error rate, CSV");
  sweep->add_option("--spec", common.spec_path, "Detector spec JSON")->required();
  add_common_flags(*sweep, common, true);
  sweep->add_option("--e-max", sweep_flags.e_max, "Largest error rate (<= 0.25)");
  sweep->add_option("--steps", sweep_flags.steps, "Number of rows (>= 2)");
  sweep->add_flag("--bounds-only", sweep_flags.bounds_only, "Skip the constrained solves");
  sweep->add_option("--out", sweep_flags.out_path, "Write to this file instead of stdout");

  CLI::App* characterize =
      app.add_subcommand("characterize", "Efficiency matrices from response curves");
  characterize->add_option("--csv0", characterize_flags.csv0, "Detector 0 response CSV")
      ->required();
  characterize->add_option("--csv1", characterize_flags.csv1, "Detector 1 response CSV")
      ->required();
  characterize->add_option("--bandwidth-ghz", characterize_flags.bandwidth_ghz, "Filter bandwidth");
  characterize->add_option("--gate-ns", characterize_flags.gate_ns, "Gate window START:END")
      ->required();
  characterize->add_flag("--diagonal-only", characterize_flags.diagonal_only,
                         "Drop cross-time correlations");
  characterize->add_option("--out", characterize_flags.out_path, "Output detector spec JSON")
      ->required();
  add_common_flags(*characterize, common, false);

  CLI::App* attack = app.add_subcommand("attack", "Time-shift attack simulation");
  attack->add_option("--spec", common.spec_path, "Detector spec JSON")->required();
  attack->add_option("--shift", attack_flags.shifts, "Grid index Eve shifts to, IDX[:PROB]")
      ->required();
  attack->add_option("--n", attack_flags.n, "Number of signals")->check(CLI::PositiveNumber);
  add_common_flags(*attack, common, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(common, analyze_flags, out);
    if (sweep->parsed()) return cmd_sweep(common, sweep_flags, out);
    if (characterize->parsed()) return cmd_characterize(common, characterize_flags, out);
    if (attack->parsed()) return cmd_attack(common, attack_flags, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace qkdmm::cli
