#include "qkdmm/attack_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "parallel.hpp"
#include "qkdmm/errors.hpp"
#include "qkdmm/keyrate.hpp"
#include "qkdmm/virtual_filter.hpp"

namespace qkdmm {
namespace {

constexpr std::int64_t kBatchSize = 1 << 16;

struct Efficiencies {
  double eta0 = 0.0;
  double eta1 = 0.0;
};

struct BatchCounts {
  std::int64_t detections = 0;
  std::int64_t correct_guesses = 0;
};

std::vector<Efficiencies> validate(const TimeShiftScenario& scenario) {
  if (scenario.strategy.empty()) throw Error(ErrorCode::DomainError, "empty shift strategy");
  if (scenario.n_signals < 1) throw Error(ErrorCode::DomainError, "n_signals must be positive");
  const Index d = scenario.pair.dim();
  double total = 0.0;
  std::vector<Efficiencies> eff;
  for (const ShiftChoice& choice : scenario.strategy) {
    if (choice.index < 0 || choice.index >= d) {
      throw Error(ErrorCode::DomainError, "shift index " + std::to_string(choice.index) +
                                              " outside [0, " + std::to_string(d) + ")");
    }
    if (!(choice.probability >= 0.0)) {
      throw Error(ErrorCode::DomainError, "shift probabilities must be nonnegative");
    }
    total += choice.probability;
    const Efficiencies e{scenario.pair.e0.matrix()(choice.index, choice.index).real(),
                         scenario.pair.e1.matrix()(choice.index, choice.index).real()};
    if (choice.probability > 0.0 && e.eta0 + e.eta1 <= 0.0) {
      throw Error(ErrorCode::DegenerateScenario,
                  "both detectors blind at index " + std::to_string(choice.index));
    }
    eff.push_back(e);
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::DomainError, "shift probabilities must sum to 1");
  }
  return eff;
}

}  // namespace

AttackOutcome simulate_time_shift(const TimeShiftScenario& scenario) {
  const std::vector<Efficiencies> eff = validate(scenario);

  AttackOutcome out;
  double detect = 0.0;
  double guess = 0.0;
  std::vector<double> weights;
  for (std::size_t k = 0; k < eff.size(); ++k) {
    const double p = scenario.strategy[k].probability;
    detect += p * (eff[k].eta0 + eff[k].eta1);
    guess += p * std::max(eff[k].eta0, eff[k].eta1);
    weights.push_back(p);
  }
  out.detected_fraction = 0.5 * detect;
  out.eve_guess_prob = std::clamp(guess / detect, 0.5, 1.0);
  out.eve_leak_bits = 1.0 - binary_entropy(out.eve_guess_prob);

  const std::int64_t n = scenario.n_signals;
  const auto batches = static_cast<std::size_t>((n + kBatchSize - 1) / kBatchSize);
  std::vector<BatchCounts> counts(batches);
  detail::parallel_for(batches, scenario.threads, [&](std::size_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(scenario.seed),
                      static_cast<std::uint32_t>(scenario.seed >> 32),
                      static_cast<std::uint32_t>(b)};
    std::mt19937_64 rng(seq);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::int64_t begin = static_cast<std::int64_t>(b) * kBatchSize;
    const std::int64_t size = std::min(kBatchSize, n - begin);
    BatchCounts local;
    for (std::int64_t s = 0; s < size; ++s) {
      const Efficiencies& e = eff[pick(rng)];
      const bool bit = coin(rng);
      if (unit(rng) >= (bit ? e.eta1 : e.eta0)) continue;
      ++local.detections;
      // Eve bets on the detector that is more efficient at her chosen shift.
      const bool eve_bit = e.eta1 > e.eta0;
      if (eve_bit == bit) ++local.correct_guesses;
    }
    counts[b] = local;
  });

  std::int64_t correct = 0;
  for (const BatchCounts& c : counts) {
    out.detections += c.detections;
    correct += c.correct_guesses;
  }
  if (out.detections > 0) {
    const double m = static_cast<double>(out.detections);
    out.eve_guess_prob_empirical = static_cast<double>(correct) / m;
    out.eve_guess_stddev = std::sqrt(out.eve_guess_prob * (1.0 - out.eve_guess_prob) / m);
  }

  out.naive_rate = 1.0;
  out.aware_rate = special_case_rate(scenario.pair, Knowledge::FullMatrices).rate;
  return out;
}

}  // namespace qkdmm
