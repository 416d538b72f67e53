#pragma once

// Time-shift attack on a mismatched receiver. Eve delays each signal to one of
// the grid points of the auxiliary mode; at a point where one detector is more
// efficient, a click tells her which bit Alice most likely sent.

#include <cstdint>
#include <vector>

#include "qkdmm/detector_model.hpp"

namespace qkdmm {

struct ShiftChoice {
  Index index = 0;
  double probability = 1.0;
};

struct TimeShiftScenario {
  DetectorPair pair;
  std::vector<ShiftChoice> strategy;
  std::int64_t n_signals = 100000;
  std::uint64_t seed = 1;
  /// Worker threads for the Monte Carlo batches; 0 uses hardware concurrency.
  int threads = 0;
};

struct AttackOutcome {
  double detected_fraction = 0.0;
  /// Probability Eve guesses a detected bit, sum_j p_j max_b eta_b(t_j)
  /// divided by sum_j p_j (eta_0(t_j) + eta_1(t_j)).
  double eve_guess_prob = 0.5;
  double eve_guess_prob_empirical = 0.5;
  /// Binomial standard error of the empirical estimate.
  double eve_guess_stddev = 0.0;
  std::int64_t detections = 0;
  double naive_rate = 1.0;
  /// Noiseless rate of the pair once mismatch is accounted for.
  double aware_rate = 0.0;
  /// 1 - H2(eve_guess_prob).
  double eve_leak_bits = 0.0;
};

/// Throws DomainError for an empty strategy, probabilities that are negative or
/// do not sum to 1, an index outside [0, d), or n_signals < 1.
/// Throws DegenerateScenario when both detectors are blind at a chosen index.
AttackOutcome simulate_time_shift(const TimeShiftScenario& scenario);

}  // namespace qkdmm
