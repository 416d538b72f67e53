#pragma once

// Key rate against observed error rate with e_b = e_p' = e, comparing the
// closed-form bounds against the constrained optimisation.

#include <iosfwd>
#include <string>
#include <vector>

#include "qkdmm/detector_model.hpp"
#include "qkdmm/eve_optimizer.hpp"

namespace qkdmm {

struct SweepOptions {
  double e_max = 0.1;
  int steps = 20;
  /// Skip the constrained solves; the *_opt columns are NaN.
  bool bounds_only = false;
  SolverConfig solver{};
  /// Rows solved concurrently; 0 uses hardware concurrency.
  int threads = 0;
};

struct SweepRow {
  double e_obs = 0.0;
  double p_succ_bound = 0.0;
  double p_succ_opt = 0.0;
  double e_p_bound = 0.0;
  double e_p_opt = 0.0;
  double rate_bound = 0.0;
  double rate_opt = 0.0;
  double rate_4phase = 0.0;
  /// "ok", "bounds_only", "check_failed", or the error code of a failed solve.
  std::string status = "ok";
};

/// Rows at e = e_max * k / (steps - 1), k = 0..steps-1, ordered by e.
/// Throws DomainError unless 0 <= e_max <= 0.25 and steps >= 2, and
/// SingularDetector when the mismatch spectrum does not exist.
std::vector<SweepRow> run_sweep(const DetectorPair& pair, const SweepOptions& options);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace qkdmm
