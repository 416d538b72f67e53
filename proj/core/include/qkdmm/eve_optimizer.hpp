#pragma once

// Eve's collective attack is summarised by a PSD operator rho_E on
// C^4 (x) C^d, where the C^4 factor holds the Pauli coefficients
// (a_I, a_X, a_Y, a_Z) of her action on Bob's qubit. Every statistic of
// interest is a ratio of two linear functionals of rho_E.

#include <cstdint>
#include <vector>

#include "qkdmm/detector_model.hpp"
#include "qkdmm/virtual_filter.hpp"

namespace qkdmm {

/// Rank-one projectors (halved) onto the qubit-pair patterns of each
/// Z-basis (Alice bit, Bob bit) and X-basis (Alice sign, Bob sign) outcome.
struct BasisConstants {
  Eigen::Matrix4d z00, z10, z01, z11;
  Eigen::Matrix4d xpp, xmp, xpm, xmm;
};

const BasisConstants& basis_constants();

/// rho_E = sum_k |phi_k><phi_k|, stored through its (unnormalised) vectors.
class EveState {
 public:
  /// Throws DimensionMismatch unless all vectors share a dimension that is a
  /// positive multiple of 4, DomainError if every vector is zero.
  explicit EveState(std::vector<ComplexVector> vectors);

  Index dim() const noexcept { return vectors_.front().size(); }
  Index aux_dim() const noexcept { return dim() / 4; }
  std::size_t rank() const noexcept { return vectors_.size(); }
  const std::vector<ComplexVector>& vectors() const noexcept { return vectors_; }

  ComplexMatrix density() const;
  double squared_norm() const;

 private:
  std::vector<ComplexVector> vectors_;
};

struct RateStatistics {
  double e_b = 0.0;        // bit error probability (Z basis)
  double e_p_prime = 0.0;  // actual phase error probability (X basis)
  double e_p = 0.0;        // virtual phase error after the filter
  double p_succ = 0.0;     // virtual filtering probability
};

/// Throws ZeroDenominator if a normalising functional vanishes, SingularDetector
/// or DimensionMismatch on bad inputs.
RateStatistics evaluate_statistics(const EveState& state, const DetectorPair& pair,
                                   const VirtualFilter& filter);

struct SuboptimalBounds {
  double p_succ_lower = 1.0;    // min_i min(D_i, 1/D_i)
  double ep_ratio_upper = 1.0;  // max_i max(D_i, 1/D_i)
};

SuboptimalBounds suboptimal_bounds(const MismatchSpectrum& spectrum);

struct SolverConfig {
  int starts = 64;
  /// Number of vectors in rho_E. 0 tries ranks {1, 2, 4d} and keeps the best.
  int rank = 1;
  std::uint64_t seed = 1;
  /// Iteration cap for each inner quasi-Newton solve.
  int max_iters = 500;
  double penalty_init = 10.0;
  double constraint_tol = 1e-5;
  /// Restrict Eve to attacks symmetric under bit flips in both bases.
  bool symmetric_attack = false;
  /// Worker threads for the restarts; 0 uses hardware concurrency.
  int threads = 0;
};

struct ObservedRates {
  double bit_error = 0.0;
  double phase_error = 0.0;
};

struct ConstrainedSolution {
  double value = 0.0;  // optimal objective, re-evaluated at the witness
  EveState witness;
  RateStatistics statistics;
  double constraint_residual = 0.0;
  int feasible_starts = 0;
};

/// min p_succ subject to e_b and e_p' matching the observations. Throws
/// Infeasible or SolverBudgetExceeded.
ConstrainedSolution minimize_filtering_probability(const DetectorPair& pair,
                                                   const VirtualFilter& filter,
                                                   const ObservedRates& observed,
                                                   const SolverConfig& config = {});

/// max e_p subject to the same constraints.
ConstrainedSolution maximize_virtual_phase_error(const DetectorPair& pair,
                                                 const VirtualFilter& filter,
                                                 const ObservedRates& observed,
                                                 const SolverConfig& config = {});

struct NumericBounds {
  double p_succ_min = 1.0;
  double ep_ratio_max = 1.0;
};

/// The two bounds above with the constraints dropped (min p_succ and
/// max e_p / e_p'), found numerically. Cross-checks suboptimal_bounds().
NumericBounds unconstrained_bounds_numeric(const DetectorPair& pair, const VirtualFilter& filter,
                                           const SolverConfig& config = {});

/// If a1/a2 >= b1/b2 then a1/a2 >= (a1+b1)/(a2+b2), and the mirror statement
/// for <=. Returns whether both implications hold for the inputs. Throws
/// NonPositiveInput.
bool mediant_check(double a1, double a2, double b1, double b2);

}  // namespace qkdmm
