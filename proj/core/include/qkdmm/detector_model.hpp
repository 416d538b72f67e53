#pragma once

// Two-detector receiver: each detector i has an efficiency response
// E_i = F_i^H F_i acting on the auxiliary (time/frequency/space) mode.

#include <array>
#include <optional>

#include "qkdmm/matrix_core.hpp"

namespace qkdmm {

/// Validated d x d efficiency matrix, 0 <= E <= I.
class EfficiencyResponse {
 public:
  /// Throws InvalidEfficiency (not Hermitian, spectrum outside [0, 1], or a
  /// diagonal entry outside [0, 1]) or DimensionMismatch (not square).
  explicit EfficiencyResponse(const ComplexMatrix& e);

  Index dim() const noexcept { return e_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return e_; }

 private:
  ComplexMatrix e_;
};

struct DetectorPair {
  EfficiencyResponse e0;
  EfficiencyResponse e1;
  ComplexMatrix f0;  // principal square root of e0
  ComplexMatrix f1;
  std::array<bool, 2> full_rank{};

  Index dim() const noexcept { return e0.dim(); }
  bool both_full_rank() const noexcept { return full_rank[0] && full_rank[1]; }
};

/// Eigen-decomposition U diag(D) U^H of F0 (F1^H F1)^-1 F0^H. The ratios are
/// the per-mode efficiency ratios between detector 0 and detector 1, in
/// descending order.
struct MismatchSpectrum {
  RealVector ratios;
  ComplexMatrix basis;
};

DetectorPair load_pair(const ComplexMatrix& e0, const ComplexMatrix& e1);

/// Throws SingularDetector unless both detectors are full rank.
MismatchSpectrum mismatch_spectrum(const DetectorPair& pair);

DetectorPair swap_detectors(const DetectorPair& pair);

/// Rank threshold: eigenvalues below this fraction of ||E||_F count as zero.
inline constexpr double kRankThreshold = 1e-10;

/// True when both detectors are singular with the same nullspace (projectors
/// equal to 1e-8).
bool share_nullspace(const DetectorPair& pair);

/// Restricts both detectors to their common range when share_nullspace()
/// holds. Returns nullopt otherwise, or when the common range is empty.
std::optional<DetectorPair> reduce_to_common_range(const DetectorPair& pair);

}  // namespace qkdmm
