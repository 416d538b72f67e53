#pragma once

// Bob's virtual filter G_BT = |0><0| (x) C F0^-1 + |1><1| (x) C F1^-1 and the
// noiseless key rate it certifies.

#include <cstdint>
#include <optional>

#include "qkdmm/detector_model.hpp"

namespace qkdmm {

struct VirtualFilter {
  ComplexMatrix c;
  /// Diagonal of the rescaled filter, sqrt(min(1/(1+D_i), D_i/(1+D_i))).
  RealVector c2_diagonal;
  /// C^H C, independent of the choice of factors F_i.
  ComplexMatrix gram;
  /// 1 - max eigenvalue over the blocks C E0^-1 C^H and C E1^-1 C^H.
  double validity_margin = 0.0;
};

enum class ZeroRateReason { SingularDetector, DiagonalOnlyKnowledge };

std::string_view to_string(ZeroRateReason reason) noexcept;

struct NoiselessRate {
  double rate = 0.0;
  /// max_i max(D_i, 1/D_i); infinite when the rate is provably zero.
  double limiting_ratio = 1.0;
  std::optional<ZeroRateReason> zero_reason;
};

enum class Knowledge { FullMatrices, DiagonalOnly };

/// C = diag(sqrt(min(1/D_i, 1))) U^H F0. Throws SingularDetector.
VirtualFilter compute_virtual_filter(const MismatchSpectrum& spectrum, const DetectorPair& pair);

/// 2 / (1 + max_i max(D_i, 1/D_i)).
NoiselessRate noiseless_rate(const MismatchSpectrum& spectrum);

/// Direct minimisation of 2<g|C^H C|g> / <g|E0 + E1|g> over pure states by
/// random multistart plus coordinate descent. Independent check of
/// noiseless_rate(). Requires samples >= 1000.
double noiseless_rate_bruteforce(const DetectorPair& pair, const VirtualFilter& filter,
                                 int samples, std::uint64_t seed = 20240229);

/// Handles singular detectors and diagonal-only knowledge before falling back
/// to the closed form. Never throws for a valid pair.
NoiselessRate special_case_rate(const DetectorPair& pair, Knowledge knowledge);

}  // namespace qkdmm
