#pragma once

#include <string_view>
#include <utility>

namespace qkdmm {

enum class RateMethod { Noiseless, NoisyOptimized, NoisyBounds, FourPhase, ScalarDiscarding };

std::string_view to_string(RateMethod method) noexcept;

/// Secret key per detected signal. `rate` is max(0, rate_raw); the raw value is
/// kept for plotting.
struct KeyRateReport {
  double rate = 0.0;
  double rate_raw = 0.0;
  double p_succ = 1.0;
  double e_p = 0.0;
  double e_b = 0.0;
  double privacy_amplification_fraction = 0.0;  // p_succ * (1 - H2(e_p))
  double error_correction_fraction = 0.0;       // H2(e_b)
  RateMethod method = RateMethod::NoisyOptimized;
};

/// H2(x) = -x log2 x - (1-x) log2(1-x), with H2(0) = H2(1) = 0.
/// Throws DomainError outside [0, 1].
double binary_entropy(double x);

/// p_succ (1 - H2(e_p)) - H2(e_b). A phase error above 1/2 certifies nothing,
/// so e_p is capped at 1/2 before the entropy is taken.
KeyRateReport noisy_rate(double p_succ, double e_p, double e_b,
                         RateMethod method = RateMethod::NoisyOptimized);

/// Random detector-assignment swapping: the virtual filter is unitary, so
/// 1 - H2(e_p) - H2(e_b) regardless of the detectors.
KeyRateReport four_phase_rate(double e_b, double e_p);

struct ScalarReferenceRates {
  KeyRateReport discarding;      // (2 min / sum) (1 - H2(e_p) - H2(e_b))
  KeyRateReport general_method;  // (2 min / sum) (1 - H2(e_p)) - H2(e_b)
};

/// Reference rates for constant efficiencies eta0, eta1 in (0, 1].
ScalarReferenceRates scalar_reference_rates(double eta0, double eta1, double e_b, double e_p);

}  // namespace qkdmm
