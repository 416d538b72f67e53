#include "qkdmm/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qkdmm/errors.hpp"

namespace qkdmm {
namespace {

void require_probability(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::DomainError, std::string(name) + " must lie in [0, 1]");
  }
}

KeyRateReport finish(KeyRateReport report) {
  report.rate = std::max(0.0, report.rate_raw);
  return report;
}

}  // namespace

std::string_view to_string(RateMethod method) noexcept {
  switch (method) {
    case RateMethod::Noiseless: return "Noiseless";
    case RateMethod::NoisyOptimized: return "NoisyOptimized";
    case RateMethod::NoisyBounds: return "NoisyBounds";
    case RateMethod::FourPhase: return "FourPhase";
    case RateMethod::ScalarDiscarding: return "ScalarDiscarding";
  }
  return "Unknown";
}

double binary_entropy(double x) {
  require_probability(x, "entropy argument");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

KeyRateReport noisy_rate(double p_succ, double e_p, double e_b, RateMethod method) {
  require_probability(p_succ, "p_succ");
  require_probability(e_p, "e_p");
  require_probability(e_b, "e_b");

  KeyRateReport report;
  report.method = method;
  report.p_succ = p_succ;
  report.e_p = e_p;
  report.e_b = e_b;
  report.privacy_amplification_fraction = p_succ * (1.0 - binary_entropy(std::min(e_p, 0.5)));
  report.error_correction_fraction = binary_entropy(e_b);
  report.rate_raw = report.privacy_amplification_fraction - report.error_correction_fraction;
  return finish(report);
}

KeyRateReport four_phase_rate(double e_b, double e_p) {
  require_probability(e_b, "e_b");
  require_probability(e_p, "e_p");

  KeyRateReport report;
  report.method = RateMethod::FourPhase;
  report.p_succ = 1.0;
  report.e_p = e_p;
  report.e_b = e_b;
  report.privacy_amplification_fraction = 1.0 - binary_entropy(e_p);
  report.error_correction_fraction = binary_entropy(e_b);
  report.rate_raw = 1.0 - binary_entropy(e_p) - binary_entropy(e_b);
  return finish(report);
}

ScalarReferenceRates scalar_reference_rates(double eta0, double eta1, double e_b, double e_p) {
  if (!(eta0 > 0.0 && eta0 <= 1.0 && eta1 > 0.0 && eta1 <= 1.0)) {
    throw Error(ErrorCode::DomainError, "scalar efficiencies must lie in (0, 1]");
  }
  require_probability(e_b, "e_b");
  require_probability(e_p, "e_p");

  const double fraction = 2.0 * std::min(eta0, eta1) / (eta0 + eta1);
  const double hp = binary_entropy(e_p);
  const double hb = binary_entropy(e_b);

  ScalarReferenceRates out;
  out.discarding.method = RateMethod::ScalarDiscarding;
  out.discarding.p_succ = fraction;
  out.discarding.e_p = e_p;
  out.discarding.e_b = e_b;
  out.discarding.privacy_amplification_fraction = fraction * (1.0 - hp);
  out.discarding.error_correction_fraction = fraction * hb;
  out.discarding.rate_raw = fraction * (1.0 - hp - hb);
  out.discarding = finish(out.discarding);

  out.general_method = noisy_rate(fraction, e_p, e_b, RateMethod::NoisyOptimized);
  return out;
}

}  // namespace qkdmm
