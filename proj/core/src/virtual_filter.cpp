#include "qkdmm/virtual_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "qkdmm/errors.hpp"

namespace qkdmm {
namespace {

double rayleigh_quotient(const ComplexVector& g, const ComplexMatrix& numerator,
                         const ComplexMatrix& denominator) {
  const double num = g.dot(numerator * g).real();
  const double den = g.dot(denominator * g).real();
  return 2.0 * num / den;
}

// Coordinate-wise pattern search over the real and imaginary parts of g.
double descend(ComplexVector g, const ComplexMatrix& numerator, const ComplexMatrix& denominator) {
  double best = rayleigh_quotient(g, numerator, denominator);
  double step = 0.25;
  int sweeps = 0;
  while (step > 1e-9 && sweeps < 2000) {
    ++sweeps;
    bool improved = false;
    for (Index i = 0; i < g.size(); ++i) {
      for (const Complex direction : {Complex(1, 0), Complex(0, 1)}) {
        for (const double sign : {1.0, -1.0}) {
          ComplexVector trial = g;
          trial(i) += sign * step * direction;
          if (trial.norm() == 0.0) continue;
          const double value = rayleigh_quotient(trial, numerator, denominator);
          if (value < best) {
            best = value;
            g = trial / trial.norm();
            improved = true;
          }
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

}  // namespace

std::string_view to_string(ZeroRateReason reason) noexcept {
  switch (reason) {
    case ZeroRateReason::SingularDetector: return "SingularDetector";
    case ZeroRateReason::DiagonalOnlyKnowledge: return "DiagonalOnlyKnowledge";
  }
  return "Unknown";
}

VirtualFilter compute_virtual_filter(const MismatchSpectrum& spectrum, const DetectorPair& pair) {
  if (!pair.both_full_rank()) {
    throw Error(ErrorCode::SingularDetector, "virtual filter needs full-rank detectors");
  }
  const Index d = pair.dim();
  if (spectrum.ratios.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "spectrum does not match detector dimension");
  }

  RealVector scale(d);
  RealVector c2(d);
  for (Index i = 0; i < d; ++i) {
    const double ratio = spectrum.ratios(i);
    scale(i) = std::sqrt(std::min(1.0 / ratio, 1.0));
    c2(i) = std::sqrt(std::min(1.0 / (1.0 + ratio), ratio / (1.0 + ratio)));
  }

  VirtualFilter filter;
  filter.c = scale.cast<Complex>().asDiagonal() * spectrum.basis.adjoint() * pair.f0;
  filter.c2_diagonal = std::move(c2);
  filter.gram = hermitian_part(filter.c.adjoint() * filter.c);

  const ComplexMatrix block0 =
      hermitian_part(filter.c * hermitian_pd_inverse(pair.e0.matrix()) * filter.c.adjoint());
  const ComplexMatrix block1 =
      hermitian_part(filter.c * hermitian_pd_inverse(pair.e1.matrix()) * filter.c.adjoint());
  filter.validity_margin = 1.0 - std::max(max_eigenvalue(block0), max_eigenvalue(block1));
  return filter;
}

NoiselessRate noiseless_rate(const MismatchSpectrum& spectrum) {
  double limiting = 1.0;
  for (Index i = 0; i < spectrum.ratios.size(); ++i) {
    const double ratio = spectrum.ratios(i);
    limiting = std::max({limiting, ratio, 1.0 / ratio});
  }
  return NoiselessRate{2.0 / (1.0 + limiting), limiting, std::nullopt};
}

double noiseless_rate_bruteforce(const DetectorPair& pair, const VirtualFilter& filter,
                                 int samples, std::uint64_t seed) {
  if (!pair.both_full_rank()) {
    throw Error(ErrorCode::SingularDetector, "brute-force oracle needs full-rank detectors");
  }
  if (samples < 1000) {
    throw Error(ErrorCode::DomainError, "brute-force oracle needs at least 1000 samples");
  }
  const ComplexMatrix denominator = pair.e0.matrix() + pair.e1.matrix();
  const Index d = pair.dim();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    // Normalised complex Gaussian vectors are uniform on the unit sphere.
    ComplexVector g(d);
    for (Index i = 0; i < d; ++i) g(i) = Complex(normal(rng), normal(rng));
    g /= g.norm();
    best = std::min(best, descend(std::move(g), filter.gram, denominator));
  }
  return best;
}

NoiselessRate special_case_rate(const DetectorPair& pair, Knowledge knowledge) {
  const NoiselessRate zero_singular{0.0, std::numeric_limits<double>::infinity(),
                                    ZeroRateReason::SingularDetector};
  if (!pair.both_full_rank()) {
    const std::optional<DetectorPair> reduced = reduce_to_common_range(pair);
    if (!reduced || !reduced->both_full_rank()) return zero_singular;
    return special_case_rate(*reduced, knowledge);
  }
  if (knowledge == Knowledge::DiagonalOnly && pair.dim() >= 2) {
    return NoiselessRate{0.0, std::numeric_limits<double>::infinity(),
                         ZeroRateReason::DiagonalOnlyKnowledge};
  }
  return noiseless_rate(mismatch_spectrum(pair));
}

}  // namespace qkdmm
