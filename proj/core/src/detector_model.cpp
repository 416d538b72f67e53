#include "qkdmm/detector_model.hpp"

#include <cmath>
#include <string>

#include "qkdmm/errors.hpp"

namespace qkdmm {
namespace {

constexpr double kSpectrumSlack = 1e-12;
constexpr double kNullspaceTol = 1e-8;

bool detect_full_rank(const ComplexMatrix& e) {
  const double scale = e.norm();
  if (scale == 0.0) return false;
  return hermitian_eig(e).eigenvalues.minCoeff() > kRankThreshold * scale;
}

// Orthonormal basis (as columns) of the eigenvectors whose eigenvalue is
// above the rank threshold.
ComplexMatrix range_basis(const ComplexMatrix& e) {
  const HermitianEigenSystem eig = hermitian_eig(e);
  const double cutoff = kRankThreshold * e.norm();
  Index count = 0;
  while (count < eig.eigenvalues.size() && eig.eigenvalues(count) > cutoff) ++count;
  return eig.eigenvectors.leftCols(count);
}

ComplexMatrix null_projector(const ComplexMatrix& e) {
  const ComplexMatrix range = range_basis(e);
  return ComplexMatrix::Identity(e.rows(), e.cols()) - range * range.adjoint();
}

}  // namespace

EfficiencyResponse::EfficiencyResponse(const ComplexMatrix& e) {
  if (e.rows() < 1 || e.rows() != e.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "efficiency matrix must be square");
  }
  if (!e.allFinite()) {
    throw Error(ErrorCode::InvalidEfficiency, "efficiency matrix has non-finite entries");
  }
  if (!is_hermitian(e)) {
    throw Error(ErrorCode::InvalidEfficiency, "efficiency matrix is not Hermitian");
  }
  for (Index i = 0; i < e.rows(); ++i) {
    const Complex diag = e(i, i);
    if (std::abs(diag.imag()) > kSpectrumSlack || diag.real() < -kSpectrumSlack ||
        diag.real() > 1.0 + kSpectrumSlack) {
      throw Error(ErrorCode::InvalidEfficiency,
                  "diagonal entry " + std::to_string(i) + " outside [0, 1]");
    }
  }
  e_ = hermitian_part(e);
  const RealVector spectrum = hermitian_eig(e_).eigenvalues;
  if (spectrum.minCoeff() < -kSpectrumSlack || spectrum.maxCoeff() > 1.0 + kSpectrumSlack) {
    throw Error(ErrorCode::InvalidEfficiency,
                "eigenvalues must lie in [0, 1]; found range [" +
                    std::to_string(spectrum.minCoeff()) + ", " +
                    std::to_string(spectrum.maxCoeff()) + "]");
  }
}

DetectorPair load_pair(const ComplexMatrix& e0, const ComplexMatrix& e1) {
  if (e0.rows() != e1.rows() || e0.cols() != e1.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "detector matrices differ in dimension");
  }
  EfficiencyResponse r0(e0);
  EfficiencyResponse r1(e1);
  ComplexMatrix f0 = principal_sqrt(r0.matrix());
  ComplexMatrix f1 = principal_sqrt(r1.matrix());
  const std::array<bool, 2> rank{detect_full_rank(r0.matrix()), detect_full_rank(r1.matrix())};
  return DetectorPair{std::move(r0), std::move(r1), std::move(f0), std::move(f1), rank};
}

MismatchSpectrum mismatch_spectrum(const DetectorPair& pair) {
  if (!pair.both_full_rank()) {
    throw Error(ErrorCode::SingularDetector, "mismatch spectrum needs full-rank detectors");
  }
  const ComplexMatrix e1_inverse = hermitian_pd_inverse(pair.e1.matrix());
  const ComplexMatrix ratio = hermitian_part(pair.f0 * e1_inverse * pair.f0.adjoint());
  HermitianEigenSystem eig = hermitian_eig(ratio);
  if (eig.eigenvalues.minCoeff() <= 0.0) {
    throw Error(ErrorCode::NumericalFailure, "efficiency ratios must be positive");
  }
  return MismatchSpectrum{std::move(eig.eigenvalues), std::move(eig.eigenvectors)};
}

DetectorPair swap_detectors(const DetectorPair& pair) {
  return DetectorPair{pair.e1, pair.e0, pair.f1, pair.f0, {pair.full_rank[1], pair.full_rank[0]}};
}

bool share_nullspace(const DetectorPair& pair) {
  if (pair.full_rank[0] || pair.full_rank[1]) return false;
  const ComplexMatrix p0 = null_projector(pair.e0.matrix());
  const ComplexMatrix p1 = null_projector(pair.e1.matrix());
  return (p0 - p1).norm() <= kNullspaceTol;
}

std::optional<DetectorPair> reduce_to_common_range(const DetectorPair& pair) {
  if (!share_nullspace(pair)) return std::nullopt;
  const ComplexMatrix range = range_basis(pair.e0.matrix());
  if (range.cols() == 0) return std::nullopt;
  const ComplexMatrix r0 = hermitian_part(range.adjoint() * pair.e0.matrix() * range);
  const ComplexMatrix r1 = hermitian_part(range.adjoint() * pair.e1.matrix() * range);
  return load_pair(r0, r1);
}

}  // namespace qkdmm
