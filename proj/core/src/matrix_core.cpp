#include "qkdmm/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "qkdmm/errors.hpp"

namespace qkdmm {
namespace {

void require_square(const ComplexMatrix& a, std::string_view what) {
  if (a.rows() < 1 || a.rows() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " must be a non-empty square matrix");
  }
}

void fix_phase(Eigen::Ref<ComplexVector> v) {
  const double largest = v.cwiseAbs().maxCoeff();
  if (largest == 0.0) return;
  Index pivot = 0;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= largest * (1.0 - 1e-12)) {
      pivot = i;
      break;
    }
  }
  const Complex phase = std::conj(v(pivot)) / std::abs(v(pivot));
  v *= phase;
  v(pivot) = Complex(v(pivot).real(), 0.0);
}

// Descending lexicographic order on (re, im) pairs.
bool lexicographically_before(const ComplexVector& a, const ComplexVector& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() > b(i).real();
    if (a(i).imag() != b(i).imag()) return a(i).imag() > b(i).imag();
  }
  return false;
}

}  // namespace

ComplexMatrix HermitianEigenSystem::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

void require_finite(const ComplexMatrix& a, std::string_view what) {
  if (!a.allFinite()) {
    throw Error(ErrorCode::DomainError, std::string(what) + " contains non-finite entries");
  }
}

bool is_hermitian(const ComplexMatrix& a, double relative_tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).norm() <= relative_tol * a.norm();
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  return (a + a.adjoint()) * 0.5;
}

HermitianEigenSystem hermitian_eig(const ComplexMatrix& a) {
  require_square(a, "eigen-decomposition input");
  require_finite(a, "eigen-decomposition input");
  if (!is_hermitian(a)) {
    throw Error(ErrorCode::NotHermitian, "matrix is not Hermitian within tolerance");
  }

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(a));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "Hermitian eigensolver did not converge");
  }

  const Index n = a.rows();
  ComplexMatrix vectors = solver.eigenvectors();
  for (Index j = 0; j < n; ++j) fix_phase(vectors.col(j));

  // Eigen returns ascending eigenvalues; flip, then order each degenerate
  // cluster by its phase-fixed eigenvectors.
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.rbegin(), order.rend(), Index{0});

  const RealVector& values = solver.eigenvalues();
  const double cluster_width = tolerance::kDegenerate * (1.0 + a.norm());
  std::size_t begin = 0;
  while (begin < order.size()) {
    std::size_t end = begin + 1;
    while (end < order.size() &&
           values(order[end - 1]) - values(order[end]) <= cluster_width) {
      ++end;
    }
    if (end - begin > 1) {
      std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(begin),
                       order.begin() + static_cast<std::ptrdiff_t>(end),
                       [&](Index x, Index y) {
                         return lexicographically_before(vectors.col(x), vectors.col(y));
                       });
    }
    begin = end;
  }

  HermitianEigenSystem result;
  result.eigenvalues.resize(n);
  result.eigenvectors.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    result.eigenvalues(j) = values(src);
    result.eigenvectors.col(j) = vectors.col(src);
  }
  return result;
}

ComplexMatrix principal_sqrt(const ComplexMatrix& a) {
  const HermitianEigenSystem eig = hermitian_eig(a);
  const double floor = -tolerance::kPsd * std::max(a.norm(), 1e-300);
  RealVector roots(eig.eigenvalues.size());
  for (Index i = 0; i < roots.size(); ++i) {
    const double lambda = eig.eigenvalues(i);
    if (lambda < floor) {
      throw Error(ErrorCode::NotPSD, "negative eigenvalue " + std::to_string(lambda));
    }
    roots(i) = std::sqrt(std::max(lambda, 0.0));
  }
  const ComplexMatrix s =
      eig.eigenvectors * roots.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
  return hermitian_part(s);
}

double min_eigenvalue(const ComplexMatrix& a) {
  return hermitian_eig(a).eigenvalues.minCoeff();
}

double max_eigenvalue(const ComplexMatrix& a) {
  return hermitian_eig(a).eigenvalues.maxCoeff();
}

bool psd_leq(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "psd_leq operands differ in shape");
  }
  return min_eigenvalue(b - a) >= -tolerance::kOrdering;
}

ComplexMatrix hermitian_pd_inverse(const ComplexMatrix& a) {
  const HermitianEigenSystem eig = hermitian_eig(a);
  const double smallest = eig.eigenvalues.minCoeff();
  if (!(smallest > 0.0)) {
    throw Error(ErrorCode::NotPSD, "matrix is not positive definite");
  }
  const RealVector inverse = eig.eigenvalues.cwiseInverse();
  return hermitian_part(eig.eigenvectors * inverse.cast<Complex>().asDiagonal() *
                        eig.eigenvectors.adjoint());
}

ComplexMatrix kron(const Eigen::MatrixXd& left, const ComplexMatrix& right) {
  const Index r = right.rows();
  const Index c = right.cols();
  ComplexMatrix out(left.rows() * r, left.cols() * c);
  for (Index i = 0; i < left.rows(); ++i) {
    for (Index j = 0; j < left.cols(); ++j) {
      out.block(i * r, j * c, r, c) = left(i, j) * right;
    }
  }
  return out;
}

}  // namespace qkdmm
