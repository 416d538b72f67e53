#pragma once

// Dense complex linear algebra used throughout the library. Matrices are
// plain Eigen types; the functions here add the validation, ordering and
// phase conventions the rest of the code relies on.

#include <Eigen/Dense>
#include <complex>
#include <string_view>

namespace qkdmm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace tolerance {
// Relative Hermiticity gate: ||A - A^H||_F <= kSymmetry * ||A||_F.
inline constexpr double kSymmetry = 1e-10;
// Relative floor below which a negative eigenvalue means "not PSD".
inline constexpr double kPsd = 1e-12;
// Absolute slack for the Loewner-order test B - A >= 0.
inline constexpr double kOrdering = 1e-9;
// Relative width of an eigenvalue cluster treated as degenerate.
inline constexpr double kDegenerate = 1e-12;
}  // namespace tolerance

/// Eigenvalues in descending order; eigenvector columns normalised so that the
/// largest-magnitude entry (lowest row on ties) is real and nonnegative.
struct HermitianEigenSystem {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;

  ComplexMatrix reconstruct() const;
};

/// Throws DomainError when any entry is NaN or infinite.
void require_finite(const ComplexMatrix& a, std::string_view what);

bool is_hermitian(const ComplexMatrix& a, double relative_tol = tolerance::kSymmetry);

/// (A + A^H) / 2.
ComplexMatrix hermitian_part(const ComplexMatrix& a);

HermitianEigenSystem hermitian_eig(const ComplexMatrix& a);

/// Unique Hermitian PSD S with S*S = A. Eigenvalues within tolerance of zero
/// are clamped before the square root is taken.
ComplexMatrix principal_sqrt(const ComplexMatrix& a);

/// A <= B in the Loewner order, i.e. min eig(B - A) >= -1e-9.
bool psd_leq(const ComplexMatrix& a, const ComplexMatrix& b);

double min_eigenvalue(const ComplexMatrix& a);
double max_eigenvalue(const ComplexMatrix& a);

/// Inverse of a positive definite Hermitian matrix (throws NotPSD otherwise).
ComplexMatrix hermitian_pd_inverse(const ComplexMatrix& a);

/// Kronecker product with a real left factor, the layout used for the
/// (4 x 4 qubit-pair) (x) (d x d auxiliary) operators.
ComplexMatrix kron(const Eigen::MatrixXd& left, const ComplexMatrix& right);

}  // namespace qkdmm
