#include <doctest.h>

#include <random>

#include "qkdmm/matrix_core.hpp"
#include "support/expect_error.hpp"
#include "support/generators.hpp"

using namespace qkdmm;

TEST_CASE("hermitian_eig sorts descending and reconstructs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = 1 + trial % 5;
    const ComplexMatrix g = testing::random_gaussian(rng, d, d);
    const ComplexMatrix a = g + g.adjoint();
    const HermitianEigenSystem eig = hermitian_eig(a);
    for (Index i = 1; i < d; ++i) CHECK(eig.eigenvalues(i - 1) >= eig.eigenvalues(i));
    CHECK((eig.reconstruct() - a).norm() <= 1e-12 * (1.0 + a.norm()));
    const ComplexMatrix gram = eig.eigenvectors.adjoint() * eig.eigenvectors;
    CHECK((gram - ComplexMatrix::Identity(d, d)).norm() <= 1e-12);
  }
}

TEST_CASE("eigenvector phase convention: largest entry is real and nonnegative") {
  std::mt19937_64 rng(12);
  const ComplexMatrix g = testing::random_gaussian(rng, 4, 4);
  const HermitianEigenSystem eig = hermitian_eig(g + g.adjoint());
  for (Index k = 0; k < 4; ++k) {
    Index top = 0;
    eig.eigenvectors.col(k).cwiseAbs().maxCoeff(&top);
    CHECK(eig.eigenvectors(top, k).real() >= 0.0);
    CHECK(std::abs(eig.eigenvectors(top, k).imag()) <= 1e-14);
  }
}

TEST_CASE("hermitian_eig is deterministic for a degenerate spectrum") {
  const ComplexMatrix a = ComplexMatrix::Identity(3, 3) * 0.5;
  const HermitianEigenSystem first = hermitian_eig(a);
  const HermitianEigenSystem second = hermitian_eig(a);
  CHECK((first.eigenvectors - second.eigenvectors).norm() == 0.0);
  CHECK((first.reconstruct() - a).norm() <= 1e-14);
}

TEST_CASE("hermitian_eig rejects non-Hermitian and non-finite input") {
  ComplexMatrix a(2, 2);
  a << 1.0, 2.0, 0.0, 1.0;
  CHECK_ERROR_CODE(hermitian_eig(a), ErrorCode::NotHermitian);
  ComplexMatrix bad = ComplexMatrix::Identity(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_ERROR_CODE(hermitian_eig(bad), ErrorCode::DomainError);
}

TEST_CASE("principal_sqrt squares back and is PSD") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = 1 + trial % 4;
    const ComplexMatrix e = testing::random_efficiency(rng, d, 0.0, 1.0);
    const ComplexMatrix s = principal_sqrt(e);
    CHECK((s * s - e).norm() <= 1e-12);
    CHECK((s - s.adjoint()).norm() <= 1e-14);
    CHECK(min_eigenvalue(s) >= -1e-12);
  }
}

TEST_CASE("principal_sqrt handles singular input and rejects negative spectrum") {
  ComplexMatrix p = ComplexMatrix::Zero(2, 2);
  p(0, 0) = 0.25;
  const ComplexMatrix s = principal_sqrt(p);
  CHECK(std::abs(s(0, 0) - Complex(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(s(1, 1)) < 1e-15);
  ComplexMatrix neg = ComplexMatrix::Identity(2, 2);
  neg(1, 1) = -0.1;
  CHECK_ERROR_CODE(principal_sqrt(neg), ErrorCode::NotPSD);
}

TEST_CASE("psd_leq follows the Loewner order") {
  const ComplexMatrix half = ComplexMatrix::Identity(2, 2) * 0.5;
  const ComplexMatrix one = ComplexMatrix::Identity(2, 2);
  CHECK(psd_leq(half, one));
  CHECK_FALSE(psd_leq(one, half));
  ComplexMatrix offdiag(2, 2);
  offdiag << 0.5, 0.6, 0.6, 0.5;  // eigenvalues 1.1 and -0.1
  CHECK_FALSE(psd_leq(offdiag, one));
  CHECK_ERROR_CODE(psd_leq(half, ComplexMatrix::Identity(3, 3)), ErrorCode::DimensionMismatch);
}

TEST_CASE("hermitian_pd_inverse inverts and rejects singular input") {
  std::mt19937_64 rng(14);
  const ComplexMatrix e = testing::random_efficiency(rng, 3, 0.1, 1.0);
  CHECK((hermitian_pd_inverse(e) * e - ComplexMatrix::Identity(3, 3)).norm() <= 1e-10);
  ComplexMatrix singular = ComplexMatrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK_ERROR_CODE(hermitian_pd_inverse(singular), ErrorCode::NotPSD);
}

TEST_CASE("kron matches the block definition") {
  Eigen::MatrixXd left(2, 2);
  left << 1, 2, 3, 4;
  std::mt19937_64 rng(15);
  const ComplexMatrix right = testing::random_gaussian(rng, 3, 3);
  const ComplexMatrix k = kron(left, right);
  REQUIRE(k.rows() == 6);
  for (Index i = 0; i < 2; ++i) {
    for (Index j = 0; j < 2; ++j) {
      CHECK((k.block(3 * i, 3 * j, 3, 3) - left(i, j) * right).norm() == 0.0);
    }
  }
}
