#include <doctest.h>

#include <array>
#include <random>

#include "qkdmm/eve_optimizer.hpp"
#include "support/expect_error.hpp"
#include "support/generators.hpp"

using namespace qkdmm;

namespace {

// Direct evaluation on C^2 (Alice) x C^2 (Bob) x C^d. Eve applies
// sum_P P_B (x) a_P with P in {I, X, W, Z}, W = [[0, 1], [-1, 0]] the real
// form of Y, to (|00> + |11>)/sqrt 2 (x) |0>_T.
struct PhysicalStatistics {
  double e_b = 0, e_p_prime = 0, e_p = 0, p_succ = 0;
};

PhysicalStatistics physical_oracle(const EveState& state, const DetectorPair& pair,
                                   const VirtualFilter& filter) {
  const Index d = pair.dim();
  Eigen::Matrix2cd paulis[4];
  paulis[0] << 1, 0, 0, 1;
  paulis[1] << 0, 1, 1, 0;
  paulis[2] << 0, 1, -1, 0;
  paulis[3] << 1, 0, 0, -1;
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Vector2cd zero(1, 0), one(0, 1), plus(r, r), minus(r, -r);

  const auto bob_op = [&](const Eigen::Matrix2cd& q, const ComplexMatrix& t) {
    ComplexMatrix out = ComplexMatrix::Zero(4 * d, 4 * d);
    for (Index a = 0; a < 2; ++a) {
      for (Index b = 0; b < 2; ++b) {
        for (Index c = 0; c < 2; ++c) {
          out.block((2 * a + b) * d, (2 * a + c) * d, d, d) = q(b, c) * t;
        }
      }
    }
    return out;
  };
  const auto projector = [](const Eigen::Vector2cd& v) -> Eigen::Matrix2cd {
    return v * v.adjoint();
  };
  const auto ab_projector = [&](const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
    Eigen::Vector4cd ab;
    ab << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
    ComplexMatrix out = ComplexMatrix::Zero(4 * d, 4 * d);
    const Eigen::Matrix4cd p = ab * ab.adjoint();
    for (Index i = 0; i < 4; ++i) {
      for (Index j = 0; j < 4; ++j) {
        out.block(i * d, j * d, d, d) = p(i, j) * ComplexMatrix::Identity(d, d);
      }
    }
    return out;
  };

  const ComplexMatrix fz = bob_op(projector(zero), pair.f0) + bob_op(projector(one), pair.f1);
  const ComplexMatrix fx = bob_op(projector(plus), pair.f0) + bob_op(projector(minus), pair.f1);
  const ComplexMatrix g = bob_op(projector(zero), filter.c * pair.f0.inverse()) +
                          bob_op(projector(one), filter.c * pair.f1.inverse());
  const ComplexMatrix p_bit = ab_projector(zero, one) + ab_projector(one, zero);
  const ComplexMatrix p_phase = ab_projector(plus, minus) + ab_projector(minus, plus);

  double bit = 0, zn = 0, phase_actual = 0, xn = 0, phase_virtual = 0, filtered = 0;
  for (const ComplexVector& phi : state.vectors()) {
    ComplexVector psi = ComplexVector::Zero(4 * d);
    for (int p = 0; p < 4; ++p) {
      const ComplexVector a_p = phi.segment(p * d, d);
      for (Index a = 0; a < 2; ++a) {
        // Bob's qubit starts in |a>, entangled with Alice's |a>.
        for (Index b = 0; b < 2; ++b) psi.segment((2 * a + b) * d, d) += r * paulis[p](b, a) * a_p;
      }
    }
    const ComplexVector z = fz * psi;
    const ComplexVector x = fx * psi;
    const ComplexVector v = g * z;
    bit += z.dot(p_bit * z).real();
    zn += z.squaredNorm();
    phase_actual += x.dot(p_phase * x).real();
    xn += x.squaredNorm();
    phase_virtual += v.dot(p_phase * v).real();
    filtered += v.squaredNorm();
  }
  return {bit / zn, phase_actual / xn, phase_virtual / filtered, filtered / zn};
}

struct Setup {
  DetectorPair pair;
  MismatchSpectrum spectrum;
  VirtualFilter filter;
};

Setup setup(const DetectorPair& pair) {
  const MismatchSpectrum s = mismatch_spectrum(pair);
  return {pair, s, compute_virtual_filter(s, pair)};
}

SolverConfig quick_config() {
  SolverConfig c;
  c.starts = 16;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("basis constants resolve the identity in both bases") {
  const BasisConstants& k = basis_constants();
  const Eigen::Matrix4d z = k.z00 + k.z10 + k.z01 + k.z11;
  const Eigen::Matrix4d x = k.xpp + k.xmp + k.xpm + k.xmm;
  CHECK((z - Eigen::Matrix4d::Identity()).norm() < 1e-15);
  CHECK((x - Eigen::Matrix4d::Identity()).norm() < 1e-15);
  for (const Eigen::Matrix4d* m : {&k.z00, &k.z10, &k.z01, &k.z11, &k.xpp, &k.xmp, &k.xpm, &k.xmm}) {
    CHECK(m->trace() == doctest::Approx(1.0));
    CHECK(((*m) * (*m) - *m).norm() < 1e-15);
  }
}

TEST_CASE("EveState validation") {
  CHECK_ERROR_CODE(EveState({}), ErrorCode::DimensionMismatch);
  CHECK_ERROR_CODE(EveState({ComplexVector::Ones(6)}), ErrorCode::DimensionMismatch);
  CHECK_ERROR_CODE(EveState({ComplexVector::Ones(4), ComplexVector::Ones(8)}),
                   ErrorCode::DimensionMismatch);
  CHECK_ERROR_CODE(EveState({ComplexVector::Zero(8)}), ErrorCode::DomainError);
  const EveState s({ComplexVector::Ones(8), ComplexVector::Ones(8)});
  CHECK(s.aux_dim() == 2);
  CHECK(s.rank() == 2);
  CHECK(s.squared_norm() == doctest::Approx(16.0));
  CHECK(s.density().trace().real() == doctest::Approx(16.0));

  const Setup ex = setup(testing::correlated_pair());
  CHECK_ERROR_CODE(evaluate_statistics(EveState({ComplexVector::Ones(4)}), ex.pair, ex.filter),
                   ErrorCode::DimensionMismatch);
}

TEST_CASE("property: statistics agree with the physical model") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    const Index d = 1 + trial % 3;
    const Setup s = setup(testing::random_pair(rng, d));
    const EveState state = testing::random_state(rng, d, 1 + trial % 3);
    const RateStatistics got = evaluate_statistics(state, s.pair, s.filter);
    const PhysicalStatistics want = physical_oracle(state, s.pair, s.filter);
    CHECK(got.e_b == doctest::Approx(want.e_b).epsilon(1e-10));
    CHECK(got.e_p_prime == doctest::Approx(want.e_p_prime).epsilon(1e-10));
    CHECK(got.e_p == doctest::Approx(want.e_p).epsilon(1e-10));
    CHECK(got.p_succ == doctest::Approx(want.p_succ).epsilon(1e-10));
  }
}

TEST_CASE("property: statistics are probabilities and scale invariant") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 1 + trial % 4;
    const Setup s = setup(testing::random_pair(rng, d));
    const EveState state = testing::random_state(rng, d, 1 + trial % 2);
    const RateStatistics st = evaluate_statistics(state, s.pair, s.filter);
    for (double v : {st.e_b, st.e_p_prime, st.e_p, st.p_succ}) {
      CHECK(v >= -1e-12);
      CHECK(v <= 1.0 + 1e-12);
    }
    std::vector<ComplexVector> scaled;
    for (const ComplexVector& v : state.vectors()) scaled.push_back(v * Complex(0.0, 3.5));
    const RateStatistics st2 = evaluate_statistics(EveState(scaled), s.pair, s.filter);
    CHECK(st2.p_succ == doctest::Approx(st.p_succ).epsilon(1e-12));
    CHECK(st2.e_p == doctest::Approx(st.e_p).epsilon(1e-12));
  }
}

TEST_CASE("property: identical detectors make filtering trivial") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 1 + trial % 3;
    const ComplexMatrix e = testing::random_efficiency(rng, d);
    const Setup s = setup(load_pair(e, e));
    const RateStatistics st =
        evaluate_statistics(testing::random_state(rng, d, 1 + trial % 2), s.pair, s.filter);
    CHECK(std::abs(st.p_succ - 1.0) <= 1e-9);
    CHECK(std::abs(st.e_p - st.e_p_prime) <= 1e-9);
  }
}

TEST_CASE("property: every state respects the closed-form bounds") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    const Index d = 1 + trial % 3;
    const Setup s = setup(testing::random_pair(rng, d));
    const SuboptimalBounds b = suboptimal_bounds(s.spectrum);
    const RateStatistics st =
        evaluate_statistics(testing::random_state(rng, d, 1 + trial % 3), s.pair, s.filter);
    CHECK(st.p_succ >= b.p_succ_lower * (1.0 - 1e-10));
    CHECK(st.e_p <= b.ep_ratio_upper * st.e_p_prime * (1.0 + 1e-10) + 1e-14);
  }
}

TEST_CASE("closed-form bounds are reciprocal") {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 50; ++trial) {
    const SuboptimalBounds b = suboptimal_bounds(mismatch_spectrum(testing::random_pair(rng, 1 + trial % 4)));
    CHECK(std::abs(b.p_succ_lower * b.ep_ratio_upper - 1.0) <= 1e-12);
  }
  const SuboptimalBounds ex = suboptimal_bounds(mismatch_spectrum(testing::correlated_pair()));
  CHECK(std::abs(ex.p_succ_lower - 0.330) < 0.001);
  CHECK(std::abs(ex.ep_ratio_upper - 3.03) < 0.01);
}

TEST_CASE("numeric unconstrained bounds approach the closed form") {
  const Setup ex = setup(testing::correlated_pair());
  const NumericBounds n = unconstrained_bounds_numeric(ex.pair, ex.filter, quick_config());
  const SuboptimalBounds b = suboptimal_bounds(ex.spectrum);
  CHECK(std::abs(n.p_succ_min - b.p_succ_lower) <= 1e-3);
  CHECK(std::abs(n.ep_ratio_max - b.ep_ratio_upper) <= 1e-3);
  // Numeric optima can only be feasible points.
  CHECK(n.p_succ_min >= b.p_succ_lower - 1e-9);
  CHECK(n.ep_ratio_max <= b.ep_ratio_upper + 1e-9);
}

TEST_CASE("noiseless constrained solves recover the noiseless rate") {
  const Setup ex = setup(testing::correlated_pair());
  const ConstrainedSolution p1 =
      minimize_filtering_probability(ex.pair, ex.filter, {0.0, 0.0}, quick_config());
  const ConstrainedSolution p2 =
      maximize_virtual_phase_error(ex.pair, ex.filter, {0.0, 0.0}, quick_config());
  CHECK(std::abs(p1.value - noiseless_rate(ex.spectrum).rate) <= 0.005);
  CHECK(std::abs(p2.value) <= 1e-4);
}

TEST_CASE("constrained solutions are feasible and consistent") {
  const Setup ex = setup(testing::correlated_pair());
  const SuboptimalBounds b = suboptimal_bounds(ex.spectrum);
  for (double e : {0.01, 0.05, 0.1}) {
    const ObservedRates observed{e, e};
    const SolverConfig config = quick_config();
    for (const ConstrainedSolution& sol :
         {minimize_filtering_probability(ex.pair, ex.filter, observed, config),
          maximize_virtual_phase_error(ex.pair, ex.filter, observed, config)}) {
      const RateStatistics st = evaluate_statistics(sol.witness, ex.pair, ex.filter);
      CHECK(std::abs(st.e_b - e) <= 1e-4);
      CHECK(std::abs(st.e_p_prime - e) <= 1e-4);
      CHECK(sol.constraint_residual <= 1e-4);
      CHECK(sol.feasible_starts >= 1);
    }
    const ConstrainedSolution p1 = minimize_filtering_probability(ex.pair, ex.filter, observed, config);
    const ConstrainedSolution p2 = maximize_virtual_phase_error(ex.pair, ex.filter, observed, config);
    CHECK(p1.value == doctest::Approx(p1.statistics.p_succ).epsilon(1e-12));
    CHECK(p2.value == doctest::Approx(p2.statistics.e_p).epsilon(1e-12));
    CHECK(p1.value >= b.p_succ_lower - 1e-4);
    CHECK(p2.value <= b.ep_ratio_upper * e + 1e-4);
  }
}

TEST_CASE("solver is deterministic across thread counts") {
  const Setup ex = setup(testing::correlated_pair());
  SolverConfig one = quick_config();
  one.threads = 1;
  SolverConfig many = quick_config();
  many.threads = 4;
  const double a = minimize_filtering_probability(ex.pair, ex.filter, {0.05, 0.05}, one).value;
  const double b = minimize_filtering_probability(ex.pair, ex.filter, {0.05, 0.05}, many).value;
  CHECK(a == b);
}

TEST_CASE("higher rank and symmetric attacks") {
  const Setup ex = setup(testing::correlated_pair());
  SolverConfig config = quick_config();
  const double rank1 = minimize_filtering_probability(ex.pair, ex.filter, {0.05, 0.05}, config).value;
  config.rank = 0;
  const double best = minimize_filtering_probability(ex.pair, ex.filter, {0.05, 0.05}, config).value;
  CHECK(best <= rank1 + 1e-6);
  CHECK(best >= rank1 - 1e-3);

  config.rank = 1;
  config.symmetric_attack = true;
  const double sym = minimize_filtering_probability(ex.pair, ex.filter, {0.05, 0.05}, config).value;
  CHECK(sym >= rank1 - 1e-6);
}

TEST_CASE("solver input validation") {
  const Setup ex = setup(testing::correlated_pair());
  SolverConfig bad = quick_config();
  bad.starts = 0;
  CHECK_ERROR_CODE(minimize_filtering_probability(ex.pair, ex.filter, {0.0, 0.0}, bad),
                   ErrorCode::DomainError);
  bad = quick_config();
  bad.rank = 9;
  CHECK_ERROR_CODE(maximize_virtual_phase_error(ex.pair, ex.filter, {0.0, 0.0}, bad),
                   ErrorCode::DomainError);
  CHECK_ERROR_CODE(minimize_filtering_probability(ex.pair, ex.filter, {0.6, 0.0}, quick_config()),
                   ErrorCode::DomainError);
  CHECK_ERROR_CODE(minimize_filtering_probability(ex.pair, ex.filter, {-0.1, 0.0}, quick_config()),
                   ErrorCode::DomainError);
}

TEST_CASE("property: mediant inequality") {
  std::mt19937_64 rng(46);
  std::uniform_real_distribution<double> positive(1e-6, 10.0);
  for (int trial = 0; trial < 20000; ++trial) {
    CHECK(mediant_check(positive(rng), positive(rng), positive(rng), positive(rng)));
  }
  CHECK(mediant_check(1.0, 2.0, 1.0, 2.0));
  CHECK_ERROR_CODE(mediant_check(0.0, 1.0, 1.0, 1.0), ErrorCode::NonPositiveInput);
  CHECK_ERROR_CODE(mediant_check(1.0, 1.0, 1.0, -2.0), ErrorCode::NonPositiveInput);
}
