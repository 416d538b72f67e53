#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qkdmm/keyrate.hpp"
#include "qkdmm/sweep.hpp"
#include "support/expect_error.hpp"
#include "support/generators.hpp"

using namespace qkdmm;

namespace {

SweepOptions small_options(bool bounds_only) {
  SweepOptions o;
  o.e_max = 0.1;
  o.steps = 6;
  o.bounds_only = bounds_only;
  o.solver.starts = 16;
  return o;
}

double h2(double x) { return x <= 0.0 ? 0.0 : binary_entropy(x); }

}  // namespace

TEST_CASE("bound columns on the correlated pair") {
  const std::vector<SweepRow> rows = run_sweep(testing::correlated_pair(), small_options(true));
  REQUIRE(rows.size() == 6);
  CHECK(rows.front().e_obs == 0.0);
  CHECK(rows.back().e_obs == doctest::Approx(0.1));
  for (const SweepRow& r : rows) {
    CHECK(std::abs(r.p_succ_bound - 0.330) < 0.001);
    CHECK(r.e_p_bound == doctest::Approx(3.02908825 * r.e_obs).epsilon(1e-8));
    CHECK(std::isnan(r.p_succ_opt));
    CHECK(r.status == "bounds_only");
    CHECK(std::abs(r.rate_4phase - (1 - 2 * h2(r.e_obs))) <= 1e-12);
  }
  CHECK(rows.front().rate_bound == doctest::Approx(0.3301).epsilon(1e-3));
}

TEST_CASE("optimised columns dominate the bounds") {
  const std::vector<SweepRow> rows = run_sweep(testing::correlated_pair(), small_options(false));
  CHECK(std::abs(rows.front().p_succ_opt - 0.496) <= 0.005);
  CHECK(std::abs(rows.front().rate_opt - 0.496) <= 0.005);
  for (const SweepRow& r : rows) {
    CHECK(r.status == "ok");
    CHECK(r.p_succ_opt >= r.p_succ_bound - 1e-4);
    CHECK(r.e_p_opt <= r.e_p_bound + 1e-4);
    CHECK(r.rate_opt >= r.rate_bound - 1e-4);
    const double expected = r.p_succ_opt * (1 - h2(std::min(r.e_p_opt, 0.5))) - h2(r.e_obs);
    CHECK(r.rate_opt == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("identity pair sweep") {
  const DetectorPair id = load_pair(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2));
  const std::vector<SweepRow> rows = run_sweep(id, small_options(false));
  for (const SweepRow& r : rows) {
    CHECK(r.p_succ_bound == doctest::Approx(1.0));
    CHECK(r.p_succ_opt == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.e_p_bound == doctest::Approx(r.e_obs));
    CHECK(std::abs(r.e_p_opt - r.e_obs) <= 1e-4);
    CHECK(r.rate_4phase == doctest::Approx(r.rate_bound).epsilon(1e-12));
  }
}

TEST_CASE("CSV output is reproducible") {
  std::ostringstream a;
  std::ostringstream b;
  SweepOptions o = small_options(false);
  o.threads = 1;
  write_sweep_csv(a, run_sweep(testing::correlated_pair(), o));
  o.threads = 3;
  write_sweep_csv(b, run_sweep(testing::correlated_pair(), o));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("e_obs,p_succ_bound,p_succ_opt,e_p_bound,e_p_opt,rate_bound,rate_opt,rate_4phase,status\n", 0) == 0);
}

TEST_CASE("sweep validation") {
  SweepOptions o = small_options(true);
  o.e_max = 0.3;
  CHECK_ERROR_CODE(run_sweep(testing::correlated_pair(), o), ErrorCode::DomainError);
  o = small_options(true);
  o.steps = 1;
  CHECK_ERROR_CODE(run_sweep(testing::correlated_pair(), o), ErrorCode::DomainError);
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  s(0, 0) = 0.5;
  CHECK_ERROR_CODE(run_sweep(load_pair(s, ComplexMatrix::Identity(2, 2)), small_options(true)),
                   ErrorCode::SingularDetector);
}
