#include "qkdmm/eve_optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "bfgs.hpp"
#include "parallel.hpp"
#include "qkdmm/errors.hpp"

namespace qkdmm {
namespace {

Eigen::Matrix4d half_projector(const Eigen::Vector4d& v) { return v * v.transpose() / 2.0; }

BasisConstants make_basis_constants() {
  BasisConstants b;
  b.z00 = half_projector({1, 0, 0, 1});
  b.z10 = half_projector({0, 1, 1, 0});
  b.z01 = half_projector({0, 1, -1, 0});
  b.z11 = half_projector({1, 0, 0, -1});
  b.xpp = half_projector({1, 1, 0, 0});
  b.xmp = half_projector({0, 0, -1, 1});
  b.xpm = half_projector({0, 0, 1, 1});
  b.xmm = half_projector({1, -1, 0, 0});
  return b;
}

enum Form : std::size_t {
  kBitError,      // Z10 (x) E0 + Z01 (x) E1
  kZNorm,         // (Z00 + Z10) (x) E0 + (Z11 + Z01) (x) E1
  kFiltered,      // I (x) C^H C
  kVirtualError,  // (Xmp + Xpm) (x) C^H C
  kActualError,   // Xmp (x) E0 + Xpm (x) E1
  kXNorm,         // (Xpp + Xmp) (x) E0 + (Xmm + Xpm) (x) E1
  kFormCount,
};

using FormOperators = std::array<ComplexMatrix, kFormCount>;
using FormValues = std::array<double, kFormCount>;
using FormGradients = std::array<Eigen::VectorXd, kFormCount>;

FormOperators build_operators(const DetectorPair& pair, const VirtualFilter& filter) {
  const BasisConstants& b = basis_constants();
  const ComplexMatrix& e0 = pair.e0.matrix();
  const ComplexMatrix& e1 = pair.e1.matrix();
  const ComplexMatrix& g = filter.gram;
  FormOperators ops;
  ops[kBitError] = kron(b.z10, e0) + kron(b.z01, e1);
  ops[kZNorm] = kron(b.z00 + b.z10, e0) + kron(b.z11 + b.z01, e1);
  ops[kFiltered] = kron(Eigen::Matrix4d::Identity(), g);
  ops[kVirtualError] = kron(b.xmp + b.xpm, g);
  ops[kActualError] = kron(b.xmp, e0) + kron(b.xpm, e1);
  ops[kXNorm] = kron(b.xpp + b.xmp, e0) + kron(b.xmm + b.xpm, e1);
  return ops;
}

// The bit-flip symmetries in both bases act on the Pauli-coefficient factor
// as diag(1,1,-1,-1) and diag(1,-1,-1,1). Averaging an operator over the group
// they generate keeps exactly the diagonal 4 x 4 blocks.
ComplexMatrix symmetrize(const ComplexMatrix& op) {
  const Index d = op.rows() / 4;
  ComplexMatrix out = ComplexMatrix::Zero(op.rows(), op.cols());
  for (Index w = 0; w < 4; ++w) out.block(w * d, w * d, d, d) = op.block(w * d, w * d, d, d);
  return out;
}

const std::array<Eigen::Vector4d, 4>& symmetry_group() {
  static const std::array<Eigen::Vector4d, 4> group{
      Eigen::Vector4d(1, 1, 1, 1), Eigen::Vector4d(1, 1, -1, -1), Eigen::Vector4d(1, -1, -1, 1),
      Eigen::Vector4d(1, -1, 1, -1)};
  return group;
}

void require_compatible(const DetectorPair& pair, const VirtualFilter& filter) {
  if (!pair.both_full_rank()) {
    throw Error(ErrorCode::SingularDetector, "statistics need full-rank detectors");
  }
  if (filter.gram.rows() != pair.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "virtual filter does not match detectors");
  }
}

// Quadratic forms sum_k <phi_k|A|phi_k> over a real parameter vector holding
// (Re phi_k, Im phi_k) blocks.
class FormEvaluator {
 public:
  FormEvaluator(FormOperators ops, Index n) : ops_(std::move(ops)), n_(n) {}

  Index state_dim() const { return n_; }

  void evaluate(const Eigen::VectorXd& x, FormValues& values, FormGradients* grads) const {
    const Index rank = x.size() / (2 * n_);
    values.fill(0.0);
    if (grads) {
      for (auto& g : *grads) g.setZero(x.size());
    }
    ComplexVector phi(n_);
    for (Index k = 0; k < rank; ++k) {
      const Index offset = 2 * n_ * k;
      for (Index i = 0; i < n_; ++i) phi(i) = Complex(x(offset + i), x(offset + n_ + i));
      for (std::size_t f = 0; f < kFormCount; ++f) {
        const ComplexVector a_phi = ops_[f] * phi;
        values[f] += phi.dot(a_phi).real();
        if (grads) {
          (*grads)[f].segment(offset, n_) += 2.0 * a_phi.real();
          (*grads)[f].segment(offset + n_, n_) += 2.0 * a_phi.imag();
        }
      }
    }
  }

 private:
  FormOperators ops_;
  Index n_;
};

double ratio(const FormValues& v, Form num, Form den, const FormGradients* g,
             Eigen::VectorXd* grad) {
  const double q = v[num] / v[den];
  if (grad) *grad = ((*g)[num] - q * (*g)[den]) / v[den];
  return q;
}

std::vector<ComplexVector> unpack(const Eigen::VectorXd& x, Index n) {
  const Index rank = x.size() / (2 * n);
  std::vector<ComplexVector> out;
  for (Index k = 0; k < rank; ++k) {
    ComplexVector phi(n);
    for (Index i = 0; i < n; ++i) phi(i) = Complex(x(2 * n * k + i), x(2 * n * k + n + i));
    out.push_back(std::move(phi));
  }
  return out;
}

EveState witness_state(const Eigen::VectorXd& x, Index n, bool symmetric) {
  std::vector<ComplexVector> vectors = unpack(x, n);
  if (!symmetric) return EveState(std::move(vectors));
  const Index d = n / 4;
  std::vector<ComplexVector> averaged;
  for (const ComplexVector& phi : vectors) {
    for (const Eigen::Vector4d& g : symmetry_group()) {
      ComplexVector image = phi;
      for (Index w = 0; w < 4; ++w) image.segment(w * d, d) *= g(w) / 2.0;
      averaged.push_back(std::move(image));
    }
  }
  return EveState(std::move(averaged));
}

Eigen::VectorXd random_start(Index n, int rank, std::uint64_t seed, std::size_t start) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(rank)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(2 * n * rank);
  for (Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
  return x / x.norm();
}

std::vector<int> ranks_to_try(const SolverConfig& config, Index n) {
  if (config.rank == 0) {
    std::vector<int> ranks{1, 2, static_cast<int>(n)};
    ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());
    return ranks;
  }
  if (config.rank < 0 || config.rank > n) {
    throw Error(ErrorCode::DomainError, "rank must lie in [0, 4d]");
  }
  return {config.rank};
}

void validate_config(const SolverConfig& config) {
  if (config.starts < 1 || config.max_iters < 1 || !(config.penalty_init > 0.0) ||
      !(config.constraint_tol > 0.0)) {
    throw Error(ErrorCode::DomainError, "invalid solver configuration");
  }
}

enum class Goal { MinFilteringProbability, MaxVirtualPhaseError };

struct StartOutcome {
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::infinity();
  bool inner_converged = false;
};

constexpr int kMaxPenaltyRounds = 16;
constexpr double kMaxPenalty = 1e10;
constexpr double kLooseFeasibility = 1e-4;

// Augmented Lagrangian: L = f + sum_i lambda_i c_i + (mu/2) sum_i c_i^2, with
// multiplier updates and mu growing tenfold per round.
StartOutcome run_constrained_start(const FormEvaluator& eval, Goal goal,
                                   const ObservedRates& observed, const SolverConfig& config,
                                   int rank, std::size_t start) {
  const Index n = eval.state_dim();
  StartOutcome out;
  out.x = random_start(n, rank, config.seed, start);

  std::array<double, 2> lambda{0.0, 0.0};
  double mu = config.penalty_init;

  FormValues v;
  FormGradients g;
  Eigen::VectorXd grad_f, grad_c0, grad_c1;

  auto constraints = [&](const FormValues& values) {
    return std::array<double, 2>{values[kBitError] / values[kZNorm] - observed.bit_error,
                                 values[kActualError] / values[kXNorm] - observed.phase_error};
  };
  auto objective_value = [&](const FormValues& values) {
    return goal == Goal::MinFilteringProbability ? values[kFiltered] / values[kZNorm]
                                                 : values[kVirtualError] / values[kFiltered];
  };

  detail::BfgsOptions options;
  options.max_iters = config.max_iters;

  for (int round = 0; round < kMaxPenaltyRounds; ++round) {
    auto lagrangian = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
      eval.evaluate(x, v, &g);
      double f = 0.0;
      if (goal == Goal::MinFilteringProbability) {
        f = ratio(v, kFiltered, kZNorm, &g, &grad_f);
      } else {
        f = -ratio(v, kVirtualError, kFiltered, &g, &grad_f);
        grad_f = -grad_f;
      }
      const double c0 = ratio(v, kBitError, kZNorm, &g, &grad_c0) - observed.bit_error;
      const double c1 = ratio(v, kActualError, kXNorm, &g, &grad_c1) - observed.phase_error;
      const double w0 = lambda[0] + mu * c0;
      const double w1 = lambda[1] + mu * c1;
      grad = grad_f + w0 * grad_c0 + w1 * grad_c1;
      return f + lambda[0] * c0 + lambda[1] * c1 + 0.5 * mu * (c0 * c0 + c1 * c1);
    };

    const detail::BfgsResult inner = detail::bfgs_minimize(lagrangian, out.x, options);
    if (!inner.x.allFinite() || inner.x.norm() == 0.0) break;
    out.x = inner.x / inner.x.norm();
    out.inner_converged = inner.converged;

    eval.evaluate(out.x, v, nullptr);
    const std::array<double, 2> c = constraints(v);
    out.residual = std::max(std::abs(c[0]), std::abs(c[1]));
    out.objective = objective_value(v);
    if (!std::isfinite(out.residual)) break;
    if (out.residual <= 1e-3 * config.constraint_tol) break;

    lambda[0] += mu * c[0];
    lambda[1] += mu * c[1];
    mu = std::min(mu * 10.0, kMaxPenalty);
  }
  return out;
}

ConstrainedSolution solve_constrained(const DetectorPair& pair, const VirtualFilter& filter,
                                      const ObservedRates& observed, const SolverConfig& config,
                                      Goal goal) {
  require_compatible(pair, filter);
  validate_config(config);
  if (!(observed.bit_error >= 0.0 && observed.bit_error <= 0.5 && observed.phase_error >= 0.0 &&
        observed.phase_error <= 0.5)) {
    throw Error(ErrorCode::DomainError, "observed error rates must lie in [0, 0.5]");
  }

  FormOperators ops = build_operators(pair, filter);
  if (config.symmetric_attack) {
    for (auto& op : ops) op = symmetrize(op);
  }
  const Index n = 4 * pair.dim();
  const FormEvaluator eval(std::move(ops), n);

  struct Candidate {
    StartOutcome outcome;
    int rank = 1;
  };
  std::vector<Candidate> all;
  for (const int rank : ranks_to_try(config, n)) {
    std::vector<StartOutcome> outcomes(static_cast<std::size_t>(config.starts));
    detail::parallel_for(outcomes.size(), config.threads, [&](std::size_t s) {
      outcomes[s] = run_constrained_start(eval, goal, observed, config, rank, s);
    });
    for (StartOutcome& o : outcomes) all.push_back(Candidate{std::move(o), rank});
  }

  auto better = [&](const StartOutcome& a, const StartOutcome& b) {
    return goal == Goal::MinFilteringProbability ? a.objective < b.objective
                                                 : a.objective > b.objective;
  };
  // Strictly feasible starts win; the looser gate only applies when none is.
  auto select = [&](double gate) {
    const Candidate* chosen = nullptr;
    for (const Candidate& c : all) {
      if (!std::isfinite(c.outcome.objective) || c.outcome.residual > gate) continue;
      if (!chosen || better(c.outcome, chosen->outcome)) chosen = &c;
    }
    return chosen;
  };
  const Candidate* best = select(config.constraint_tol);
  if (!best) best = select(kLooseFeasibility);
  if (!best) {
    const bool any_converged = std::any_of(all.begin(), all.end(), [](const Candidate& c) {
      return c.outcome.inner_converged;
    });
    if (any_converged) {
      throw Error(ErrorCode::Infeasible, "no state reproduces the observed error rates");
    }
    throw Error(ErrorCode::SolverBudgetExceeded,
                "no restart converged within the iteration budget");
  }
  const int feasible = static_cast<int>(std::count_if(all.begin(), all.end(), [&](const Candidate& c) {
    return std::isfinite(c.outcome.objective) && c.outcome.residual <= config.constraint_tol;
  }));

  EveState witness = witness_state(best->outcome.x, n, config.symmetric_attack);
  const RateStatistics stats = evaluate_statistics(witness, pair, filter);
  const double value =
      goal == Goal::MinFilteringProbability ? stats.p_succ : stats.e_p;
  const double residual = std::max(std::abs(stats.e_b - observed.bit_error),
                                   std::abs(stats.e_p_prime - observed.phase_error));
  return ConstrainedSolution{value, std::move(witness), stats, residual, feasible};
}

}  // namespace

const BasisConstants& basis_constants() {
  static const BasisConstants constants = make_basis_constants();
  return constants;
}

EveState::EveState(std::vector<ComplexVector> vectors) : vectors_(std::move(vectors)) {
  if (vectors_.empty()) throw Error(ErrorCode::DimensionMismatch, "Eve state needs a vector");
  const Index n = vectors_.front().size();
  if (n < 4 || n % 4 != 0) {
    throw Error(ErrorCode::DimensionMismatch, "Eve state dimension must be a multiple of 4");
  }
  bool nonzero = false;
  for (const ComplexVector& v : vectors_) {
    if (v.size() != n) throw Error(ErrorCode::DimensionMismatch, "Eve state vectors differ");
    if (!v.allFinite()) throw Error(ErrorCode::DomainError, "Eve state has non-finite entries");
    nonzero = nonzero || v.squaredNorm() > 0.0;
  }
  if (!nonzero) throw Error(ErrorCode::DomainError, "Eve state is identically zero");
}

ComplexMatrix EveState::density() const {
  ComplexMatrix rho = ComplexMatrix::Zero(dim(), dim());
  for (const ComplexVector& v : vectors_) rho += v * v.adjoint();
  return rho;
}

double EveState::squared_norm() const {
  double total = 0.0;
  for (const ComplexVector& v : vectors_) total += v.squaredNorm();
  return total;
}

RateStatistics evaluate_statistics(const EveState& state, const DetectorPair& pair,
                                   const VirtualFilter& filter) {
  require_compatible(pair, filter);
  if (state.aux_dim() != pair.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "Eve state dimension must be 4d");
  }
  const FormOperators ops = build_operators(pair, filter);
  FormValues v{};
  for (const ComplexVector& phi : state.vectors()) {
    for (std::size_t f = 0; f < kFormCount; ++f) v[f] += phi.dot(ops[f] * phi).real();
  }
  const double floor = 1e-14 * state.squared_norm();
  for (const Form den : {kZNorm, kFiltered, kXNorm}) {
    if (!(v[den] >= floor) || v[den] <= 0.0) {
      throw Error(ErrorCode::ZeroDenominator, "state produces no conclusive events");
    }
  }
  RateStatistics s;
  s.e_b = v[kBitError] / v[kZNorm];
  s.e_p_prime = v[kActualError] / v[kXNorm];
  s.e_p = v[kVirtualError] / v[kFiltered];
  s.p_succ = v[kFiltered] / v[kZNorm];
  return s;
}

SuboptimalBounds suboptimal_bounds(const MismatchSpectrum& spectrum) {
  SuboptimalBounds b;
  double lowest = 1.0;
  for (Index i = 0; i < spectrum.ratios.size(); ++i) {
    const double ratio = spectrum.ratios(i);
    lowest = std::min({lowest, ratio, 1.0 / ratio});
  }
  b.p_succ_lower = lowest;
  b.ep_ratio_upper = 1.0 / lowest;
  return b;
}

ConstrainedSolution minimize_filtering_probability(const DetectorPair& pair,
                                                   const VirtualFilter& filter,
                                                   const ObservedRates& observed,
                                                   const SolverConfig& config) {
  return solve_constrained(pair, filter, observed, config, Goal::MinFilteringProbability);
}

ConstrainedSolution maximize_virtual_phase_error(const DetectorPair& pair,
                                                 const VirtualFilter& filter,
                                                 const ObservedRates& observed,
                                                 const SolverConfig& config) {
  return solve_constrained(pair, filter, observed, config, Goal::MaxVirtualPhaseError);
}

NumericBounds unconstrained_bounds_numeric(const DetectorPair& pair, const VirtualFilter& filter,
                                           const SolverConfig& config) {
  require_compatible(pair, filter);
  validate_config(config);
  const Index n = 4 * pair.dim();
  const FormEvaluator eval(build_operators(pair, filter), n);

  detail::BfgsOptions options;
  options.max_iters = config.max_iters;
  options.gradient_tol = 1e-12;

  // Minimising p_succ; maximising e_p / e_p' through its negative logarithm,
  // which keeps the gradient well scaled when both error terms are small.
  auto filtering = [&eval](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    FormValues v;
    FormGradients g;
    eval.evaluate(x, v, &g);
    return ratio(v, kFiltered, kZNorm, &g, &grad);
  };
  auto neg_log_ratio = [&eval](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    FormValues v;
    FormGradients g;
    eval.evaluate(x, v, &g);
    if (!(v[kActualError] > 0.0 && v[kVirtualError] > 0.0)) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    grad = g[kActualError] / v[kActualError] - g[kXNorm] / v[kXNorm] -
           g[kVirtualError] / v[kVirtualError] + g[kFiltered] / v[kFiltered];
    return std::log(v[kActualError]) - std::log(v[kXNorm]) - std::log(v[kVirtualError]) +
           std::log(v[kFiltered]);
  };

  NumericBounds bounds{std::numeric_limits<double>::infinity(), 0.0};
  bool any_finite = false;
  for (const int rank : ranks_to_try(config, n)) {
    std::vector<std::array<double, 2>> results(static_cast<std::size_t>(config.starts));
    detail::parallel_for(results.size(), config.threads, [&](std::size_t s) {
      const Eigen::VectorXd x0 = random_start(n, rank, config.seed, s);
      const detail::BfgsResult a = detail::bfgs_minimize(filtering, x0, options);
      // Polish once from the normalised end point.
      const detail::BfgsResult a2 = detail::bfgs_minimize(filtering, a.x / a.x.norm(), options);
      const detail::BfgsResult b = detail::bfgs_minimize(neg_log_ratio, x0, options);
      const detail::BfgsResult b2 = detail::bfgs_minimize(neg_log_ratio, b.x / b.x.norm(), options);
      results[s] = {std::min(a.value, a2.value), std::exp(-std::min(b.value, b2.value))};
    });
    for (const auto& [p, r] : results) {
      if (std::isfinite(p)) {
        bounds.p_succ_min = std::min(bounds.p_succ_min, p);
        any_finite = true;
      }
      if (std::isfinite(r)) bounds.ep_ratio_max = std::max(bounds.ep_ratio_max, r);
    }
  }
  if (!any_finite || bounds.ep_ratio_max <= 0.0) {
    throw Error(ErrorCode::SolverBudgetExceeded, "unconstrained search produced no finite value");
  }
  return bounds;
}

bool mediant_check(double a1, double a2, double b1, double b2) {
  if (!(a1 > 0.0 && a2 > 0.0 && b1 > 0.0 && b2 > 0.0)) {
    throw Error(ErrorCode::NonPositiveInput, "mediant inputs must be positive");
  }
  // Cross-multiplied in extended precision: a1/a2 vs b1/b2 and a1/a2 vs the
  // mediant reduce to comparisons of products.
  const long double x1 = a1, x2 = a2, y1 = b1, y2 = b2;
  const long double lhs = x1 * y2;
  const long double rhs = x2 * y1;
  const long double to_mediant_lhs = x1 * (x2 + y2);
  const long double to_mediant_rhs = x2 * (x1 + y1);
  const long double slack = 8 * std::numeric_limits<long double>::epsilon() *
                            std::max(std::abs(to_mediant_lhs), std::abs(to_mediant_rhs));
  bool holds = true;
  if (lhs >= rhs) holds = holds && to_mediant_lhs >= to_mediant_rhs - slack;
  if (lhs <= rhs) holds = holds && to_mediant_lhs <= to_mediant_rhs + slack;
  return holds;
}

}  // namespace qkdmm
