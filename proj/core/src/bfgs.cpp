#include "bfgs.hpp"

#include <cmath>

namespace qkdmm::detail {

BfgsResult bfgs_minimize(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& options) {
  const Eigen::Index n = x0.size();
  BfgsResult result;
  result.x = std::move(x0);

  Eigen::VectorXd grad(n);
  result.value = f(result.x, grad);
  if (!std::isfinite(result.value) || !grad.allFinite()) return result;

  Eigen::MatrixXd inverse_hessian = Eigen::MatrixXd::Identity(n, n);
  bool first_step = true;
  Eigen::VectorXd trial_grad(n);

  for (int iter = 0; iter < options.max_iters; ++iter) {
    result.iterations = iter + 1;
    if (grad.lpNorm<Eigen::Infinity>() <= options.gradient_tol) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd direction = -inverse_hessian * grad;
    double slope = direction.dot(grad);
    if (!(slope < 0.0)) {
      inverse_hessian.setIdentity();
      direction = -grad;
      slope = -grad.squaredNorm();
    }

    double step = 1.0;
    if (first_step) step = std::min(1.0, 0.1 * (1.0 + result.x.norm()) / direction.norm());

    Eigen::VectorXd trial;
    double trial_value = 0.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      trial = result.x + step * direction;
      trial_value = f(trial, trial_grad);
      if (std::isfinite(trial_value) && trial_grad.allFinite() &&
          trial_value <= result.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No descent along the quasi-Newton direction: retry once from scratch.
      if (!first_step && !inverse_hessian.isIdentity()) {
        inverse_hessian.setIdentity();
        first_step = true;
        continue;
      }
      result.converged = grad.lpNorm<Eigen::Infinity>() <= std::sqrt(options.gradient_tol);
      break;
    }

    const Eigen::VectorXd s = trial - result.x;
    const Eigen::VectorXd y = trial_grad - grad;
    const double sy = s.dot(y);
    const double improvement = result.value - trial_value;

    if (sy > 1e-300) {
      if (first_step) inverse_hessian *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = inverse_hessian * y;
      inverse_hessian += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
                         rho * (hy * s.transpose() + s * hy.transpose());
      first_step = false;
    }

    result.x = std::move(trial);
    result.value = trial_value;
    grad = trial_grad;

    if (improvement <= options.value_tol * (1.0 + std::abs(result.value)) &&
        grad.lpNorm<Eigen::Infinity>() <= std::sqrt(options.gradient_tol)) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace qkdmm::detail
