#pragma once

// Dense BFGS with Armijo backtracking. Small problems only (a few hundred
// variables at most).

#include <Eigen/Dense>
#include <functional>

namespace qkdmm::detail {

/// Returns f(x) and writes the gradient into `grad`. May return a non-finite
/// value to reject a point; the line search then backs off.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct BfgsOptions {
  int max_iters = 500;
  double gradient_tol = 1e-10;
  double value_tol = 1e-15;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

BfgsResult bfgs_minimize(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& options);

}  // namespace qkdmm::detail
