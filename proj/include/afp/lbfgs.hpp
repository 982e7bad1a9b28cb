#pragma once
// Limited-memory BFGS minimizer with Armijo backtracking line search.

#include <functional>
#include <vector>

namespace afp {

struct LbfgsOptions {
  int max_iterations = 200;
  int memory = 10;
  double grad_tol = 1e-7;    // stop when max|g_i| <= grad_tol
  double f_rel_tol = 1e-13;  // stop when the objective stagnates
  int max_backtracks = 50;
};

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  long long evaluations = 0;
  bool converged = false;  // a stopping test fired before the iteration cap
};

/// Minimizes fg, which must write the gradient into its second argument
/// and return the objective value. Deterministic: no internal randomness.
LbfgsResult lbfgs_minimize(
    const std::function<double(const std::vector<double>&,
                               std::vector<double>&)>& fg,
    std::vector<double> x0, const LbfgsOptions& options);

}  // namespace afp
