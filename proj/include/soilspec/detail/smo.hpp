#pragma once

#include <Eigen/Core>
#include <vector>

namespace soilspec::detail {

// Box-and-equality constrained quadratic program in the SVM dual form:
//
//   minimize   1/2 sum_kl s_k s_l G(u_k,u_l) a_k a_l + sum_k p_k a_k
//   subject to sum_k s_k a_k = 0,   0 <= a_k <= upper_k
//
// where u_k maps dual variables onto rows of the sample Gram matrix (epsilon-
// SVR uses two variables per sample). Solved by pairwise coordinate steps on
// the maximal violating pair with second-order step sizes.
struct SmoProblem {
  const Eigen::MatrixXd* gram = nullptr;  // base kernel over samples
  std::vector<int> sample_of_var;
  Eigen::VectorXd sign;    // +-1 per variable (constraint coefficients)
  Eigen::VectorXd linear;  // p
  Eigen::VectorXd upper;   // box per variable
  double tol = 1e-3;
  long max_passes = 1000;  // one pass = n_vars pair updates
};

struct SmoResult {
  Eigen::VectorXd alpha;
  double constraint_multiplier = 0.0;  // (m + M) / 2; primal bias is its negation
  long iterations = 0;
  bool converged = false;
  double kkt_gap = 0.0;  // m - M at termination
};

SmoResult solve_smo(const SmoProblem& prob);

}  // namespace soilspec::detail
