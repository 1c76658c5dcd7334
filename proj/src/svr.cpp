#include <Eigen/Core>
#include <stdexcept>

#include "soilspec/detail/smo.hpp"
#include "soilspec/regression.hpp"

namespace soilspec {

// Dual of the linear epsilon-SVR
//   min_w,b 1/2 ||w||^2 + C sum_i max(0, |y_i - w.x_i - b| - eps)
// expanded to 2n box variables (up/down slack directions) with the equality
// constraint carrying the unregularized bias.
RegressionModel fit_svr_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const SvrOptions& opts) {
  if (!X.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("non-finite values in regression inputs");
  }
  if (X.rows() != y.size()) throw std::invalid_argument("X rows must match y length");
  const int n = static_cast<int>(X.rows());
  if (n < 2) throw std::invalid_argument("fit_svr_linear needs at least 2 samples");
  if (!(opts.C > 0.0)) throw std::invalid_argument("fit_svr_linear: C must be positive");
  if (!(opts.epsilon > 0.0)) throw std::invalid_argument("fit_svr_linear: epsilon must be positive");

  const Eigen::MatrixXd gram = X * X.transpose();

  detail::SmoProblem prob;
  prob.gram = &gram;
  prob.sample_of_var.resize(2 * n);
  prob.sign.resize(2 * n);
  prob.linear.resize(2 * n);
  prob.upper = Eigen::VectorXd::Constant(2 * n, opts.C);
  for (int i = 0; i < n; ++i) {
    prob.sample_of_var[i] = i;
    prob.sample_of_var[n + i] = i;
    prob.sign(i) = 1.0;
    prob.sign(n + i) = -1.0;
    prob.linear(i) = opts.epsilon - y(i);
    prob.linear(n + i) = opts.epsilon + y(i);
  }
  prob.tol = opts.tol;
  prob.max_passes = opts.max_passes;

  const auto sol = detail::solve_smo(prob);

  SvrParams params;
  params.C = opts.C;
  params.epsilon = opts.epsilon;
  params.tol = opts.tol;
  params.max_passes = opts.max_passes;
  params.converged = sol.converged;
  params.iterations = sol.iterations;
  params.alpha_up = sol.alpha.head(n);
  params.alpha_down = sol.alpha.tail(n);

  const Eigen::VectorXd beta = params.alpha_up - params.alpha_down;

  RegressionModel m;
  m.kind = RegressorKind::Svr;
  m.coefficients = X.transpose() * beta;
  m.intercept = -sol.constraint_multiplier;
  if (!sol.converged) {
    m.notes.push_back("svr: dual solver hit the pass cap before reaching tolerance");
  }
  m.params = std::move(params);
  return m;
}

}  // namespace soilspec
