#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "soilspec/folds.hpp"
#include "soilspec/regression.hpp"

namespace soilspec {

namespace {

double soft_threshold(double v, double lambda) {
  if (v > lambda) return v - lambda;
  if (v < -lambda) return v + lambda;
  return 0.0;
}

void check_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (!X.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("non-finite values in regression inputs");
  }
  if (X.rows() != y.size()) throw std::invalid_argument("X rows must match y length");
  if (X.rows() == 0) throw std::invalid_argument("empty training data");
}

// Coordinate-descent state over centered data. Two gradient strategies:
// Gram updates (cost O(d) per changed coordinate) when d <= n, residual
// updates (cost O(n) per coordinate) otherwise.
class CdSolver {
 public:
  CdSolver(const Eigen::MatrixXd& Xc, const Eigen::VectorXd& yc)
      : x_(Xc), y_(yc), n_(static_cast<int>(Xc.rows())), d_(static_cast<int>(Xc.cols())) {
    col_sq_.resize(d_);
    for (int j = 0; j < d_; ++j) col_sq_(j) = x_.col(j).squaredNorm() / n_;
    use_gram_ = d_ <= n_ && d_ > 0;
    if (use_gram_) {
      gram_ = x_.transpose() * x_;
    }
  }

  // Minimizes (1/2n)||yc - Xc b||^2 + lambda ||b||_1 starting from warm_start.
  // max_sweeps bounds the total number of sweeps (full or active-set).
  Eigen::VectorXd solve(double lambda, const Eigen::VectorXd& warm_start, double tol,
                        int max_sweeps) {
    beta_ = warm_start.size() == d_ ? warm_start : Eigen::VectorXd::Zero(d_);
    if (use_gram_) {
      // per-column dots so the gradient at beta = 0 matches lambda_max exactly
      grad_.resize(d_);
      for (int j = 0; j < d_; ++j) grad_(j) = x_.col(j).dot(y_);
      if (beta_.cwiseAbs().maxCoeff() > 0.0) grad_.noalias() -= gram_ * beta_;
    } else {
      residual_ = y_ - x_ * beta_;
    }

    std::vector<int> active;
    int sweeps = 0;
    bool full_pass = true;
    while (sweeps < max_sweeps) {
      double max_delta = 0.0;
      if (full_pass) {
        for (int j = 0; j < d_; ++j) max_delta = std::max(max_delta, update(j, lambda));
        ++sweeps;
        if (max_delta <= tol) break;  // full sweep stable: converged
        active.clear();
        for (int j = 0; j < d_; ++j) {
          if (beta_(j) != 0.0) active.push_back(j);
        }
        full_pass = false;
      } else {
        for (int j : active) max_delta = std::max(max_delta, update(j, lambda));
        ++sweeps;
        // active set settled; one more full sweep checks for new activations
        if (max_delta <= tol) full_pass = true;
      }
    }
    return beta_;
  }

 private:
  // Exact single-coordinate minimization; returns |delta beta_j|.
  double update(int j, double lambda) {
    if (col_sq_(j) == 0.0) {
      beta_(j) = 0.0;
      return 0.0;
    }
    const double g = use_gram_ ? grad_(j) / n_ : x_.col(j).dot(residual_) / n_;
    const double rho = g + col_sq_(j) * beta_(j);
    const double updated = soft_threshold(rho, lambda) / col_sq_(j);
    const double delta = updated - beta_(j);
    if (delta != 0.0) {
      if (use_gram_) grad_.noalias() -= gram_.col(j) * delta;
      else residual_.noalias() -= x_.col(j) * delta;
      beta_(j) = updated;
    }
    return std::abs(delta);
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  int n_;
  int d_;
  bool use_gram_ = false;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd col_sq_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd grad_;      // X' (y - X beta), Gram mode
  Eigen::VectorXd residual_;  // y - X beta, tall mode
};

}  // namespace

Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& Xc,
                                         const Eigen::VectorXd& yc, double lambda,
                                         const Eigen::VectorXd& warm_start,
                                         double tol, int max_sweeps) {
  CdSolver solver(Xc, yc);
  return solver.solve(lambda, warm_start, tol, max_sweeps);
}

namespace {

std::vector<Eigen::VectorXd> lasso_path(CdSolver& solver, const std::vector<double>& lambdas,
                                        int d, double tol, int max_sweeps) {
  std::vector<Eigen::VectorXd> path;
  path.reserve(lambdas.size());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  for (double lambda : lambdas) {
    beta = solver.solve(lambda, beta, tol, max_sweeps);
    path.push_back(beta);
  }
  return path;
}

}  // namespace

RegressionModel fit_lasso_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const LassoOptions& opts) {
  check_inputs(X, y);
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (opts.folds > n) throw std::invalid_argument("fit_lasso_cv: more folds than samples");
  if (opts.n_lambdas < 1) throw std::invalid_argument("fit_lasso_cv: n_lambdas must be >= 1");

  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  LassoParams params;
  params.n_lambdas = opts.n_lambdas;
  params.path_eps = opts.path_eps;
  params.folds = opts.folds;
  params.seed = opts.seed;

  // computed with the same per-column dot product the coordinate updates use,
  // so beta stays exactly zero at lambda = lambda_max
  double lambda_max = 0.0;
  for (int j = 0; j < d; ++j) {
    lambda_max = std::max(lambda_max, std::abs(Xc.col(j).dot(yc)) / n);
  }

  RegressionModel m;
  m.kind = RegressorKind::Lasso;

  if (lambda_max <= 0.0) {
    // constant target (or all-zero columns): intercept-only model
    m.coefficients = Eigen::VectorXd::Zero(d);
    m.intercept = y_mean;
    params.lambda_selected = 0.0;
    params.lambda_path = {0.0};
    m.params = std::move(params);
    m.notes.push_back("lasso: lambda_max = 0, returning intercept-only model");
    return m;
  }

  std::vector<double> lambdas(opts.n_lambdas);
  if (opts.n_lambdas == 1) {
    lambdas[0] = lambda_max;
  } else {
    const double ratio = std::pow(opts.path_eps, 1.0 / (opts.n_lambdas - 1));
    double cur = lambda_max;
    for (int i = 0; i < opts.n_lambdas; ++i) {
      lambdas[i] = cur;
      cur *= ratio;
    }
  }
  params.lambda_path = lambdas;

  // Per-fold validation MSE along the path; fold results are independent, so
  // the selected lambda does not depend on evaluation order.
  const auto fold_of = fold_assignment(n, opts.folds, opts.seed);
  std::vector<double> mse_sum(lambdas.size(), 0.0);
  for (int f = 0; f < opts.folds; ++f) {
    std::vector<int> tr, va;
    for (int i = 0; i < n; ++i) (fold_of[i] == f ? va : tr).push_back(i);
    if (va.empty() || tr.empty()) continue;

    Eigen::MatrixXd Xtr(tr.size(), d), Xva(va.size(), d);
    Eigen::VectorXd ytr(tr.size()), yva(va.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
      Xtr.row(static_cast<int>(i)) = X.row(tr[i]);
      ytr(static_cast<int>(i)) = y(tr[i]);
    }
    for (std::size_t i = 0; i < va.size(); ++i) {
      Xva.row(static_cast<int>(i)) = X.row(va[i]);
      yva(static_cast<int>(i)) = y(va[i]);
    }

    const Eigen::RowVectorXd xm = Xtr.colwise().mean();
    const double ym = ytr.mean();
    const Eigen::MatrixXd Xtrc = Xtr.rowwise() - xm;
    const Eigen::VectorXd ytrc = ytr.array() - ym;
    CdSolver solver(Xtrc, ytrc);
    const auto path = lasso_path(solver, lambdas, d, opts.tol, opts.max_sweeps);

    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      const Eigen::VectorXd& beta = path[li];
      const double b0 = ym - xm.dot(beta);
      const Eigen::VectorXd pred = (Xva * beta).array() + b0;
      mse_sum[li] += (pred - yva).squaredNorm() / va.size();
    }
  }

  params.cv_mse.resize(lambdas.size());
  std::size_t best = 0;
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    params.cv_mse[li] = mse_sum[li] / opts.folds;
    // strict < keeps the largest lambda (earliest path entry) on ties
    if (params.cv_mse[li] < params.cv_mse[best]) best = li;
  }
  params.lambda_selected = lambdas[best];

  // refit on all data at the selected lambda, warm-started along the path
  CdSolver solver(Xc, yc);
  const auto full_path = lasso_path(solver, lambdas, d, opts.tol, opts.max_sweeps);
  m.coefficients = full_path[best];
  m.intercept = y_mean - x_mean.dot(m.coefficients);
  m.params = std::move(params);
  return m;
}

}  // namespace soilspec
