#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "soilspec/preprocess.hpp"

namespace soilspec {

enum class RegressorKind { Ols, Svr, Lasso, LrBestFeature, Plsr };

const char* regressor_kind_name(RegressorKind k);
RegressorKind parse_regressor_kind(const std::string& name);

struct OlsParams {};

struct SvrParams {
  double C = 1.0;
  double epsilon = 0.1;
  double tol = 1e-3;
  long max_passes = 1000;
  // solver diagnostics
  bool converged = false;
  long iterations = 0;
  Eigen::VectorXd alpha_up;    // dual variables pushing predictions up
  Eigen::VectorXd alpha_down;  // and down; beta = alpha_up - alpha_down
};

struct LassoParams {
  double lambda_selected = 0.0;
  std::vector<double> lambda_path;
  std::vector<double> cv_mse;  // mean CV MSE per path entry
  int n_lambdas = 100;
  double path_eps = 1e-3;
  int folds = 5;
  std::uint64_t seed = 0;
};

struct LrBfParams {
  int feature_index = -1;
  double correlation = 0.0;  // signed Pearson correlation of the chosen column
};

struct PlsrParams {
  int n_components_requested = 6;
  int n_components = 0;  // actually extracted
  int max_iter = 10000;
  double inner_tol = 1e-9;
  // projection state needed to reapply the decomposition
  Eigen::MatrixXd x_weights;   // n_features x n_components
  Eigen::MatrixXd x_loadings;  // n_features x n_components
  Eigen::VectorXd y_loadings;  // n_components
  Eigen::VectorXd x_mean;      // training column means
  double y_mean = 0.0;
};

using RegressorParams =
    std::variant<OlsParams, SvrParams, LassoParams, LrBfParams, PlsrParams>;

struct RegressionModel {
  RegressorKind kind = RegressorKind::Ols;
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  RegressorParams params;
  // optional training provenance, carried into the persisted document
  std::vector<std::string> feature_names;
  std::vector<ColumnStats> standardization;
  std::vector<std::string> notes;
};

struct LassoOptions {
  int n_lambdas = 100;
  double path_eps = 1e-3;
  int folds = 5;
  std::uint64_t seed = 0;
  double tol = 1e-9;      // coordinate-descent stopping tolerance
  int max_sweeps = 10000;
};

struct SvrOptions {
  double C = 1.0;
  double epsilon = 0.1;
  double tol = 1e-3;
  long max_passes = 1000;  // one pass = n dual pair updates
};

struct PlsrOptions {
  int n_components = 6;
  int max_iter = 10000;
  double inner_tol = 1e-9;
};

// Ordinary least squares with intercept; rank-deficient designs give the
// minimum-norm coefficient vector (complete orthogonal decomposition).
RegressionModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// L1-regularized least squares: geometric lambda path from lambda_max down to
// path_eps*lambda_max, cyclic coordinate descent with warm starts, lambda
// chosen by k-fold CV mean MSE, then refit on all data.
RegressionModel fit_lasso_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const LassoOptions& opts = {});

// Fits a single lasso problem at the given lambda (exposed for tests and the
// feature-ranking path refits).
Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& Xc,
                                         const Eigen::VectorXd& yc, double lambda,
                                         const Eigen::VectorXd& warm_start,
                                         double tol = 1e-9, int max_sweeps = 10000);

// Linear epsilon-SVR solved in the dual (pairwise coordinate steps under the
// equality constraint); exposes the primal w as coefficients.
RegressionModel fit_svr_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const SvrOptions& opts = {});

// Univariate OLS on the column with maximal |Pearson correlation| to y
// (ties -> lowest column index).
RegressionModel fit_lr_best_feature(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// PLS1 via NIPALS: per-component weight/score/loading extraction with X and y
// deflation, collapsed to (coefficients, intercept).
RegressionModel fit_plsr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const PlsrOptions& opts = {});

Eigen::VectorXd predict(const RegressionModel& model, const Eigen::MatrixXd& X);

// Scores extracted during the PLSR fit, re-derived from the stored projection
// state on the training data (test support for orthogonality checks).
Eigen::MatrixXd plsr_scores(const RegressionModel& model, const Eigen::MatrixXd& X);

// Self-describing JSON persistence; reloaded models predict bit-identically.
void save_model(const RegressionModel& model, const std::string& path);
RegressionModel load_model(const std::string& path);

}  // namespace soilspec
