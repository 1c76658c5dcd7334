#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "soilspec/classification.hpp"
#include "soilspec/regression.hpp"

namespace soilspec {

// rows = true class, columns = predicted; counts aggregate all evaluated
// samples (held-out folds are summed into one matrix).
struct ConfusionMatrix {
  Eigen::MatrixXi counts;

  int n_classes() const { return static_cast<int>(counts.rows()); }
  int total() const { return counts.sum(); }
  static ConfusionMatrix zeros(int k);
  void add(int true_class, int predicted_class) { counts(true_class, predicted_class) += 1; }
};

struct RegressionMetrics {
  std::optional<double> pearson_rho;  // missing when either side is constant
  std::optional<double> r_squared;    // missing when SS_tot = 0
  double mse = 0.0;
};

RegressionMetrics regression_metrics(const Eigen::VectorXd& y_true,
                                     const Eigen::VectorXd& y_pred);

// Matthews correlation; binary closed form for K=2, Gorodkin R_K for K>2,
// zero denominator -> 0.
double mcc(const ConfusionMatrix& cm);

struct ClassMetrics {
  std::optional<double> tpr, tnr, ppv, npv, f1;  // one-vs-rest; 0/0 -> missing
};

struct ClassificationMetrics {
  std::vector<ClassMetrics> per_class;
  ClassMetrics macro;  // mean over classes where defined
  double accuracy = 0.0;
  double mcc = 0.0;
};

ClassificationMetrics classification_metrics(const ConfusionMatrix& cm);

// ---- cross-validation -------------------------------------------------------

// Hyperparameter bundle naming one of the five regressors.
struct RegressorSpec {
  RegressorKind kind = RegressorKind::Ols;
  LassoOptions lasso;
  SvrOptions svr;
  PlsrOptions plsr;
};

RegressionModel fit_regressor(const RegressorSpec& spec, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y);

struct CvRegressionResult {
  std::vector<RegressionMetrics> per_fold;
  std::optional<double> median_rho;
  std::optional<double> rho_stddev;  // deviation across folds with defined rho
  double median_mse = 0.0;
  std::optional<double> median_r2;
};

// Plain (unstratified) folds, deterministic in seed.
CvRegressionResult kfold_cv_regression(const RegressorSpec& spec, const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y, int folds, std::uint64_t seed);

struct CvClassificationResult {
  ConfusionMatrix aggregate;
  ClassificationMetrics metrics;
  std::vector<std::string> warnings;
};

// Stratified folds (plain with a warning if a class is smaller than folds);
// held-out predictions aggregate into a single confusion matrix.
// A precomputed fold assignment can be supplied so every grid-search point
// sees identical folds.
CvClassificationResult kfold_cv_classification(const ClassifierConfig& config,
                                               const CostMatrix& cost, const Eigen::MatrixXd& X,
                                               const std::vector<int>& labels, int n_classes,
                                               int folds, std::uint64_t seed,
                                               const std::vector<int>* fixed_folds = nullptr);

// ---- misclassification-cost grid search ----------------------------------------

struct GridPointResult {
  std::vector<double> cost_vector;  // off-diagonal cells, row-major (true, pred)
  ConfusionMatrix confusion;
  double mcc = 0.0;
};

struct GridSearchSpec {
  // one value set per off-diagonal cell, row-major; K*(K-1) cells
  std::vector<std::vector<double>> cell_values;

  std::uint64_t n_points() const;
  std::vector<double> point(std::uint64_t index) const;  // mixed-radix decode
  static GridSearchSpec uniform(int n_classes, const std::vector<double>& values);
};

struct GridSearchOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string checkpoint_path;        // empty = no checkpointing
  int checkpoint_interval = 1000;     // points per checkpoint chunk
  bool keep_per_point = true;
};

struct GridSearchResult {
  CostMatrix best_cost;
  double best_mcc = 0.0;
  std::uint64_t best_index = 0;
  std::vector<GridPointResult> per_point;
  GridSearchSpec grid_spec;
  std::uint64_t points_evaluated = 0;
  std::uint64_t points_resumed = 0;
  std::vector<std::string> warnings;
};

// Exhaustive search over the cost grid with identical fold assignment at
// every point. Ties on MCC go to the lexicographically smallest cost vector.
// Deterministic for any jobs value; the checkpoint file makes long runs
// resumable.
GridSearchResult cost_grid_search(const ClassifierConfig& config, const Eigen::MatrixXd& X,
                                  const std::vector<int>& labels, int n_classes,
                                  const GridSearchSpec& grid, const GridSearchOptions& opts);

CostMatrix cost_matrix_from_vector(int n_classes, const std::vector<double>& cells);

// ---- regressor comparison -------------------------------------------------------

struct RegressorReport {
  RegressorKind kind;
  RegressionMetrics test_metrics;
  // percentile bootstrap over test-pair resampling (1000 resamples)
  std::optional<double> rho_ci_low, rho_ci_high;
  std::optional<double> r2_ci_low, r2_ci_high;
  double mse_ci_low = 0.0, mse_ci_high = 0.0;
  Eigen::VectorXd predictions;
};

struct CandidateCvSummary {
  RegressorKind kind;
  CvRegressionResult cv;
};

struct RegressorComparison {
  std::string status;  // "selected" or "not_suitable"
  RegressorKind selected = RegressorKind::Ols;
  std::vector<CandidateCvSummary> candidate_cv;
  std::vector<RegressorReport> reports;  // selected + LR-bf + PLSR when gated in
  double gate_threshold = 0.6;
};

struct CompareOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  double gate_rho = 0.6;  // proceed only when best median CV rho exceeds this
  int bootstrap_resamples = 1000;
  std::vector<RegressorSpec> candidates;  // default: OLS, SVR, LASSO
  PlsrOptions plsr;
};

// CV model selection on the training split gated on median rho, then test-set
// comparison of the winner against LR-bf and PLSR with bootstrap intervals.
RegressorComparison compare_regressors(const Eigen::MatrixXd& X_train,
                                       const Eigen::VectorXd& y_train,
                                       const Eigen::MatrixXd& X_test,
                                       const Eigen::VectorXd& y_test,
                                       const CompareOptions& opts = {});

}  // namespace soilspec
