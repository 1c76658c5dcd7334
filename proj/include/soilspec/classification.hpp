#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace soilspec {

class ClassifierModel;  // internal family state, see detail/classifier_models.hpp

// Property-specific thresholds partitioning the real line into classes:
// class 0 = (-inf, t1), class i = [t_i, t_{i+1}), last = [t_last, inf).
struct ClassScheme {
  std::string property;
  std::vector<double> thresholds;
  std::vector<std::string> class_names;

  int n_classes() const { return static_cast<int>(thresholds.size()) + 1; }
  void validate() const;
  int assign(double value) const;

  // Fertility-guideline defaults for the six supported properties; all
  // overridable through the run config.
  static const std::map<std::string, ClassScheme>& defaults();
};

int assign_class(const ClassScheme& scheme, double value);

struct CostMatrix {
  Eigen::MatrixXd costs;  // K x K, zero diagonal, rows = true class

  int size() const { return static_cast<int>(costs.rows()); }
  void validate() const;
  static CostMatrix uniform(int k);  // all off-diagonal penalties 1
};

enum class ClassifierFamily { Tree, Discriminant, KernelNaiveBayes, Svm, Knn, Ensemble };

const char* family_name(ClassifierFamily f);

// One of the 24 supported configurations, plus a few knobs used by tests
// (member count / sampling overrides for the ensembles).
struct ClassifierConfig {
  ClassifierFamily family = ClassifierFamily::Tree;

  int tree_max_splits = 20;             // TREE: {4, 20, 100}
  std::string discriminant = "linear";  // DISCRIMINANT: linear | quadratic
  std::string nb_kernel = "gaussian";   // KERNEL_NB: gaussian|box|epanechnikov|triangle
  std::string svm_kernel = "linear";    // SVM: linear|quadratic|cubic|gaussian
  std::string knn_metric = "euclidean"; // KNN: cityblock|chebyshev|euclidean|minkowski|hamming|jaccard
  int knn_k = 10;

  // ENSEMBLE: boosted_trees|bagged_trees|subspace_discriminant|subspace_knn|rusboosted_trees
  std::string ensemble = "bagged_trees";
  int ensemble_members = 30;
  bool ensemble_bootstrap = true;   // bagged only; tests disable it
  int ensemble_subspace_dims = -1;  // -1 = ceil(sqrt(d))

  std::string name() const;  // tree_4, lda, qda, knb_gaussian, svm_cubic, knn_minkowski, ...
  static ClassifierConfig parse(const std::string& name);
  static std::vector<ClassifierConfig> all_configurations();  // the 24
};

struct TrainedClassifier {
  ClassifierConfig config;
  CostMatrix cost;
  int n_classes = 0;
  std::vector<int> trained_classes;  // classes present in training, ascending
  std::shared_ptr<const ClassifierModel> model;
  std::vector<std::string> warnings;
};

// Trains one configuration. Cost enters probabilistic families through the
// expected-cost prediction rule and the SVM through per-sample box weights
// (both reduce to the plain model under uniform cost). seed drives the
// ensemble resampling only.
TrainedClassifier fit_classifier(const ClassifierConfig& config, const CostMatrix& cost,
                                 const Eigen::MatrixXd& X, const std::vector<int>& labels,
                                 int n_classes, std::uint64_t seed = 0);

// Per-row class scores: posteriors for probabilistic families, (weighted)
// vote fractions for SVM and the ensembles. Columns span all n_classes.
Eigen::MatrixXd classifier_scores(const TrainedClassifier& clf, const Eigen::MatrixXd& X);

// Deterministic prediction; ties break toward the lower class index.
std::vector<int> predict_class(const TrainedClassifier& clf, const Eigen::MatrixXd& X);

void save_classifier(const TrainedClassifier& clf, const std::string& path);
TrainedClassifier load_classifier(const std::string& path);

}  // namespace soilspec
