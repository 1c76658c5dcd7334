#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace soilspec {

// Family-specific trained state. scores() returns a length-K vector of
// posterior probabilities (sums to 1 over trained classes) or vote fractions,
// with zeros for classes absent at training time.
class ClassifierModel {
 public:
  virtual ~ClassifierModel() = default;
  virtual Eigen::VectorXd scores(const Eigen::Ref<const Eigen::RowVectorXd>& x) const = 0;
  virtual nlohmann::json to_json() const = 0;
  virtual const char* type_tag() const = 0;
};

std::unique_ptr<ClassifierModel> classifier_model_from_json(const nlohmann::json& j);

namespace detail {

// Dense matrix <-> nested JSON arrays (row nesting, element-wise copies).
inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows[0].size()) : 0;
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

// ---- CART tree -------------------------------------------------------------

struct TreeOptions {
  int max_splits = 20;
  int min_leaf = 1;
};

class TreeModel final : public ClassifierModel {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    Eigen::VectorXd class_probs;  // leaf posterior over K classes
  };

  static TreeModel fit(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                       const Eigen::VectorXd& weights, int n_classes, const TreeOptions& opts);

  Eigen::VectorXd scores(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override;
  nlohmann::json to_json() const override;
  const char* type_tag() const override { return "tree"; }
  static std::unique_ptr<TreeModel> from_json(const nlohmann::json& j);

  int n_leaves() const;
  int n_splits() const;

  std::vector<Node> nodes;
  int n_classes = 0;
};

// ---- discriminant analysis --------------------------------------------------

class DiscriminantModel final : public ClassifierModel {
 public:
  static DiscriminantModel fit(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                               int n_classes, bool quadratic,
                               std::vector<std::string>* warnings);

  Eigen::VectorXd scores(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override;
  nlohmann::json to_json() const override;
  const char* type_tag() const override { return "discriminant"; }
  static std::unique_ptr<DiscriminantModel> from_json(const nlohmann::json& j);

  bool quadratic = false;
  std::vector<int> classes;            // trained class ids
  Eigen::MatrixXd means;               // one row per trained class
  Eigen::VectorXd log_priors;          // per trained class
  std::vector<Eigen::MatrixXd> cov_inv;  // pooled (size 1) or per class
  std::vector<double> log_det;           // matching cov_inv
  int n_classes = 0;
};

// ---- kernel naive Bayes ------------------------------------------------------

class KernelNaiveBayesModel final : public ClassifierModel {
 public:
  static KernelNaiveBayesModel fit(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                                   int n_classes, const std::string& kernel);

  Eigen::VectorXd scores(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override;
  nlohmann::json to_json() const override;
  const char* type_tag() const override { return "kernel_nb"; }
  static std::unique_ptr<KernelNaiveBayesModel> from_json(const nlohmann::json& j);

  std::string kernel = "gaussian";
  std::vector<int> classes;
  Eigen::VectorXd log_priors;
  std::vector<Eigen::MatrixXd> class_data;   // per trained class: n_c x d
  std::vector<Eigen::VectorXd> bandwidths;   // per trained class: d (Silverman)
  int n_classes = 0;
};

// ---- SVM (one-vs-one) --------------------------------------------------------

class SvmModel final : public ClassifierModel {
 public:
  struct PairModel {
    int class_a = 0;  // votes positive decision
    int class_b = 0;
    Eigen::MatrixXd support_vectors;
    Eigen::VectorXd coef;  // alpha_i * y_i per support vector
    double bias = 0.0;
  };

  static SvmModel fit(const Eigen::MatrixXd& X, const std::vector<int>& labels, int n_classes,
                      const std::string& kernel, double C, const Eigen::VectorXd& sample_weights,
                      double tol, long max_passes);

  Eigen::VectorXd scores(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override;
  nlohmann::json to_json() const override;
  const char* type_tag() const override { return "svm"; }
  static std::unique_ptr<SvmModel> from_json(const nlohmann::json& j);

  double kernel_value(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                      const Eigen::Ref<const Eigen::RowVectorXd>& b) const;

  std::string kernel = "linear";
  double gamma = 0.0;  // gaussian kernel coefficient, 1/n_features
  std::vector<int> classes;
  std::vector<PairModel> pairs;
  int n_classes = 0;
};

// ---- k nearest neighbors -------------------------------------------------------

class KnnModel final : public ClassifierModel {
 public:
  static KnnModel fit(const Eigen::MatrixXd& X, const std::vector<int>& labels, int n_classes,
                      const std::string& metric, int k);

  Eigen::VectorXd scores(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override;
  nlohmann::json to_json() const override;
  const char* type_tag() const override { return "knn"; }
  static std::unique_ptr<KnnModel> from_json(const nlohmann::json& j);

  double distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                  const Eigen::Ref<const Eigen::RowVectorXd>& b) const;

  std::string metric = "euclidean";
  double minkowski_p = 3.0;
  int k = 10;
  Eigen::MatrixXd train_x;
  std::vector<int> train_labels;
  int n_classes = 0;
};

// ---- ensembles -------------------------------------------------------------------

class EnsembleModel final : public ClassifierModel {
 public:
  struct Member {
    std::unique_ptr<ClassifierModel> model;
    double weight = 1.0;
    std::vector<int> feature_subset;  // empty = all features
  };

  Eigen::VectorXd scores(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override;
  nlohmann::json to_json() const override;
  const char* type_tag() const override { return "ensemble"; }
  static std::unique_ptr<EnsembleModel> from_json(const nlohmann::json& j);

  std::string variant;  // boosted_trees, bagged_trees, subspace_*, rusboosted_trees
  std::vector<Member> members;
  int n_classes = 0;
};

struct EnsembleOptions {
  std::string variant;
  int members = 30;
  bool bootstrap = true;
  int subspace_dims = -1;  // -1 = ceil(sqrt(d))
  int tree_max_splits = 20;
  int knn_k = 10;
  std::uint64_t seed = 0;
};

EnsembleModel fit_ensemble(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                           int n_classes, const EnsembleOptions& opts,
                           std::vector<std::string>* warnings);

}  // namespace detail
}  // namespace soilspec
