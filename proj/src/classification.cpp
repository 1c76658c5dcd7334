#include "soilspec/classification.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "soilspec/detail/classifier_models.hpp"
#include "soilspec/version.hpp"

namespace soilspec {

void ClassScheme::validate() const {
  if (thresholds.empty()) throw std::invalid_argument("class scheme needs at least one threshold");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) {
      throw std::invalid_argument("class scheme thresholds must be strictly increasing");
    }
  }
  if (class_names.size() != thresholds.size() + 1) {
    throw std::invalid_argument("class scheme needs thresholds.size()+1 class names");
  }
}

int ClassScheme::assign(double value) const {
  if (!std::isfinite(value)) throw std::invalid_argument("assign_class: non-finite value");
  // class 0 = (-inf, t1); class i = [t_i, t_{i+1}); last = [t_last, inf)
  int c = 0;
  for (double t : thresholds) {
    if (value >= t) ++c;
    else break;
  }
  return c;
}

int assign_class(const ClassScheme& scheme, double value) { return scheme.assign(value); }

const std::map<std::string, ClassScheme>& ClassScheme::defaults() {
  static const std::map<std::string, ClassScheme> schemes = {
      {"pH", {"pH", {6.0, 7.3}, {"acidity_correction", "none_correction", "alkalinity_correction"}}},
      {"OM", {"OM", {3.0, 5.0}, {"low", "medium", "high"}}},
      {"Ca", {"Ca", {3.0, 6.0}, {"low", "medium", "high"}}},
      {"Mg", {"Mg", {1.5, 5.0}, {"low", "medium", "high"}}},
      {"K", {"K", {0.2, 0.4}, {"low", "medium", "high"}}},
      {"Na", {"Na", {1.0}, {"acceptable", "not_acceptable"}}},
  };
  return schemes;
}

void CostMatrix::validate() const {
  if (costs.rows() != costs.cols() || costs.rows() < 2) {
    throw std::invalid_argument("cost matrix must be square with K >= 2");
  }
  for (int i = 0; i < costs.rows(); ++i) {
    for (int j = 0; j < costs.cols(); ++j) {
      if (i == j) {
        if (costs(i, j) != 0.0) throw std::invalid_argument("cost matrix diagonal must be zero");
      } else if (!(costs(i, j) >= 0.0)) {
        throw std::invalid_argument("cost matrix entries must be non-negative");
      }
    }
  }
}

CostMatrix CostMatrix::uniform(int k) {
  CostMatrix cm;
  cm.costs = Eigen::MatrixXd::Ones(k, k);
  cm.costs.diagonal().setZero();
  return cm;
}

const char* family_name(ClassifierFamily f) {
  switch (f) {
    case ClassifierFamily::Tree: return "tree";
    case ClassifierFamily::Discriminant: return "discriminant";
    case ClassifierFamily::KernelNaiveBayes: return "kernel_nb";
    case ClassifierFamily::Svm: return "svm";
    case ClassifierFamily::Knn: return "knn";
    case ClassifierFamily::Ensemble: return "ensemble";
  }
  return "?";
}

std::string ClassifierConfig::name() const {
  switch (family) {
    case ClassifierFamily::Tree: return "tree_" + std::to_string(tree_max_splits);
    case ClassifierFamily::Discriminant: return discriminant == "quadratic" ? "qda" : "lda";
    case ClassifierFamily::KernelNaiveBayes: return "knb_" + nb_kernel;
    case ClassifierFamily::Svm: return "svm_" + svm_kernel;
    case ClassifierFamily::Knn: return "knn_" + knn_metric;
    case ClassifierFamily::Ensemble: return "ens_" + ensemble;
  }
  return "?";
}

ClassifierConfig ClassifierConfig::parse(const std::string& name) {
  ClassifierConfig c;
  auto starts = [&](const char* prefix) { return name.rfind(prefix, 0) == 0; };
  if (starts("tree_")) {
    c.family = ClassifierFamily::Tree;
    c.tree_max_splits = std::stoi(name.substr(5));
    return c;
  }
  if (name == "lda" || name == "qda") {
    c.family = ClassifierFamily::Discriminant;
    c.discriminant = name == "qda" ? "quadratic" : "linear";
    return c;
  }
  if (starts("knb_")) {
    c.family = ClassifierFamily::KernelNaiveBayes;
    c.nb_kernel = name.substr(4);
    return c;
  }
  if (starts("svm_")) {
    c.family = ClassifierFamily::Svm;
    c.svm_kernel = name.substr(4);
    return c;
  }
  if (starts("knn_")) {
    c.family = ClassifierFamily::Knn;
    c.knn_metric = name.substr(4);
    return c;
  }
  if (starts("ens_")) {
    c.family = ClassifierFamily::Ensemble;
    c.ensemble = name.substr(4);
    return c;
  }
  throw std::invalid_argument("unknown classifier configuration: '" + name + "'");
}

std::vector<ClassifierConfig> ClassifierConfig::all_configurations() {
  std::vector<ClassifierConfig> out;
  for (int splits : {4, 20, 100}) {
    ClassifierConfig c;
    c.family = ClassifierFamily::Tree;
    c.tree_max_splits = splits;
    out.push_back(c);
  }
  for (const char* disc : {"linear", "quadratic"}) {
    ClassifierConfig c;
    c.family = ClassifierFamily::Discriminant;
    c.discriminant = disc;
    out.push_back(c);
  }
  for (const char* k : {"gaussian", "box", "epanechnikov", "triangle"}) {
    ClassifierConfig c;
    c.family = ClassifierFamily::KernelNaiveBayes;
    c.nb_kernel = k;
    out.push_back(c);
  }
  for (const char* k : {"linear", "quadratic", "cubic", "gaussian"}) {
    ClassifierConfig c;
    c.family = ClassifierFamily::Svm;
    c.svm_kernel = k;
    out.push_back(c);
  }
  for (const char* m : {"cityblock", "chebyshev", "euclidean", "minkowski", "hamming", "jaccard"}) {
    ClassifierConfig c;
    c.family = ClassifierFamily::Knn;
    c.knn_metric = m;
    out.push_back(c);
  }
  for (const char* e : {"boosted_trees", "bagged_trees", "subspace_discriminant", "subspace_knn",
                        "rusboosted_trees"}) {
    ClassifierConfig c;
    c.family = ClassifierFamily::Ensemble;
    c.ensemble = e;
    out.push_back(c);
  }
  return out;
}

namespace {

constexpr double kSvmC = 1.0;
constexpr double kSvmTol = 1e-3;
constexpr long kSvmMaxPasses = 2000;
constexpr int kKnnK = 10;

// Per-sample box weights for the SVM: row sums of the cost matrix by true
// class, normalized to mean 1 so the uniform cost reduces to the plain model.
Eigen::VectorXd cost_sample_weights(const CostMatrix& cost, const std::vector<int>& labels) {
  const int n = static_cast<int>(labels.size());
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = cost.costs.row(labels[i]).sum();
  const double mean = w.mean();
  if (mean > 0.0) w /= mean;
  else w.setOnes();
  return w;
}

}  // namespace

TrainedClassifier fit_classifier(const ClassifierConfig& config, const CostMatrix& cost,
                                 const Eigen::MatrixXd& X, const std::vector<int>& labels,
                                 int n_classes, std::uint64_t seed) {
  if (X.rows() == 0) throw std::invalid_argument("fit_classifier: empty training data");
  if (static_cast<int>(labels.size()) != X.rows()) {
    throw std::invalid_argument("fit_classifier: labels length mismatch");
  }
  if (!X.allFinite()) throw std::invalid_argument("fit_classifier: non-finite features");
  cost.validate();
  if (cost.size() != n_classes) {
    throw std::invalid_argument("fit_classifier: cost matrix size must equal n_classes");
  }

  TrainedClassifier clf;
  clf.config = config;
  clf.cost = cost;
  clf.n_classes = n_classes;

  std::set<int> present;
  for (int l : labels) {
    if (l < 0 || l >= n_classes) throw std::invalid_argument("fit_classifier: label out of range");
    present.insert(l);
  }
  // memory/posterior families degrade gracefully to a single class; the
  // discriminants, SVM pairs and ensembles genuinely need two populations
  const bool needs_two = config.family == ClassifierFamily::Discriminant ||
                         config.family == ClassifierFamily::Svm ||
                         config.family == ClassifierFamily::Ensemble;
  if (present.size() < 2 && needs_two) {
    throw std::invalid_argument("fit_classifier: need at least 2 classes in the training labels");
  }
  if (present.size() < 2) {
    clf.warnings.push_back("training labels contain a single class");
  }
  clf.trained_classes.assign(present.begin(), present.end());
  for (int c = 0; c < n_classes; ++c) {
    if (!present.count(c)) {
      clf.warnings.push_back("class " + std::to_string(c) +
                             " has no training samples; it will never be predicted");
    }
  }

  using namespace detail;
  switch (config.family) {
    case ClassifierFamily::Tree: {
      const Eigen::VectorXd w = Eigen::VectorXd::Constant(X.rows(), 1.0 / X.rows());
      clf.model = std::make_shared<TreeModel>(
          TreeModel::fit(X, labels, w, n_classes, TreeOptions{config.tree_max_splits, 1}));
      break;
    }
    case ClassifierFamily::Discriminant: {
      clf.model = std::make_shared<DiscriminantModel>(DiscriminantModel::fit(
          X, labels, n_classes, config.discriminant == "quadratic", &clf.warnings));
      break;
    }
    case ClassifierFamily::KernelNaiveBayes: {
      clf.model = std::make_shared<KernelNaiveBayesModel>(
          KernelNaiveBayesModel::fit(X, labels, n_classes, config.nb_kernel));
      break;
    }
    case ClassifierFamily::Svm: {
      const Eigen::VectorXd w = cost_sample_weights(cost, labels);
      clf.model = std::make_shared<SvmModel>(SvmModel::fit(X, labels, n_classes, config.svm_kernel,
                                                           kSvmC, w, kSvmTol, kSvmMaxPasses));
      break;
    }
    case ClassifierFamily::Knn: {
      clf.model = std::make_shared<KnnModel>(
          KnnModel::fit(X, labels, n_classes, config.knn_metric, config.knn_k));
      break;
    }
    case ClassifierFamily::Ensemble: {
      EnsembleOptions opts;
      opts.variant = config.ensemble;
      opts.members = config.ensemble_members;
      opts.bootstrap = config.ensemble_bootstrap;
      opts.subspace_dims = config.ensemble_subspace_dims;
      opts.knn_k = kKnnK;
      opts.seed = seed;
      clf.model = std::make_shared<EnsembleModel>(
          fit_ensemble(X, labels, n_classes, opts, &clf.warnings));
      break;
    }
  }
  return clf;
}

Eigen::MatrixXd classifier_scores(const TrainedClassifier& clf, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd out(X.rows(), clf.n_classes);
  for (int i = 0; i < X.rows(); ++i) out.row(i) = clf.model->scores(X.row(i)).transpose();
  return out;
}

std::vector<int> predict_class(const TrainedClassifier& clf, const Eigen::MatrixXd& X) {
  if (clf.model == nullptr) throw std::invalid_argument("predict_class: untrained classifier");
  const Eigen::MatrixXd scores = classifier_scores(clf, X);

  auto expected_cost = [&](const Eigen::RowVectorXd& p, int k) {
    double e = 0.0;
    for (int j = 0; j < clf.n_classes; ++j) e += p(j) * clf.cost.costs(j, k);
    return e;
  };

  std::vector<int> preds(X.rows());
  for (int i = 0; i < X.rows(); ++i) {
    const Eigen::RowVectorXd p = scores.row(i);
    int best = -1;
    if (clf.config.family == ClassifierFamily::Svm) {
      // cost shaped the training weights; prediction is the one-vs-one
      // majority, with expected cost breaking vote ties
      double best_votes = -1.0;
      bool tie = false;
      for (int c : clf.trained_classes) {
        if (p(c) > best_votes + 1e-12) {
          best_votes = p(c);
          best = c;
          tie = false;
        } else if (std::abs(p(c) - best_votes) <= 1e-12) {
          tie = true;
        }
      }
      if (tie) {
        double best_cost = std::numeric_limits<double>::infinity();
        for (int c : clf.trained_classes) {
          if (std::abs(p(c) - best_votes) > 1e-12) continue;
          const double e = expected_cost(p, c);
          if (e < best_cost - 1e-15) {
            best_cost = e;
            best = c;
          } else if (best < 0) {
            best = c;
          }
        }
      }
    } else {
      double best_cost = std::numeric_limits<double>::infinity();
      for (int c : clf.trained_classes) {
        const double e = expected_cost(p, c);
        if (e < best_cost - 1e-15) {  // strict improvement; ties keep the lower class
          best_cost = e;
          best = c;
        }
      }
    }
    preds[i] = best;
  }
  return preds;
}

std::unique_ptr<ClassifierModel> classifier_model_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  using namespace detail;
  if (type == "tree") return TreeModel::from_json(j);
  if (type == "discriminant") return DiscriminantModel::from_json(j);
  if (type == "kernel_nb") return KernelNaiveBayesModel::from_json(j);
  if (type == "svm") return SvmModel::from_json(j);
  if (type == "knn") return KnnModel::from_json(j);
  if (type == "ensemble") return EnsembleModel::from_json(j);
  throw std::invalid_argument("unknown classifier model type: " + type);
}

void save_classifier(const TrainedClassifier& clf, const std::string& path) {
  nlohmann::json j;
  j["toolkit"] = "soilspec";
  j["toolkit_version"] = kVersion;
  j["config"] = clf.config.name();
  j["knn_k"] = clf.config.knn_k;
  j["ensemble_members"] = clf.config.ensemble_members;
  j["ensemble_bootstrap"] = clf.config.ensemble_bootstrap;
  j["ensemble_subspace_dims"] = clf.config.ensemble_subspace_dims;
  j["n_classes"] = clf.n_classes;
  j["trained_classes"] = clf.trained_classes;
  j["cost"] = detail::matrix_to_json(clf.cost.costs);
  j["warnings"] = clf.warnings;
  j["model"] = clf.model->to_json();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
}

TrainedClassifier load_classifier(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open classifier file: " + path);
  nlohmann::json j;
  in >> j;
  TrainedClassifier clf;
  clf.config = ClassifierConfig::parse(j.at("config").get<std::string>());
  clf.config.knn_k = j.value("knn_k", 10);
  clf.config.ensemble_members = j.value("ensemble_members", 30);
  clf.config.ensemble_bootstrap = j.value("ensemble_bootstrap", true);
  clf.config.ensemble_subspace_dims = j.value("ensemble_subspace_dims", -1);
  clf.n_classes = j.at("n_classes").get<int>();
  clf.trained_classes = j.at("trained_classes").get<std::vector<int>>();
  const auto& cost = j.at("cost");
  clf.cost.costs = detail::matrix_from_json(cost);
  clf.warnings = j.value("warnings", std::vector<std::string>{});
  clf.model = classifier_model_from_json(j.at("model"));
  return clf;
}

}  // namespace soilspec
