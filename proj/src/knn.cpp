#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "soilspec/detail/classifier_models.hpp"

namespace soilspec::detail {

KnnModel KnnModel::fit(const Eigen::MatrixXd& X, const std::vector<int>& labels, int n_classes,
                       const std::string& metric, int k) {
  static const char* known[] = {"cityblock", "chebyshev", "euclidean",
                                "minkowski", "hamming",   "jaccard"};
  if (std::find_if(std::begin(known), std::end(known),
                   [&](const char* m) { return metric == m; }) == std::end(known)) {
    throw std::invalid_argument("unknown knn metric: " + metric);
  }
  KnnModel m;
  m.metric = metric;
  m.k = std::min<int>(k, static_cast<int>(X.rows()));
  m.train_x = X;
  m.train_labels = labels;
  m.n_classes = n_classes;
  return m;
}

// Hamming and Jaccard are set metrics; features are binarized at zero (the
// pipeline feeds standardized columns, so zero is the column mean).
double KnnModel::distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                          const Eigen::Ref<const Eigen::RowVectorXd>& b) const {
  const int d = static_cast<int>(a.size());
  if (metric == "euclidean") return (a - b).norm();
  if (metric == "cityblock") return (a - b).cwiseAbs().sum();
  if (metric == "chebyshev") return (a - b).cwiseAbs().maxCoeff();
  if (metric == "minkowski") {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += std::pow(std::abs(a(j) - b(j)), minkowski_p);
    return std::pow(s, 1.0 / minkowski_p);
  }
  if (metric == "hamming") {
    int diff = 0;
    for (int j = 0; j < d; ++j) diff += (a(j) > 0.0) != (b(j) > 0.0);
    return static_cast<double>(diff) / d;
  }
  // jaccard: 1 - |intersection| / |union| over the positive-feature sets
  int inter = 0, uni = 0;
  for (int j = 0; j < d; ++j) {
    const bool pa = a(j) > 0.0, pb = b(j) > 0.0;
    inter += pa && pb;
    uni += pa || pb;
  }
  return uni == 0 ? 0.0 : 1.0 - static_cast<double>(inter) / uni;
}

Eigen::VectorXd KnnModel::scores(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  const int n = static_cast<int>(train_x.rows());
  std::vector<std::pair<double, int>> dist(n);
  for (int i = 0; i < n; ++i) dist[i] = {distance(x, train_x.row(i)), i};
  const int kk = std::min(k, n);
  // distance ties resolve by training index, keeping votes deterministic
  std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());

  Eigen::VectorXd votes = Eigen::VectorXd::Zero(n_classes);
  for (int i = 0; i < kk; ++i) votes(train_labels[dist[i].second]) += 1.0;
  votes /= kk;
  return votes;
}

nlohmann::json KnnModel::to_json() const {
  nlohmann::json j;
  j["type"] = type_tag();
  j["metric"] = metric;
  j["minkowski_p"] = minkowski_p;
  j["k"] = k;
  j["n_classes"] = n_classes;
  j["train_labels"] = train_labels;
  j["train_x"] = matrix_to_json(train_x);
  return j;
}

std::unique_ptr<KnnModel> KnnModel::from_json(const nlohmann::json& j) {
  auto m = std::make_unique<KnnModel>();
  m->metric = j.at("metric").get<std::string>();
  m->minkowski_p = j.at("minkowski_p").get<double>();
  m->k = j.at("k").get<int>();
  m->n_classes = j.at("n_classes").get<int>();
  m->train_labels = j.at("train_labels").get<std::vector<int>>();
  m->train_x = matrix_from_json(j.at("train_x"));
  return m;
}

}  // namespace soilspec::detail
