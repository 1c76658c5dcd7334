#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "soilspec/detail/classifier_models.hpp"
#include "soilspec/rng.hpp"

namespace soilspec::detail {

namespace {

int hard_predict(const ClassifierModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const Eigen::VectorXd s = model.scores(x);
  int best = 0;
  for (int c = 1; c < s.size(); ++c) {
    if (s(c) > s(best)) best = c;
  }
  return best;
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& X, const std::vector<int>& cols) {
  Eigen::MatrixXd out(X.rows(), static_cast<int>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<int>(j)) = X.col(cols[j]);
  return out;
}

int count_present_classes(const std::vector<int>& labels, int n_classes) {
  std::vector<int> counts(n_classes, 0);
  for (int l : labels) ++counts[l];
  int present = 0;
  for (int c : counts) present += c > 0 ? 1 : 0;
  return present;
}

// SAMME boosting loop shared by boosted_trees and rusboosted_trees; the
// sampler picks the training rows for each round (identity for plain
// boosting, class-balanced undersampling for RUSBoost).
template <typename Sampler>
void fit_samme(EnsembleModel& ens, const Eigen::MatrixXd& X, const std::vector<int>& labels,
               int n_classes, const EnsembleOptions& opts, Sampler&& sample_rows,
               std::vector<std::string>* warnings) {
  const int n = static_cast<int>(X.rows());
  const int k_present = count_present_classes(labels, n_classes);
  Eigen::VectorXd boost_w = Eigen::VectorXd::Constant(n, 1.0 / n);

  for (int round = 0; round < opts.members; ++round) {
    const std::vector<int> rows = sample_rows(round);
    Eigen::MatrixXd Xr(static_cast<int>(rows.size()), X.cols());
    std::vector<int> yr(rows.size());
    Eigen::VectorXd wr(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Xr.row(static_cast<int>(i)) = X.row(rows[i]);
      yr[i] = labels[rows[i]];
      wr(static_cast<int>(i)) = boost_w(rows[i]);
    }
    if (wr.sum() <= 0.0) break;
    wr /= wr.sum();

    auto tree = std::make_unique<TreeModel>(
        TreeModel::fit(Xr, yr, wr, n_classes, TreeOptions{opts.tree_max_splits, 1}));

    double err = 0.0;
    std::vector<int> preds(n);
    for (int i = 0; i < n; ++i) {
      preds[i] = hard_predict(*tree, X.row(i));
      if (preds[i] != labels[i]) err += boost_w(i);
    }
    err /= boost_w.sum();

    if (err >= 1.0 - 1.0 / k_present) {
      if (ens.members.empty()) {
        // keep one member so the ensemble still predicts; weight it minimally
        ens.members.push_back({std::move(tree), 1e-10, {}});
        if (warnings) warnings->push_back("boosting: first member no better than chance");
      }
      break;
    }
    const double clamped = std::min(std::max(err, 1e-12), 1.0 - 1e-12);
    const double alpha = std::log((1.0 - clamped) / clamped) + std::log(k_present - 1.0);
    ens.members.push_back({std::move(tree), alpha, {}});
    if (err <= 0.0) break;  // perfect member

    for (int i = 0; i < n; ++i) {
      if (preds[i] != labels[i]) boost_w(i) *= std::exp(alpha);
    }
    boost_w /= boost_w.sum();
  }
}

}  // namespace

EnsembleModel fit_ensemble(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                           int n_classes, const EnsembleOptions& opts,
                           std::vector<std::string>* warnings) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (n == 0) throw std::invalid_argument("ensemble fit: empty training data");

  EnsembleModel ens;
  ens.variant = opts.variant;
  ens.n_classes = n_classes;
  Rng rng(opts.seed);

  if (opts.variant == "boosted_trees") {
    fit_samme(ens, X, labels, n_classes, opts,
              [&](int) {
                std::vector<int> rows(n);
                for (int i = 0; i < n; ++i) rows[i] = i;
                return rows;
              },
              warnings);
  } else if (opts.variant == "rusboosted_trees") {
    std::vector<std::vector<int>> by_class(n_classes);
    for (int i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
    std::size_t n_min = static_cast<std::size_t>(n);
    for (const auto& members : by_class) {
      if (!members.empty()) n_min = std::min(n_min, members.size());
    }
    fit_samme(ens, X, labels, n_classes, opts,
              [&](int) {
                // uniform random undersampling of every class to the minority size
                std::vector<int> rows;
                for (const auto& members : by_class) {
                  if (members.empty()) continue;
                  std::vector<int> shuffled(members);
                  rng.shuffle(shuffled);
                  shuffled.resize(n_min);
                  std::sort(shuffled.begin(), shuffled.end());
                  rows.insert(rows.end(), shuffled.begin(), shuffled.end());
                }
                return rows;
              },
              warnings);
  } else if (opts.variant == "bagged_trees") {
    const Eigen::VectorXd unit_w = Eigen::VectorXd::Constant(n, 1.0 / n);
    // effectively unbounded depth: n-1 splits separate every distinct point
    const TreeOptions topts{std::max(1, n - 1), 1};
    for (int b = 0; b < opts.members; ++b) {
      std::vector<int> rows(n);
      if (opts.bootstrap) {
        for (int i = 0; i < n; ++i) rows[i] = static_cast<int>(rng.uniform_int(0, n - 1));
        std::sort(rows.begin(), rows.end());
      } else {
        for (int i = 0; i < n; ++i) rows[i] = i;
      }
      Eigen::MatrixXd Xr(n, d);
      std::vector<int> yr(n);
      for (int i = 0; i < n; ++i) {
        Xr.row(i) = X.row(rows[i]);
        yr[i] = labels[rows[i]];
      }
      auto tree = std::make_unique<TreeModel>(TreeModel::fit(Xr, yr, unit_w, n_classes, topts));
      ens.members.push_back({std::move(tree), 1.0, {}});
    }
  } else if (opts.variant == "subspace_discriminant" || opts.variant == "subspace_knn") {
    const int dims = opts.subspace_dims > 0
                         ? std::min(opts.subspace_dims, d)
                         : std::max(1, static_cast<int>(std::ceil(std::sqrt(d))));
    for (int b = 0; b < opts.members; ++b) {
      std::vector<int> cols = rng.sample_without_replacement(d, dims);
      std::sort(cols.begin(), cols.end());
      const Eigen::MatrixXd sub = take_columns(X, cols);
      std::unique_ptr<ClassifierModel> member;
      if (opts.variant == "subspace_discriminant") {
        member = std::make_unique<DiscriminantModel>(
            DiscriminantModel::fit(sub, labels, n_classes, /*quadratic=*/false, warnings));
      } else {
        member = std::make_unique<KnnModel>(
            KnnModel::fit(sub, labels, n_classes, "euclidean", opts.knn_k));
      }
      ens.members.push_back({std::move(member), 1.0, cols});
    }
  } else {
    throw std::invalid_argument("unknown ensemble variant: " + opts.variant);
  }

  if (ens.members.empty()) throw std::runtime_error("ensemble fit produced no members");
  return ens;
}

Eigen::VectorXd EnsembleModel::scores(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(n_classes);
  double total = 0.0;
  Eigen::RowVectorXd sub;
  for (const auto& member : members) {
    int pred;
    if (member.feature_subset.empty()) {
      pred = hard_predict(*member.model, x);
    } else {
      sub.resize(static_cast<int>(member.feature_subset.size()));
      for (std::size_t j = 0; j < member.feature_subset.size(); ++j) {
        sub(static_cast<int>(j)) = x(member.feature_subset[j]);
      }
      pred = hard_predict(*member.model, sub);
    }
    votes(pred) += member.weight;
    total += member.weight;
  }
  if (total > 0.0) votes /= total;
  return votes;
}

nlohmann::json EnsembleModel::to_json() const {
  nlohmann::json j;
  j["type"] = type_tag();
  j["variant"] = variant;
  j["n_classes"] = n_classes;
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& member : members) {
    ms.push_back({{"model", member.model->to_json()},
                  {"weight", member.weight},
                  {"feature_subset", member.feature_subset}});
  }
  j["members"] = std::move(ms);
  return j;
}

std::unique_ptr<EnsembleModel> EnsembleModel::from_json(const nlohmann::json& j) {
  auto ens = std::make_unique<EnsembleModel>();
  ens->variant = j.at("variant").get<std::string>();
  ens->n_classes = j.at("n_classes").get<int>();
  for (const auto& mj : j.at("members")) {
    Member m;
    m.model = classifier_model_from_json(mj.at("model"));
    m.weight = mj.at("weight").get<double>();
    m.feature_subset = mj.at("feature_subset").get<std::vector<int>>();
    ens->members.push_back(std::move(m));
  }
  return ens;
}

}  // namespace soilspec::detail
