#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "soilspec/detail/classifier_models.hpp"

namespace soilspec::detail {

namespace {

double weighted_gini(const double* class_weights, int n_classes, double total) {
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    const double p = class_weights[c] / total;
    sum_sq += p * p;
  }
  return (1.0 - sum_sq) * total;
}

struct BestSplit {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Weighted Gini impurity decrease over all (feature, midpoint) candidates,
// scanned with fixed scratch buffers (this runs inside the grid-search
// parallel region). Ties break toward the lower feature index, then the
// lower threshold.
BestSplit best_split(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                     const Eigen::VectorXd& weights, const std::vector<int>& idx,
                     int n_classes, int min_leaf) {
  BestSplit best;
  const int m = static_cast<int>(idx.size());
  if (m < 2 * min_leaf) return best;

  std::vector<double> total_hist(n_classes, 0.0), left_hist(n_classes), right_hist(n_classes);
  double total_w = 0.0;
  for (int i : idx) {
    total_hist[labels[i]] += weights(i);
    total_w += weights(i);
  }
  if (total_w <= 0.0) return best;
  const double parent_cost = weighted_gini(total_hist.data(), n_classes, total_w);

  std::vector<int> order(idx);
  for (int j = 0; j < X.cols(); ++j) {
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (X(a, j) != X(b, j)) return X(a, j) < X(b, j);
      return a < b;
    });

    std::fill(left_hist.begin(), left_hist.end(), 0.0);
    double left_w = 0.0;
    for (int pos = 0; pos + 1 < m; ++pos) {
      const int i = order[pos];
      left_hist[labels[i]] += weights(i);
      left_w += weights(i);
      const double a = X(i, j);
      const double b = X(order[pos + 1], j);
      if (a == b) continue;
      if (pos + 1 < min_leaf || m - pos - 1 < min_leaf) continue;
      const double right_w = total_w - left_w;
      for (int c = 0; c < n_classes; ++c) right_hist[c] = total_hist[c] - left_hist[c];
      const double child_cost = weighted_gini(left_hist.data(), n_classes, left_w) +
                                weighted_gini(right_hist.data(), n_classes, right_w);
      const double gain = parent_cost - child_cost;
      if (gain <= 1e-12) continue;
      const double threshold = 0.5 * (a + b);
      bool better = false;
      if (best.feature < 0 || gain > best.gain + 1e-15) {
        better = true;
      } else if (std::abs(gain - best.gain) <= 1e-15 &&
                 (j < best.feature || (j == best.feature && threshold < best.threshold))) {
        better = true;
      }
      if (better) best = {j, threshold, gain};
    }
  }
  return best;
}

}  // namespace

TreeModel TreeModel::fit(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                         const Eigen::VectorXd& weights, int n_classes,
                         const TreeOptions& opts) {
  if (X.rows() == 0) throw std::invalid_argument("tree fit: empty training data");
  if (static_cast<int>(labels.size()) != X.rows()) {
    throw std::invalid_argument("tree fit: labels length mismatch");
  }

  TreeModel tree;
  tree.n_classes = n_classes;

  auto leaf_probs = [&](const std::vector<int>& idx) {
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(n_classes);
    double total = 0.0;
    for (int i : idx) {
      hist(labels[i]) += weights(i);
      total += weights(i);
    }
    if (total > 0.0) hist /= total;
    return hist;
  };

  struct Pending {
    int node;
    std::vector<int> idx;
    BestSplit split;
  };
  // Best-first growth: expand the leaf whose best split decreases impurity
  // most; ties go to the earlier-created node.
  auto cmp = [](const Pending& a, const Pending& b) {
    if (a.split.gain != b.split.gain) return a.split.gain < b.split.gain;
    return a.node > b.node;
  };
  std::priority_queue<Pending, std::vector<Pending>, decltype(cmp)> frontier(cmp);

  std::vector<int> root_idx(X.rows());
  std::iota(root_idx.begin(), root_idx.end(), 0);
  tree.nodes.push_back({});
  tree.nodes[0].class_probs = leaf_probs(root_idx);
  frontier.push({0, std::move(root_idx), BestSplit{}});
  {
    Pending& top = const_cast<Pending&>(frontier.top());
    top.split = best_split(X, labels, weights, top.idx, n_classes, opts.min_leaf);
  }

  int splits_done = 0;
  while (!frontier.empty() && splits_done < opts.max_splits) {
    Pending cur = std::move(const_cast<Pending&>(frontier.top()));
    frontier.pop();
    if (cur.split.feature < 0) continue;

    std::vector<int> left_idx, right_idx;
    for (int i : cur.idx) {
      (X(i, cur.split.feature) < cur.split.threshold ? left_idx : right_idx).push_back(i);
    }
    if (left_idx.empty() || right_idx.empty()) continue;

    const int li = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[li].class_probs = leaf_probs(left_idx);
    const int ri = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[ri].class_probs = leaf_probs(right_idx);

    tree.nodes[cur.node].feature = cur.split.feature;
    tree.nodes[cur.node].threshold = cur.split.threshold;
    tree.nodes[cur.node].left = li;
    tree.nodes[cur.node].right = ri;
    ++splits_done;

    const BestSplit ls = best_split(X, labels, weights, left_idx, n_classes, opts.min_leaf);
    const BestSplit rs = best_split(X, labels, weights, right_idx, n_classes, opts.min_leaf);
    frontier.push({li, std::move(left_idx), ls});
    frontier.push({ri, std::move(right_idx), rs});
  }
  return tree;
}

Eigen::VectorXd TreeModel::scores(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int node = 0;
  while (nodes[node].feature >= 0) {
    node = x(nodes[node].feature) < nodes[node].threshold ? nodes[node].left : nodes[node].right;
  }
  return nodes[node].class_probs;
}

int TreeModel::n_leaves() const {
  int leaves = 0;
  for (const auto& n : nodes) leaves += n.feature < 0 ? 1 : 0;
  return leaves;
}

int TreeModel::n_splits() const { return static_cast<int>(nodes.size()) - n_leaves(); }

nlohmann::json TreeModel::to_json() const {
  nlohmann::json j;
  j["type"] = type_tag();
  j["n_classes"] = n_classes;
  nlohmann::json ns = nlohmann::json::array();
  for (const auto& n : nodes) {
    std::vector<double> probs(n.class_probs.data(), n.class_probs.data() + n.class_probs.size());
    ns.push_back({{"feature", n.feature},
                  {"threshold", n.threshold},
                  {"left", n.left},
                  {"right", n.right},
                  {"class_probs", probs}});
  }
  j["nodes"] = std::move(ns);
  return j;
}

std::unique_ptr<TreeModel> TreeModel::from_json(const nlohmann::json& j) {
  auto tree = std::make_unique<TreeModel>();
  tree->n_classes = j.at("n_classes").get<int>();
  for (const auto& jn : j.at("nodes")) {
    Node n;
    n.feature = jn.at("feature").get<int>();
    n.threshold = jn.at("threshold").get<double>();
    n.left = jn.at("left").get<int>();
    n.right = jn.at("right").get<int>();
    const auto probs = jn.at("class_probs").get<std::vector<double>>();
    n.class_probs = Eigen::Map<const Eigen::VectorXd>(probs.data(), static_cast<int>(probs.size()));
    tree->nodes.push_back(std::move(n));
  }
  return tree;
}

}  // namespace soilspec::detail
