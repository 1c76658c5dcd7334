#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "soilspec/detail/classifier_models.hpp"

namespace soilspec::detail {

namespace {

// Cholesky with escalating diagonal regularization (1e-6 * trace/d steps)
// for ill-conditioned covariances.
std::pair<Eigen::MatrixXd, double> robust_inverse(Eigen::MatrixXd cov) {
  const int d = static_cast<int>(cov.rows());
  const double base = std::max(cov.trace() / d, 1e-12);
  double reg = 1e-6 * base;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
      const Eigen::MatrixXd L = llt.matrixL();
      double log_det = 0.0;
      bool ok = true;
      for (int i = 0; i < d; ++i) {
        if (L(i, i) <= 0.0 || !std::isfinite(L(i, i))) {
          ok = false;
          break;
        }
        log_det += 2.0 * std::log(L(i, i));
      }
      if (ok) return {llt.solve(Eigen::MatrixXd::Identity(d, d)), log_det};
    }
    cov.diagonal().array() += reg;
    reg *= 10.0;
  }
  throw std::runtime_error("discriminant fit: covariance not invertible after regularization");
}

}  // namespace

DiscriminantModel DiscriminantModel::fit(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                                         int n_classes, bool quadratic,
                                         std::vector<std::string>* warnings) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());

  DiscriminantModel m;
  m.quadratic = quadratic;
  m.n_classes = n_classes;

  std::vector<std::vector<int>> by_class(n_classes);
  for (int i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
  for (int c = 0; c < n_classes; ++c) {
    if (!by_class[c].empty()) m.classes.push_back(c);
    else if (warnings) {
      warnings->push_back("discriminant: class " + std::to_string(c) +
                          " has no training samples and will never be predicted");
    }
  }
  const int kc = static_cast<int>(m.classes.size());
  if (kc < 2) throw std::invalid_argument("discriminant fit: need at least 2 populated classes");

  m.means.resize(kc, d);
  m.log_priors.resize(kc);
  std::vector<Eigen::MatrixXd> scatter(kc);
  for (int ci = 0; ci < kc; ++ci) {
    const auto& idx = by_class[m.classes[ci]];
    Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(d);
    for (int i : idx) mu += X.row(i);
    mu /= static_cast<double>(idx.size());
    m.means.row(ci) = mu;
    m.log_priors(ci) = std::log(static_cast<double>(idx.size()) / n);
    scatter[ci] = Eigen::MatrixXd::Zero(d, d);
    for (int i : idx) {
      const Eigen::RowVectorXd dev = X.row(i) - mu;
      scatter[ci].noalias() += dev.transpose() * dev;
    }
  }

  if (quadratic) {
    for (int ci = 0; ci < kc; ++ci) {
      const double denom = std::max<double>(1.0, by_class[m.classes[ci]].size() - 1);
      auto [inv, ld] = robust_inverse(scatter[ci] / denom);
      m.cov_inv.push_back(std::move(inv));
      m.log_det.push_back(ld);
    }
  } else {
    Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(d, d);
    for (const auto& s : scatter) pooled += s;
    pooled /= std::max(1, n - kc);
    auto [inv, ld] = robust_inverse(pooled);
    m.cov_inv.push_back(std::move(inv));
    m.log_det.push_back(ld);
  }
  return m;
}

Eigen::VectorXd DiscriminantModel::scores(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  const int kc = static_cast<int>(classes.size());
  Eigen::VectorXd log_post(kc);
  for (int ci = 0; ci < kc; ++ci) {
    const Eigen::RowVectorXd dev = x - means.row(ci);
    const Eigen::MatrixXd& inv = quadratic ? cov_inv[ci] : cov_inv[0];
    const double ld = quadratic ? log_det[ci] : log_det[0];
    log_post(ci) = -0.5 * (dev * inv).dot(dev) - 0.5 * ld + log_priors(ci);
  }
  // softmax over populated classes
  const double mx = log_post.maxCoeff();
  Eigen::VectorXd p = (log_post.array() - mx).exp();
  p /= p.sum();

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_classes);
  for (int ci = 0; ci < kc; ++ci) out(classes[ci]) = p(ci);
  return out;
}

nlohmann::json DiscriminantModel::to_json() const {
  nlohmann::json j;
  j["type"] = type_tag();
  j["quadratic"] = quadratic;
  j["n_classes"] = n_classes;
  j["classes"] = classes;
  j["means"] = matrix_to_json(means);
  std::vector<double> pri(log_priors.data(), log_priors.data() + log_priors.size());
  j["log_priors"] = pri;
  nlohmann::json covs = nlohmann::json::array();
  for (const auto& inv : cov_inv) covs.push_back(matrix_to_json(inv));
  j["cov_inv"] = std::move(covs);
  j["log_det"] = log_det;
  return j;
}

std::unique_ptr<DiscriminantModel> DiscriminantModel::from_json(const nlohmann::json& j) {
  auto m = std::make_unique<DiscriminantModel>();
  m->quadratic = j.at("quadratic").get<bool>();
  m->n_classes = j.at("n_classes").get<int>();
  m->classes = j.at("classes").get<std::vector<int>>();
  m->means = matrix_from_json(j.at("means"));
  const auto pri = j.at("log_priors").get<std::vector<double>>();
  m->log_priors = Eigen::Map<const Eigen::VectorXd>(pri.data(), static_cast<int>(pri.size()));
  for (const auto& rows : j.at("cov_inv")) m->cov_inv.push_back(matrix_from_json(rows));
  m->log_det = j.at("log_det").get<std::vector<double>>();
  return m;
}

}  // namespace soilspec::detail
