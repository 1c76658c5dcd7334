#include <cmath>
#include <stdexcept>

#include "soilspec/detail/classifier_models.hpp"
#include "soilspec/detail/smo.hpp"

namespace soilspec::detail {

double SvmModel::kernel_value(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                              const Eigen::Ref<const Eigen::RowVectorXd>& b) const {
  if (kernel == "linear") return a.dot(b);
  if (kernel == "quadratic") {
    const double v = a.dot(b) + 1.0;
    return v * v;
  }
  if (kernel == "cubic") {
    const double v = a.dot(b) + 1.0;
    return v * v * v;
  }
  if (kernel == "gaussian") return std::exp(-gamma * (a - b).squaredNorm());
  throw std::invalid_argument("unknown svm kernel: " + kernel);
}

SvmModel SvmModel::fit(const Eigen::MatrixXd& X, const std::vector<int>& labels, int n_classes,
                       const std::string& kernel, double C, const Eigen::VectorXd& sample_weights,
                       double tol, long max_passes) {
  SvmModel m;
  m.kernel = kernel;
  m.n_classes = n_classes;
  m.gamma = X.cols() > 0 ? 1.0 / static_cast<double>(X.cols()) : 1.0;
  m.kernel_value(Eigen::RowVectorXd::Zero(X.cols()), Eigen::RowVectorXd::Zero(X.cols()));

  std::vector<std::vector<int>> by_class(n_classes);
  for (int i = 0; i < X.rows(); ++i) by_class[labels[i]].push_back(i);
  for (int c = 0; c < n_classes; ++c) {
    if (!by_class[c].empty()) m.classes.push_back(c);
  }
  if (m.classes.size() < 2) throw std::invalid_argument("svm fit: need at least 2 populated classes");

  // one binary machine per unordered class pair; the lower class id takes the
  // positive side of the decision function
  for (std::size_t ai = 0; ai < m.classes.size(); ++ai) {
    for (std::size_t bi = ai + 1; bi < m.classes.size(); ++bi) {
      const int ca = m.classes[ai];
      const int cb = m.classes[bi];
      std::vector<int> rows;
      rows.insert(rows.end(), by_class[ca].begin(), by_class[ca].end());
      rows.insert(rows.end(), by_class[cb].begin(), by_class[cb].end());
      const int np = static_cast<int>(rows.size());

      Eigen::MatrixXd sub(np, X.cols());
      Eigen::VectorXd y(np), box(np);
      for (int i = 0; i < np; ++i) {
        sub.row(i) = X.row(rows[i]);
        y(i) = labels[rows[i]] == ca ? 1.0 : -1.0;
        box(i) = C * sample_weights(rows[i]);
      }

      Eigen::MatrixXd gram(np, np);
      for (int i = 0; i < np; ++i) {
        for (int jj = i; jj < np; ++jj) {
          gram(i, jj) = gram(jj, i) = m.kernel_value(sub.row(i), sub.row(jj));
        }
      }

      SmoProblem prob;
      prob.gram = &gram;
      prob.sample_of_var.resize(np);
      for (int i = 0; i < np; ++i) prob.sample_of_var[i] = i;
      prob.sign = y;
      prob.linear = Eigen::VectorXd::Constant(np, -1.0);
      prob.upper = box;
      prob.tol = tol;
      prob.max_passes = max_passes;
      const auto sol = solve_smo(prob);

      PairModel pm;
      pm.class_a = ca;
      pm.class_b = cb;
      pm.bias = -sol.constraint_multiplier;
      std::vector<int> sv;
      for (int i = 0; i < np; ++i) {
        if (sol.alpha(i) > 1e-12) sv.push_back(i);
      }
      pm.support_vectors.resize(static_cast<int>(sv.size()), X.cols());
      pm.coef.resize(static_cast<int>(sv.size()));
      for (std::size_t i = 0; i < sv.size(); ++i) {
        pm.support_vectors.row(static_cast<int>(i)) = sub.row(sv[i]);
        pm.coef(static_cast<int>(i)) = sol.alpha(sv[i]) * y(sv[i]);
      }
      m.pairs.push_back(std::move(pm));
    }
  }
  return m;
}

Eigen::VectorXd SvmModel::scores(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(n_classes);
  for (const auto& pm : pairs) {
    double f = pm.bias;
    for (int s = 0; s < pm.support_vectors.rows(); ++s) {
      f += pm.coef(s) * kernel_value(pm.support_vectors.row(s), x);
    }
    votes(f >= 0.0 ? pm.class_a : pm.class_b) += 1.0;
  }
  if (!pairs.empty()) votes /= static_cast<double>(pairs.size());
  return votes;
}

nlohmann::json SvmModel::to_json() const {
  nlohmann::json j;
  j["type"] = type_tag();
  j["kernel"] = kernel;
  j["gamma"] = gamma;
  j["n_classes"] = n_classes;
  j["classes"] = classes;
  nlohmann::json pairs_j = nlohmann::json::array();
  for (const auto& pm : pairs) {
    nlohmann::json pj;
    pj["class_a"] = pm.class_a;
    pj["class_b"] = pm.class_b;
    pj["bias"] = pm.bias;
    std::vector<double> coef(pm.coef.data(), pm.coef.data() + pm.coef.size());
    pj["coef"] = coef;
    pj["support_vectors"] = matrix_to_json(pm.support_vectors);
    pairs_j.push_back(std::move(pj));
  }
  j["pairs"] = std::move(pairs_j);
  return j;
}

std::unique_ptr<SvmModel> SvmModel::from_json(const nlohmann::json& j) {
  auto m = std::make_unique<SvmModel>();
  m->kernel = j.at("kernel").get<std::string>();
  m->gamma = j.at("gamma").get<double>();
  m->n_classes = j.at("n_classes").get<int>();
  m->classes = j.at("classes").get<std::vector<int>>();
  for (const auto& pj : j.at("pairs")) {
    PairModel pm;
    pm.class_a = pj.at("class_a").get<int>();
    pm.class_b = pj.at("class_b").get<int>();
    pm.bias = pj.at("bias").get<double>();
    const auto coef = pj.at("coef").get<std::vector<double>>();
    pm.coef = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<int>(coef.size()));
    pm.support_vectors = matrix_from_json(pj.at("support_vectors"));
    m->pairs.push_back(std::move(pm));
  }
  return m;
}

}  // namespace soilspec::detail
