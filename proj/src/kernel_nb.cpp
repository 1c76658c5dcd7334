#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "soilspec/detail/classifier_models.hpp"

namespace soilspec::detail {

namespace {

// Normalized 1-D smoothing kernels.
double kernel_density(const std::string& kernel, double u) {
  const double au = std::abs(u);
  if (kernel == "gaussian") return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
  if (kernel == "box") return au <= 1.0 ? 0.5 : 0.0;
  if (kernel == "epanechnikov") return au <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  if (kernel == "triangle") return au <= 1.0 ? 1.0 - au : 0.0;
  throw std::invalid_argument("unknown naive-bayes kernel: " + kernel);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * (sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - lo;
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

// Silverman's rule of thumb: 0.9 * min(std, IQR/1.34) * n^(-1/5), with a
// fallback to the overall feature spread when a class column is constant.
double silverman_bandwidth(const std::vector<double>& values, double fallback_scale) {
  const auto n = values.size();
  if (n < 2) return std::max(fallback_scale, 1e-3);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
  if (spread <= 0.0) spread = fallback_scale;
  if (spread <= 0.0) return 1e-3;
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

}  // namespace

KernelNaiveBayesModel KernelNaiveBayesModel::fit(const Eigen::MatrixXd& X,
                                                 const std::vector<int>& labels, int n_classes,
                                                 const std::string& kernel) {
  kernel_density(kernel, 0.0);  // validates the kernel name
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());

  KernelNaiveBayesModel m;
  m.kernel = kernel;
  m.n_classes = n_classes;

  std::vector<std::vector<int>> by_class(n_classes);
  for (int i = 0; i < n; ++i) by_class[labels[i]].push_back(i);

  Eigen::VectorXd global_sd(d);
  for (int j = 0; j < d; ++j) {
    const double mu = X.col(j).mean();
    global_sd(j) = std::sqrt((X.col(j).array() - mu).square().sum() / std::max(1, n - 1));
  }

  std::vector<double> priors;
  for (int c = 0; c < n_classes; ++c) {
    if (by_class[c].empty()) continue;
    m.classes.push_back(c);
    priors.push_back(static_cast<double>(by_class[c].size()) / n);
    Eigen::MatrixXd data(by_class[c].size(), d);
    Eigen::VectorXd bw(d);
    for (std::size_t r = 0; r < by_class[c].size(); ++r) data.row(static_cast<int>(r)) = X.row(by_class[c][r]);
    for (int j = 0; j < d; ++j) {
      std::vector<double> col(data.col(j).data(), data.col(j).data() + data.rows());
      bw(j) = silverman_bandwidth(col, global_sd(j) * std::pow(std::max<double>(2, n), -0.2));
    }
    m.class_data.push_back(std::move(data));
    m.bandwidths.push_back(std::move(bw));
  }
  if (m.classes.size() < 2) {
    throw std::invalid_argument("kernel naive bayes: need at least 2 populated classes");
  }
  m.log_priors.resize(static_cast<int>(priors.size()));
  for (std::size_t i = 0; i < priors.size(); ++i) m.log_priors(static_cast<int>(i)) = std::log(priors[i]);
  return m;
}

Eigen::VectorXd KernelNaiveBayesModel::scores(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  const int kc = static_cast<int>(classes.size());
  Eigen::VectorXd log_post(kc);
  for (int ci = 0; ci < kc; ++ci) {
    const auto& data = class_data[ci];
    const auto& bw = bandwidths[ci];
    double ll = log_priors(ci);
    for (int j = 0; j < data.cols(); ++j) {
      const double h = bw(j);
      double dens = 0.0;
      for (int r = 0; r < data.rows(); ++r) {
        dens += kernel_density(kernel, (x(j) - data(r, j)) / h);
      }
      dens /= data.rows() * h;
      // compact-support kernels can assign zero density; floor before log
      ll += std::log(std::max(dens, 1e-300));
    }
    log_post(ci) = ll;
  }
  const double mx = log_post.maxCoeff();
  Eigen::VectorXd p = (log_post.array() - mx).exp();
  p /= p.sum();

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_classes);
  for (int ci = 0; ci < kc; ++ci) out(classes[ci]) = p(ci);
  return out;
}

nlohmann::json KernelNaiveBayesModel::to_json() const {
  nlohmann::json j;
  j["type"] = type_tag();
  j["kernel"] = kernel;
  j["n_classes"] = n_classes;
  j["classes"] = classes;
  std::vector<double> pri(log_priors.data(), log_priors.data() + log_priors.size());
  j["log_priors"] = pri;
  nlohmann::json data_j = nlohmann::json::array();
  nlohmann::json bw_j = nlohmann::json::array();
  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    data_j.push_back(matrix_to_json(class_data[ci]));
    std::vector<double> bw(bandwidths[ci].data(), bandwidths[ci].data() + bandwidths[ci].size());
    bw_j.push_back(bw);
  }
  j["class_data"] = std::move(data_j);
  j["bandwidths"] = std::move(bw_j);
  return j;
}

std::unique_ptr<KernelNaiveBayesModel> KernelNaiveBayesModel::from_json(const nlohmann::json& j) {
  auto m = std::make_unique<KernelNaiveBayesModel>();
  m->kernel = j.at("kernel").get<std::string>();
  m->n_classes = j.at("n_classes").get<int>();
  m->classes = j.at("classes").get<std::vector<int>>();
  const auto pri = j.at("log_priors").get<std::vector<double>>();
  m->log_priors = Eigen::Map<const Eigen::VectorXd>(pri.data(), static_cast<int>(pri.size()));
  for (const auto& rows : j.at("class_data")) m->class_data.push_back(matrix_from_json(rows));
  for (const auto& bw : j.at("bandwidths")) {
    const auto v = bw.get<std::vector<double>>();
    m->bandwidths.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size())));
  }
  return m;
}

}  // namespace soilspec::detail
