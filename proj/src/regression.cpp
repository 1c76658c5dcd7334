#include "soilspec/regression.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "soilspec/version.hpp"

namespace soilspec {

const char* regressor_kind_name(RegressorKind k) {
  switch (k) {
    case RegressorKind::Ols: return "ols";
    case RegressorKind::Svr: return "svr";
    case RegressorKind::Lasso: return "lasso";
    case RegressorKind::LrBestFeature: return "lr_bf";
    case RegressorKind::Plsr: return "plsr";
  }
  return "?";
}

RegressorKind parse_regressor_kind(const std::string& name) {
  if (name == "ols" || name == "lr") return RegressorKind::Ols;
  if (name == "svr") return RegressorKind::Svr;
  if (name == "lasso") return RegressorKind::Lasso;
  if (name == "lr_bf") return RegressorKind::LrBestFeature;
  if (name == "plsr") return RegressorKind::Plsr;
  throw std::invalid_argument("unknown regressor kind: '" + name + "'");
}

namespace {

void check_finite(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (!X.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("non-finite values in regression inputs");
  }
  if (X.rows() != y.size()) throw std::invalid_argument("X rows must match y length");
  if (X.rows() == 0) throw std::invalid_argument("empty training data");
}

}  // namespace

RegressionModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_finite(X, y);
  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Xc);
  RegressionModel m;
  m.kind = RegressorKind::Ols;
  m.coefficients = cod.solve(yc);
  m.intercept = y_mean - x_mean.dot(m.coefficients);
  m.params = OlsParams{};
  return m;
}

RegressionModel fit_lr_best_feature(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_finite(X, y);
  if (X.rows() < 2) throw std::invalid_argument("fit_lr_best_feature needs at least 2 samples");
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;
  const double sy = std::sqrt(yc.squaredNorm());

  int best = -1;
  double best_abs = -1.0;
  double best_r = 0.0;
  for (int j = 0; j < d; ++j) {
    const double xm = X.col(j).mean();
    const Eigen::VectorXd xc = X.col(j).array() - xm;
    const double sx = std::sqrt(xc.squaredNorm());
    if (sx == 0.0 || sy == 0.0) continue;  // correlation undefined
    const double r = xc.dot(yc) / (sx * sy);
    if (std::abs(r) > best_abs) {  // strict > keeps the lowest index on ties
      best_abs = std::abs(r);
      best = j;
      best_r = r;
    }
  }
  if (best < 0) {
    throw std::invalid_argument("fit_lr_best_feature: no column has a defined correlation with y");
  }

  const double xm = X.col(best).mean();
  const Eigen::VectorXd xc = X.col(best).array() - xm;
  const double slope = xc.dot(yc) / xc.squaredNorm();

  RegressionModel m;
  m.kind = RegressorKind::LrBestFeature;
  m.coefficients = Eigen::VectorXd::Zero(d);
  m.coefficients(best) = slope;
  m.intercept = y_mean - slope * xm;
  m.params = LrBfParams{best, best_r};
  return m;
}

RegressionModel fit_plsr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const PlsrOptions& opts) {
  check_finite(X, y);
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (opts.n_components < 1) throw std::invalid_argument("fit_plsr: n_components must be >= 1");
  if (opts.n_components > std::min(n - 1, d)) {
    throw std::invalid_argument("fit_plsr: n_components exceeds min(n_samples-1, n_features)");
  }

  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  Eigen::MatrixXd Xd = X.rowwise() - x_mean;  // deflated in place
  Eigen::VectorXd yd = y.array() - y_mean;

  const double x_scale = Xd.norm();
  const double tiny = 1e-12 * std::max(1.0, x_scale);

  PlsrParams params;
  params.n_components_requested = opts.n_components;
  params.max_iter = opts.max_iter;
  params.inner_tol = opts.inner_tol;

  Eigen::MatrixXd W(d, opts.n_components), P(d, opts.n_components);
  Eigen::VectorXd q(opts.n_components);
  std::vector<std::string> notes;

  int a = 0;
  for (; a < opts.n_components; ++a) {
    if (Xd.norm() <= tiny) {
      notes.push_back("plsr: deflated X became numerically zero after " + std::to_string(a) +
                      " components");
      break;
    }
    Eigen::VectorXd u = yd;
    if (u.norm() <= 1e-14 * std::max(1.0, std::abs(y_mean))) {
      // y residual exhausted; the weight direction would be undefined
      break;
    }
    Eigen::VectorXd w = Xd.transpose() * u;
    if (w.norm() <= tiny) break;
    w.normalize();
    Eigen::VectorXd t = Xd * w;

    // NIPALS inner loop; for a single response it settles immediately but the
    // iteration cap and tolerance are honored.
    for (int it = 0; it < opts.max_iter; ++it) {
      const double tt = t.squaredNorm();
      if (tt <= tiny * tiny) break;
      const double qa = yd.dot(t) / tt;
      if (qa == 0.0) break;
      u = yd;  // single-column response: u stays the y residual
      Eigen::VectorXd w_new = Xd.transpose() * u;
      if (w_new.norm() <= tiny) break;
      w_new.normalize();
      Eigen::VectorXd t_new = Xd * w_new;
      const double delta = (t_new - t).norm();
      w = w_new;
      t = t_new;
      if (delta <= opts.inner_tol * std::max(1.0, t.norm())) break;
    }

    const double tt = t.squaredNorm();
    if (tt <= tiny * tiny) {
      notes.push_back("plsr: score vector vanished at component " + std::to_string(a + 1));
      break;
    }
    const Eigen::VectorXd p = Xd.transpose() * t / tt;
    const double qa = yd.dot(t) / tt;
    W.col(a) = w;
    P.col(a) = p;
    q(a) = qa;
    Xd.noalias() -= t * p.transpose();
    yd.noalias() -= qa * t;
  }

  if (a == 0) {
    // y orthogonal to every column: intercept-only model
    RegressionModel m;
    m.kind = RegressorKind::Plsr;
    m.coefficients = Eigen::VectorXd::Zero(d);
    m.intercept = y_mean;
    params.n_components = 0;
    params.x_mean = x_mean.transpose();
    params.y_mean = y_mean;
    m.params = std::move(params);
    m.notes = std::move(notes);
    return m;
  }

  W.conservativeResize(Eigen::NoChange, a);
  P.conservativeResize(Eigen::NoChange, a);
  q.conservativeResize(a);

  // beta = W (P^T W)^{-1} q on centered data
  const Eigen::MatrixXd PtW = P.transpose() * W;
  const Eigen::VectorXd inner = PtW.colPivHouseholderQr().solve(q);
  RegressionModel m;
  m.kind = RegressorKind::Plsr;
  m.coefficients = W * inner;
  m.intercept = y_mean - x_mean.dot(m.coefficients);
  params.n_components = a;
  params.x_weights = W;
  params.x_loadings = P;
  params.y_loadings = q;
  params.x_mean = x_mean.transpose();
  params.y_mean = y_mean;
  m.params = std::move(params);
  m.notes = std::move(notes);
  return m;
}

Eigen::MatrixXd plsr_scores(const RegressionModel& model, const Eigen::MatrixXd& X) {
  const auto* p = std::get_if<PlsrParams>(&model.params);
  if (p == nullptr) throw std::invalid_argument("plsr_scores: not a PLSR model");
  if (p->n_components == 0) return Eigen::MatrixXd(X.rows(), 0);
  const Eigen::MatrixXd Xc = X.rowwise() - p->x_mean.transpose();
  const Eigen::MatrixXd PtW = p->x_loadings.transpose() * p->x_weights;
  // T = Xc W (P^T W)^{-1}; reproduces the NIPALS scores on the training data
  return Xc * (p->x_weights * PtW.inverse());
}

Eigen::VectorXd predict(const RegressionModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.coefficients.size()) {
    throw std::invalid_argument("predict: feature count mismatch (model has " +
                                std::to_string(model.coefficients.size()) + ", data has " +
                                std::to_string(X.cols()) + ")");
  }
  return (X * model.coefficients).array() + model.intercept;
}

// ---------------------------------------------------------------------------
// persistence

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<int>(i)) = a[i].get<double>();
  return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows[0].size()) : 0;
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

json params_to_json(const RegressionModel& m) {
  json j;
  switch (m.kind) {
    case RegressorKind::Ols:
      break;
    case RegressorKind::Svr: {
      const auto& p = std::get<SvrParams>(m.params);
      j["C"] = p.C;
      j["epsilon"] = p.epsilon;
      j["tol"] = p.tol;
      j["max_passes"] = p.max_passes;
      j["converged"] = p.converged;
      j["iterations"] = p.iterations;
      j["alpha_up"] = vec_to_json(p.alpha_up);
      j["alpha_down"] = vec_to_json(p.alpha_down);
      break;
    }
    case RegressorKind::Lasso: {
      const auto& p = std::get<LassoParams>(m.params);
      j["lambda_selected"] = p.lambda_selected;
      j["lambda_path"] = p.lambda_path;
      j["cv_mse"] = p.cv_mse;
      j["n_lambdas"] = p.n_lambdas;
      j["path_eps"] = p.path_eps;
      j["folds"] = p.folds;
      j["seed"] = p.seed;
      break;
    }
    case RegressorKind::LrBestFeature: {
      const auto& p = std::get<LrBfParams>(m.params);
      j["feature_index"] = p.feature_index;
      j["correlation"] = p.correlation;
      break;
    }
    case RegressorKind::Plsr: {
      const auto& p = std::get<PlsrParams>(m.params);
      j["n_components_requested"] = p.n_components_requested;
      j["n_components"] = p.n_components;
      j["max_iter"] = p.max_iter;
      j["inner_tol"] = p.inner_tol;
      j["x_weights"] = mat_to_json(p.x_weights);
      j["x_loadings"] = mat_to_json(p.x_loadings);
      j["y_loadings"] = vec_to_json(p.y_loadings);
      j["x_mean"] = vec_to_json(p.x_mean);
      j["y_mean"] = p.y_mean;
      break;
    }
  }
  return j;
}

RegressorParams params_from_json(RegressorKind kind, const json& j) {
  switch (kind) {
    case RegressorKind::Ols:
      return OlsParams{};
    case RegressorKind::Svr: {
      SvrParams p;
      p.C = j.at("C").get<double>();
      p.epsilon = j.at("epsilon").get<double>();
      p.tol = j.at("tol").get<double>();
      p.max_passes = j.at("max_passes").get<long>();
      p.converged = j.at("converged").get<bool>();
      p.iterations = j.at("iterations").get<long>();
      p.alpha_up = vec_from_json(j.at("alpha_up"));
      p.alpha_down = vec_from_json(j.at("alpha_down"));
      return p;
    }
    case RegressorKind::Lasso: {
      LassoParams p;
      p.lambda_selected = j.at("lambda_selected").get<double>();
      p.lambda_path = j.at("lambda_path").get<std::vector<double>>();
      p.cv_mse = j.at("cv_mse").get<std::vector<double>>();
      p.n_lambdas = j.at("n_lambdas").get<int>();
      p.path_eps = j.at("path_eps").get<double>();
      p.folds = j.at("folds").get<int>();
      p.seed = j.at("seed").get<std::uint64_t>();
      return p;
    }
    case RegressorKind::LrBestFeature: {
      LrBfParams p;
      p.feature_index = j.at("feature_index").get<int>();
      p.correlation = j.at("correlation").get<double>();
      return p;
    }
    case RegressorKind::Plsr: {
      PlsrParams p;
      p.n_components_requested = j.at("n_components_requested").get<int>();
      p.n_components = j.at("n_components").get<int>();
      p.max_iter = j.at("max_iter").get<int>();
      p.inner_tol = j.at("inner_tol").get<double>();
      p.x_weights = mat_from_json(j.at("x_weights"));
      p.x_loadings = mat_from_json(j.at("x_loadings"));
      p.y_loadings = vec_from_json(j.at("y_loadings"));
      p.x_mean = vec_from_json(j.at("x_mean"));
      p.y_mean = j.at("y_mean").get<double>();
      return p;
    }
  }
  throw std::invalid_argument("unknown regressor kind tag");
}

}  // namespace

void save_model(const RegressionModel& m, const std::string& path) {
  json j;
  j["toolkit"] = "soilspec";
  j["toolkit_version"] = kVersion;
  j["kind"] = regressor_kind_name(m.kind);
  j["coefficients"] = vec_to_json(m.coefficients);
  j["intercept"] = m.intercept;
  j["params"] = params_to_json(m);
  j["feature_names"] = m.feature_names;
  json st = json::array();
  for (const auto& s : m.standardization) st.push_back({{"mean", s.mean}, {"stddev", s.stddev}});
  j["standardization"] = std::move(st);
  j["notes"] = m.notes;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
}

RegressionModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  json j;
  in >> j;
  RegressionModel m;
  m.kind = parse_regressor_kind(j.at("kind").get<std::string>());
  m.coefficients = vec_from_json(j.at("coefficients"));
  m.intercept = j.at("intercept").get<double>();
  m.params = params_from_json(m.kind, j.at("params"));
  m.feature_names = j.value("feature_names", std::vector<std::string>{});
  if (j.contains("standardization")) {
    for (const auto& s : j["standardization"]) {
      m.standardization.push_back({s.at("mean").get<double>(), s.at("stddev").get<double>()});
    }
  }
  m.notes = j.value("notes", std::vector<std::string>{});
  return m;
}

}  // namespace soilspec
