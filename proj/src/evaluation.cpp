#include "soilspec/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "soilspec/folds.hpp"
#include "soilspec/parallel.hpp"
#include "soilspec/rng.hpp"

namespace soilspec {

ConfusionMatrix ConfusionMatrix::zeros(int k) {
  ConfusionMatrix cm;
  cm.counts = Eigen::MatrixXi::Zero(k, k);
  return cm;
}

RegressionMetrics regression_metrics(const Eigen::VectorXd& y_true,
                                     const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw std::invalid_argument("regression_metrics: length mismatch");
  }
  if (y_true.size() < 2) throw std::invalid_argument("regression_metrics: need >= 2 points");

  const int n = static_cast<int>(y_true.size());
  RegressionMetrics m;
  m.mse = (y_true - y_pred).squaredNorm() / n;

  const double mt = y_true.mean();
  const double mp = y_pred.mean();
  const Eigen::VectorXd dt = y_true.array() - mt;
  const Eigen::VectorXd dp = y_pred.array() - mp;
  const double sst = dt.squaredNorm();
  const double ssp = dp.squaredNorm();
  if (sst > 0.0 && ssp > 0.0) {
    m.pearson_rho = dt.dot(dp) / std::sqrt(sst * ssp);
  }
  if (sst > 0.0) {
    m.r_squared = 1.0 - (y_true - y_pred).squaredNorm() / sst;
  }
  return m;
}

double mcc(const ConfusionMatrix& cm) {
  const int k = cm.n_classes();
  if (k < 2) throw std::invalid_argument("mcc: confusion matrix must be at least 2x2");
  if (k == 2) {
    const double tn = cm.counts(0, 0), fp = cm.counts(0, 1);
    const double fn = cm.counts(1, 0), tp = cm.counts(1, 1);
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom <= 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(denom);
  }
  // Gorodkin R_K
  const double s = cm.total();
  double c = 0.0;
  for (int i = 0; i < k; ++i) c += cm.counts(i, i);
  double dot_pt = 0.0, pp = 0.0, tt = 0.0;
  for (int i = 0; i < k; ++i) {
    const double t_k = cm.counts.row(i).sum();  // true marginal
    const double p_k = cm.counts.col(i).sum();  // predicted marginal
    dot_pt += p_k * t_k;
    pp += p_k * p_k;
    tt += t_k * t_k;
  }
  const double denom = (s * s - pp) * (s * s - tt);
  if (denom <= 0.0) return 0.0;
  return (c * s - dot_pt) / std::sqrt(denom);
}

namespace {

std::optional<double> ratio(double num, double denom) {
  if (denom <= 0.0) return std::nullopt;
  return num / denom;
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& vals) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : vals) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

ClassificationMetrics classification_metrics(const ConfusionMatrix& cm) {
  const int k = cm.n_classes();
  const double s = cm.total();
  ClassificationMetrics out;
  out.per_class.resize(k);

  std::vector<std::optional<double>> tprs, tnrs, ppvs, npvs, f1s;
  double correct = 0.0;
  for (int c = 0; c < k; ++c) {
    const double tp = cm.counts(c, c);
    const double fn = cm.counts.row(c).sum() - tp;
    const double fp = cm.counts.col(c).sum() - tp;
    const double tn = s - tp - fn - fp;
    correct += tp;
    auto& pc = out.per_class[c];
    pc.tpr = ratio(tp, tp + fn);
    pc.tnr = ratio(tn, tn + fp);
    pc.ppv = ratio(tp, tp + fp);
    pc.npv = ratio(tn, tn + fn);
    if (pc.ppv && pc.tpr && (*pc.ppv + *pc.tpr) > 0.0) {
      pc.f1 = 2.0 * (*pc.ppv) * (*pc.tpr) / (*pc.ppv + *pc.tpr);
    }
    tprs.push_back(pc.tpr);
    tnrs.push_back(pc.tnr);
    ppvs.push_back(pc.ppv);
    npvs.push_back(pc.npv);
    f1s.push_back(pc.f1);
  }
  out.macro.tpr = mean_defined(tprs);
  out.macro.tnr = mean_defined(tnrs);
  out.macro.ppv = mean_defined(ppvs);
  out.macro.npv = mean_defined(npvs);
  out.macro.f1 = mean_defined(f1s);
  out.accuracy = s > 0.0 ? correct / s : 0.0;
  out.mcc = mcc(cm);
  return out;
}

RegressionModel fit_regressor(const RegressorSpec& spec, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y) {
  switch (spec.kind) {
    case RegressorKind::Ols: return fit_ols(X, y);
    case RegressorKind::Svr: return fit_svr_linear(X, y, spec.svr);
    case RegressorKind::Lasso: return fit_lasso_cv(X, y, spec.lasso);
    case RegressorKind::LrBestFeature: return fit_lr_best_feature(X, y);
    case RegressorKind::Plsr: return fit_plsr(X, y, spec.plsr);
  }
  throw std::invalid_argument("unknown regressor kind");
}

CvRegressionResult kfold_cv_regression(const RegressorSpec& spec, const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y, int folds, std::uint64_t seed) {
  const int n = static_cast<int>(X.rows());
  if (folds > n) throw std::invalid_argument("kfold_cv_regression: more folds than samples");
  const auto fold_of = fold_assignment(n, folds, seed);

  CvRegressionResult res;
  std::vector<double> rhos, mses, r2s;
  for (int f = 0; f < folds; ++f) {
    std::vector<int> tr, va;
    for (int i = 0; i < n; ++i) (fold_of[i] == f ? va : tr).push_back(i);
    if (static_cast<int>(va.size()) < 2) {
      throw std::invalid_argument("kfold_cv_regression: a fold has fewer than 2 samples");
    }
    Eigen::MatrixXd Xtr(tr.size(), X.cols()), Xva(va.size(), X.cols());
    Eigen::VectorXd ytr(tr.size()), yva(va.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
      Xtr.row(static_cast<int>(i)) = X.row(tr[i]);
      ytr(static_cast<int>(i)) = y(tr[i]);
    }
    for (std::size_t i = 0; i < va.size(); ++i) {
      Xva.row(static_cast<int>(i)) = X.row(va[i]);
      yva(static_cast<int>(i)) = y(va[i]);
    }
    const RegressionModel model = fit_regressor(spec, Xtr, ytr);
    const RegressionMetrics m = regression_metrics(yva, predict(model, Xva));
    res.per_fold.push_back(m);
    if (m.pearson_rho) rhos.push_back(*m.pearson_rho);
    if (m.r_squared) r2s.push_back(*m.r_squared);
    mses.push_back(m.mse);
  }

  if (!rhos.empty()) {
    res.median_rho = median(rhos);
    double mean = 0.0;
    for (double r : rhos) mean += r;
    mean /= rhos.size();
    double ss = 0.0;
    for (double r : rhos) ss += (r - mean) * (r - mean);
    res.rho_stddev = rhos.size() > 1 ? std::sqrt(ss / (rhos.size() - 1)) : 0.0;
  }
  if (!r2s.empty()) res.median_r2 = median(r2s);
  res.median_mse = median(mses);
  return res;
}

CvClassificationResult kfold_cv_classification(const ClassifierConfig& config,
                                               const CostMatrix& cost, const Eigen::MatrixXd& X,
                                               const std::vector<int>& labels, int n_classes,
                                               int folds, std::uint64_t seed,
                                               const std::vector<int>* fixed_folds) {
  const int n = static_cast<int>(X.rows());
  CvClassificationResult res;
  res.aggregate = ConfusionMatrix::zeros(n_classes);

  std::vector<int> fold_of;
  if (fixed_folds != nullptr) {
    fold_of = *fixed_folds;
    if (static_cast<int>(fold_of.size()) != n) {
      throw std::invalid_argument("kfold_cv_classification: fixed fold assignment size mismatch");
    }
  } else {
    fold_of = stratified_fold_assignment(labels, n_classes, folds, seed, &res.warnings);
  }

  for (int f = 0; f < folds; ++f) {
    std::vector<int> tr, va;
    for (int i = 0; i < n; ++i) (fold_of[i] == f ? va : tr).push_back(i);
    if (va.empty()) continue;
    Eigen::MatrixXd Xtr(tr.size(), X.cols()), Xva(va.size(), X.cols());
    std::vector<int> ytr(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
      Xtr.row(static_cast<int>(i)) = X.row(tr[i]);
      ytr[i] = labels[tr[i]];
    }
    for (std::size_t i = 0; i < va.size(); ++i) Xva.row(static_cast<int>(i)) = X.row(va[i]);

    const TrainedClassifier clf = fit_classifier(config, cost, Xtr, ytr, n_classes, seed);
    const std::vector<int> preds = predict_class(clf, Xva);
    for (std::size_t i = 0; i < va.size(); ++i) res.aggregate.add(labels[va[i]], preds[i]);
    for (const auto& w : clf.warnings) {
      if (std::find(res.warnings.begin(), res.warnings.end(), w) == res.warnings.end()) {
        res.warnings.push_back(w);
      }
    }
  }
  res.metrics = classification_metrics(res.aggregate);
  return res;
}

// ---------------------------------------------------------------------------
// grid search

std::uint64_t GridSearchSpec::n_points() const {
  std::uint64_t n = 1;
  for (const auto& vals : cell_values) {
    if (vals.empty()) throw std::invalid_argument("grid search: empty value set for a cost cell");
    n *= vals.size();
  }
  return n;
}

std::vector<double> GridSearchSpec::point(std::uint64_t index) const {
  std::vector<double> cells(cell_values.size());
  // mixed-radix decode, last cell fastest: enumeration order is lexicographic
  // in the cost vector when each value set is ascending
  for (int c = static_cast<int>(cell_values.size()) - 1; c >= 0; --c) {
    const auto& vals = cell_values[c];
    cells[c] = vals[index % vals.size()];
    index /= vals.size();
  }
  return cells;
}

GridSearchSpec GridSearchSpec::uniform(int n_classes, const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("grid search: empty value set");
  GridSearchSpec spec;
  spec.cell_values.assign(static_cast<std::size_t>(n_classes) * (n_classes - 1), values);
  return spec;
}

CostMatrix cost_matrix_from_vector(int n_classes, const std::vector<double>& cells) {
  if (static_cast<int>(cells.size()) != n_classes * (n_classes - 1)) {
    throw std::invalid_argument("cost vector length must be K*(K-1)");
  }
  CostMatrix cm;
  cm.costs = Eigen::MatrixXd::Zero(n_classes, n_classes);
  int c = 0;
  for (int i = 0; i < n_classes; ++i) {
    for (int j = 0; j < n_classes; ++j) {
      if (i != j) cm.costs(i, j) = cells[c++];
    }
  }
  return cm;
}

namespace {

nlohmann::json grid_point_to_json(std::uint64_t index, const GridPointResult& r) {
  nlohmann::json j;
  j["index"] = index;
  j["cost"] = r.cost_vector;
  j["mcc"] = r.mcc;
  std::vector<int> counts;
  for (int a = 0; a < r.confusion.counts.rows(); ++a) {
    for (int b = 0; b < r.confusion.counts.cols(); ++b) counts.push_back(r.confusion.counts(a, b));
  }
  j["confusion"] = counts;
  return j;
}

GridPointResult grid_point_from_json(const nlohmann::json& j, int n_classes) {
  GridPointResult r;
  r.cost_vector = j.at("cost").get<std::vector<double>>();
  r.mcc = j.at("mcc").get<double>();
  const auto counts = j.at("confusion").get<std::vector<int>>();
  r.confusion = ConfusionMatrix::zeros(n_classes);
  int c = 0;
  for (int a = 0; a < n_classes; ++a) {
    for (int b = 0; b < n_classes; ++b) r.confusion.counts(a, b) = counts[c++];
  }
  return r;
}

}  // namespace

GridSearchResult cost_grid_search(const ClassifierConfig& config, const Eigen::MatrixXd& X,
                                  const std::vector<int>& labels, int n_classes,
                                  const GridSearchSpec& grid, const GridSearchOptions& opts) {
  const int n = static_cast<int>(X.rows());
  if (static_cast<int>(grid.cell_values.size()) !=
      static_cast<int>(n_classes) * (n_classes - 1)) {
    throw std::invalid_argument("grid search: need one value set per off-diagonal cost cell");
  }
  const std::uint64_t total = grid.n_points();

  GridSearchResult res;
  res.grid_spec = grid;

  // one fold assignment shared by every grid point, so MCC differences
  // reflect cost changes only
  const std::vector<int> fold_of =
      stratified_fold_assignment(labels, n_classes, opts.folds, opts.seed, &res.warnings);

  std::vector<GridPointResult> results(total);
  std::vector<bool> done(total, false);

  // resume from a previous checkpoint when the file already has entries
  std::uint64_t resume_from = 0;
  if (!opts.checkpoint_path.empty()) {
    std::ifstream in(opts.checkpoint_path);
    if (in) {
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        const auto index = j.at("index").get<std::uint64_t>();
        if (index >= total) continue;
        results[index] = grid_point_from_json(j, n_classes);
        done[index] = true;
      }
      while (resume_from < total && done[resume_from]) ++resume_from;
    }
  }
  res.points_resumed = resume_from;

  std::ofstream checkpoint;
  if (!opts.checkpoint_path.empty()) {
    checkpoint.open(opts.checkpoint_path, resume_from > 0 ? std::ios::app : std::ios::trunc);
    if (!checkpoint) {
      throw std::invalid_argument("cannot open checkpoint file: " + opts.checkpoint_path);
    }
  }

  // the fold split is shared by every grid point, so the per-fold matrices
  // are materialized once instead of per point
  struct FoldData {
    Eigen::MatrixXd x_train, x_val;
    std::vector<int> y_train, val_rows;
  };
  std::vector<FoldData> fold_data(opts.folds);
  for (int f = 0; f < opts.folds; ++f) {
    std::vector<int> tr, va;
    for (int i = 0; i < n; ++i) (fold_of[i] == f ? va : tr).push_back(i);
    FoldData& fd = fold_data[f];
    fd.x_train.resize(static_cast<int>(tr.size()), X.cols());
    fd.x_val.resize(static_cast<int>(va.size()), X.cols());
    fd.y_train.resize(tr.size());
    fd.val_rows = va;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      fd.x_train.row(static_cast<int>(i)) = X.row(tr[i]);
      fd.y_train[i] = labels[tr[i]];
    }
    for (std::size_t i = 0; i < va.size(); ++i) fd.x_val.row(static_cast<int>(i)) = X.row(va[i]);
  }

  auto evaluate_point = [&](std::uint64_t index) {
    const std::vector<double> cells = grid.point(index);
    const CostMatrix cost = cost_matrix_from_vector(n_classes, cells);
    GridPointResult r;
    r.cost_vector = cells;
    r.confusion = ConfusionMatrix::zeros(n_classes);
    for (const auto& fd : fold_data) {
      if (fd.val_rows.empty()) continue;
      const TrainedClassifier clf =
          fit_classifier(config, cost, fd.x_train, fd.y_train, n_classes, opts.seed);
      const std::vector<int> preds = predict_class(clf, fd.x_val);
      for (std::size_t i = 0; i < fd.val_rows.size(); ++i) {
        r.confusion.add(labels[fd.val_rows[i]], preds[i]);
      }
    }
    r.mcc = mcc(r.confusion);
    results[index] = std::move(r);
  };

  // chunked evaluation: parallel inside a chunk, checkpoint flushed between
  // chunks in index order (bytes identical for any job count)
  const std::uint64_t chunk = std::max(1, opts.checkpoint_interval);
  for (std::uint64_t start = resume_from; start < total; start += chunk) {
    const std::uint64_t stop = std::min(total, start + chunk);
    parallel_for(static_cast<int>(start), static_cast<int>(stop), opts.jobs,
                 [&](int i) { evaluate_point(static_cast<std::uint64_t>(i)); });
    if (checkpoint.is_open()) {
      for (std::uint64_t i = start; i < stop; ++i) {
        checkpoint << grid_point_to_json(i, results[i]).dump() << '\n';
      }
      checkpoint.flush();
    }
  }


  // argmax with lexicographically-smallest-cost tie break
  std::uint64_t best = 0;
  for (std::uint64_t i = 1; i < total; ++i) {
    if (results[i].mcc > results[best].mcc) {
      best = i;
    } else if (results[i].mcc == results[best].mcc &&
               results[i].cost_vector < results[best].cost_vector) {
      best = i;
    }
  }
  res.best_index = best;
  res.best_mcc = results[best].mcc;
  res.best_cost = cost_matrix_from_vector(n_classes, results[best].cost_vector);
  res.points_evaluated = total - resume_from;
  if (opts.keep_per_point) res.per_point = std::move(results);
  return res;
}

// ---------------------------------------------------------------------------
// regressor comparison

namespace {

RegressorReport evaluate_on_test(RegressorKind kind, const RegressionModel& model,
                                 const Eigen::MatrixXd& X_test, const Eigen::VectorXd& y_test,
                                 int resamples, std::uint64_t seed) {
  RegressorReport rep;
  rep.kind = kind;
  rep.predictions = predict(model, X_test);
  rep.test_metrics = regression_metrics(y_test, rep.predictions);

  const int n = static_cast<int>(y_test.size());
  std::vector<double> rho_bs, r2_bs, mse_bs;
  rho_bs.reserve(resamples);
  Rng rng(seed);
  Eigen::VectorXd yt(n), yp(n);
  for (int b = 0; b < resamples; ++b) {
    for (int i = 0; i < n; ++i) {
      const int pick = static_cast<int>(rng.uniform_int(0, n - 1));
      yt(i) = y_test(pick);
      yp(i) = rep.predictions(pick);
    }
    const RegressionMetrics m = regression_metrics(yt, yp);
    if (m.pearson_rho) rho_bs.push_back(*m.pearson_rho);
    if (m.r_squared) r2_bs.push_back(*m.r_squared);
    mse_bs.push_back(m.mse);
  }
  auto pct = [](std::vector<double>& v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    return v[lo] + (v[hi] - v[lo]) * (pos - lo);
  };
  if (!rho_bs.empty()) {
    rep.rho_ci_low = pct(rho_bs, 0.025);
    rep.rho_ci_high = pct(rho_bs, 0.975);
  }
  if (!r2_bs.empty()) {
    rep.r2_ci_low = pct(r2_bs, 0.025);
    rep.r2_ci_high = pct(r2_bs, 0.975);
  }
  if (!mse_bs.empty()) {
    rep.mse_ci_low = pct(mse_bs, 0.025);
    rep.mse_ci_high = pct(mse_bs, 0.975);
  }
  return rep;
}

}  // namespace

RegressorComparison compare_regressors(const Eigen::MatrixXd& X_train,
                                       const Eigen::VectorXd& y_train,
                                       const Eigen::MatrixXd& X_test,
                                       const Eigen::VectorXd& y_test,
                                       const CompareOptions& opts) {
  RegressorComparison out;
  out.gate_threshold = opts.gate_rho;

  std::vector<RegressorSpec> candidates = opts.candidates;
  if (candidates.empty()) {
    RegressorSpec ols;
    ols.kind = RegressorKind::Ols;
    RegressorSpec svr;
    svr.kind = RegressorKind::Svr;
    RegressorSpec lasso;
    lasso.kind = RegressorKind::Lasso;
    lasso.lasso.seed = opts.seed;
    candidates = {ols, svr, lasso};
  }

  int best_ci = -1;
  double best_rho = -std::numeric_limits<double>::infinity();
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    CandidateCvSummary summary;
    summary.kind = candidates[ci].kind;
    summary.cv = kfold_cv_regression(candidates[ci], X_train, y_train, opts.folds, opts.seed);
    // a missing median rho (constant predictions) never passes the gate
    const double rho = summary.cv.median_rho.value_or(-std::numeric_limits<double>::infinity());
    if (rho > best_rho) {
      best_rho = rho;
      best_ci = static_cast<int>(ci);
    }
    out.candidate_cv.push_back(std::move(summary));
  }

  if (best_ci < 0 || !(best_rho > opts.gate_rho)) {
    out.status = "not_suitable";
    return out;
  }

  out.status = "selected";
  out.selected = candidates[best_ci].kind;

  const RegressionModel winner = fit_regressor(candidates[best_ci], X_train, y_train);
  out.reports.push_back(evaluate_on_test(candidates[best_ci].kind, winner, X_test, y_test,
                                         opts.bootstrap_resamples, opts.seed));

  const RegressionModel lr_bf = fit_lr_best_feature(X_train, y_train);
  out.reports.push_back(evaluate_on_test(RegressorKind::LrBestFeature, lr_bf, X_test, y_test,
                                         opts.bootstrap_resamples, opts.seed));

  PlsrOptions plsr_opts = opts.plsr;
  plsr_opts.n_components = std::min<int>(
      plsr_opts.n_components,
      std::min<int>(static_cast<int>(X_train.rows()) - 1, static_cast<int>(X_train.cols())));
  const RegressionModel plsr = fit_plsr(X_train, y_train, plsr_opts);
  out.reports.push_back(evaluate_on_test(RegressorKind::Plsr, plsr, X_test, y_test,
                                         opts.bootstrap_resamples, opts.seed));
  return out;
}

}  // namespace soilspec
