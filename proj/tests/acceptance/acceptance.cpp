// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are pinned in code next to each check.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "soilspec/classification.hpp"
#include "soilspec/dataset.hpp"
#include "soilspec/evaluation.hpp"
#include "soilspec/fft.hpp"
#include "soilspec/preprocess.hpp"
#include "soilspec/ranking.hpp"
#include "soilspec/regression.hpp"
#include "soilspec/rng.hpp"
#include "soilspec/synthgen.hpp"

using namespace soilspec;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Checker {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << what;
    }
  }
  void note(const std::string& what) {
    if (detail.tellp() > 0) detail << "; ";
    detail << what;
  }
};

// ---------------------------------------------------------------- criterion 1

void criterion_solver_oracles(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);

  {  // OLS vs normal equations, 1e-8
    Eigen::MatrixXd X(20, 5);
    for (int i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
    Eigen::VectorXd y = X * Eigen::VectorXd::LinSpaced(5, -2.0, 2.0);
    for (int i = 0; i < 20; ++i) y(i) += 0.05 * rng.normal();
    const auto m = fit_ols(X, y);
    Eigen::MatrixXd Xa(20, 6);
    Xa << X, Eigen::VectorXd::Ones(20);
    const Eigen::VectorXd oracle = (Xa.transpose() * Xa).ldlt().solve(Xa.transpose() * y);
    const double gap = (predict(m, X) - Xa * oracle).cwiseAbs().maxCoeff();
    c.require(gap <= 1e-8, "ols vs normal equations gap " + std::to_string(gap));
  }

  {  // LASSO: exact zeroing at lambda_max and KKT residuals <= 1e-6
    const int n = 80, d = 12;
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
    for (int j = 0; j < d; ++j) {
      const double mu = X.col(j).mean();
      const double sd = std::sqrt((X.col(j).array() - mu).square().sum() / n);
      X.col(j) = (X.col(j).array() - mu) / sd;
    }
    Eigen::VectorXd y = 2.0 * X.col(1) - X.col(7);
    for (int i = 0; i < n; ++i) y(i) += 0.1 * rng.normal();
    const Eigen::VectorXd yc = y.array() - y.mean();

    double lambda_max = 0.0;
    for (int j = 0; j < d; ++j) {
      lambda_max = std::max(lambda_max, std::abs(X.col(j).dot(yc)) / n);
    }
    const Eigen::VectorXd at_max =
        lasso_coordinate_descent(X, yc, lambda_max, Eigen::VectorXd::Zero(d));
    c.require(at_max.cwiseAbs().maxCoeff() == 0.0, "lasso not zero at lambda_max");

    LassoOptions lopts;
    lopts.seed = 11;
    const auto lm = fit_lasso_cv(X, y, lopts);
    const double lambda = std::get<LassoParams>(lm.params).lambda_selected;
    const Eigen::VectorXd r = yc - X * lm.coefficients;
    double worst = 0.0;
    for (int j = 0; j < d; ++j) {
      const double g = X.col(j).dot(r) / n;
      if (lm.coefficients(j) != 0.0) {
        worst = std::max(worst, std::abs(g - lambda * (lm.coefficients(j) > 0 ? 1.0 : -1.0)));
      } else {
        worst = std::max(worst, std::max(0.0, std::abs(g) - lambda));
      }
    }
    c.require(worst <= 1e-6, "lasso KKT residual " + std::to_string(worst));
  }

  {  // SVR vs dense 2-D grid search, objective gap <= 1e-3
    Eigen::MatrixXd X(6, 1);
    X << -1.5, -0.8, -0.1, 0.4, 1.1, 1.9;
    Eigen::VectorXd y(6);
    y << -2.3, -0.2, 1.1, 1.6, 3.4, 4.6;
    const double C = 1.0, eps = 0.1;
    const auto m = fit_svr_linear(X, y, SvrOptions{C, eps, 1e-6, 20000});
    auto objective = [&](double w, double b) {
      double obj = 0.5 * w * w;
      for (int i = 0; i < 6; ++i) {
        obj += C * std::max(0.0, std::abs(y(i) - w * X(i, 0) - b) - eps);
      }
      return obj;
    };
    double best = std::numeric_limits<double>::infinity();
    double w_lo = -8, w_hi = 8, b_lo = -8, b_hi = 8, bw = 0, bb = 0;
    for (int refine = 0; refine < 6; ++refine) {
      for (int i = 0; i <= 200; ++i) {
        for (int j = 0; j <= 200; ++j) {
          const double w = w_lo + (w_hi - w_lo) * i / 200.0;
          const double b = b_lo + (b_hi - b_lo) * j / 200.0;
          const double obj = objective(w, b);
          if (obj < best) {
            best = obj;
            bw = w;
            bb = b;
          }
        }
      }
      const double hw = (w_hi - w_lo) / 50.0, hb = (b_hi - b_lo) / 50.0;
      w_lo = bw - hw;
      w_hi = bw + hw;
      b_lo = bb - hb;
      b_hi = bb + hb;
    }
    const double ours = objective(m.coefficients(0), m.intercept);
    c.require(ours - best <= 1e-3,
              "svr objective gap " + std::to_string(ours - best));
  }

  {  // PLSR equals OLS at full rank, 1e-6
    Eigen::MatrixXd X(40, 6);
    for (int i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
    Eigen::VectorXd y = X * Eigen::VectorXd::LinSpaced(6, -1.0, 1.5);
    for (int i = 0; i < 40; ++i) y(i) += 0.05 * rng.normal();
    const auto pls = fit_plsr(X, y, PlsrOptions{6, 10000, 1e-12});
    const auto ols = fit_ols(X, y);
    const double gap = (predict(pls, X) - predict(ols, X)).cwiseAbs().maxCoeff();
    c.require(gap <= 1e-6, "plsr vs ols gap " + std::to_string(gap));
  }

  {  // binary MCC vs R_K, 1e-12, on 100 random confusion matrices
    auto rk = [](const Eigen::MatrixXi& cm) {
      double s = 0, corr = 0, pt = 0, pp = 0, tt = 0;
      for (int i = 0; i < 2; ++i) {
        corr += cm(i, i);
        for (int j = 0; j < 2; ++j) s += cm(i, j);
      }
      for (int i = 0; i < 2; ++i) {
        double t = cm.row(i).sum(), p = cm.col(i).sum();
        pt += p * t;
        pp += p * p;
        tt += t * t;
      }
      const double denom = std::sqrt(s * s - pp) * std::sqrt(s * s - tt);
      return denom <= 0 ? 0.0 : (corr * s - pt) / denom;
    };
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      ConfusionMatrix cm = ConfusionMatrix::zeros(2);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) cm.counts(i, j) = static_cast<int>(rng.uniform_int(0, 60));
      }
      worst = std::max(worst, std::abs(mcc(cm) - rk(cm.counts)));
    }
    c.require(worst <= 1e-12, "binary MCC vs R_K gap " + std::to_string(worst));
  }

  const double elapsed = seconds_since(t0);
  c.require(elapsed < 60.0, "oracle suite took " + std::to_string(elapsed) + "s (limit 60)");
  c.note("ran in " + std::to_string(elapsed).substr(0, 5) + "s");
}

// ---------------------------------------------------------------- criterion 2

void criterion_dft(Checker& c) {
  Rng rng(202);
  for (int n : {5, 16, 31, 64, 247}) {
    std::vector<double> x(n);
    double energy = 0.0;
    for (int i = 0; i < n; ++i) {
      x[i] = rng.normal();
      energy += x[i] * x[i];
    }
    const auto got = fft_magnitude(x);

    double scale = 1.0, worst = 0.0, spec_energy = 0.0;
    std::vector<double> want(n);
    for (int k = 0; k < n; ++k) {
      std::complex<double> acc(0.0, 0.0);
      for (int i = 0; i < n; ++i) {
        const double ang = -2.0 * M_PI * double(k) * double(i) / n;
        acc += x[i] * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      want[k] = std::abs(acc);
      scale = std::max(scale, want[k]);
    }
    for (int k = 0; k < n; ++k) {
      worst = std::max(worst, std::abs(got[k] - want[k]));
      spec_energy += got[k] * got[k];
    }
    c.require(worst <= 1e-9 * scale,
              "N=" + std::to_string(n) + " DFT error " + std::to_string(worst));
    const double parseval = std::abs(spec_energy - n * energy) / (n * energy);
    c.require(parseval <= 1e-9,
              "N=" + std::to_string(n) + " Parseval residual " + std::to_string(parseval));
  }
}

// ---------------------------------------------------------------- criterion 3

SynthSpec e2e_spec(int n_samples, std::uint64_t seed) {
  // two far-apart bands so no single column mixes both depths above the
  // floating-point floor
  SynthSpec spec;
  spec.n_samples = n_samples;
  spec.grid = {400.0, 10.0, 40};
  spec.bands = {{480.0, 15.0, 0.05, 0.25}, {760.0, 15.0, 0.05, 0.25}};
  // signal std = sqrt((3^2 + 2^2) * (0.2^2 / 12)); noise sigma = 5% of that
  const double signal_sd = std::sqrt(13.0 * 0.04 / 12.0);
  spec.property_rules = {{"target", {3.0, -2.0}, 6.0, 0.05 * signal_sd}};
  spec.seed = seed;
  return spec;
}

void criterion_pipeline_e2e(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();

  const SpectralDataset ds = generate(e2e_spec(500, 31));
  const auto [train_ds, test_ds] = split_train_test(ds, 0.7, 31);
  const BlockSet blocks{true, true, true, false};
  const FeatureMatrix full = assemble_features(ds, blocks);

  auto rows_of = [&](const SpectralDataset& side) {
    std::vector<int> rows;
    std::unordered_map<std::string, int> index;
    for (int i = 0; i < full.n_samples(); ++i) index[full.sample_ids[i]] = i;
    for (const auto& s : side.samples) rows.push_back(index.at(s.id));
    return rows;
  };
  const FeatureMatrix train_fm = full.select_rows(rows_of(train_ds));
  const FeatureMatrix test_fm = full.select_rows(rows_of(test_ds));
  const auto [y_train, tr_rows] = train_ds.property_values("target");
  const auto [y_test, te_rows] = test_ds.property_values("target");

  CompareOptions opts;
  opts.seed = 31;
  const RegressorComparison cmp =
      compare_regressors(train_fm.values, y_train, test_fm.values, y_test, opts);
  c.require(cmp.status == "selected", "planted property failed the gate");
  if (cmp.status == "selected") {
    const double rho_sel = cmp.reports[0].test_metrics.pearson_rho.value_or(0.0);
    const double rho_lrbf = cmp.reports[1].test_metrics.pearson_rho.value_or(0.0);
    c.require(rho_sel >= 0.95, "selected test rho " + std::to_string(rho_sel) + " < 0.95");
    c.require(rho_sel - rho_lrbf >= 0.05,
              "selected rho " + std::to_string(rho_sel) + " beats lr_bf " +
                  std::to_string(rho_lrbf) + " by less than 0.05");
    c.note("selected " + std::string(regressor_kind_name(cmp.selected)) + " rho " +
           std::to_string(rho_sel).substr(0, 6) + ", lr_bf " +
           std::to_string(rho_lrbf).substr(0, 6));
  }

  // the gate must reject a pure-noise property in at least 19 of 20 repeats
  int rejected = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng noise_rng(seed * 7919);
    Eigen::VectorXd y_noise(train_fm.n_samples());
    for (int i = 0; i < y_noise.size(); ++i) y_noise(i) = noise_rng.normal();
    Eigen::VectorXd y_noise_test(test_fm.n_samples());
    for (int i = 0; i < y_noise_test.size(); ++i) y_noise_test(i) = noise_rng.normal();
    CompareOptions nopts;
    nopts.seed = seed;
    const auto ncmp =
        compare_regressors(train_fm.values, y_noise, test_fm.values, y_noise_test, nopts);
    rejected += ncmp.status == "not_suitable" ? 1 : 0;
  }
  c.require(rejected >= 19, "noise gate rejected only " + std::to_string(rejected) + "/20");
  c.note("noise gate rejected " + std::to_string(rejected) + "/20");

  const double elapsed = seconds_since(t0);
  c.require(elapsed <= 300.0, "pipeline took " + std::to_string(elapsed) + "s (limit 300)");
  c.note("ran " + std::to_string(elapsed).substr(0, 5) + "s");
}

// ---------------------------------------------------------------- criterion 4

void criterion_imbalanced(Checker& c) {
  // 645:8-style imbalance scaled to 300 samples, separable by construction
  SynthSpec spec;
  spec.n_samples = 300;
  spec.grid = {400.0, 10.0, 24};
  spec.bands = {{520.0, 18.0, 0.02, 0.30}};
  spec.property_rules = {{"salinity", {10.0}, 0.0, 0.001}};
  spec.seed = 404;
  ImbalanceRule rule;
  rule.property = "salinity";
  rule.thresholds = {2.8};  // depth 0.28 of [0.02, 0.30]: a thin upper slice
  rule.target_counts = {292, 8};
  spec.imbalance = rule;

  const SpectralDataset ds = generate(spec);
  const FeatureMatrix fm = assemble_features(ds, BlockSet{true, true, true, false});
  const auto [vals, rows] = ds.property_values("salinity");
  std::vector<int> labels(vals.size());
  int minority = 0;
  for (int i = 0; i < vals.size(); ++i) {
    labels[i] = vals(i) >= 2.8 ? 1 : 0;
    minority += labels[i];
  }
  c.require(minority == 8, "minority count " + std::to_string(minority) + " != 8");

  {  // constant-majority baseline has MCC exactly 0
    ConfusionMatrix cm = ConfusionMatrix::zeros(2);
    for (int l : labels) cm.add(l, 0);
    c.require(mcc(cm) == 0.0, "constant-majority MCC != 0");
    const auto metrics = classification_metrics(cm);
    c.note("majority baseline ACC " + std::to_string(metrics.accuracy).substr(0, 5) +
           ", MCC 0");
  }

  ClassifierConfig config;
  config.family = ClassifierFamily::Tree;
  config.tree_max_splits = 4;

  std::vector<double> grid_values;
  for (int v = 1; v <= 25; ++v) grid_values.push_back(v);
  const GridSearchSpec grid = GridSearchSpec::uniform(2, grid_values);

  GridSearchOptions opts1;
  opts1.folds = 5;
  opts1.seed = 17;
  opts1.jobs = 1;

  const auto t1_start = std::chrono::steady_clock::now();
  const GridSearchResult r1 = cost_grid_search(config, fm.values, labels, 2, grid, opts1);
  const double t1 = seconds_since(t1_start);

  GridSearchOptions opts8 = opts1;
  opts8.jobs = 8;
  const auto t8_start = std::chrono::steady_clock::now();
  const GridSearchResult r8 = cost_grid_search(config, fm.values, labels, 2, grid, opts8);
  const double t8 = seconds_since(t8_start);

  c.require(r1.per_point.size() == 625, "grid size mismatch");
  double uniform_mcc = -2.0;
  for (const auto& p : r1.per_point) {
    if (p.cost_vector == std::vector<double>{1.0, 1.0}) uniform_mcc = p.mcc;
  }
  c.require(r1.best_mcc >= uniform_mcc, "argmax below the uniform grid point");
  c.require(r1.best_mcc > 0.0, "best MCC not strictly positive on separable data");
  c.require(r1.best_mcc == r8.best_mcc && r1.best_index == r8.best_index,
            "jobs=1 and jobs=8 disagree");
  c.require(t1 <= 600.0, "single-threaded run took " + std::to_string(t1) + "s (limit 600)");

  const double speedup = t8 > 0.0 ? t1 / t8 : 0.0;
  std::ostringstream sp;
  sp.precision(2);
  sp << std::fixed << speedup;
  c.require(speedup >= 3.0,
            "measured speedup " + sp.str() + "x at 8 workers (>= 3x required; host has " +
                std::to_string(std::thread::hardware_concurrency()) + " cores)");
  c.note("best MCC " + std::to_string(r1.best_mcc).substr(0, 6) + " vs uniform " +
         std::to_string(uniform_mcc).substr(0, 6) + ", t1 " + std::to_string(t1).substr(0, 5) +
         "s, speedup " + sp.str() + "x");
}

// ---------------------------------------------------------------- criterion 5

void criterion_grid_cardinalities(Checker& c) {
  std::vector<double> v7, v150;
  for (int i = 1; i <= 7; ++i) v7.push_back(i);
  for (int i = 1; i <= 150; ++i) v150.push_back(i);
  const auto g3 = GridSearchSpec::uniform(3, v7);
  const auto g2 = GridSearchSpec::uniform(2, v150);
  c.require(g3.n_points() == 117649ULL,
            "3-class {1..7}^6 enumerates " + std::to_string(g3.n_points()));
  c.require(g2.n_points() == 22500ULL,
            "2-class {1..150}^2 enumerates " + std::to_string(g2.n_points()));
  c.require(g3.cell_values.size() == 6 && g2.cell_values.size() == 2, "cell count wrong");
  c.note("117649 and 22500 points enumerated (full runs via --grid 1:7 / --grid 1:150)");
}

// ---------------------------------------------------------------- criterion 6

void criterion_ranking(Checker& c) {
  int recovered = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthSpec spec;
    spec.n_samples = 150;
    spec.grid = {400.0, 10.0, 40};
    spec.bands = {{520.0, 15.0, 0.05, 0.25}, {700.0, 15.0, 0.05, 0.25}};
    const double signal_sd = std::sqrt((1.0 + 0.15 * 0.15) * 0.04 / 12.0);
    spec.property_rules = {{"target", {1.0, 0.15}, 3.0, 0.01 * signal_sd}};
    spec.seed = seed;
    const SpectralDataset ds = generate(spec);
    const FeatureMatrix fm = assemble_features(ds);
    const auto [y, rows] = ds.property_values("target");

    RankingOptions opts;
    opts.seed = seed;
    const FeatureRanking ranking = rank_features(fm, y, "target", opts);
    bool hit = false;
    for (std::size_t i = 0; i < 5 && i < ranking.entries.size(); ++i) {
      const auto& f = ranking.entries[i].feature;
      if (std::abs(f.wavelength_nm - 520.0) <= 2 * 10.0) hit = true;
    }
    recovered += hit ? 1 : 0;
  }
  c.require(recovered == 10,
            "planted band recovered in only " + std::to_string(recovered) + "/10 seeds");

  {  // duplicate-column redundancy: shared filter scores, lasso picks one copy
    Rng rng(606);
    const int n = 120;
    Eigen::MatrixXd vals(n, 6);
    for (int i = 0; i < vals.size(); ++i) vals.data()[i] = rng.normal();
    vals.col(3) = vals.col(1);
    Eigen::VectorXd y = 2.0 * vals.col(1) + 0.5 * vals.col(5);
    for (int i = 0; i < n; ++i) y(i) += 0.05 * rng.normal();
    FeatureMatrix fm;
    fm.values = vals;
    for (int j = 0; j < 6; ++j) {
      const double mu = fm.values.col(j).mean();
      const double sd = std::sqrt((fm.values.col(j).array() - mu).square().sum() / n);
      fm.values.col(j) = (fm.values.col(j).array() - mu) / sd;
      fm.columns.push_back({Block::D1, j, 400.0 + 10.0 * j});
      fm.stats.push_back({mu, sd});
    }
    RankingOptions opts;
    opts.seed = 29;
    const FeatureRanking ranking = rank_features(fm, y, "dup", opts);
    const RankedFeature *e1 = nullptr, *e3 = nullptr;
    for (const auto& e : ranking.entries) {
      if (e.feature.index == 1) e1 = &e;
      if (e.feature.index == 3) e3 = &e;
    }
    const bool filters_match = e1 != nullptr && e3 != nullptr &&
                               std::abs(e1->corr_score - e3->corr_score) <= 1e-9 &&
                               std::abs(e1->f_score - e3->f_score) <= 1e-9;
    c.require(filters_match, "duplicate columns do not share filter scores");
    if (e1 != nullptr && e3 != nullptr) {
      const double lo = std::min(e1->lasso_score, e3->lasso_score);
      const double hi = std::max(e1->lasso_score, e3->lasso_score);
      c.require(hi > 0.0 && lo < 0.5 * hi, "lasso did not concentrate on one duplicate");
    }
  }
  c.note("planted band in top-5 for 10/10 seeds");
}

// ---------------------------------------------------------------- criterion 7

void criterion_smoke_matrix(Checker& c) {
  Rng rng(707);
  const int per = 20;
  Eigen::MatrixXd X(3 * per, 2);
  std::vector<int> labels;
  const double centers[3][2] = {{0, 0}, {6, 0}, {0, 6}};
  for (int cls = 0; cls < 3; ++cls) {
    for (int i = 0; i < per; ++i) {
      X(cls * per + i, 0) = centers[cls][0] + 1.2 * rng.normal();
      X(cls * per + i, 1) = centers[cls][1] + 1.2 * rng.normal();
      labels.push_back(cls);
    }
  }
  for (int j = 0; j < 2; ++j) {
    const double mu = X.col(j).mean();
    const double sd = std::sqrt((X.col(j).array() - mu).square().sum() / X.rows());
    X.col(j) = (X.col(j).array() - mu) / sd;
  }
  Eigen::MatrixXd queries(40, 2);
  for (int i = 0; i < queries.size(); ++i) queries.data()[i] = rng.uniform(-2.5, 2.5);

  const CostMatrix uniform = CostMatrix::uniform(3);
  int trained = 0;
  bool reductions_hold = true;
  for (const auto& config : ClassifierConfig::all_configurations()) {
    try {
      const TrainedClassifier clf = fit_classifier(config, uniform, X, labels, 3, 5);
      const auto preds = predict_class(clf, queries);
      if (static_cast<int>(preds.size()) == queries.rows()) ++trained;
      if (config.family != ClassifierFamily::Svm) {
        const Eigen::MatrixXd scores = classifier_scores(clf, queries);
        for (int i = 0; i < queries.rows(); ++i) {
          int arg = 0;
          for (int k = 1; k < 3; ++k) {
            if (scores(i, k) > scores(i, arg)) arg = k;
          }
          if (preds[i] != arg) reductions_hold = false;
        }
      }
    } catch (const std::exception& e) {
      c.require(false, config.name() + " failed: " + e.what());
    }
  }
  c.require(trained == 24, "only " + std::to_string(trained) + "/24 configurations trained");
  c.require(reductions_hold, "uniform-cost reduction violated for a probabilistic family");
  c.note("24/24 configurations trained and predicted");
}

// ---------------------------------------------------------------- criterion 8

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing:" + path + ">";
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

bool dirs_identical(const fs::path& a, const fs::path& b, std::string& mismatch) {
  std::vector<fs::path> rel;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (entry.is_regular_file()) rel.push_back(fs::relative(entry.path(), a));
  }
  std::sort(rel.begin(), rel.end());
  for (const auto& r : rel) {
    if (slurp((a / r).string()) != slurp((b / r).string())) {
      mismatch = r.string();
      return false;
    }
  }
  return true;
}

void criterion_cli_determinism(Checker& c) {
  const char* cli = std::getenv("SOILSPEC_CLI");
  if (cli == nullptr) {
    c.require(false, "SOILSPEC_CLI not set");
    return;
  }
  const fs::path work = fs::temp_directory_path() / "soilspec_acceptance_cli";
  fs::remove_all(work);
  fs::create_directories(work);

  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(cli) + " " + args + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };

  json spec = {
      {"n_samples", 90},
      {"grid", {{"start_nm", 400.0}, {"step_nm", 10.0}, {"count", 30}}},
      {"bands",
       json::array({{{"center_nm", 500.0}, {"width_nm", 18.0}, {"amp_min", 0.05}, {"amp_max", 0.25}},
                    {{"center_nm", 660.0}, {"width_nm", 20.0}, {"amp_min", 0.05}, {"amp_max", 0.25}}})},
      {"properties",
       json::array(
           {{{"name", "pH"}, {"band_coefs", {5.0, -2.0}}, {"intercept", 6.0}, {"noise_sigma", 0.01}},
            {{"name", "OM"}, {"band_coefs", {0.0, 9.0}}, {"intercept", 3.3}, {"noise_sigma", 0.02}}})},
      {"seed", 21}};
  {
    std::ofstream out((work / "spec.json").string());
    out << spec.dump();
  }

  // every command twice per jobs value; all outputs must be byte-identical
  c.require(run("synth --spec " + (work / "spec.json").string() + " --out " +
                (work / "data1").string()) == 0, "synth run 1 failed");
  c.require(run("synth --spec " + (work / "spec.json").string() + " --out " +
                (work / "data2").string()) == 0, "synth run 2 failed");
  std::string mismatch;
  c.require(dirs_identical(work / "data1", work / "data2", mismatch),
            "synth outputs differ: " + mismatch);

  const std::string io = " --spectra " + (work / "data1" / "spectra.csv").string() +
                         " --labels " + (work / "data1" / "labels.csv").string() +
                         " --blocks raw,d1,d2 --seed 5 --folds 5";

  struct Cmd {
    std::string name;
    std::string args;
  };
  const std::vector<Cmd> cmds = {
      {"preprocess", "preprocess" + io},
      {"regress", "regress --property pH" + io},
      {"classify", "classify --property pH" + io + " --grid 1:2"},
      {"rank", "rank --properties pH,OM" + io},
  };
  for (const auto& cmd : cmds) {
    std::vector<fs::path> outs;
    for (int jobs : {1, 4}) {
      for (int repeat = 0; repeat < 2; ++repeat) {
        const fs::path out =
            work / (cmd.name + "_j" + std::to_string(jobs) + "_r" + std::to_string(repeat));
        const int code =
            run(cmd.args + " --jobs " + std::to_string(jobs) + " --out " + out.string());
        c.require(code == 0, cmd.name + " exited " + std::to_string(code));
        outs.push_back(out);
      }
    }
    for (std::size_t i = 1; i < outs.size(); ++i) {
      if (!dirs_identical(outs[0], outs[i], mismatch)) {
        c.require(false, cmd.name + " outputs differ (" + mismatch + ")");
        break;
      }
    }
  }
  fs::remove_all(work);
  c.note("synth/preprocess/regress/classify/rank byte-stable for jobs in {1,4}");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<void(Checker&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "solver oracles (OLS, LASSO KKT, SVR grid, PLSR=OLS, MCC=R_K)", criterion_solver_oracles},
      {2, "DFT vs direct oracle and Parseval", criterion_dft},
      {3, "pipeline end-to-end on planted synthetic data", criterion_pipeline_e2e},
      {4, "imbalanced classification cost grid search", criterion_imbalanced},
      {5, "grid cardinalities 117649 and 22500", criterion_grid_cardinalities},
      {6, "feature ranking planted-band recovery", criterion_ranking},
      {7, "smoke matrix: 24 configurations + uniform-cost reduction", criterion_smoke_matrix},
      {8, "CLI byte-reproducibility for jobs in {1,4}", criterion_cli_determinism},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    Checker c;
    try {
      criterion.run(c);
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    const std::string detail = c.detail.str();
    std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << criterion.id << ": "
              << criterion.title;
    if (!detail.empty()) std::cout << " [" << detail << "]";
    std::cout << std::endl;
    failures += c.ok ? 0 : 1;
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed" << std::endl;
  return 0;
}
