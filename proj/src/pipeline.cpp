#include "soilspec/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "soilspec/csv.hpp"
#include "soilspec/dataset.hpp"
#include "soilspec/detail/classifier_models.hpp"
#include "soilspec/evaluation.hpp"
#include "soilspec/parallel.hpp"
#include "soilspec/ranking.hpp"
#include "soilspec/synthgen.hpp"
#include "soilspec/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace soilspec {

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " + dir);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << text;
}

json metrics_to_json(const RegressionMetrics& m) {
  json j;
  j["rho"] = m.pearson_rho ? json(*m.pearson_rho) : json();
  j["r_squared"] = m.r_squared ? json(*m.r_squared) : json();
  j["mse"] = m.mse;
  return j;
}

json opt_to_json(const std::optional<double>& v) { return v ? json(*v) : json(); }

json class_metrics_to_json(const ClassMetrics& m) {
  return {{"tpr", opt_to_json(m.tpr)},
          {"tnr", opt_to_json(m.tnr)},
          {"ppv", opt_to_json(m.ppv)},
          {"npv", opt_to_json(m.npv)},
          {"f1", opt_to_json(m.f1)}};
}

json confusion_to_json(const ConfusionMatrix& cm) {
  json rows = json::array();
  for (int i = 0; i < cm.counts.rows(); ++i) {
    std::vector<int> row(cm.counts.cols());
    for (int c = 0; c < cm.counts.cols(); ++c) row[c] = cm.counts(i, c);
    rows.push_back(row);
  }
  return rows;
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& names,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << "true\\predicted";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (int i = 0; i < cm.counts.rows(); ++i) {
    out << names[i];
    for (int c = 0; c < cm.counts.cols(); ++c) out << ',' << cm.counts(i, c);
    out << '\n';
  }
}

struct SplitMatrices {
  Eigen::MatrixXd x_train, x_test;
  Eigen::VectorXd y_train, y_test;
  std::vector<std::string> train_ids, test_ids;
  std::vector<FeatureId> columns;
  std::vector<ColumnStats> stats;
};

// Features + complete-case targets for both splits. Whole-dataset mode
// standardizes before splitting (the paper's protocol); train-only mode
// derives the statistics from the training split and applies them unchanged
// to the test split.
SplitMatrices split_features(const SpectralDataset& ds, const RunConfig& cfg,
                             const std::string& property) {
  const auto [train_ds, test_ds] = split_train_test(ds, cfg.split_fraction, cfg.seed);

  SplitMatrices out;
  auto fill_side = [&](const SpectralDataset& side, const FeatureMatrix& fm, Eigen::MatrixXd& X,
                       Eigen::VectorXd& y, std::vector<std::string>& ids) {
    const auto [vals, rows] = side.property_values(property);
    const FeatureMatrix sub = fm.select_rows(rows);
    X = sub.values;
    y = vals;
    ids = sub.sample_ids;
  };

  if (cfg.std_mode == StandardizationMode::WholeDataset) {
    const FeatureMatrix full = assemble_features(ds, cfg.blocks, cfg.std_mode);
    std::unordered_map<std::string, int> row_of;
    for (int i = 0; i < full.n_samples(); ++i) row_of[full.sample_ids[i]] = i;
    auto rows_of = [&](const SpectralDataset& side) {
      std::vector<int> rows;
      rows.reserve(side.samples.size());
      for (const auto& s : side.samples) rows.push_back(row_of.at(s.id));
      return rows;
    };
    const FeatureMatrix train_fm = full.select_rows(rows_of(train_ds));
    const FeatureMatrix test_fm = full.select_rows(rows_of(test_ds));
    fill_side(train_ds, train_fm, out.x_train, out.y_train, out.train_ids);
    fill_side(test_ds, test_fm, out.x_test, out.y_test, out.test_ids);
    out.columns = full.columns;
    out.stats = full.stats;
  } else {
    const FeatureMatrix train_fm = assemble_features(train_ds, cfg.blocks, cfg.std_mode);
    const FeatureMatrix test_fm =
        assemble_features(test_ds, cfg.blocks, cfg.std_mode, &train_fm.stats);
    fill_side(train_ds, train_fm, out.x_train, out.y_train, out.train_ids);
    fill_side(test_ds, test_fm, out.x_test, out.y_test, out.test_ids);
    out.columns = train_fm.columns;
    out.stats = train_fm.stats;
  }
  return out;
}

void apply_log_target(Eigen::VectorXd& y, const std::string& property) {
  for (int i = 0; i < y.size(); ++i) {
    if (!(y(i) > 0.0)) {
      throw std::invalid_argument("--log-target: property '" + property +
                                  "' has non-positive values");
    }
    y(i) = std::log(y(i));
  }
}

}  // namespace

void cmd_synth(const std::string& spec_path, const std::string& out_dir) {
  const SynthSpec spec = load_synth_spec(spec_path);
  const SpectralDataset ds = generate(spec);
  ensure_dir(out_dir);
  save_dataset(ds, (fs::path(out_dir) / "spectra.csv").string(),
               (fs::path(out_dir) / "labels.csv").string());
}

void cmd_preprocess(const RunConfig& cfg) {
  std::vector<std::string> warnings;
  const SpectralDataset ds = load_dataset(cfg.spectra_path, cfg.labels_path, &warnings);
  const FeatureMatrix fm = assemble_features(ds, cfg.blocks, cfg.std_mode);
  ensure_dir(cfg.out_dir);
  save_feature_matrix_csv(fm, (fs::path(cfg.out_dir) / "features.csv").string());
  save_feature_stats_json(fm, (fs::path(cfg.out_dir) / "feature_stats.json").string());
  if (!warnings.empty()) {
    json j = warnings;
    write_text((fs::path(cfg.out_dir) / "load_warnings.json").string(), j.dump(2) + "\n");
  }
}

void cmd_regress(const RunConfig& cfg, const std::string& property) {
  const SpectralDataset ds = load_dataset(cfg.spectra_path, cfg.labels_path);
  SplitMatrices sm = split_features(ds, cfg, property);
  if (sm.y_train.size() < std::max(2, cfg.folds)) {
    throw std::invalid_argument("property '" + property + "' has too few labeled training samples");
  }
  if (cfg.log_target) {
    apply_log_target(sm.y_train, property);
    apply_log_target(sm.y_test, property);
  }

  CompareOptions opts;
  opts.folds = cfg.folds;
  opts.seed = cfg.seed;
  opts.plsr = cfg.plsr;
  {
    RegressorSpec ols;
    ols.kind = RegressorKind::Ols;
    RegressorSpec svr;
    svr.kind = RegressorKind::Svr;
    svr.svr = cfg.svr;
    RegressorSpec lasso;
    lasso.kind = RegressorKind::Lasso;
    lasso.lasso = cfg.lasso;
    lasso.lasso.seed = cfg.seed;
    opts.candidates = {ols, svr, lasso};
  }

  const RegressorComparison cmp =
      compare_regressors(sm.x_train, sm.y_train, sm.x_test, sm.y_test, opts);

  const fs::path dir = fs::path(cfg.out_dir) / ("regress_" + property);
  ensure_dir(dir.string());

  json report;
  report["toolkit_version"] = kVersion;
  report["property"] = property;
  report["status"] = cmp.status;
  report["gate_rho"] = cmp.gate_threshold;
  report["log_target"] = cfg.log_target;
  report["n_train"] = static_cast<int>(sm.y_train.size());
  report["n_test"] = static_cast<int>(sm.y_test.size());
  json cands = json::array();
  for (const auto& c : cmp.candidate_cv) {
    json cj;
    cj["kind"] = regressor_kind_name(c.kind);
    cj["median_rho"] = opt_to_json(c.cv.median_rho);
    cj["rho_stddev"] = opt_to_json(c.cv.rho_stddev);
    cj["median_r2"] = opt_to_json(c.cv.median_r2);
    cj["median_mse"] = c.cv.median_mse;
    json folds = json::array();
    for (const auto& f : c.cv.per_fold) folds.push_back(metrics_to_json(f));
    cj["per_fold"] = std::move(folds);
    cands.push_back(std::move(cj));
  }
  report["candidates"] = std::move(cands);

  if (cmp.status == "selected") {
    report["selected"] = regressor_kind_name(cmp.selected);
    json reports = json::array();
    for (const auto& r : cmp.reports) {
      json rj;
      rj["kind"] = regressor_kind_name(r.kind);
      rj["test"] = metrics_to_json(r.test_metrics);
      rj["rho_ci"] = {opt_to_json(r.rho_ci_low), opt_to_json(r.rho_ci_high)};
      rj["r2_ci"] = {opt_to_json(r.r2_ci_low), opt_to_json(r.r2_ci_high)};
      rj["mse_ci"] = {r.mse_ci_low, r.mse_ci_high};
      reports.push_back(std::move(rj));
    }
    report["reports"] = std::move(reports);

    // predicted-vs-true pairs for plotting
    std::ofstream pv((dir / "predicted_vs_true.csv").string(), std::ios::binary);
    pv << "id,true";
    for (const auto& r : cmp.reports) pv << ',' << regressor_kind_name(r.kind);
    pv << '\n';
    for (int i = 0; i < sm.y_test.size(); ++i) {
      pv << sm.test_ids[i] << ',' << csv::format_double(sm.y_test(i));
      for (const auto& r : cmp.reports) pv << ',' << csv::format_double(r.predictions(i));
      pv << '\n';
    }

    // refit and persist the three compared models with their provenance
    std::vector<std::string> names;
    names.reserve(sm.columns.size());
    for (const auto& c : sm.columns) names.push_back(c.name());
    for (const auto& r : cmp.reports) {
      RegressorSpec spec;
      spec.kind = r.kind;
      spec.svr = cfg.svr;
      spec.lasso = cfg.lasso;
      spec.lasso.seed = cfg.seed;
      spec.plsr = cfg.plsr;
      spec.plsr.n_components =
          std::min<int>(spec.plsr.n_components,
                        std::min<int>(static_cast<int>(sm.x_train.rows()) - 1,
                                      static_cast<int>(sm.x_train.cols())));
      RegressionModel model = fit_regressor(spec, sm.x_train, sm.y_train);
      model.feature_names = names;
      model.standardization = sm.stats;
      save_model(model, (dir / ("model_" + std::string(regressor_kind_name(r.kind)) + ".json")).string());
    }
  }
  write_text((dir / "report.json").string(), report.dump(2) + "\n");
}

void cmd_classify(const RunConfig& cfg, const std::string& property) {
  const SpectralDataset ds = load_dataset(cfg.spectra_path, cfg.labels_path);
  const FeatureMatrix fm = assemble_features(ds, cfg.blocks, StandardizationMode::WholeDataset);
  const ClassScheme scheme = cfg.scheme_for(property);
  scheme.validate();

  const auto [vals, rows] = ds.property_values(property);
  if (vals.size() < cfg.folds) {
    throw std::invalid_argument("property '" + property + "' has too few labeled samples");
  }
  const FeatureMatrix sub = fm.select_rows(rows);
  const Eigen::MatrixXd& X = sub.values;

  std::vector<int> raw_labels(vals.size());
  for (int i = 0; i < vals.size(); ++i) raw_labels[i] = scheme.assign(vals(i));

  // classes with no labeled samples are dropped (K reduced, with a warning)
  std::vector<int> counts(scheme.n_classes(), 0);
  for (int l : raw_labels) ++counts[l];
  std::vector<int> class_map(scheme.n_classes(), -1);
  std::vector<std::string> used_names;
  std::vector<std::string> warnings;
  int k_used = 0;
  for (int c = 0; c < scheme.n_classes(); ++c) {
    if (counts[c] > 0) {
      class_map[c] = k_used++;
      used_names.push_back(scheme.class_names[c]);
    } else {
      warnings.push_back("class '" + scheme.class_names[c] + "' has no samples; K reduced");
    }
  }
  if (k_used < 2) {
    throw std::invalid_argument("property '" + property + "' yields fewer than 2 populated classes");
  }
  std::vector<int> labels(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) labels[i] = class_map[raw_labels[i]];

  const fs::path dir = fs::path(cfg.out_dir) / ("classify_" + property);
  ensure_dir(dir.string());

  std::vector<ClassifierConfig> configs;
  if (cfg.classifiers.empty()) {
    configs = ClassifierConfig::all_configurations();
  } else {
    for (const auto& name : cfg.classifiers) configs.push_back(ClassifierConfig::parse(name));
  }

  // uniform-cost sweep over the configuration list
  const CostMatrix uniform = CostMatrix::uniform(k_used);
  std::vector<CvClassificationResult> sweep(configs.size());
  parallel_for(0, static_cast<int>(configs.size()), cfg.jobs, [&](int i) {
    sweep[i] = kfold_cv_classification(configs[i], uniform, X, labels, k_used, cfg.folds, cfg.seed);
  });

  int best = 0;
  for (std::size_t i = 1; i < configs.size(); ++i) {
    if (sweep[i].metrics.mcc > sweep[best].metrics.mcc) best = static_cast<int>(i);
  }

  json sweep_json;
  sweep_json["toolkit_version"] = kVersion;
  sweep_json["property"] = property;
  sweep_json["classes"] = used_names;
  sweep_json["class_counts"] = counts;
  sweep_json["warnings"] = warnings;
  sweep_json["folds"] = cfg.folds;
  sweep_json["seed"] = cfg.seed;
  json sweep_entries = json::array();
  {
    std::ofstream mt((dir / "sweep_metrics.csv").string(), std::ios::binary);
    mt << "config,tpr,tnr,ppv,npv,acc,f1,mcc\n";
    auto fmt = [](const std::optional<double>& v) {
      return v ? csv::format_double(*v) : std::string();
    };
    for (std::size_t i = 0; i < configs.size(); ++i) {
      const auto& m = sweep[i].metrics;
      json e;
      e["config"] = configs[i].name();
      e["mcc"] = m.mcc;
      e["accuracy"] = m.accuracy;
      e["macro"] = class_metrics_to_json(m.macro);
      json per_class = json::array();
      for (const auto& pc : m.per_class) per_class.push_back(class_metrics_to_json(pc));
      e["per_class"] = std::move(per_class);
      e["confusion"] = confusion_to_json(sweep[i].aggregate);
      e["warnings"] = sweep[i].warnings;
      sweep_entries.push_back(std::move(e));
      mt << configs[i].name() << ',' << fmt(m.macro.tpr) << ',' << fmt(m.macro.tnr) << ','
         << fmt(m.macro.ppv) << ',' << fmt(m.macro.npv) << ',' << csv::format_double(m.accuracy)
         << ',' << fmt(m.macro.f1) << ',' << csv::format_double(m.mcc) << '\n';
      write_confusion_csv(sweep[i].aggregate, used_names,
                          (dir / ("confusion_" + configs[i].name() + ".csv")).string());
    }
  }
  sweep_json["configurations"] = std::move(sweep_entries);
  sweep_json["best_config"] = configs[best].name();
  sweep_json["best_uniform_mcc"] = sweep[best].metrics.mcc;
  write_text((dir / "sweep.json").string(), sweep_json.dump(2) + "\n");

  // misclassification-cost grid search on the winning configuration
  const std::vector<double> grid_values =
      cfg.grid_values.empty() ? std::vector<double>{1.0, 3.0, 5.0} : cfg.grid_values;
  const GridSearchSpec grid = GridSearchSpec::uniform(k_used, grid_values);
  GridSearchOptions gopts;
  gopts.folds = cfg.folds;
  gopts.seed = cfg.seed;
  gopts.jobs = cfg.jobs;
  gopts.checkpoint_path = (dir / "checkpoint.jsonl").string();
  gopts.checkpoint_interval = cfg.checkpoint_interval;
  const GridSearchResult gres = cost_grid_search(configs[best], X, labels, k_used, grid, gopts);

  json gj;
  gj["config"] = configs[best].name();
  gj["grid_values"] = grid_values;
  gj["n_points"] = grid.n_points();
  gj["points_evaluated"] = gres.points_evaluated;
  gj["points_resumed"] = gres.points_resumed;
  gj["best_mcc"] = gres.best_mcc;
  gj["best_index"] = gres.best_index;
  gj["uniform_mcc"] = sweep[best].metrics.mcc;
  gj["best_cost"] = soilspec::detail::matrix_to_json(gres.best_cost.costs);
  gj["warnings"] = gres.warnings;
  write_text((dir / "gridsearch.json").string(), gj.dump(2) + "\n");

  {
    std::ofstream surf((dir / "grid_surface.csv").string(), std::ios::binary);
    for (int t = 0; t < k_used; ++t) {
      for (int p = 0; p < k_used; ++p) {
        if (t != p) surf << "cost_" << t << '_' << p << ',';
      }
    }
    surf << "mcc\n";
    for (const auto& point : gres.per_point) {
      for (double c : point.cost_vector) surf << csv::format_double(c) << ',';
      surf << csv::format_double(point.mcc) << '\n';
    }
  }

  const auto& best_point = gres.per_point.at(gres.best_index);
  write_confusion_csv(best_point.confusion, used_names, (dir / "confusion_best.csv").string());

  TrainedClassifier final_clf =
      fit_classifier(configs[best], gres.best_cost, X, labels, k_used, cfg.seed);
  save_classifier(final_clf, (dir / "best_classifier.json").string());
}

void cmd_rank(const RunConfig& cfg, const std::vector<std::string>& properties) {
  if (properties.empty()) throw std::invalid_argument("rank: no properties given");
  const SpectralDataset ds = load_dataset(cfg.spectra_path, cfg.labels_path);
  BlockSet blocks = cfg.blocks;
  if (!blocks.d1 && !blocks.d2) {
    throw std::invalid_argument("rank: the feature blocks must include d1 or d2");
  }
  const FeatureMatrix fm = assemble_features(ds, blocks, StandardizationMode::WholeDataset);

  const fs::path dir = fs::path(cfg.out_dir) / "rank";
  ensure_dir(dir.string());

  RankingOptions opts;
  opts.seed = cfg.seed;
  opts.lasso_folds = cfg.folds;

  std::vector<FeatureRanking> rankings(properties.size());
  parallel_for(0, static_cast<int>(properties.size()), cfg.jobs, [&](int i) {
    const auto [vals, rows] = ds.property_values(properties[i]);
    if (vals.size() < 3) {
      throw std::invalid_argument("property '" + properties[i] + "' has too few labeled samples");
    }
    const FeatureMatrix sub = fm.select_rows(rows);
    rankings[i] = rank_features(sub, vals, properties[i], opts);
  });

  for (const auto& r : rankings) {
    save_ranking_json(r, (dir / ("ranking_" + r.property + ".json")).string());
  }
  ranking_heatmap_export(rankings, ds.grid, (dir / "heatmap.csv").string());
}

}  // namespace soilspec
