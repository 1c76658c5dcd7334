#pragma once

#include <string>
#include <vector>

#include "soilspec/runconfig.hpp"

namespace soilspec {

// Batch commands behind the CLI. Each writes deterministic files under
// cfg.out_dir (byte-identical for fixed seed and any jobs value) and throws
// std::invalid_argument on validation problems, std::runtime_error on
// numeric/runtime failures.

// spectra.csv + labels.csv from a synth spec
void cmd_synth(const std::string& spec_path, const std::string& out_dir);

// features.csv + feature_stats.json
void cmd_preprocess(const RunConfig& cfg);

// regress_<property>/: report.json, predicted_vs_true.csv, model_*.json
void cmd_regress(const RunConfig& cfg, const std::string& property);

// classify_<property>/: sweep.json, sweep_metrics.csv, confusion_*.csv,
// gridsearch.json, grid_surface.csv, checkpoint.jsonl, best_classifier.json
void cmd_classify(const RunConfig& cfg, const std::string& property);

// rank/: ranking_<property>.json per property + heatmap.csv
void cmd_rank(const RunConfig& cfg, const std::vector<std::string>& properties);

}  // namespace soilspec
