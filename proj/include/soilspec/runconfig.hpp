#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "soilspec/classification.hpp"
#include "soilspec/preprocess.hpp"
#include "soilspec/regression.hpp"

namespace soilspec {

// Everything a batch run needs; a run is reproducible from (RunConfig, input
// files) alone. JSON-serializable; CLI flags override individual fields.
struct RunConfig {
  std::string spectra_path;
  std::string labels_path;
  std::string out_dir;  // resolution order: --out flag, config, $SOILSPEC_OUT, "out"

  BlockSet blocks = BlockSet::all();
  StandardizationMode std_mode = StandardizationMode::WholeDataset;
  double split_fraction = 0.7;
  std::uint64_t seed = 0;
  int folds = 5;
  int jobs = 1;

  std::map<std::string, ClassScheme> schemes;  // on top of the shipped defaults

  SvrOptions svr;
  LassoOptions lasso;
  PlsrOptions plsr;

  std::vector<std::string> classifiers;  // empty = all 24 configurations
  std::vector<double> grid_values;       // empty = coarse default {1,3,5}
  int checkpoint_interval = 1000;
  bool log_target = false;

  ClassScheme scheme_for(const std::string& property) const;

  static RunConfig from_json_file(const std::string& path);
  void save_json(const std::string& path) const;
};

// "lo:hi" ranges or comma lists ("1,3,5,7"); values must be ascending.
std::vector<double> parse_grid_values(const std::string& text);

}  // namespace soilspec
