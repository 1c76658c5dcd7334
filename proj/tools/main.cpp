#include <cstdlib>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "soilspec/csv.hpp"
#include "soilspec/pipeline.hpp"
#include "soilspec/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct CommonFlags {
  std::string config_path;
  std::string spectra, labels, out;
  std::string blocks, std_mode, grid;
  bool coarse = false;
  bool log_target = false;
  std::int64_t seed = -1;
  int folds = -1;
  int jobs = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool wants_grid) {
  cmd->add_option("--config", f.config_path, "Run configuration JSON");
  cmd->add_option("--spectra", f.spectra, "Spectra CSV path (overrides config)");
  cmd->add_option("--labels", f.labels, "Labels CSV path (overrides config)");
  cmd->add_option("--out", f.out, "Output directory (overrides config and $SOILSPEC_OUT)");
  cmd->add_option("--blocks", f.blocks, "Feature blocks, e.g. raw,d1,d2,fft");
  cmd->add_option("--std-mode", f.std_mode, "Standardization mode: whole|train")
      ->check(CLI::IsMember({"whole", "train"}));
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--folds", f.folds, "Cross-validation folds");
  cmd->add_option("--jobs", f.jobs, "Worker threads for parallel sections");
  if (wants_grid) {
    cmd->add_option("--grid", f.grid, "Cost grid values: lo:hi or v1,v2,...");
    cmd->add_flag("--coarse", f.coarse, "Use the coarse {1,3,5} cost grid");
  }
}

soilspec::RunConfig resolve_config(const CommonFlags& f) {
  soilspec::RunConfig cfg;
  if (!f.config_path.empty()) cfg = soilspec::RunConfig::from_json_file(f.config_path);
  if (!f.spectra.empty()) cfg.spectra_path = f.spectra;
  if (!f.labels.empty()) cfg.labels_path = f.labels;
  if (!f.out.empty()) {
    cfg.out_dir = f.out;
  } else if (cfg.out_dir.empty()) {
    const char* env = std::getenv("SOILSPEC_OUT");
    cfg.out_dir = env != nullptr && *env ? env : "out";
  }
  if (!f.blocks.empty()) cfg.blocks = soilspec::BlockSet::parse(f.blocks);
  if (!f.std_mode.empty()) {
    cfg.std_mode = f.std_mode == "train" ? soilspec::StandardizationMode::TrainOnly
                                         : soilspec::StandardizationMode::WholeDataset;
  }
  if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
  if (f.folds > 0) cfg.folds = f.folds;
  if (f.jobs > 0) cfg.jobs = f.jobs;
  if (f.coarse) cfg.grid_values = {1.0, 3.0, 5.0};
  if (!f.grid.empty()) cfg.grid_values = soilspec::parse_grid_values(f.grid);
  if (f.log_target) cfg.log_target = true;
  if (cfg.spectra_path.empty() || cfg.labels_path.empty()) {
    throw std::invalid_argument("spectra and labels paths are required (flags or config)");
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soilspec: vis-NIR soil spectroscopy toolkit"};
  app.set_version_flag("--version", soilspec::kVersion);
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic spectral dataset");
  std::string synth_spec;
  std::string synth_out;
  synth->add_option("--spec", synth_spec, "Synth spec JSON")->required();
  synth->add_option("--out", synth_out, "Output directory");

  // preprocess
  auto* preprocess = app.add_subcommand("preprocess", "Assemble the standardized feature matrix");
  CommonFlags pre_flags;
  add_common(preprocess, pre_flags, false);

  // regress
  auto* regress = app.add_subcommand("regress", "Regression model selection and comparison");
  CommonFlags reg_flags;
  std::string reg_property;
  add_common(regress, reg_flags, false);
  regress->add_flag("--log-target", reg_flags.log_target, "Fit the property in log space");
  regress->add_option("--property", reg_property, "Property to regress (e.g. pH)")->required();

  // classify
  auto* classify = app.add_subcommand("classify", "Cost-sensitive classification sweep + grid search");
  CommonFlags cls_flags;
  std::string cls_property;
  add_common(classify, cls_flags, true);
  classify->add_option("--property", cls_property, "Property to classify")->required();

  // rank
  auto* rank = app.add_subcommand("rank", "Composite derivative-feature ranking");
  CommonFlags rank_flags;
  std::string rank_properties;
  add_common(rank, rank_flags, false);
  rank->add_option("--properties", rank_properties, "Comma-separated property list")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (synth->parsed()) {
      std::string out = synth_out;
      if (out.empty()) {
        const char* env = std::getenv("SOILSPEC_OUT");
        out = env != nullptr && *env ? env : "out";
      }
      soilspec::cmd_synth(synth_spec, out);
    } else if (preprocess->parsed()) {
      soilspec::cmd_preprocess(resolve_config(pre_flags));
    } else if (regress->parsed()) {
      soilspec::cmd_regress(resolve_config(reg_flags), reg_property);
    } else if (classify->parsed()) {
      soilspec::cmd_classify(resolve_config(cls_flags), cls_property);
    } else if (rank->parsed()) {
      std::vector<std::string> props;
      for (const auto& p : soilspec::csv::split_line(rank_properties)) {
        if (!p.empty()) props.push_back(p);
      }
      soilspec::cmd_rank(resolve_config(rank_flags), props);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
