#include "soilspec/runconfig.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "soilspec/csv.hpp"

namespace soilspec {

ClassScheme RunConfig::scheme_for(const std::string& property) const {
  auto it = schemes.find(property);
  if (it != schemes.end()) return it->second;
  const auto& defaults = ClassScheme::defaults();
  auto dit = defaults.find(property);
  if (dit != defaults.end()) return dit->second;
  throw std::invalid_argument("no class scheme for property '" + property +
                              "'; supply one in the run config");
}

std::vector<double> parse_grid_values(const std::string& text) {
  std::vector<double> values;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    double lo, hi;
    if (!csv::parse_double(text.substr(0, colon), lo) ||
        !csv::parse_double(text.substr(colon + 1), hi) || hi < lo) {
      throw std::invalid_argument("bad grid range: '" + text + "' (expected lo:hi)");
    }
    for (double v = lo; v <= hi + 1e-9; v += 1.0) values.push_back(v);
  } else {
    for (const auto& tok : csv::split_line(text)) {
      double v;
      if (!csv::parse_double(tok, v)) {
        throw std::invalid_argument("bad grid value: '" + tok + "'");
      }
      values.push_back(v);
    }
  }
  if (values.empty()) throw std::invalid_argument("empty grid specification");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] <= values[i - 1]) {
      throw std::invalid_argument("grid values must be strictly ascending");
    }
  }
  return values;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config parse error: " + std::string(e.what()));
  }

  RunConfig cfg;
  cfg.spectra_path = j.value("spectra", "");
  cfg.labels_path = j.value("labels", "");
  cfg.out_dir = j.value("out_dir", "");
  if (j.contains("blocks")) {
    std::string list;
    for (const auto& b : j["blocks"]) {
      if (!list.empty()) list += ',';
      list += b.get<std::string>();
    }
    cfg.blocks = BlockSet::parse(list);
  }
  const std::string mode = j.value("std_mode", "whole");
  if (mode == "whole") cfg.std_mode = StandardizationMode::WholeDataset;
  else if (mode == "train") cfg.std_mode = StandardizationMode::TrainOnly;
  else throw std::invalid_argument("std_mode must be 'whole' or 'train'");

  cfg.split_fraction = j.value("split_fraction", 0.7);
  cfg.seed = j.value("seed", 0ULL);
  cfg.folds = j.value("folds", 5);
  cfg.jobs = j.value("jobs", 1);

  if (j.contains("schemes")) {
    for (const auto& [prop, sj] : j["schemes"].items()) {
      ClassScheme s;
      s.property = prop;
      s.thresholds = sj.at("thresholds").get<std::vector<double>>();
      s.class_names = sj.at("classes").get<std::vector<std::string>>();
      s.validate();
      cfg.schemes[prop] = std::move(s);
    }
  }

  if (j.contains("svr")) {
    cfg.svr.C = j["svr"].value("C", cfg.svr.C);
    cfg.svr.epsilon = j["svr"].value("epsilon", cfg.svr.epsilon);
    cfg.svr.tol = j["svr"].value("tol", cfg.svr.tol);
    cfg.svr.max_passes = j["svr"].value("max_passes", cfg.svr.max_passes);
  }
  if (j.contains("lasso")) {
    cfg.lasso.n_lambdas = j["lasso"].value("n_lambdas", cfg.lasso.n_lambdas);
    cfg.lasso.path_eps = j["lasso"].value("path_eps", cfg.lasso.path_eps);
    cfg.lasso.folds = j["lasso"].value("folds", cfg.lasso.folds);
  }
  if (j.contains("plsr")) {
    cfg.plsr.n_components = j["plsr"].value("n_components", cfg.plsr.n_components);
    cfg.plsr.max_iter = j["plsr"].value("max_iter", cfg.plsr.max_iter);
    cfg.plsr.inner_tol = j["plsr"].value("inner_tol", cfg.plsr.inner_tol);
  }

  cfg.classifiers = j.value("classifiers", std::vector<std::string>{});
  for (const auto& name : cfg.classifiers) ClassifierConfig::parse(name);  // validate early

  if (j.contains("grid")) {
    if (j["grid"].is_string()) cfg.grid_values = parse_grid_values(j["grid"].get<std::string>());
    else cfg.grid_values = j["grid"].get<std::vector<double>>();
  }
  cfg.checkpoint_interval = j.value("checkpoint_interval", 1000);
  cfg.log_target = j.value("log_target", false);
  return cfg;
}

void RunConfig::save_json(const std::string& path) const {
  nlohmann::json j;
  j["spectra"] = spectra_path;
  j["labels"] = labels_path;
  j["out_dir"] = out_dir;
  nlohmann::json blocks_j = nlohmann::json::array();
  for (Block b : blocks.ordered()) blocks_j.push_back(block_name(b));
  j["blocks"] = std::move(blocks_j);
  j["std_mode"] = std_mode == StandardizationMode::WholeDataset ? "whole" : "train";
  j["split_fraction"] = split_fraction;
  j["seed"] = seed;
  j["folds"] = folds;
  j["jobs"] = jobs;
  nlohmann::json schemes_j;
  for (const auto& [prop, s] : schemes) {
    schemes_j[prop] = {{"thresholds", s.thresholds}, {"classes", s.class_names}};
  }
  j["schemes"] = std::move(schemes_j);
  j["svr"] = {{"C", svr.C}, {"epsilon", svr.epsilon}, {"tol", svr.tol}, {"max_passes", svr.max_passes}};
  j["lasso"] = {{"n_lambdas", lasso.n_lambdas}, {"path_eps", lasso.path_eps}, {"folds", lasso.folds}};
  j["plsr"] = {{"n_components", plsr.n_components},
               {"max_iter", plsr.max_iter},
               {"inner_tol", plsr.inner_tol}};
  j["classifiers"] = classifiers;
  j["grid"] = grid_values;
  j["checkpoint_interval"] = checkpoint_interval;
  j["log_target"] = log_target;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace soilspec
