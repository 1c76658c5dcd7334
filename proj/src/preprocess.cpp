#include "soilspec/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "soilspec/csv.hpp"
#include "soilspec/fft.hpp"

namespace soilspec {

const char* block_name(Block b) {
  switch (b) {
    case Block::Raw: return "raw";
    case Block::D1: return "d1";
    case Block::D2: return "d2";
    case Block::Fft: return "fft";
  }
  return "?";
}

std::vector<Block> BlockSet::ordered() const {
  std::vector<Block> out;
  if (raw) out.push_back(Block::Raw);
  if (d1) out.push_back(Block::D1);
  if (d2) out.push_back(Block::D2);
  if (fft) out.push_back(Block::Fft);
  return out;
}

BlockSet BlockSet::parse(const std::string& csv_list) {
  BlockSet b{false, false, false, false};
  for (const auto& tok : csv::split_line(csv_list)) {
    if (tok == "raw") b.raw = true;
    else if (tok == "d1") b.d1 = true;
    else if (tok == "d2") b.d2 = true;
    else if (tok == "fft") b.fft = true;
    else throw std::invalid_argument("unknown feature block: '" + tok + "'");
  }
  if (b.enabled_count() == 0) throw std::invalid_argument("no feature blocks enabled");
  return b;
}

std::string BlockSet::to_string() const {
  std::string out;
  for (Block b : ordered()) {
    if (!out.empty()) out += ',';
    out += block_name(b);
  }
  return out;
}

namespace {

std::string wavelength_token(double wl) {
  std::string s = csv::format_double(wl);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::string FeatureId::name() const {
  if (block == Block::Fft) return std::string("fft_bin_") + std::to_string(index);
  return std::string(block_name(block)) + "_" + wavelength_token(wavelength_nm);
}

FeatureId FeatureId::parse(const std::string& name, const WavelengthGrid& grid) {
  auto make = [&](Block b, const std::string& rest) {
    FeatureId id;
    id.block = b;
    if (b == Block::Fft) {
      id.index = std::stoi(rest);
      id.wavelength_nm = 0.0;
    } else {
      double wl;
      if (!csv::parse_double(rest, wl)) throw std::invalid_argument("bad feature name: " + name);
      const double fidx = (wl - grid.start_nm) / grid.step_nm;
      id.index = static_cast<int>(std::lround(fidx));
      if (std::abs(fidx - id.index) > 1e-6) {
        throw std::invalid_argument("feature wavelength off-grid: " + name);
      }
      id.wavelength_nm = grid.wavelength(id.index);
    }
    if (id.index < 0 || id.index >= grid.count) {
      throw std::invalid_argument("feature index out of range: " + name);
    }
    return id;
  };
  if (name.rfind("fft_bin_", 0) == 0) return make(Block::Fft, name.substr(8));
  if (name.rfind("raw_", 0) == 0) return make(Block::Raw, name.substr(4));
  if (name.rfind("d1_", 0) == 0) return make(Block::D1, name.substr(3));
  if (name.rfind("d2_", 0) == 0) return make(Block::D2, name.substr(3));
  throw std::invalid_argument("bad feature name: " + name);
}

std::vector<double> derivative1(const std::vector<double>& f, double step_nm) {
  const int n = static_cast<int>(f.size());
  if (n < 3) throw std::invalid_argument("derivative1 needs at least 3 points");
  if (!(step_nm > 0.0)) throw std::invalid_argument("derivative1 needs step_nm > 0");
  std::vector<double> out(n);
  out[0] = (f[1] - f[0]) / step_nm;
  for (int i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * step_nm);
  out[n - 1] = (f[n - 1] - f[n - 2]) / step_nm;
  return out;
}

std::vector<double> derivative2(const std::vector<double>& f, double step_nm) {
  const int n = static_cast<int>(f.size());
  if (n < 3) throw std::invalid_argument("derivative2 needs at least 3 points");
  if (!(step_nm > 0.0)) throw std::invalid_argument("derivative2 needs step_nm > 0");
  std::vector<double> out(n);
  const double h2 = step_nm * step_nm;
  for (int i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
  out[0] = out[1];
  out[n - 1] = out[n - 2];
  return out;
}

FeatureMatrix assemble_features(const SpectralDataset& ds, const BlockSet& blocks,
                                StandardizationMode mode,
                                const std::vector<ColumnStats>* reference_stats) {
  if (ds.size() == 0) throw std::invalid_argument("assemble_features: empty dataset");
  ds.validate();
  if (blocks.enabled_count() == 0) throw std::invalid_argument("assemble_features: no blocks enabled");

  const int n = ds.size();
  const int bandc = ds.grid.count;
  const auto order = blocks.ordered();
  const int n_features = bandc * static_cast<int>(order.size());

  FeatureMatrix fm;
  fm.mode = mode;
  fm.values.resize(n, n_features);
  fm.columns.reserve(n_features);
  fm.sample_ids.reserve(n);
  for (const auto& s : ds.samples) fm.sample_ids.push_back(s.id);

  for (Block b : order) {
    for (int j = 0; j < bandc; ++j) {
      FeatureId id;
      id.block = b;
      id.index = j;
      id.wavelength_nm = (b == Block::Fft) ? 0.0 : ds.grid.wavelength(j);
      fm.columns.push_back(id);
    }
  }

  for (int i = 0; i < n; ++i) {
    const auto& spec = ds.samples[i].reflectance;
    int col = 0;
    for (Block b : order) {
      std::vector<double> vals;
      switch (b) {
        case Block::Raw: vals = spec; break;
        case Block::D1: vals = derivative1(spec, ds.grid.step_nm); break;
        case Block::D2: vals = derivative2(spec, ds.grid.step_nm); break;
        case Block::Fft: vals = fft_magnitude(spec); break;
      }
      for (int j = 0; j < bandc; ++j) fm.values(i, col++) = vals[j];
    }
  }

  const bool stats_from_self =
      !(mode == StandardizationMode::TrainOnly && reference_stats != nullptr);
  if (stats_from_self) {
    fm.stats.resize(n_features);
    for (int j = 0; j < n_features; ++j) {
      const double mean = fm.values.col(j).mean();
      const double var = (fm.values.col(j).array() - mean).square().sum() / n;
      fm.stats[j] = {mean, std::sqrt(var)};
    }
  } else {
    if (static_cast<int>(reference_stats->size()) != n_features) {
      throw std::invalid_argument("assemble_features: reference stats column count mismatch");
    }
    fm.stats = *reference_stats;
  }

  for (int j = 0; j < n_features; ++j) {
    auto& st = fm.stats[j];
    if (!(st.stddev > 0.0)) {
      fm.values.col(j).setZero();
      fm.zero_variance_columns.push_back(j);
      continue;
    }
    fm.values.col(j) = (fm.values.col(j).array() - st.mean) / st.stddev;
    if (stats_from_self) {
      // a column whose spread is rounding noise cannot be standardized to
      // zero mean / unit variance; treat it as constant
      const double zmean = fm.values.col(j).mean();
      const double zvar = (fm.values.col(j).array() - zmean).square().sum() / n;
      if (std::abs(zmean) > 1e-9 || std::abs(zvar - 1.0) > 1e-9) {
        fm.values.col(j).setZero();
        st.stddev = 0.0;
        fm.zero_variance_columns.push_back(j);
      }
    }
  }
  std::sort(fm.zero_variance_columns.begin(), fm.zero_variance_columns.end());
  return fm;
}

FeatureMatrix FeatureMatrix::restrict_to_blocks(const BlockSet& blocks) const {
  std::vector<int> keep;
  for (int j = 0; j < n_features(); ++j) {
    const Block b = columns[j].block;
    const bool want = (b == Block::Raw && blocks.raw) || (b == Block::D1 && blocks.d1) ||
                      (b == Block::D2 && blocks.d2) || (b == Block::Fft && blocks.fft);
    if (want) keep.push_back(j);
  }
  FeatureMatrix out;
  out.mode = mode;
  out.sample_ids = sample_ids;
  out.values.resize(values.rows(), static_cast<int>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.values.col(static_cast<int>(k)) = values.col(keep[k]);
    out.columns.push_back(columns[keep[k]]);
    out.stats.push_back(stats[keep[k]]);
  }
  for (int z : zero_variance_columns) {
    auto it = std::find(keep.begin(), keep.end(), z);
    if (it != keep.end()) {
      out.zero_variance_columns.push_back(static_cast<int>(it - keep.begin()));
    }
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<int>& rows) const {
  FeatureMatrix out;
  out.mode = mode;
  out.columns = columns;
  out.stats = stats;
  out.zero_variance_columns = zero_variance_columns;
  out.values.resize(static_cast<int>(rows.size()), values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.values.row(static_cast<int>(i)) = values.row(rows[i]);
    out.sample_ids.push_back(sample_ids.at(rows[i]));
  }
  return out;
}

void save_feature_matrix_csv(const FeatureMatrix& fm, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << "id";
  for (const auto& c : fm.columns) out << ',' << c.name();
  out << '\n';
  for (int i = 0; i < fm.n_samples(); ++i) {
    out << fm.sample_ids[i];
    for (int j = 0; j < fm.n_features(); ++j) out << ',' << csv::format_double(fm.values(i, j));
    out << '\n';
  }
}

void save_feature_stats_json(const FeatureMatrix& fm, const std::string& path) {
  nlohmann::json j;
  j["mode"] = fm.mode == StandardizationMode::WholeDataset ? "whole" : "train";
  j["n_features"] = fm.n_features();
  nlohmann::json cols = nlohmann::json::array();
  for (int c = 0; c < fm.n_features(); ++c) {
    cols.push_back({{"name", fm.columns[c].name()},
                    {"mean", fm.stats[c].mean},
                    {"stddev", fm.stats[c].stddev}});
  }
  j["columns"] = std::move(cols);
  j["zero_variance_columns"] = fm.zero_variance_columns;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace soilspec
