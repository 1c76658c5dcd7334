#include "soilspec/dataset.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "soilspec/csv.hpp"
#include "soilspec/rng.hpp"

namespace soilspec {

void WavelengthGrid::validate() const {
  if (count < 3) throw std::invalid_argument("wavelength grid needs count >= 3");
  if (!(step_nm > 0.0)) throw std::invalid_argument("wavelength grid needs step_nm > 0");
  if (!std::isfinite(start_nm) || !std::isfinite(step_nm)) {
    throw std::invalid_argument("wavelength grid has non-finite bounds");
  }
}

Eigen::MatrixXd SpectralDataset::reflectance_matrix() const {
  Eigen::MatrixXd m(size(), grid.count);
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < grid.count; ++j) m(i, j) = samples[i].reflectance[j];
  }
  return m;
}

std::pair<Eigen::VectorXd, std::vector<int>> SpectralDataset::property_values(
    const std::string& name) const {
  std::vector<double> vals;
  std::vector<int> rows;
  for (int i = 0; i < size(); ++i) {
    if (auto v = samples[i].property(name)) {
      vals.push_back(*v);
      rows.push_back(i);
    }
  }
  Eigen::VectorXd y(static_cast<int>(vals.size()));
  for (int i = 0; i < y.size(); ++i) y(i) = vals[i];
  return {y, rows};
}

SpectralDataset SpectralDataset::subset(const std::vector<int>& indices) const {
  SpectralDataset out;
  out.grid = grid;
  out.property_names = property_names;
  out.samples.reserve(indices.size());
  for (int i : indices) out.samples.push_back(samples.at(i));
  return out;
}

void SpectralDataset::validate() const {
  grid.validate();
  std::unordered_set<std::string> ids;
  for (const auto& s : samples) {
    if (static_cast<int>(s.reflectance.size()) != grid.count) {
      throw std::invalid_argument("sample " + s.id + ": reflectance length " +
                                  std::to_string(s.reflectance.size()) +
                                  " does not match grid count " +
                                  std::to_string(grid.count));
    }
    for (double v : s.reflectance) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("sample " + s.id + ": non-finite reflectance");
      }
    }
    if (!ids.insert(s.id).second) {
      throw std::invalid_argument("duplicate sample id: " + s.id);
    }
  }
}

namespace {

WavelengthGrid grid_from_header(const std::vector<std::string>& header) {
  if (header.size() < 4 || header[0] != "id") {
    throw std::invalid_argument("spectra header must be id,<wl_1>,<wl_2>,... with >= 3 bands");
  }
  const int count = static_cast<int>(header.size()) - 1;
  std::vector<double> wl(count);
  for (int i = 0; i < count; ++i) {
    if (!csv::parse_double(header[i + 1], wl[i])) {
      throw std::invalid_argument("spectra header: non-numeric wavelength '" + header[i + 1] + "'");
    }
  }
  const double step = (wl[count - 1] - wl[0]) / (count - 1);
  if (!(step > 0.0)) throw std::invalid_argument("spectra header wavelengths must be strictly increasing");
  for (int i = 1; i < count; ++i) {
    if (wl[i] <= wl[i - 1]) {
      throw std::invalid_argument("spectra header wavelengths must be strictly increasing");
    }
    if (std::abs(wl[i] - (wl[0] + step * i)) > 1e-6) {
      throw std::invalid_argument("spectra header wavelengths must be uniformly spaced within 1e-6 nm");
    }
  }
  WavelengthGrid g{wl[0], step, count};
  g.validate();
  return g;
}

}  // namespace

SpectralDataset load_dataset(const std::string& spectra_path,
                             const std::string& labels_path,
                             std::vector<std::string>* warnings) {
  const auto spectra_rows = csv::read_file(spectra_path);
  if (spectra_rows.empty()) throw std::invalid_argument("spectra file is empty: " + spectra_path);

  SpectralDataset ds;
  ds.grid = grid_from_header(spectra_rows[0]);

  std::unordered_map<std::string, int> row_of_id;
  for (std::size_t r = 1; r < spectra_rows.size(); ++r) {
    const auto& row = spectra_rows[r];
    if (static_cast<int>(row.size()) != ds.grid.count + 1) {
      throw std::invalid_argument("spectra row " + std::to_string(r) +
                                  ": row length mismatch (got " + std::to_string(row.size() - 1) +
                                  " values under a " + std::to_string(ds.grid.count) + "-column header)");
    }
    SoilSample s;
    s.id = row[0];
    s.reflectance.resize(ds.grid.count);
    for (int j = 0; j < ds.grid.count; ++j) {
      if (!csv::parse_double(row[j + 1], s.reflectance[j])) {
        throw std::invalid_argument("spectra row " + std::to_string(r) + " (id " + s.id +
                                    "): non-numeric cell '" + row[j + 1] + "'");
      }
    }
    if (!row_of_id.emplace(s.id, static_cast<int>(ds.samples.size())).second) {
      throw std::invalid_argument("duplicate sample id: " + s.id);
    }
    ds.samples.push_back(std::move(s));
  }

  const auto label_rows = csv::read_file(labels_path);
  if (!label_rows.empty()) {
    const auto& header = label_rows[0];
    if (header.empty() || header[0] != "id") {
      throw std::invalid_argument("labels header must start with an id column");
    }
    ds.property_names.assign(header.begin() + 1, header.end());
    std::unordered_set<std::string> seen;
    for (std::size_t r = 1; r < label_rows.size(); ++r) {
      const auto& row = label_rows[r];
      if (row.size() != header.size()) {
        throw std::invalid_argument("labels row " + std::to_string(r) + ": expected " +
                                    std::to_string(header.size()) + " cells, got " +
                                    std::to_string(row.size()));
      }
      if (!seen.insert(row[0]).second) {
        throw std::invalid_argument("duplicate id in labels file: " + row[0]);
      }
      auto it = row_of_id.find(row[0]);
      if (it == row_of_id.end()) {
        if (warnings) warnings->push_back("labels id '" + row[0] + "' not present in spectra; skipped");
        continue;
      }
      SoilSample& s = ds.samples[it->second];
      for (std::size_t c = 1; c < row.size(); ++c) {
        if (row[c].empty()) continue;  // missing value
        double v;
        if (!csv::parse_double(row[c], v)) {
          throw std::invalid_argument("labels row " + std::to_string(r) + " (id " + row[0] +
                                      "): non-numeric cell '" + row[c] + "'");
        }
        s.properties[ds.property_names[c - 1]] = v;
      }
    }
  }

  ds.validate();
  return ds;
}

void save_dataset(const SpectralDataset& ds, const std::string& spectra_path,
                  const std::string& labels_path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ds.samples.size() + 1);
  std::vector<std::string> header{"id"};
  for (int j = 0; j < ds.grid.count; ++j) header.push_back(csv::format_double(ds.grid.wavelength(j)));
  rows.push_back(std::move(header));
  for (const auto& s : ds.samples) {
    std::vector<std::string> row{s.id};
    for (double v : s.reflectance) row.push_back(csv::format_double(v));
    rows.push_back(std::move(row));
  }
  csv::write_file(spectra_path, rows);

  rows.clear();
  std::vector<std::string> lheader{"id"};
  for (const auto& p : ds.property_names) lheader.push_back(p);
  rows.push_back(std::move(lheader));
  for (const auto& s : ds.samples) {
    std::vector<std::string> row{s.id};
    for (const auto& p : ds.property_names) {
      auto v = s.property(p);
      row.push_back(v ? csv::format_double(*v) : std::string());
    }
    rows.push_back(std::move(row));
  }
  csv::write_file(labels_path, rows);
}

std::pair<SpectralDataset, SpectralDataset> split_train_test(
    const SpectralDataset& ds, double train_fraction, std::uint64_t seed) {
  if (ds.size() == 0) throw std::invalid_argument("cannot split an empty dataset");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0,1)");
  }
  const int n = ds.size();
  const int n_train = static_cast<int>(std::floor(train_fraction * n));

  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);

  std::vector<int> train_idx(idx.begin(), idx.begin() + n_train);
  std::vector<int> test_idx(idx.begin() + n_train, idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {ds.subset(train_idx), ds.subset(test_idx)};
}

}  // namespace soilspec
