#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace soilspec {

// Uniform wavelength axis of a spectrum. The canonical instrument grid runs
// 400..2491 nm in 8.5 nm steps (247 bands).
struct WavelengthGrid {
  double start_nm = 0.0;
  double step_nm = 0.0;
  int count = 0;

  double wavelength(int i) const { return start_nm + step_nm * i; }
  double last_nm() const { return wavelength(count - 1); }

  void validate() const;  // count >= 3, step > 0

  static WavelengthGrid canonical() { return {400.0, 8.5, 247}; }

  bool operator==(const WavelengthGrid&) const = default;
};

struct SoilSample {
  std::string id;
  std::vector<double> reflectance;
  // Present keys only; a missing lab value is simply absent, never a sentinel.
  std::map<std::string, double> properties;

  std::optional<double> property(const std::string& name) const {
    auto it = properties.find(name);
    if (it == properties.end()) return std::nullopt;
    return it->second;
  }
};

// Immutable after load; safe to share across threads.
struct SpectralDataset {
  WavelengthGrid grid;
  std::vector<SoilSample> samples;
  // Label-file column order, kept so save round-trips the header.
  std::vector<std::string> property_names;

  int size() const { return static_cast<int>(samples.size()); }
  Eigen::MatrixXd reflectance_matrix() const;

  // Values and row indices of samples that carry the given property.
  std::pair<Eigen::VectorXd, std::vector<int>> property_values(
      const std::string& name) const;

  SpectralDataset subset(const std::vector<int>& indices) const;

  void validate() const;
};

// Loads spectra + labels CSVs (see README for the exact file contracts).
// Rows follow spectra file order; labels are joined on the id column.
// Label ids absent from the spectra produce a warning and are skipped;
// spectra ids absent from the labels get all properties missing.
SpectralDataset load_dataset(const std::string& spectra_path,
                             const std::string& labels_path,
                             std::vector<std::string>* warnings = nullptr);

void save_dataset(const SpectralDataset& ds, const std::string& spectra_path,
                  const std::string& labels_path);

// Deterministic split: train gets floor(train_fraction * n) samples chosen by
// a seeded shuffle; original sample order is preserved inside each part.
std::pair<SpectralDataset, SpectralDataset> split_train_test(
    const SpectralDataset& ds, double train_fraction, std::uint64_t seed);

}  // namespace soilspec
