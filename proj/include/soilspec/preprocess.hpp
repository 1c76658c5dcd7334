#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "soilspec/dataset.hpp"

namespace soilspec {

enum class Block { Raw, D1, D2, Fft };

const char* block_name(Block b);  // "raw", "d1", "d2", "fft"

struct BlockSet {
  bool raw = true;
  bool d1 = true;
  bool d2 = true;
  bool fft = true;

  int enabled_count() const { return int(raw) + int(d1) + int(d2) + int(fft); }
  // Fixed assembly order: RAW, D1, D2, FFT.
  std::vector<Block> ordered() const;

  static BlockSet all() { return {}; }
  static BlockSet parse(const std::string& csv_list);  // e.g. "raw,d1"
  std::string to_string() const;
};

struct FeatureId {
  Block block = Block::Raw;
  int index = 0;             // band index within the block, [0, grid.count)
  double wavelength_nm = 0;  // band wavelength; unused for FFT (bin index rules)

  // Column header: raw_400.0, d1_408.5, d2_2491.0, fft_bin_12.
  std::string name() const;
  static FeatureId parse(const std::string& name, const WavelengthGrid& grid);

  bool operator==(const FeatureId&) const = default;
  // Block-major then index ordering, used for ranking tie-breaks.
  bool operator<(const FeatureId& o) const {
    if (block != o.block) return static_cast<int>(block) < static_cast<int>(o.block);
    return index < o.index;
  }
};

struct ColumnStats {
  double mean = 0.0;
  double stddev = 0.0;  // population form (divisor N)
};

enum class StandardizationMode { WholeDataset, TrainOnly };

struct FeatureMatrix {
  Eigen::MatrixXd values;  // n_samples x n_features, standardized
  std::vector<FeatureId> columns;
  std::vector<ColumnStats> stats;
  StandardizationMode mode = StandardizationMode::WholeDataset;
  std::vector<int> zero_variance_columns;  // standardized to all-zeros, kept in place
  std::vector<std::string> sample_ids;

  int n_samples() const { return static_cast<int>(values.rows()); }
  int n_features() const { return static_cast<int>(values.cols()); }

  FeatureMatrix restrict_to_blocks(const BlockSet& blocks) const;
  FeatureMatrix select_rows(const std::vector<int>& rows) const;
};

// First derivative in wavelength: central differences on the interior,
// one-sided first differences at both ends. Output length equals input.
std::vector<double> derivative1(const std::vector<double>& spectrum, double step_nm);

// Second derivative: (f[i+1]-2f[i]+f[i-1])/step^2 on the interior, endpoints
// copy the nearest interior value.
std::vector<double> derivative2(const std::vector<double>& spectrum, double step_nm);

// Concatenates the enabled blocks in RAW, D1, D2, FFT order and standardizes
// each column to zero mean / unit variance (divisor N). In whole-dataset mode
// the statistics come from ds itself; in train-only mode with reference_stats
// given they are applied unchanged (test-split use). Zero-variance columns
// become all-zeros and are listed in the result.
FeatureMatrix assemble_features(
    const SpectralDataset& ds, const BlockSet& blocks = BlockSet::all(),
    StandardizationMode mode = StandardizationMode::WholeDataset,
    const std::vector<ColumnStats>* reference_stats = nullptr);

void save_feature_matrix_csv(const FeatureMatrix& fm, const std::string& path);
void save_feature_stats_json(const FeatureMatrix& fm, const std::string& path);

}  // namespace soilspec
