#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "soilspec/dataset.hpp"

namespace soilspec {

// Gaussian absorption feature: reflectance dips by depth * exp(-((wl-c)/w)^2/2)
// with a per-sample depth drawn uniformly from [amp_min, amp_max].
struct SynthBand {
  double center_nm = 0.0;
  double width_nm = 0.0;
  double amp_min = 0.0;
  double amp_max = 0.0;
};

// property = intercept + sum_b coef[b] * depth[b] + N(0, noise_sigma)
struct PropertyRule {
  std::string name;
  std::vector<double> band_coefs;
  double intercept = 0.0;
  double noise_sigma = 0.0;
};

// Target class counts for one property under the given thresholds; samples
// are drawn until every class quota is exactly filled.
struct ImbalanceRule {
  std::string property;
  std::vector<double> thresholds;
  std::vector<int> target_counts;
};

struct SynthSpec {
  int n_samples = 0;
  WavelengthGrid grid;
  std::vector<SynthBand> bands;
  std::vector<PropertyRule> property_rules;
  std::optional<ImbalanceRule> imbalance;
  std::uint64_t seed = 0;
  // smooth linear baseline the absorption bands subtract from
  double baseline_low = 0.55;
  double baseline_high = 0.85;

  void validate() const;
};

// Deterministic in (spec, seed); generated reflectance stays within (0, 1].
SpectralDataset generate(const SynthSpec& spec);

SynthSpec load_synth_spec(const std::string& path);
void save_synth_spec(const SynthSpec& spec, const std::string& path);

}  // namespace soilspec
