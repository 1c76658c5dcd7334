#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "soilspec/preprocess.hpp"

namespace soilspec {

struct RankedFeature {
  FeatureId feature;
  double corr_score = 0.0;   // |Pearson(x_j, y)|, min-max normalized
  double lasso_score = 0.0;  // |beta_j| at the CV-selected lambda, normalized
  double f_score = 0.0;      // univariate regression F statistic, normalized
  double var_score = 0.0;    // pre-standardization column variance, normalized
  double total = 0.0;        // sum of the four, in [0, 4]
};

struct FeatureRanking {
  std::string property;
  std::vector<RankedFeature> entries;  // sorted by total descending
  std::vector<std::string> warnings;
};

struct RankingOptions {
  std::uint64_t seed = 0;
  int lasso_folds = 5;
};

// Composite ranking over the derivative blocks only: the matrix is restricted
// to D1/D2 columns before scoring. Each component score is min-max normalized
// over the ranked set; ties in the final order break by FeatureId.
FeatureRanking rank_features(const FeatureMatrix& features, const Eigen::VectorXd& y,
                             const std::string& property, const RankingOptions& opts = {});

void save_ranking_json(const FeatureRanking& ranking, const std::string& path);

// Wavelength x property table: per wavelength the larger of the D1/D2 totals.
// Rows follow the grid; one column per property.
void ranking_heatmap_export(const std::vector<FeatureRanking>& rankings,
                            const WavelengthGrid& grid, const std::string& path);

}  // namespace soilspec
