#include "soilspec/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "soilspec/csv.hpp"
#include "soilspec/regression.hpp"

namespace soilspec {

namespace {

// Min-max normalization in place; constant columns go to all-zeros.
bool minmax_normalize(std::vector<double>& v) {
  if (v.empty()) return true;
  const auto [mn_it, mx_it] = std::minmax_element(v.begin(), v.end());
  const double mn = *mn_it, mx = *mx_it;
  if (mx - mn <= 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    return false;
  }
  for (double& x : v) x = (x - mn) / (mx - mn);
  return true;
}

}  // namespace

FeatureRanking rank_features(const FeatureMatrix& features, const Eigen::VectorXd& y,
                             const std::string& property, const RankingOptions& opts) {
  BlockSet derivatives{false, true, true, false};
  const FeatureMatrix fm = features.restrict_to_blocks(derivatives);
  const int n = fm.n_samples();
  const int d = fm.n_features();
  if (n < 3) throw std::invalid_argument("rank_features: need at least 3 samples");
  if (d == 0) throw std::invalid_argument("rank_features: no derivative features present");
  if (y.size() != n) throw std::invalid_argument("rank_features: y length mismatch");

  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;
  const double sy = std::sqrt(yc.squaredNorm());
  if (sy <= 0.0) throw std::invalid_argument("rank_features: constant target");

  std::vector<double> corr(d), fstat(d), variance(d), lasso(d);
  for (int j = 0; j < d; ++j) {
    const double xm = fm.values.col(j).mean();
    const Eigen::VectorXd xc = fm.values.col(j).array() - xm;
    const double sx = std::sqrt(xc.squaredNorm());
    double r = 0.0;
    if (sx > 0.0) r = xc.dot(yc) / (sx * sy);
    corr[j] = std::abs(r);
    // univariate regression F statistic: F = r^2 (n-2) / (1 - r^2)
    const double r2 = std::min(r * r, 1.0 - 1e-15);
    fstat[j] = r2 * (n - 2) / (1.0 - r2);
    // variance before standardization; standardized columns are uniformly
    // unit-variance and carry no signal
    variance[j] = fm.stats[j].stddev * fm.stats[j].stddev;
  }

  LassoOptions lopts;
  lopts.seed = opts.seed;
  lopts.folds = opts.lasso_folds;
  const RegressionModel lasso_model = fit_lasso_cv(fm.values, y, lopts);
  for (int j = 0; j < d; ++j) lasso[j] = std::abs(lasso_model.coefficients(j));

  FeatureRanking out;
  out.property = property;
  if (!minmax_normalize(corr)) out.warnings.push_back("correlation scores are constant; zeroed");
  if (!minmax_normalize(fstat)) out.warnings.push_back("F scores are constant; zeroed");
  if (!minmax_normalize(variance)) out.warnings.push_back("variance scores are constant; zeroed");
  if (!minmax_normalize(lasso)) out.warnings.push_back("lasso scores are constant; zeroed");

  out.entries.resize(d);
  for (int j = 0; j < d; ++j) {
    auto& e = out.entries[j];
    e.feature = fm.columns[j];
    e.corr_score = corr[j];
    e.lasso_score = lasso[j];
    e.f_score = fstat[j];
    e.var_score = variance[j];
    e.total = corr[j] + lasso[j] + fstat[j] + variance[j];
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const RankedFeature& a, const RankedFeature& b) {
    if (a.total != b.total) return a.total > b.total;
    return a.feature < b.feature;
  });
  return out;
}

void save_ranking_json(const FeatureRanking& ranking, const std::string& path) {
  nlohmann::json j;
  j["property"] = ranking.property;
  j["warnings"] = ranking.warnings;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : ranking.entries) {
    entries.push_back({{"feature", e.feature.name()},
                       {"corr_score", e.corr_score},
                       {"lasso_score", e.lasso_score},
                       {"f_score", e.f_score},
                       {"var_score", e.var_score},
                       {"total", e.total}});
  }
  j["entries"] = std::move(entries);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
}

void ranking_heatmap_export(const std::vector<FeatureRanking>& rankings,
                            const WavelengthGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << "wavelength_nm";
  for (const auto& r : rankings) out << ',' << r.property;
  out << '\n';

  // per wavelength: the larger of the D1 and D2 totals for that band
  for (int i = 0; i < grid.count; ++i) {
    out << csv::format_double(grid.wavelength(i));
    for (const auto& r : rankings) {
      double score = 0.0;
      for (const auto& e : r.entries) {
        if (e.feature.index == i &&
            (e.feature.block == Block::D1 || e.feature.block == Block::D2)) {
          score = std::max(score, e.total);
        }
      }
      out << ',' << csv::format_double(score);
    }
    out << '\n';
  }
}

}  // namespace soilspec
