#include "soilspec/synthgen.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "soilspec/classification.hpp"
#include "soilspec/rng.hpp"

namespace soilspec {

void SynthSpec::validate() const {
  grid.validate();
  if (n_samples < 1) throw std::invalid_argument("synth spec: n_samples must be >= 1");
  if (!(baseline_low > 0.0 && baseline_high <= 1.0 && baseline_low <= baseline_high)) {
    throw std::invalid_argument("synth spec: baseline must lie inside (0, 1]");
  }
  double max_total_depth = 0.0;
  for (const auto& b : bands) {
    if (b.center_nm < grid.start_nm || b.center_nm > grid.last_nm()) {
      throw std::invalid_argument("synth spec: band center outside the wavelength grid");
    }
    if (!(b.width_nm > 0.0)) throw std::invalid_argument("synth spec: band width must be positive");
    if (!(b.amp_max >= b.amp_min && b.amp_min >= 0.0)) {
      throw std::invalid_argument("synth spec: band amplitude range invalid");
    }
    max_total_depth += b.amp_max;
  }
  if (max_total_depth >= baseline_low) {
    throw std::invalid_argument("synth spec: absorption depths can exceed the baseline");
  }
  for (const auto& rule : property_rules) {
    if (rule.band_coefs.size() != bands.size()) {
      throw std::invalid_argument("synth spec: property rule '" + rule.name +
                                  "' needs one coefficient per band");
    }
    if (rule.noise_sigma < 0.0) throw std::invalid_argument("synth spec: negative noise sigma");
  }
  if (imbalance) {
    bool found = false;
    for (const auto& rule : property_rules) found = found || rule.name == imbalance->property;
    if (!found) {
      throw std::invalid_argument("synth spec: imbalance rule targets unknown property");
    }
    if (imbalance->target_counts.size() != imbalance->thresholds.size() + 1) {
      throw std::invalid_argument("synth spec: imbalance needs thresholds.size()+1 class counts");
    }
    int total = 0;
    for (int c : imbalance->target_counts) {
      if (c < 0) throw std::invalid_argument("synth spec: negative class count");
      total += c;
    }
    if (total != n_samples) {
      throw std::invalid_argument("synth spec: imbalance class counts must sum to n_samples");
    }
  }
}

SpectralDataset generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  SpectralDataset ds;
  ds.grid = spec.grid;
  for (const auto& rule : spec.property_rules) ds.property_names.push_back(rule.name);

  const int nb = static_cast<int>(spec.bands.size());
  std::vector<double> baseline(spec.grid.count);
  for (int i = 0; i < spec.grid.count; ++i) {
    const double t = spec.grid.count > 1 ? static_cast<double>(i) / (spec.grid.count - 1) : 0.0;
    baseline[i] = spec.baseline_low + (spec.baseline_high - spec.baseline_low) * t;
  }

  ClassScheme scheme;
  std::vector<int> remaining;
  int imbalance_rule_idx = -1;
  if (spec.imbalance) {
    scheme.property = spec.imbalance->property;
    scheme.thresholds = spec.imbalance->thresholds;
    scheme.class_names.resize(scheme.thresholds.size() + 1);
    remaining = spec.imbalance->target_counts;
    for (std::size_t r = 0; r < spec.property_rules.size(); ++r) {
      if (spec.property_rules[r].name == spec.imbalance->property) {
        imbalance_rule_idx = static_cast<int>(r);
      }
    }
  }

  auto draw_sample = [&]() {
    std::vector<double> depths(nb);
    for (int b = 0; b < nb; ++b) depths[b] = rng.uniform(spec.bands[b].amp_min, spec.bands[b].amp_max);
    std::vector<double> props(spec.property_rules.size());
    for (std::size_t r = 0; r < spec.property_rules.size(); ++r) {
      const auto& rule = spec.property_rules[r];
      double v = rule.intercept;
      for (int b = 0; b < nb; ++b) v += rule.band_coefs[b] * depths[b];
      if (rule.noise_sigma > 0.0) v += rng.normal(0.0, rule.noise_sigma);
      props[r] = v;
    }
    return std::make_pair(depths, props);
  };

  const long long max_attempts = 10000LL * spec.n_samples;
  long long attempts = 0;
  int emitted = 0;
  while (emitted < spec.n_samples) {
    auto [depths, props] = draw_sample();
    if (spec.imbalance) {
      const int cls = scheme.assign(props[imbalance_rule_idx]);
      if (remaining[cls] == 0) {
        if (++attempts > max_attempts) {
          throw std::runtime_error(
              "synth generate: imbalance rule infeasible (class quotas unreachable)");
        }
        continue;
      }
      --remaining[cls];
    }

    SoilSample s;
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "s%05d", emitted + 1);
    s.id = idbuf;
    s.reflectance.resize(spec.grid.count);
    for (int i = 0; i < spec.grid.count; ++i) {
      double v = baseline[i];
      for (int b = 0; b < nb; ++b) {
        const double z = (spec.grid.wavelength(i) - spec.bands[b].center_nm) / spec.bands[b].width_nm;
        v -= depths[b] * std::exp(-0.5 * z * z);
      }
      s.reflectance[i] = std::min(1.0, std::max(v, 1e-6));
    }
    for (std::size_t r = 0; r < spec.property_rules.size(); ++r) {
      s.properties[spec.property_rules[r].name] = props[r];
    }
    ds.samples.push_back(std::move(s));
    ++emitted;
  }
  return ds;
}

namespace {

using nlohmann::json;

}  // namespace

SynthSpec load_synth_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open synth spec: " + path);
  json j;
  in >> j;
  SynthSpec spec;
  spec.n_samples = j.at("n_samples").get<int>();
  spec.grid.start_nm = j.at("grid").at("start_nm").get<double>();
  spec.grid.step_nm = j.at("grid").at("step_nm").get<double>();
  spec.grid.count = j.at("grid").at("count").get<int>();
  for (const auto& bj : j.value("bands", json::array())) {
    SynthBand b;
    b.center_nm = bj.at("center_nm").get<double>();
    b.width_nm = bj.at("width_nm").get<double>();
    b.amp_min = bj.at("amp_min").get<double>();
    b.amp_max = bj.at("amp_max").get<double>();
    spec.bands.push_back(b);
  }
  for (const auto& rj : j.value("properties", json::array())) {
    PropertyRule r;
    r.name = rj.at("name").get<std::string>();
    r.band_coefs = rj.at("band_coefs").get<std::vector<double>>();
    r.intercept = rj.value("intercept", 0.0);
    r.noise_sigma = rj.value("noise_sigma", 0.0);
    spec.property_rules.push_back(std::move(r));
  }
  if (j.contains("imbalance") && !j["imbalance"].is_null()) {
    ImbalanceRule rule;
    rule.property = j["imbalance"].at("property").get<std::string>();
    rule.thresholds = j["imbalance"].at("thresholds").get<std::vector<double>>();
    rule.target_counts = j["imbalance"].at("target_counts").get<std::vector<int>>();
    spec.imbalance = std::move(rule);
  }
  spec.seed = j.value("seed", 0ULL);
  spec.baseline_low = j.value("baseline_low", 0.55);
  spec.baseline_high = j.value("baseline_high", 0.85);
  spec.validate();
  return spec;
}

void save_synth_spec(const SynthSpec& spec, const std::string& path) {
  json j;
  j["n_samples"] = spec.n_samples;
  j["grid"] = {{"start_nm", spec.grid.start_nm}, {"step_nm", spec.grid.step_nm}, {"count", spec.grid.count}};
  json bands = json::array();
  for (const auto& b : spec.bands) {
    bands.push_back({{"center_nm", b.center_nm},
                     {"width_nm", b.width_nm},
                     {"amp_min", b.amp_min},
                     {"amp_max", b.amp_max}});
  }
  j["bands"] = std::move(bands);
  json props = json::array();
  for (const auto& r : spec.property_rules) {
    props.push_back({{"name", r.name},
                     {"band_coefs", r.band_coefs},
                     {"intercept", r.intercept},
                     {"noise_sigma", r.noise_sigma}});
  }
  j["properties"] = std::move(props);
  if (spec.imbalance) {
    j["imbalance"] = {{"property", spec.imbalance->property},
                      {"thresholds", spec.imbalance->thresholds},
                      {"target_counts", spec.imbalance->target_counts}};
  }
  j["seed"] = spec.seed;
  j["baseline_low"] = spec.baseline_low;
  j["baseline_high"] = spec.baseline_high;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace soilspec
