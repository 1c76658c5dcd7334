#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "soilspec/classification.hpp"
#include "soilspec/dataset.hpp"
#include "soilspec/evaluation.hpp"
#include "soilspec/fft.hpp"
#include "soilspec/preprocess.hpp"
#include "soilspec/ranking.hpp"
#include "soilspec/regression.hpp"
#include "soilspec/synthgen.hpp"
#include "soilspec/version.hpp"

namespace py = pybind11;
using namespace soilspec;

namespace {

py::dict metrics_dict(const RegressionMetrics& m) {
  py::dict d;
  d["rho"] = m.pearson_rho ? py::cast(*m.pearson_rho) : py::none();
  d["r_squared"] = m.r_squared ? py::cast(*m.r_squared) : py::none();
  d["mse"] = m.mse;
  return d;
}

RegressionModel fit_by_kind(const std::string& kind, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y, std::uint64_t seed) {
  RegressorSpec spec;
  spec.kind = parse_regressor_kind(kind);
  spec.lasso.seed = seed;
  return fit_regressor(spec, X, y);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "soilspec: vis-NIR soil spectroscopy toolkit";
  m.attr("__version__") = kVersion;

  py::class_<WavelengthGrid>(m, "WavelengthGrid")
      .def(py::init([](double start_nm, double step_nm, int count) {
             WavelengthGrid g{start_nm, step_nm, count};
             g.validate();
             return g;
           }),
           py::arg("start_nm"), py::arg("step_nm"), py::arg("count"))
      .def_readonly("start_nm", &WavelengthGrid::start_nm)
      .def_readonly("step_nm", &WavelengthGrid::step_nm)
      .def_readonly("count", &WavelengthGrid::count)
      .def("wavelength", &WavelengthGrid::wavelength)
      .def_static("canonical", &WavelengthGrid::canonical);

  py::class_<SpectralDataset>(m, "SpectralDataset")
      .def_readonly("grid", &SpectralDataset::grid)
      .def_readonly("property_names", &SpectralDataset::property_names)
      .def("__len__", &SpectralDataset::size)
      .def("ids",
           [](const SpectralDataset& ds) {
             std::vector<std::string> ids;
             for (const auto& s : ds.samples) ids.push_back(s.id);
             return ids;
           })
      .def("reflectance", &SpectralDataset::reflectance_matrix)
      .def("property_values",
           [](const SpectralDataset& ds, const std::string& name) {
             auto [values, rows] = ds.property_values(name);
             return py::make_tuple(values, rows);
           },
           py::arg("name"), "Values and row indices of samples carrying the property")
      .def("save", &save_dataset, py::arg("spectra_path"), py::arg("labels_path"));

  m.def("load_dataset",
        [](const std::string& spectra, const std::string& labels) {
          return load_dataset(spectra, labels);
        },
        py::arg("spectra_path"), py::arg("labels_path"));
  m.def("split_train_test", &split_train_test, py::arg("dataset"), py::arg("train_fraction"),
        py::arg("seed"));

  m.def("load_synth_spec", &load_synth_spec, py::arg("path"));
  m.def("generate",
        [](const std::string& spec_path) { return generate(load_synth_spec(spec_path)); },
        py::arg("spec_path"), "Generate a synthetic dataset from a spec JSON file");

  // --- preprocessing ------------------------------------------------------
  m.def("derivative1", &derivative1, py::arg("spectrum"), py::arg("step_nm"));
  m.def("derivative2", &derivative2, py::arg("spectrum"), py::arg("step_nm"));
  m.def("fft_magnitude", &fft_magnitude, py::arg("spectrum"));

  py::class_<FeatureMatrix>(m, "FeatureMatrix")
      .def_readonly("values", &FeatureMatrix::values)
      .def_readonly("zero_variance_columns", &FeatureMatrix::zero_variance_columns)
      .def_readonly("sample_ids", &FeatureMatrix::sample_ids)
      .def_property_readonly("columns",
                             [](const FeatureMatrix& fm) {
                               std::vector<std::string> names;
                               for (const auto& c : fm.columns) names.push_back(c.name());
                               return names;
                             })
      .def_property_readonly("means",
                             [](const FeatureMatrix& fm) {
                               std::vector<double> v;
                               for (const auto& s : fm.stats) v.push_back(s.mean);
                               return v;
                             })
      .def_property_readonly("stddevs",
                             [](const FeatureMatrix& fm) {
                               std::vector<double> v;
                               for (const auto& s : fm.stats) v.push_back(s.stddev);
                               return v;
                             })
      .def("select_rows", &FeatureMatrix::select_rows)
      .def("restrict_to_blocks",
           [](const FeatureMatrix& fm, const std::string& blocks) {
             return fm.restrict_to_blocks(BlockSet::parse(blocks));
           });

  m.def("assemble_features",
        [](const SpectralDataset& ds, const std::string& blocks, const std::string& mode) {
          return assemble_features(ds, BlockSet::parse(blocks),
                                   mode == "train" ? StandardizationMode::TrainOnly
                                                   : StandardizationMode::WholeDataset);
        },
        py::arg("dataset"), py::arg("blocks") = "raw,d1,d2,fft", py::arg("mode") = "whole");

  // --- regression -----------------------------------------------------------
  py::class_<RegressionModel>(m, "RegressionModel")
      .def_property_readonly("kind",
                             [](const RegressionModel& m_) {
                               return std::string(regressor_kind_name(m_.kind));
                             })
      .def_readonly("coefficients", &RegressionModel::coefficients)
      .def_readonly("intercept", &RegressionModel::intercept)
      .def_readonly("notes", &RegressionModel::notes)
      .def("predict", [](const RegressionModel& m_, const Eigen::MatrixXd& X) {
        return predict(m_, X);
      })
      .def("save", &save_model, py::arg("path"));

  m.def("load_model", &load_model, py::arg("path"));
  m.def("fit_ols", &fit_ols, py::arg("X"), py::arg("y"));
  m.def("fit_lr_best_feature", &fit_lr_best_feature, py::arg("X"), py::arg("y"));
  m.def("fit_svr_linear",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C, double epsilon,
           double tol, long max_passes) {
          return fit_svr_linear(X, y, SvrOptions{C, epsilon, tol, max_passes});
        },
        py::arg("X"), py::arg("y"), py::arg("C") = 1.0, py::arg("epsilon") = 0.1,
        py::arg("tol") = 1e-3, py::arg("max_passes") = 1000);
  m.def("fit_lasso_cv",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int n_lambdas, double path_eps,
           int folds, std::uint64_t seed) {
          LassoOptions opts;
          opts.n_lambdas = n_lambdas;
          opts.path_eps = path_eps;
          opts.folds = folds;
          opts.seed = seed;
          return fit_lasso_cv(X, y, opts);
        },
        py::arg("X"), py::arg("y"), py::arg("n_lambdas") = 100, py::arg("path_eps") = 1e-3,
        py::arg("folds") = 5, py::arg("seed") = 0);
  m.def("fit_plsr",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int n_components, int max_iter,
           double inner_tol) {
          return fit_plsr(X, y, PlsrOptions{n_components, max_iter, inner_tol});
        },
        py::arg("X"), py::arg("y"), py::arg("n_components") = 6, py::arg("max_iter") = 10000,
        py::arg("inner_tol") = 1e-9);
  m.def("fit_regressor", &fit_by_kind, py::arg("kind"), py::arg("X"), py::arg("y"),
        py::arg("seed") = 0);

  // --- evaluation ------------------------------------------------------------
  m.def("regression_metrics",
        [](const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
          return metrics_dict(regression_metrics(y_true, y_pred));
        },
        py::arg("y_true"), py::arg("y_pred"));
  m.def("mcc",
        [](const Eigen::MatrixXi& counts) {
          ConfusionMatrix cm;
          cm.counts = counts;
          return mcc(cm);
        },
        py::arg("confusion"), "Matthews correlation (binary formula for K=2, R_K otherwise)");

  // --- classification -----------------------------------------------------------
  py::class_<ClassScheme>(m, "ClassScheme")
      .def(py::init([](std::string property, std::vector<double> thresholds,
                       std::vector<std::string> class_names) {
             ClassScheme s{std::move(property), std::move(thresholds), std::move(class_names)};
             s.validate();
             return s;
           }),
           py::arg("property"), py::arg("thresholds"), py::arg("class_names"))
      .def_readonly("property", &ClassScheme::property)
      .def_readonly("thresholds", &ClassScheme::thresholds)
      .def_readonly("class_names", &ClassScheme::class_names)
      .def("assign", &ClassScheme::assign)
      .def_static("defaults", [] {
        py::dict d;
        for (const auto& [name, scheme] : ClassScheme::defaults()) d[name.c_str()] = scheme;
        return d;
      });

  py::class_<TrainedClassifier>(m, "TrainedClassifier")
      .def_property_readonly("config",
                             [](const TrainedClassifier& c) { return c.config.name(); })
      .def_readonly("n_classes", &TrainedClassifier::n_classes)
      .def_readonly("trained_classes", &TrainedClassifier::trained_classes)
      .def_readonly("warnings", &TrainedClassifier::warnings)
      .def("predict", [](const TrainedClassifier& c, const Eigen::MatrixXd& X) {
        return predict_class(c, X);
      })
      .def("scores", [](const TrainedClassifier& c, const Eigen::MatrixXd& X) {
        return classifier_scores(c, X);
      })
      .def("save", &save_classifier, py::arg("path"));

  m.def("classifier_configurations", [] {
    std::vector<std::string> names;
    for (const auto& c : ClassifierConfig::all_configurations()) names.push_back(c.name());
    return names;
  });
  m.def("fit_classifier",
        [](const std::string& config, const Eigen::MatrixXd& cost, const Eigen::MatrixXd& X,
           const std::vector<int>& labels, int n_classes, std::uint64_t seed) {
          CostMatrix cm;
          cm.costs = cost;
          return fit_classifier(ClassifierConfig::parse(config), cm, X, labels, n_classes, seed);
        },
        py::arg("config"), py::arg("cost"), py::arg("X"), py::arg("labels"), py::arg("n_classes"),
        py::arg("seed") = 0);
  m.def("load_classifier", &load_classifier, py::arg("path"));
  m.def("uniform_cost",
        [](int k) { return CostMatrix::uniform(k).costs; }, py::arg("n_classes"));

  m.def("kfold_cv_classification",
        [](const std::string& config, const Eigen::MatrixXd& cost, const Eigen::MatrixXd& X,
           const std::vector<int>& labels, int n_classes, int folds, std::uint64_t seed) {
          CostMatrix cm;
          cm.costs = cost;
          const auto res = kfold_cv_classification(ClassifierConfig::parse(config), cm, X, labels,
                                                   n_classes, folds, seed);
          py::dict d;
          d["confusion"] = res.aggregate.counts;
          d["accuracy"] = res.metrics.accuracy;
          d["mcc"] = res.metrics.mcc;
          d["warnings"] = res.warnings;
          return d;
        },
        py::arg("config"), py::arg("cost"), py::arg("X"), py::arg("labels"), py::arg("n_classes"),
        py::arg("folds") = 5, py::arg("seed") = 0);

  m.def("cost_grid_search",
        [](const std::string& config, const Eigen::MatrixXd& X, const std::vector<int>& labels,
           int n_classes, const std::vector<double>& grid_values, int folds, std::uint64_t seed,
           int jobs) {
          GridSearchOptions opts;
          opts.folds = folds;
          opts.seed = seed;
          opts.jobs = jobs;
          const auto res = cost_grid_search(ClassifierConfig::parse(config), X, labels, n_classes,
                                            GridSearchSpec::uniform(n_classes, grid_values), opts);
          py::dict d;
          d["best_cost"] = res.best_cost.costs;
          d["best_mcc"] = res.best_mcc;
          d["n_points"] = res.grid_spec.n_points();
          py::list points;
          for (const auto& p : res.per_point) {
            py::dict pd;
            pd["cost"] = p.cost_vector;
            pd["mcc"] = p.mcc;
            points.append(pd);
          }
          d["points"] = points;
          return d;
        },
        py::arg("config"), py::arg("X"), py::arg("labels"), py::arg("n_classes"),
        py::arg("grid_values"), py::arg("folds") = 5, py::arg("seed") = 0, py::arg("jobs") = 1);

  // --- ranking --------------------------------------------------------------------
  m.def("rank_features",
        [](const FeatureMatrix& fm, const Eigen::VectorXd& y, const std::string& property,
           std::uint64_t seed) {
          RankingOptions opts;
          opts.seed = seed;
          const auto ranking = rank_features(fm, y, property, opts);
          py::list entries;
          for (const auto& e : ranking.entries) {
            py::dict d;
            d["feature"] = e.feature.name();
            d["corr_score"] = e.corr_score;
            d["lasso_score"] = e.lasso_score;
            d["f_score"] = e.f_score;
            d["var_score"] = e.var_score;
            d["total"] = e.total;
            entries.append(d);
          }
          return entries;
        },
        py::arg("features"), py::arg("y"), py::arg("property") = "", py::arg("seed") = 0);
}
