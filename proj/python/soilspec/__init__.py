"""vis-NIR soil spectroscopy toolkit: preprocessing, regression, cost-sensitive
classification and spectral-band ranking."""

from soilspec._core import (  # noqa: F401
    ClassScheme,
    FeatureMatrix,
    RegressionModel,
    SpectralDataset,
    TrainedClassifier,
    WavelengthGrid,
    __version__,
    assemble_features,
    classifier_configurations,
    cost_grid_search,
    derivative1,
    derivative2,
    fft_magnitude,
    fit_classifier,
    fit_lasso_cv,
    fit_lr_best_feature,
    fit_ols,
    fit_plsr,
    fit_regressor,
    fit_svr_linear,
    generate,
    kfold_cv_classification,
    load_classifier,
    load_dataset,
    load_model,
    load_synth_spec,
    mcc,
    rank_features,
    regression_metrics,
    split_train_test,
    uniform_cost,
)
