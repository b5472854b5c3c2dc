"""Counterfactual-explanation toolkit for tabular classifiers."""

from .analysis import (
    ChangeFrequencyReport,
    KdeCurve,
    SignificanceRow,
    TTestResult,
    change_frequency,
    kde_estimate,
    paired_ttest,
    significance_suite,
    top_features,
    welch_ttest,
)
from .augmentation import (
    AugmentedSplit,
    CfPool,
    ExperimentResult,
    Scenario,
    build_cf_pool,
    build_scenario,
    counterfactuals_needed,
    run_experiment,
)
from .classifier import DistanceReport, changed_feature_distance, classify_unknown
from .dataset import (
    StandardScaler,
    fit_scaler,
    load_dataset,
    save_dataset,
    stratified_split,
)
from .engine import (
    CfConfig,
    Counterfactual,
    CounterfactualSet,
    dpp_diversity,
    generate,
    hinge_loss,
    proximity,
    sparsify,
)
from .model import (
    EvaluationMetrics,
    Model,
    TrainConfig,
    evaluate_macro,
    train,
)
from .schema import (
    UNKNOWN_LABEL,
    Dataset,
    FeatureSchema,
    FeatureSpec,
    PatientRecord,
    canonical_schema,
    record_from_mapping,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentedSplit",
    "CfConfig",
    "CfPool",
    "ChangeFrequencyReport",
    "Counterfactual",
    "CounterfactualSet",
    "Dataset",
    "DistanceReport",
    "EvaluationMetrics",
    "ExperimentResult",
    "FeatureSchema",
    "FeatureSpec",
    "KdeCurve",
    "Model",
    "PatientRecord",
    "Scenario",
    "SignificanceRow",
    "StandardScaler",
    "TTestResult",
    "TrainConfig",
    "UNKNOWN_LABEL",
    "build_cf_pool",
    "build_scenario",
    "canonical_schema",
    "change_frequency",
    "changed_feature_distance",
    "classify_unknown",
    "counterfactuals_needed",
    "dpp_diversity",
    "evaluate_macro",
    "fit_scaler",
    "generate",
    "hinge_loss",
    "kde_estimate",
    "load_dataset",
    "paired_ttest",
    "proximity",
    "record_from_mapping",
    "run_experiment",
    "save_dataset",
    "significance_suite",
    "sparsify",
    "stratified_split",
    "top_features",
    "train",
    "welch_ttest",
]
