"""Linear SVC with reject option and provably minimal per-instance explanations."""

from .dataset import (
    DatasetError,
    FeatureSpace,
    LabeledDataset,
    ScalingParams,
    apply_scaling,
    fit_scaling,
    load_csv,
    scale_dataset,
    stratified_split,
)
from .feasibility import (
    LinearAtom,
    PartialAssignment,
    QueryCounter,
    linear_extrema,
    satisfiable,
    satisfiable_vertex_oracle,
)
from .trainer import (
    LinearModel,
    TrainerConfig,
    TrainingError,
    TrainReport,
    decision_value,
    decision_values,
    predict,
    train_soft_margin,
)
from .rejector import (
    DegenerateGridError,
    EvalMetrics,
    RejectModel,
    RiskReport,
    calibrate,
    empirical_risk,
    evaluate,
    predict_with_reject,
    threshold_grid,
)
from .explainer import (
    Explanation,
    PredictionFormula,
    entails,
    feature_frequency,
    minimal_explanation,
    negate,
    prediction_formula,
    verify_explanation,
)
from .artifacts import ModelBundle, SplitManifest, load_bundle, save_bundle

__version__ = "0.1.0"

__all__ = [
    "DatasetError",
    "FeatureSpace",
    "LabeledDataset",
    "ScalingParams",
    "apply_scaling",
    "fit_scaling",
    "load_csv",
    "scale_dataset",
    "stratified_split",
    "LinearAtom",
    "PartialAssignment",
    "QueryCounter",
    "linear_extrema",
    "satisfiable",
    "satisfiable_vertex_oracle",
    "LinearModel",
    "TrainerConfig",
    "TrainingError",
    "TrainReport",
    "decision_value",
    "decision_values",
    "predict",
    "train_soft_margin",
    "DegenerateGridError",
    "EvalMetrics",
    "RejectModel",
    "RiskReport",
    "calibrate",
    "empirical_risk",
    "evaluate",
    "predict_with_reject",
    "threshold_grid",
    "Explanation",
    "PredictionFormula",
    "entails",
    "feature_frequency",
    "minimal_explanation",
    "negate",
    "prediction_formula",
    "verify_explanation",
    "ModelBundle",
    "SplitManifest",
    "load_bundle",
    "save_bundle",
    "__version__",
]
