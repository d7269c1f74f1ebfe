from .experiment import (
    CrossResult, EvalReport, ExperimentError, GridResult, ModelFamily, PipelineSpec, Splits,
    TrainedPipeline, config_dict, cross_matrix, evaluate, fit_model, grid_search, run_experiment,
    train_pipeline, transfer_average,
)
from .metrics import confusion, macro_f1, per_class_f1
from .report import cross_markdown, in_domain_markdown, reports_csv, reports_json

__all__ = [
    "CrossResult", "EvalReport", "ExperimentError", "GridResult", "ModelFamily", "PipelineSpec",
    "Splits", "TrainedPipeline", "config_dict", "confusion", "cross_markdown", "cross_matrix",
    "evaluate", "fit_model", "grid_search", "in_domain_markdown", "macro_f1", "per_class_f1",
    "reports_csv", "reports_json", "run_experiment", "train_pipeline", "transfer_average",
]
