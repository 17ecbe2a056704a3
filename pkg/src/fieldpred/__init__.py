"""Lazy tabular predictors: match scoring, certified kernels, field superposition."""

from .dataset import (
    CATEGORICAL,
    CONTINUOUS,
    AttributeSpec,
    Query,
    Schema,
    TrainingTable,
    column_ranges,
    infer_schema,
    load_schema,
    load_table,
    save_schema,
    serialize_table,
    validate_query,
)
from .errors import (
    DataError,
    FieldpredError,
    HarnessError,
    KernelError,
    PredictorError,
)
from .harness import (
    ConvergenceReportRow,
    SyntheticSpec,
    bayes_optimal,
    counterexample_spec,
    evaluate_accuracy,
    expected_tos_rates,
    generate_point_test,
    generate_synthetic,
    load_spec,
    make_spec,
    naive_reference_predict,
    report_to_csv,
    run_convergence,
    save_spec,
    standard_spec,
    summarize_final_regret,
    write_report,
)
from .kernels import (
    GROWTH_KINDS,
    KERNEL_KINDS,
    Kernel,
    LeadCertificate,
    certify_lead,
    eval_on_distance,
    inverse_additive_residue,
    make_kernel,
    splice,
    with_scale,
)
from .predictors import (
    PREDICTOR_KINDS,
    DensityModel,
    FittedModel,
    Prediction,
    backtrack_tie_break,
    compute_density_model,
    fit,
    load_model,
    predict,
    predict_delanga,
    predict_nearest,
    predict_rasturnat,
    save_model,
)
from .similarity import (
    MatchScores,
    all_match_scores,
    column_match_score,
    entry_match_score,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeSpec",
    "CATEGORICAL",
    "CONTINUOUS",
    "ConvergenceReportRow",
    "DataError",
    "DensityModel",
    "FieldpredError",
    "FittedModel",
    "GROWTH_KINDS",
    "HarnessError",
    "KERNEL_KINDS",
    "Kernel",
    "KernelError",
    "LeadCertificate",
    "MatchScores",
    "PREDICTOR_KINDS",
    "Prediction",
    "PredictorError",
    "Query",
    "Schema",
    "SyntheticSpec",
    "TrainingTable",
    "all_match_scores",
    "backtrack_tie_break",
    "bayes_optimal",
    "certify_lead",
    "column_match_score",
    "column_ranges",
    "compute_density_model",
    "counterexample_spec",
    "entry_match_score",
    "eval_on_distance",
    "evaluate_accuracy",
    "expected_tos_rates",
    "fit",
    "generate_point_test",
    "generate_synthetic",
    "infer_schema",
    "inverse_additive_residue",
    "load_model",
    "load_schema",
    "load_spec",
    "load_table",
    "make_kernel",
    "make_spec",
    "naive_reference_predict",
    "predict",
    "predict_delanga",
    "predict_nearest",
    "predict_rasturnat",
    "report_to_csv",
    "run_convergence",
    "save_model",
    "save_schema",
    "save_spec",
    "serialize_table",
    "splice",
    "standard_spec",
    "summarize_final_regret",
    "validate_query",
    "with_scale",
    "write_report",
]
