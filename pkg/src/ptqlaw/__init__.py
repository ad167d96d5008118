"""Scaling laws for post-training-quantized LLMs.

Accuracy on a task is modeled as a multiplicative power law of four PTQ
factors -- model size, calibration set size, group size, and effective
bit-width (nominal bits plus amortized group-metadata overhead). The package
ships the published fits for the OPT and LLaMA2 families, refits the law
from measured data by direct nonlinear least squares, runs factor-subset
ablations, and answers configuration questions (Pareto frontiers of predicted
accuracy versus storage cost).
"""

from .ablation import DEFAULT_MASKS, AblationReport, MaskFit, fit_slice, run_ablation
from .advisor import (
    FITTED_RANGES,
    ParetoPoint,
    SearchSpace,
    default_space,
    min_cost_config,
    pareto_frontier,
    sweep,
)
from .dataset import (
    CSV_HEADER,
    DEFAULT_BENCHMARK_CATEGORIES,
    MEMORIZATION_BENCHMARKS,
    UTILIZATION_BENCHMARKS,
    ExperimentDataset,
    ExperimentRecord,
    aggregate,
    dataset_to_csv,
    dataset_to_jsonl,
    generate_synthetic,
    load_csv,
    load_dataset,
    load_jsonl,
    write_csv,
    write_jsonl,
)
from .errors import (
    DatasetError,
    DegenerateDesignError,
    DomainError,
    ExtrapolationWarning,
    FitError,
    PredictionRangeWarning,
    PtqLawError,
    UndefinedRSquaredError,
    ValidationError,
)
from .fitting import (
    FitOptions,
    FitProblem,
    FitResult,
    GoodnessOfFit,
    Observation,
    fit_nls,
    goodness_of_fit,
    prediction_jacobian,
    warm_start,
)
from .model import (
    ALL_FACTORS,
    FACTOR_ORDER,
    GENERAL,
    MEMORIZATION,
    UTILIZATION,
    EffectiveBitWidth,
    Factor,
    FactorComparison,
    PtqConfig,
    ScalingLawParams,
    SensitivityReport,
    effective_bit_width,
    effective_bits,
    format_law,
    log2,
    mask_to_text,
    parse_factor,
    parse_mask,
    predict,
    round_half_up,
    sensitivity_report,
)
from .presets import (
    PresetEntry,
    PresetRegistry,
    load_params_file,
    load_registry,
    params_to_text,
    parse_params_text,
    registry_text,
    write_params_file,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_FACTORS",
    "AblationReport",
    "CSV_HEADER",
    "DEFAULT_BENCHMARK_CATEGORIES",
    "DEFAULT_MASKS",
    "DatasetError",
    "DegenerateDesignError",
    "DomainError",
    "EffectiveBitWidth",
    "ExperimentDataset",
    "ExperimentRecord",
    "ExtrapolationWarning",
    "FACTOR_ORDER",
    "FITTED_RANGES",
    "Factor",
    "FactorComparison",
    "FitError",
    "FitOptions",
    "FitProblem",
    "FitResult",
    "GENERAL",
    "GoodnessOfFit",
    "MEMORIZATION",
    "MEMORIZATION_BENCHMARKS",
    "MaskFit",
    "Observation",
    "ParetoPoint",
    "PredictionRangeWarning",
    "PresetEntry",
    "PresetRegistry",
    "PtqConfig",
    "PtqLawError",
    "ScalingLawParams",
    "SearchSpace",
    "SensitivityReport",
    "UTILIZATION",
    "UTILIZATION_BENCHMARKS",
    "UndefinedRSquaredError",
    "ValidationError",
    "aggregate",
    "dataset_to_csv",
    "dataset_to_jsonl",
    "default_space",
    "effective_bit_width",
    "effective_bits",
    "fit_nls",
    "fit_slice",
    "format_law",
    "generate_synthetic",
    "goodness_of_fit",
    "load_csv",
    "load_dataset",
    "load_jsonl",
    "load_params_file",
    "load_registry",
    "log2",
    "mask_to_text",
    "min_cost_config",
    "params_to_text",
    "pareto_frontier",
    "parse_factor",
    "parse_mask",
    "parse_params_text",
    "predict",
    "prediction_jacobian",
    "registry_text",
    "round_half_up",
    "run_ablation",
    "sensitivity_report",
    "sweep",
    "warm_start",
    "write_csv",
    "write_jsonl",
    "write_params_file",
]
