"""Black-box post-processing fairness for banded predictions.

The pipeline takes an opaque predictor, buckets its outputs into tariff
bands, detects samples whose band changes when only the protected
attribute is perturbed, and flips the most unfairly treated minority
samples until the cohort's disparate impact clears 1 - epsilon.
"""

from .bucketing import (
    BandAssignment,
    BandModel,
    DegenerateDistributionError,
    assign_band,
    assign_tariffs,
    fit_bands,
)
from .core import (
    FAVORABLE,
    PRIVILEGED,
    UNFAVORABLE,
    UNPRIVILEGED,
    FairTariffError,
    GroupMappingError,
    GroupSpec,
    LabelSpec,
    MitigationConfig,
    PredictionPair,
    Sample,
    UndefinedMetricError,
    UnfittedLabelSpecError,
    binarize_group,
    favorability,
)
from .dataio import (
    ParseError,
    SyntheticSpec,
    generate,
    read_lookup,
    read_report,
    read_samples,
    read_trace,
    write_lookup,
    write_report,
    write_samples,
    write_trace,
)
from .engine import (
    CANDIDATES_EXHAUSTED,
    MAX_FLIPS,
    THRESHOLD_REACHED,
    FlipRecord,
    MitigationTrace,
    ScoredSample,
    apply_trace,
    detect_and_score,
    determine_minority,
    mitigate,
    mitigate_priority,
    mitigate_randomized,
)
from .harness import (
    ComparisonReport,
    PipelineRun,
    StrategyRun,
    compare,
    execute_pipeline,
    run_pipeline,
)
from .metrics import GroupTally, apply_flip, disparate_impact, is_fair, tally
from .predictor import (
    MissingPredictionError,
    Predictor,
    SeasonalNaivePredictor,
    TableLookupPredictor,
    build_pairs,
    predict_pair,
)

__version__ = "0.1.0"

__all__ = [
    "BandAssignment",
    "BandModel",
    "CANDIDATES_EXHAUSTED",
    "ComparisonReport",
    "DegenerateDistributionError",
    "FAVORABLE",
    "FairTariffError",
    "FlipRecord",
    "GroupMappingError",
    "GroupSpec",
    "GroupTally",
    "LabelSpec",
    "MAX_FLIPS",
    "MissingPredictionError",
    "MitigationConfig",
    "MitigationTrace",
    "ParseError",
    "PipelineRun",
    "PredictionPair",
    "Predictor",
    "PRIVILEGED",
    "Sample",
    "ScoredSample",
    "SeasonalNaivePredictor",
    "StrategyRun",
    "SyntheticSpec",
    "TableLookupPredictor",
    "THRESHOLD_REACHED",
    "UNFAVORABLE",
    "UndefinedMetricError",
    "UnfittedLabelSpecError",
    "UNPRIVILEGED",
    "apply_flip",
    "apply_trace",
    "assign_band",
    "assign_tariffs",
    "binarize_group",
    "build_pairs",
    "compare",
    "detect_and_score",
    "determine_minority",
    "disparate_impact",
    "execute_pipeline",
    "favorability",
    "fit_bands",
    "generate",
    "is_fair",
    "mitigate",
    "mitigate_priority",
    "mitigate_randomized",
    "predict_pair",
    "read_lookup",
    "read_report",
    "read_samples",
    "read_trace",
    "run_pipeline",
    "tally",
    "write_lookup",
    "write_report",
    "write_samples",
    "write_trace",
]
