"""Propositional-logic toolkit for gradient-boosted tree ensembles.

Parses trained ensembles, compiles them into CNF over threshold atoms and
path literals, answers exact score-gap and entailment queries, extracts
subset-minimal sufficient feature sets, aggregates them into class-level
interval profiles, generates and detects explanation-guided adversarial
examples, and compares explanation rankings against external attributions.
"""

from .adversarial import (
    AdvResult,
    AttackRow,
    DetectionResult,
    attack_rows_to_csv,
    check_reversion_trace,
    classify_adversarial,
    detect,
    detect_dataset,
    evaluate_attack,
    generate,
)
from .axp import (
    Explanation,
    default_order,
    explain_dataset,
    extract_axp,
    read_explanations_jsonl,
    write_explanations_jsonl,
)
from .classexpl import (
    ClassExplanation,
    FeatureInterval,
    build_class_explanations,
    interval_of,
    read_class_explanations,
    write_class_explanations,
)
from .encoder import (
    EncodedModel,
    PathEntry,
    ThresholdMap,
    collect_thresholds,
    encode_ensemble,
    instance_to_assumptions,
    to_dimacs,
)
from .errors import (
    CellBudgetExceeded,
    InconsistentAssumptions,
    ModelFormatError,
    TreeLogicError,
)
from .metrics import (
    Ranking,
    aggregate,
    compare_rankings,
    consistency,
    formal_ranking,
    kendall_tau,
    rbo,
    read_rankings,
    read_rankings_csv,
    read_rankings_json,
    spearman,
    write_metrics_csv,
    write_rankings_json,
)
from .model import (
    Dataset,
    Ensemble,
    FeatureSpace,
    Tree,
    load_dataset_csv,
    load_model,
    parse_lightgbm_text,
    parse_portable_json,
    emit_portable_json,
    predict,
    predict_batch,
    predict_raw,
    predict_raw_batch,
    save_dataset_csv,
)
from .oracle import (
    Counterexample,
    GapResult,
    ScaledObjective,
    SolverContext,
    Valid,
    Witness,
    build_scaled_objective,
    entails,
    max_score_gap,
    propagate,
    solve,
    to_wcnf,
    witness_to_instance,
)

__version__ = "0.1.0"

__all__ = [
    "AdvResult",
    "AttackRow",
    "CellBudgetExceeded",
    "ClassExplanation",
    "Counterexample",
    "Dataset",
    "DetectionResult",
    "EncodedModel",
    "Ensemble",
    "Explanation",
    "FeatureInterval",
    "FeatureSpace",
    "GapResult",
    "InconsistentAssumptions",
    "ModelFormatError",
    "PathEntry",
    "Ranking",
    "ScaledObjective",
    "SolverContext",
    "ThresholdMap",
    "Tree",
    "TreeLogicError",
    "Valid",
    "Witness",
    "aggregate",
    "attack_rows_to_csv",
    "build_class_explanations",
    "build_scaled_objective",
    "check_reversion_trace",
    "classify_adversarial",
    "collect_thresholds",
    "compare_rankings",
    "consistency",
    "default_order",
    "detect",
    "detect_dataset",
    "emit_portable_json",
    "encode_ensemble",
    "entails",
    "evaluate_attack",
    "explain_dataset",
    "extract_axp",
    "formal_ranking",
    "generate",
    "instance_to_assumptions",
    "interval_of",
    "kendall_tau",
    "load_dataset_csv",
    "load_model",
    "max_score_gap",
    "parse_lightgbm_text",
    "parse_portable_json",
    "predict",
    "predict_batch",
    "predict_raw",
    "predict_raw_batch",
    "propagate",
    "rbo",
    "read_class_explanations",
    "read_explanations_jsonl",
    "read_rankings",
    "read_rankings_csv",
    "read_rankings_json",
    "save_dataset_csv",
    "solve",
    "spearman",
    "to_dimacs",
    "to_wcnf",
    "witness_to_instance",
    "write_class_explanations",
    "write_explanations_jsonl",
    "write_metrics_csv",
    "write_rankings_json",
]
