from .cv import CrossValidationResult, cross_validate, cross_validate_epochs
from .folds import Fold, FoldPlan, plan_folds
from .metrics import RATE_NAMES, ConfusionMetrics, confusion
from .report import TIMINGS_JSON, EvalReport, format_mean_sd, merge_reports
from .statistics import AnovaResult, PairwiseResult, bonferroni_pairwise, f_survival, paired_t, rm_anova

__all__ = [
    "AnovaResult",
    "ConfusionMetrics",
    "CrossValidationResult",
    "EvalReport",
    "Fold",
    "FoldPlan",
    "PairwiseResult",
    "RATE_NAMES",
    "TIMINGS_JSON",
    "bonferroni_pairwise",
    "confusion",
    "cross_validate",
    "cross_validate_epochs",
    "f_survival",
    "format_mean_sd",
    "merge_reports",
    "paired_t",
    "plan_folds",
    "rm_anova",
]
