"""Evaluation protocols, metrics, significance testing and timing."""
from .curves import auc_curve
from .metrics import ConfusionCounts, accuracy, balanced_accuracy, bca
from .pipeline import ALIGNMENTS, MODELS, PipelineSpec, SubjectTransform, build_transform, fit_chain
from .protocols import (
    AuditResult, OnlineConfig, causality_audit, checkpoint_schedule, draw_n0, loso_eval, online_eval,
    online_pool, pool_index, repetition_seed,
)
from .report import EvalReport, primary_metric, read_csv, write_csv
from .stats import TTestResult, paired_t_test, student_t_sf2
from .timing import StageTimer, time_reference_estimators

__all__ = [
    "auc_curve",
    "ConfusionCounts", "accuracy", "balanced_accuracy", "bca",
    "ALIGNMENTS", "MODELS", "PipelineSpec", "SubjectTransform", "build_transform", "fit_chain",
    "AuditResult", "OnlineConfig", "causality_audit", "checkpoint_schedule", "draw_n0", "loso_eval",
    "online_eval", "online_pool", "pool_index", "repetition_seed",
    "EvalReport", "primary_metric", "read_csv", "write_csv",
    "TTestResult", "paired_t_test", "student_t_sf2",
    "StageTimer", "time_reference_estimators",
]
