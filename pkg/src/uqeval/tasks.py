"""The six benchmark task evaluators.

Each evaluator composes the decomposition scores with the metrics module
and handles label preprocessing: the {-1, 0, 1} annotation convention,
correctness derivation, and OOD labels. Uncertain (-1) cells are mapped
only where a task defines it (Task 2); everywhere else they are masked.
"""

from dataclasses import dataclass, field

import numpy as np

from .decomposition import BMAOutput, UncertaintyScores, ValidationError
from .metrics import (
    CalibrationReport,
    DEFAULT_AUAC_STEP,
    DEFAULT_BINS,
    auac,
    auroc,
    calibration_report,
    macro_auroc,
)

CORRECTNESS_THRESHOLD = 0.5


@dataclass(frozen=True)
class LabelTensor:
    """N x C annotations: -1 uncertain, 0 negative, 1 positive."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or 0 in v.shape:
            raise ValidationError(f"labels must be a nonempty (N, C) matrix, got shape {v.shape}")
        if not np.isin(v, (-1, 0, 1)).all():
            raise ValidationError("labels must take values in {-1, 0, 1}")
        object.__setattr__(self, "values", v.astype(np.int8))


@dataclass
class TaskResult:
    task: int
    metric: str
    value: float
    score_kind: str
    per_class: list = field(default_factory=list)
    skipped_classes: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "metric": self.metric,
            "value": self.value,
            "score_kind": self.score_kind,
            "per_class": self.per_class,
            "skipped_classes": self.skipped_classes,
            "details": self.details,
        }


def _require_per_sample(scores: UncertaintyScores) -> np.ndarray:
    if scores.per_class:
        raise ValidationError("task expects per-sample (N,) scores; aggregate classes first")
    return scores.values


def _require_per_class(scores: UncertaintyScores) -> np.ndarray:
    if not scores.per_class:
        raise ValidationError("task expects per-class (N, C) scores")
    return scores.values


def task1_ood(scores: UncertaintyScores, ood_labels: np.ndarray) -> TaskResult:
    """OOD detection: AUROC of per-sample uncertainty vs 0=ID / 1=OOD labels."""
    s = _require_per_sample(scores)
    y = np.asarray(ood_labels)
    if not np.isin(y, (0, 1)).all():
        raise ValidationError("OOD labels must be binary: 0 marks ID, 1 marks OOD")
    value = auroc(s, y)
    if value is None:
        raise ValidationError("Task 1 needs both ID and OOD samples present")
    return TaskResult(task=1, metric="auroc", value=value, score_kind=scores.kind)


def task2_uncertainty_labels(scores: UncertaintyScores, raw_labels: LabelTensor) -> TaskResult:
    """Predicting annotator-uncertain labels.

    Keeps only samples with at least one -1 label, maps -1 -> 1 and
    {0, 1} -> 0, then macro-averages per-class AUROC.
    """
    s = _require_per_class(scores)
    y = raw_labels.values
    if s.shape != y.shape:
        raise ValidationError("scores and labels must share an (N, C) shape")
    keep = (y == -1).any(axis=1)
    if not keep.any():
        raise ValidationError("Task 2 filter kept no samples: no -1 labels present")
    targets = (y[keep] == -1).astype(np.int8)
    macro, per_class, skipped = macro_auroc(s[keep], targets)
    return TaskResult(
        task=2, metric="macro_auroc", value=macro, score_kind=scores.kind,
        per_class=per_class, skipped_classes=skipped,
        details={"samples_retained": int(keep.sum())},
    )


def derive_correctness(
    bma: BMAOutput,
    labels: LabelTensor,
    threshold: float = CORRECTNESS_THRESHOLD,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell correctness and a validity mask excluding -1 cells.

    A cell is correct when (bma >= threshold) agrees with (label == 1);
    the boundary bma == threshold counts as a positive prediction.
    """
    p = np.asarray(bma.values, dtype=np.float64)
    y = labels.values
    if p.shape != y.shape:
        raise ValidationError("BMA and labels must share an (N, C) shape")
    predicted_pos = p >= threshold
    correct = (predicted_pos == (y == 1)).astype(np.int8)
    valid = y != -1
    return correct, valid


def sample_accuracy(bma: BMAOutput, labels: LabelTensor) -> np.ndarray:
    """Per-sample mean correctness over valid (non -1) cells; NaN if none."""
    correct, valid = derive_correctness(bma, labels)
    counts = valid.sum(axis=1)
    with np.errstate(invalid="ignore"):
        acc = np.where(counts > 0, (correct * valid).sum(axis=1) / np.maximum(counts, 1), np.nan)
    return acc


def task3_correctness(scores: UncertaintyScores, bma: BMAOutput, labels: LabelTensor) -> TaskResult:
    """Correctness prediction: per-class AUROC of uncertainty vs incorrectness.

    The AUROC target is 1 - correct so that higher uncertainty on wrong
    predictions scores above 0.5.
    """
    s = _require_per_class(scores)
    correct, valid = derive_correctness(bma, labels)
    if s.shape != correct.shape:
        raise ValidationError("scores and labels must share an (N, C) shape")
    per_class = []
    skipped = []
    for c in range(s.shape[1]):
        m = valid[:, c]
        a = auroc(s[m, c], 1 - correct[m, c]) if m.any() else None
        per_class.append(a)
        if a is None:
            skipped.append(c)
    defined = [a for a in per_class if a is not None]
    if not defined:
        raise ValidationError("Task 3 AUROC undefined for every class")
    return TaskResult(
        task=3, metric="macro_auroc", value=float(np.mean(defined)),
        score_kind=scores.kind, per_class=per_class, skipped_classes=skipped,
    )


def task4_abstain(
    scores: UncertaintyScores,
    bma: BMAOutput,
    labels: LabelTensor,
    step_fraction: float = DEFAULT_AUAC_STEP,
) -> TaskResult:
    """Abstained prediction: AUAC over per-sample accuracy."""
    s = _require_per_sample(scores)
    acc = sample_accuracy(bma, labels)
    keep = ~np.isnan(acc)
    if not keep.any():
        raise ValidationError("no samples with any valid label")
    value = auac(s[keep], acc[keep], step_fraction)
    return TaskResult(
        task=4, metric="auac", value=value, score_kind=scores.kind,
        details={"step_fraction": step_fraction, "samples_used": int(keep.sum())},
    )


def task5_task6_calibration(
    bma: BMAOutput,
    labels: LabelTensor,
    bins: int = DEFAULT_BINS,
    mode: str = "confidence",
) -> CalibrationReport:
    """Per-class ECE/MCE on BMA probabilities with -1 cells masked."""
    y = labels.values
    p = np.asarray(bma.values, dtype=np.float64)
    if p.shape != y.shape:
        raise ValidationError("BMA and labels must share an (N, C) shape")
    valid = y != -1
    return calibration_report(p, np.where(valid, y, 0), valid_mask=valid, bins=bins, mode=mode)
