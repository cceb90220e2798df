"""Disentanglement analytics.

Quantifies whether epistemic and aleatoric scores behave as advertised:
the EU-vs-AU AUROC gap on the OOD task, their rank correlation, and the
overview aggregation combining task performance with disentanglement.
"""

from dataclasses import dataclass, field

import numpy as np

from .decomposition import (
    PredictionTensor,
    ValidationError,
    aggregate_classes,
    aleatoric_uncertainty,
    epistemic_uncertainty,
)
from .metrics import auroc, spearman
from .tasks import TaskResult

TASK_IDS = (1, 2, 3, 4, 5, 6)


@dataclass
class DisentanglementRecord:
    method: str
    auroc_eu: float | None = None
    auroc_au: float | None = None
    gap: float | None = None
    rank_corr: float | None = None
    applicable: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "auroc_eu": self.auroc_eu,
            "auroc_au": self.auroc_au,
            "gap": self.gap,
            "rank_corr": self.rank_corr,
            "applicable": self.applicable,
            "note": self.note,
        }


@dataclass
class OverviewRow:
    method: str
    avg_performance: float | None
    gap: float | None
    bubble: float | None  # 1 - rank correlation, clamped to [0, 2]
    complete: bool
    missing: list = field(default_factory=list)


def eu_au_gap(
    preds: PredictionTensor,
    ood_labels: np.ndarray,
    aggregation: str = "mean",
    method: str = "",
) -> DisentanglementRecord:
    """Task-1 AUROC for EU and AU scores and their gap (EU - AU).

    Deterministic methods (M = 1) carry no epistemic signal; the record
    is marked not applicable instead of reporting a vacuous gap.
    """
    if preds.members < 2:
        return DisentanglementRecord(method=method, applicable=False,
                                     note="M=1: EU identically 0, gap not applicable")
    eu = aggregate_classes(epistemic_uncertainty(preds), aggregation).values
    au = aggregate_classes(aleatoric_uncertainty(preds), aggregation).values
    y = np.asarray(ood_labels)
    a_eu = auroc(eu, y)
    a_au = auroc(au, y)
    if a_eu is None or a_au is None:
        raise ValidationError("OOD labels must contain both classes")
    return DisentanglementRecord(method=method, auroc_eu=a_eu, auroc_au=a_au, gap=a_eu - a_au)


def uncertainty_rank_correlation(preds: PredictionTensor, aggregation: str = "mean"):
    """Spearman correlation between per-sample EU and AU; None if constant."""
    if preds.members < 2:
        raise ValidationError("rank correlation needs M >= 2 (EU is identically 0 at M=1)")
    eu = aggregate_classes(epistemic_uncertainty(preds), aggregation).values
    au = aggregate_classes(aleatoric_uncertainty(preds), aggregation).values
    return spearman(eu, au)


def _task_performance(result: TaskResult | None, task: int):
    if result is None:
        return None
    # Calibration errors map to 1 - error so every axis reads higher-better.
    if task in (5, 6):
        return 1.0 - result.value
    return result.value


def overview_aggregate(
    task_results: dict[str, dict[int, TaskResult]],
    records: dict[str, DisentanglementRecord],
) -> list[OverviewRow]:
    """Per-method (avg_performance, gap, bubble) rows, sorted by method name.

    avg_performance averages Task 1-4 values with 1-ECE and 1-MCE; any
    missing task flags the row incomplete rather than imputing.
    """
    rows = []
    for method in sorted(set(task_results) | set(records)):
        per_task = task_results.get(method, {})
        values = []
        missing = []
        for task in TASK_IDS:
            v = _task_performance(per_task.get(task), task)
            if v is None:
                missing.append(task)
            else:
                values.append(v)
        record = records.get(method)
        avg = float(np.mean(values)) if not missing else None
        gap = record.gap if record is not None else None
        if record is not None and record.rank_corr is not None:
            bubble = float(np.clip(1.0 - record.rank_corr, 0.0, 2.0))
        else:
            bubble = None
        rows.append(OverviewRow(
            method=method, avg_performance=avg, gap=gap, bubble=bubble,
            complete=not missing and record is not None, missing=missing,
        ))
    return rows
