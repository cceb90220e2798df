"""Run configuration and report emission.

Reports are a JSON document plus plot-ready CSVs. Emission is
byte-deterministic: keys are sorted and every float is rounded to nine
significant digits before serialization.
"""

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .decomposition import AGGREGATIONS, ValidationError
from .disentangle import DisentanglementRecord, OverviewRow
from .metrics import CALIBRATION_MODES, CalibrationReport
from .tasks import TaskResult

SCHEMA_VERSION = "1.0"
OUTPUT_DIR_ENV = "UQEVAL_OUTPUT_DIR"


@dataclass
class RunConfig:
    preds_path: str = ""
    labels_path: str = ""
    ood_labels_path: str = ""
    tasks: list = field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    score_kinds: list = field(default_factory=lambda: ["PU", "AU", "EU"])
    aggregation: str = "mean"
    calibration_bins: int = 15
    calibration_mode: str = "confidence"
    auac_step: float = 0.05
    seed: int = 0
    output_dir: str = ""

    def __post_init__(self):
        if not self.output_dir:
            self.output_dir = os.environ.get(OUTPUT_DIR_ENV, ".")
        self.validate()

    def validate(self) -> None:
        if not set(self.tasks) <= {1, 2, 3, 4, 5, 6}:
            raise ValidationError(f"tasks must be a subset of 1..6, got {self.tasks}")
        if self.aggregation not in AGGREGATIONS:
            raise ValidationError(f"aggregation must be one of {AGGREGATIONS}")
        if self.calibration_mode not in CALIBRATION_MODES:
            raise ValidationError(f"calibration_mode must be one of {CALIBRATION_MODES}")
        if self.calibration_bins < 1:
            raise ValidationError("calibration_bins must be >= 1")
        if not 0.0 < self.auac_step < 1.0:
            raise ValidationError("auac_step must lie in (0, 1)")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path) as f:
            data = json.load(f)
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        unknown = set(data) - set(known)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**known)


def _round_floats(obj, digits: int = 9):
    if isinstance(obj, dict):
        return {k: _round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, digits) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(f"{v:.{digits}g}") if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _round_floats(obj.tolist(), digits)
    return obj


def stable_json(obj) -> str:
    return json.dumps(_round_floats(obj), sort_keys=True, indent=2) + "\n"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def write_csv(path, header: list, rows: list) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def calibration_to_dict(report: CalibrationReport) -> dict:
    return {
        "per_class_ece": report.per_class_ece,
        "per_class_mce": report.per_class_mce,
        "macro_ece": report.macro_ece,
        "macro_mce": report.macro_mce,
        "bins": report.bins,
        "mode": report.mode,
        "skipped_classes": report.skipped_classes,
    }


def emit_report(
    out_dir,
    config: RunConfig | None = None,
    task_results: dict[str, dict[int, TaskResult]] | None = None,
    calibration: dict[str, CalibrationReport] | None = None,
    records: dict[str, DisentanglementRecord] | None = None,
    overview: list[OverviewRow] | None = None,
) -> Path:
    """Write report.json plus task/disentanglement/overview CSV tables.

    Returns the path of the JSON report. Missing sections emit as empty
    arrays; the document is always schema-valid.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    task_results = task_results or {}
    calibration = calibration or {}
    records = records or {}
    overview = overview or []

    doc = {
        "schema_version": SCHEMA_VERSION,
        "notes": {
            "performance_axis": "task 5/6 enter averages as 1-ECE and 1-MCE so higher is better",
            "bubble": "1 - Spearman(EU, AU), clamped to [0, 2]",
        },
        "config": asdict(config) if config is not None else {},
        "tasks": {
            method: {str(task): r.to_dict() for task, r in sorted(per.items())}
            for method, per in sorted(task_results.items())
        },
        "calibration": {
            method: calibration_to_dict(rep) for method, rep in sorted(calibration.items())
        },
        "disentanglement": [records[m].to_dict() for m in sorted(records)],
        "overview": [
            {
                "method": row.method,
                "avg_performance": row.avg_performance,
                "gap": row.gap,
                "bubble": row.bubble,
                "complete": row.complete,
                "missing_tasks": row.missing,
            }
            for row in overview
        ],
    }
    report_path = out / "report.json"
    report_path.write_text(stable_json(doc))

    task_rows = [
        (method, r.task, r.metric, r.score_kind, r.value)
        for method, per in sorted(task_results.items())
        for _, r in sorted(per.items())
    ]
    write_csv(out / "task_scores.csv", ["method", "task", "metric", "score_kind", "value"], task_rows)

    gap_rows = [
        (records[m].method, records[m].auroc_eu, records[m].auroc_au, records[m].gap)
        for m in sorted(records)
        if records[m].applicable
    ]
    write_csv(out / "eu_au_gap.csv", ["method", "auroc_eu", "auroc_au", "gap"], gap_rows)

    overview_rows = [
        (row.method, row.avg_performance, row.gap, row.bubble)
        for row in overview
    ]
    write_csv(out / "overview.csv", ["method", "avg_performance", "gap", "bubble"], overview_rows)
    return report_path


def emit_calibration_bins_csv(path, report: CalibrationReport) -> None:
    rows = [
        (c, b.confidence, b.accuracy, b.count)
        for c, table in enumerate(report.per_class_bins)
        for b in table
    ]
    write_csv(path, ["class", "confidence", "accuracy", "count"], rows)
