"""Reusable statistical metrics: AUROC, ECE/MCE, AUAC, Spearman.

Undefined results (single-class AUROC, constant-input Spearman) are
returned as None and reported, never imputed. Every metric here has a
brute-force oracle twin in the test suite.
"""

from dataclasses import dataclass

import numpy as np

from .decomposition import ValidationError

DEFAULT_BINS = 15
DEFAULT_AUAC_STEP = 0.05

CALIBRATION_MODES = ("confidence", "positive")


@dataclass(frozen=True)
class BinStats:
    """One calibration bin: mean binning statistic, accuracy, occupancy."""

    confidence: float
    accuracy: float
    count: int


@dataclass
class CalibrationReport:
    per_class_ece: list
    per_class_mce: list
    macro_ece: float
    macro_mce: float
    bins: int
    mode: str
    per_class_bins: list
    skipped_classes: list


def _midranks(x: np.ndarray) -> np.ndarray:
    """Mid-ranks (1-based, ties averaged) via double argsort-free pass."""
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x), dtype=np.float64)
    sx = x[order]
    i = 0
    while i < len(sx):
        j = i
        while j + 1 < len(sx) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auroc(scores: np.ndarray, labels: np.ndarray):
    """Mann-Whitney AUROC with mid-rank tie handling; None if single-class."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValidationError("scores and labels must be equal-length 1-d arrays")
    if not np.isin(y, (0, 1)).all():
        raise ValidationError("labels must be binary {0, 1}")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = _midranks(s)
    rank_sum = ranks[y == 1].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def macro_auroc(scores: np.ndarray, labels: np.ndarray, class_mask=None):
    """Unweighted mean of per-class AUROC; undefined classes skipped.

    Returns (macro, per_class list with None gaps, skipped class indices).
    Raises if every class is undefined.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 2:
        raise ValidationError("scores and labels must share an (N, C) shape")
    n_classes = s.shape[1]
    if class_mask is None:
        class_mask = np.ones(n_classes, dtype=bool)
    per_class = []
    skipped = []
    for c in range(n_classes):
        if not class_mask[c]:
            per_class.append(None)
            skipped.append(c)
            continue
        a = auroc(s[:, c], y[:, c])
        per_class.append(a)
        if a is None:
            skipped.append(c)
    defined = [a for a in per_class if a is not None]
    if not defined:
        raise ValidationError("AUROC undefined for every class")
    return float(np.mean(defined)), per_class, skipped


def _bin_stats(probs: np.ndarray, labels: np.ndarray, bins: int, mode: str):
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(labels)
    if p.shape != y.shape or p.ndim != 1 or len(p) == 0:
        raise ValidationError("probs and labels must be equal-length nonempty 1-d arrays")
    if p.min() < 0.0 or p.max() > 1.0:
        raise ValidationError("probabilities must lie in [0, 1]")
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    if mode not in CALIBRATION_MODES:
        raise ValidationError(f"mode must be one of {CALIBRATION_MODES}")
    if mode == "confidence":
        stat = np.maximum(p, 1.0 - p)
        hit = ((p >= 0.5) == (y == 1)).astype(np.float64)
    else:
        stat = p
        hit = (y == 1).astype(np.float64)
    idx = np.minimum((stat * bins).astype(np.int64), bins - 1)
    out = []
    for b in range(bins):
        mask = idx == b
        n_b = int(mask.sum())
        if n_b == 0:
            continue
        out.append(BinStats(float(stat[mask].mean()), float(hit[mask].mean()), n_b))
    return out, len(p)


def ece(probs, labels, bins: int = DEFAULT_BINS, mode: str = "confidence") -> float:
    """Expected calibration error over equal-width bins."""
    stats, n = _bin_stats(probs, labels, bins, mode)
    return float(sum(b.count / n * abs(b.accuracy - b.confidence) for b in stats))


def mce(probs, labels, bins: int = DEFAULT_BINS, mode: str = "confidence") -> float:
    """Maximum calibration error: worst occupied bin."""
    stats, _ = _bin_stats(probs, labels, bins, mode)
    return float(max(abs(b.accuracy - b.confidence) for b in stats))


def calibration_bins(probs, labels, bins: int = DEFAULT_BINS, mode: str = "confidence"):
    """Per-bin (confidence mean, accuracy, count) table for reliability plots."""
    stats, _ = _bin_stats(probs, labels, bins, mode)
    return stats


def accuracy_coverage_curve(uncertainty, correctness, step_fraction: float = DEFAULT_AUAC_STEP):
    """Coverage levels 1, 1-step, ... down to step, and retained mean correctness.

    At each level the ceil(coverage * N) least-uncertain samples are kept,
    ties broken by stable index order.
    """
    u = np.asarray(uncertainty, dtype=np.float64)
    a = np.asarray(correctness, dtype=np.float64)
    if u.shape != a.shape or u.ndim != 1:
        raise ValidationError("uncertainty and correctness must be equal-length 1-d arrays")
    if len(u) < 2:
        raise ValidationError("need at least two samples")
    if not 0.0 < step_fraction < 1.0:
        raise ValidationError("step_fraction must lie in (0, 1)")
    if np.nanmin(a) < 0.0 or np.nanmax(a) > 1.0:
        raise ValidationError("correctness must lie in [0, 1]")
    n = len(u)
    order = np.argsort(u, kind="stable")  # least uncertain first
    sorted_correct = a[order]
    prefix = np.cumsum(sorted_correct)
    coverages = []
    accuracies = []
    k = 0
    while True:
        cov = 1.0 - k * step_fraction
        if cov < step_fraction - 1e-12:
            break
        keep = int(np.ceil(cov * n - 1e-12))
        keep = max(keep, 1)
        coverages.append(cov)
        accuracies.append(float(prefix[keep - 1] / keep))
        k += 1
    if len(coverages) < 2:
        raise ValidationError("step_fraction yields fewer than two coverage points")
    return np.array(coverages), np.array(accuracies)


def auac(uncertainty, correctness, step_fraction: float = DEFAULT_AUAC_STEP) -> float:
    """Area under the accuracy-coverage curve, normalized by coverage span."""
    cov, acc = accuracy_coverage_curve(uncertainty, correctness, step_fraction)
    widths = cov[:-1] - cov[1:]
    area = float((0.5 * (acc[:-1] + acc[1:]) * widths).sum())
    return area / (cov[0] - cov[-1])


def spearman(x, y):
    """Tie-aware Spearman: Pearson correlation of mid-ranks; None if constant."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1 or len(xa) < 2:
        raise ValidationError("inputs must be equal-length 1-d arrays with N >= 2")
    if (xa == xa[0]).all() or (ya == ya[0]).all():
        return None
    rx = _midranks(xa)
    ry = _midranks(ya)
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    return float((rx @ ry) / np.sqrt((rx @ rx) * (ry @ ry)))


def calibration_report(
    probs: np.ndarray,
    labels: np.ndarray,
    valid_mask: np.ndarray | None = None,
    bins: int = DEFAULT_BINS,
    mode: str = "confidence",
) -> CalibrationReport:
    """Per-class ECE/MCE plus macro averages over (N, C) probabilities.

    `valid_mask` marks cells to include (used to drop uncertain labels).
    Classes with no valid cells are skipped and reported.
    """
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(labels)
    if p.shape != y.shape or p.ndim != 2:
        raise ValidationError("probs and labels must share an (N, C) shape")
    if valid_mask is None:
        valid_mask = np.ones(p.shape, dtype=bool)
    eces, mces, tables, skipped = [], [], [], []
    for c in range(p.shape[1]):
        m = valid_mask[:, c]
        if not m.any():
            eces.append(None)
            mces.append(None)
            tables.append([])
            skipped.append(c)
            continue
        eces.append(ece(p[m, c], y[m, c], bins, mode))
        mces.append(mce(p[m, c], y[m, c], bins, mode))
        tables.append(calibration_bins(p[m, c], y[m, c], bins, mode))
    defined_e = [v for v in eces if v is not None]
    if not defined_e:
        raise ValidationError("calibration undefined for every class")
    defined_m = [v for v in mces if v is not None]
    return CalibrationReport(
        per_class_ece=eces,
        per_class_mce=mces,
        macro_ece=float(np.mean(defined_e)),
        macro_mce=float(np.mean(defined_m)),
        bins=bins,
        mode=mode,
        per_class_bins=tables,
        skipped_classes=skipped,
    )
