"""Post-hoc density uncertainty on penultimate features.

Per class, a diagonal Gaussian is fitted to the features of the
positively labeled samples; uncertainty at inference is the negative log
density under that class's Gaussian. Labels use the {-1, 0, 1}
convention; -1 (annotator-uncertain) samples never enter a fit.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .decomposition import UncertaintyScores, ValidationError
from .kernels import ddu_nll

DEFAULT_JITTER = 1e-6


@dataclass(frozen=True)
class FeatureMatrix:
    """N x D penultimate-layer features."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or 0 in v.shape:
            raise ValidationError(f"features must be a nonempty (N, D) matrix, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise ValidationError("features contain NaN/Inf")
        object.__setattr__(self, "values", v)

    @property
    def dims(self) -> int:
        return self.values.shape[1]


@dataclass
class ClassGaussian:
    """Fitted diagonal Gaussian for one class, or a fit-failure marker."""

    mean: np.ndarray | None
    var: np.ndarray | None
    count: int
    jitter_applied: bool = False
    fitted: bool = True


@dataclass
class ClassGaussians:
    per_class: list[ClassGaussian]
    dims: int
    jitter: float

    def to_dict(self) -> dict:
        return {
            "dims": self.dims,
            "jitter": self.jitter,
            "classes": [
                {
                    "fitted": g.fitted,
                    "count": g.count,
                    "jitter_applied": g.jitter_applied,
                    "mean": None if g.mean is None else g.mean.tolist(),
                    "var": None if g.var is None else g.var.tolist(),
                }
                for g in self.per_class
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassGaussians":
        per_class = [
            ClassGaussian(
                mean=None if c["mean"] is None else np.asarray(c["mean"], dtype=np.float64),
                var=None if c["var"] is None else np.asarray(c["var"], dtype=np.float64),
                count=c["count"],
                jitter_applied=c["jitter_applied"],
                fitted=c["fitted"],
            )
            for c in d["classes"]
        ]
        return cls(per_class=per_class, dims=d["dims"], jitter=d["jitter"])


def fit_class_gaussians(
    features: FeatureMatrix,
    labels: np.ndarray,
    jitter: float = DEFAULT_JITTER,
) -> ClassGaussians:
    """Fit per-class diagonal Gaussians on positively labeled samples.

    Variance uses the unbiased N_c - 1 denominator, computed two-pass
    (mean then deviations) for numerical stability. Degenerate variances
    (single sample, or zero spread) fall back to the jitter.
    """
    if jitter <= 0.0:
        raise ValidationError("jitter must be positive")
    y = np.asarray(labels)
    if y.ndim != 2 or y.shape[0] != features.values.shape[0]:
        raise ValidationError(f"labels must be (N, C) with N matching features, got {y.shape}")
    if not np.isin(y, (-1, 0, 1)).all():
        raise ValidationError("labels must take values in {-1, 0, 1}")

    x = features.values
    fitted = []
    for c in range(y.shape[1]):
        pos = x[y[:, c] == 1]
        n_c = pos.shape[0]
        if n_c == 0:
            fitted.append(ClassGaussian(mean=None, var=None, count=0, fitted=False))
            continue
        mu = pos.mean(axis=0)
        if n_c == 1:
            warnings.warn(
                f"class {c}: single positive sample, variance undefined; using jitter {jitter}",
                stacklevel=2,
            )
            var = np.full(features.dims, jitter)
            fitted.append(ClassGaussian(mean=mu, var=var, count=1, jitter_applied=True))
            continue
        var = ((pos - mu) ** 2).sum(axis=0) / (n_c - 1)
        degenerate = ~(var > 0.0) | ~np.isfinite(var)
        if degenerate.any():
            var = np.where(degenerate, var + jitter, var)
            var[~np.isfinite(var)] = jitter
        fitted.append(ClassGaussian(mean=mu, var=var, count=n_c, jitter_applied=bool(degenerate.any())))
    return ClassGaussians(per_class=fitted, dims=features.dims, jitter=jitter)


def ddu_score(features: FeatureMatrix, gaussians: ClassGaussians) -> tuple[UncertaintyScores, np.ndarray]:
    """Negative log density per (sample, class); higher means more uncertain.

    Returns the scores and a per-class validity mask; columns of unfitted
    classes are NaN and marked invalid.
    """
    if features.dims != gaussians.dims:
        raise ValidationError(f"feature dims {features.dims} do not match fitted dims {gaussians.dims}")
    fitted_idx = [c for c, g in enumerate(gaussians.per_class) if g.fitted]
    n = features.values.shape[0]
    n_classes = len(gaussians.per_class)
    out = np.full((n, n_classes), np.nan)
    if fitted_idx:
        mu = np.stack([gaussians.per_class[c].mean for c in fitted_idx])
        var = np.stack([gaussians.per_class[c].var for c in fitted_idx])
        out[:, fitted_idx] = ddu_nll(features.values, mu, var)
    valid = np.zeros(n_classes, dtype=bool)
    valid[fitted_idx] = True
    return UncertaintyScores(out, "DDU-NLL"), valid
