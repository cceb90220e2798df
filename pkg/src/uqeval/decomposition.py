"""Information-theoretic uncertainty decomposition for multilabel predictions.

Each class is an independent Bernoulli, so entropy is the binary entropy
per (sample, class) cell and the decomposition holds cellwise:

    PU = H(mean over members),  AU = mean over members of H,  EU = PU - AU.

All values are in nats.
"""

from dataclasses import dataclass, field

import numpy as np

from .kernels import binary_entropy

LN2 = float(np.log(2.0))

SCORE_KINDS = (
    "PU", "AU", "EU",
    "EDL-PU", "EDL-AU", "EDL-EU",
    "DDU-NLL", "external",
)

AGGREGATIONS = ("mean", "sum", "max")


class ValidationError(ValueError):
    """Raised when an input violates a domain-type invariant."""


@dataclass(frozen=True)
class PredictionTensor:
    """M stochastic forward passes x N samples x C classes of probabilities."""

    values: np.ndarray  # (M, N, C) float64 in [0, 1]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 3:
            raise ValidationError(f"prediction tensor must be 3-d (M,N,C), got shape {v.shape}")
        if 0 in v.shape:
            raise ValidationError("M, N, C must all be >= 1")
        if not np.isfinite(v).all():
            raise ValidationError("prediction tensor contains NaN/Inf")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValidationError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "values", v)

    @property
    def members(self) -> int:
        return self.values.shape[0]

    @property
    def samples(self) -> int:
        return self.values.shape[1]

    @property
    def classes(self) -> int:
        return self.values.shape[2]


@dataclass(frozen=True)
class BMAOutput:
    """N x C mean probabilities over the member axis."""

    values: np.ndarray


@dataclass(frozen=True)
class UncertaintyScores:
    """Per-class (N, C) or per-sample (N,) uncertainty values with a kind tag."""

    values: np.ndarray
    kind: str
    negative_cells: bool = field(default=False)  # diagnostic, see edl module

    def __post_init__(self):
        if self.kind not in SCORE_KINDS:
            raise ValidationError(f"unknown score kind {self.kind!r}")
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim not in (1, 2):
            raise ValidationError(f"scores must be (N,) or (N, C), got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def per_class(self) -> bool:
        return self.values.ndim == 2


def bayesian_model_average(preds: PredictionTensor) -> BMAOutput:
    """Arithmetic mean over the member axis."""
    return BMAOutput(preds.values.mean(axis=0))


def binary_entropy_scalar(p: float) -> float:
    """Bernoulli entropy in nats; rejects p outside [0, 1]."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"probability {p} outside [0, 1]")
    return float(binary_entropy(np.array([p]))[0])


def predictive_uncertainty(preds: PredictionTensor) -> UncertaintyScores:
    """PU[n, c] = H(BMA[n, c])."""
    bma = preds.values.mean(axis=0)
    return UncertaintyScores(binary_entropy(bma), "PU")


def aleatoric_uncertainty(preds: PredictionTensor) -> UncertaintyScores:
    """AU[n, c] = mean over members of H(member probability)."""
    return UncertaintyScores(binary_entropy(preds.values).mean(axis=0), "AU")


def epistemic_uncertainty(preds: PredictionTensor) -> UncertaintyScores:
    """EU = PU - AU, elementwise; >= 0 up to float tolerance by concavity."""
    if preds.members == 1:
        # PU and AU are computed from the identical single member; make the
        # M=1 guarantee exact rather than leaving +-1 ulp residue.
        eu = np.zeros(preds.values.shape[1:], dtype=np.float64)
        return UncertaintyScores(eu, "EU")
    pu = predictive_uncertainty(preds).values
    au = aleatoric_uncertainty(preds).values
    return UncertaintyScores(pu - au, "EU")


def aggregate_classes(scores: UncertaintyScores, strategy: str = "mean") -> UncertaintyScores:
    """Reduce per-class (N, C) scores to per-sample (N,) scores."""
    if strategy not in AGGREGATIONS:
        raise ValidationError(f"unknown aggregation {strategy!r}; choose from {AGGREGATIONS}")
    v = scores.values
    if v.ndim != 2:
        raise ValidationError("aggregate_classes expects per-class (N, C) scores")
    if v.shape[1] == 0:
        raise ValidationError("empty class axis")
    if strategy == "mean":
        out = v.mean(axis=1)
    elif strategy == "sum":
        out = v.sum(axis=1)
    else:
        out = v.max(axis=1)
    return UncertaintyScores(out, scores.kind, scores.negative_cells)


def decompose(preds: PredictionTensor, kind: str) -> UncertaintyScores:
    """Convenience dispatch on the IT score kind."""
    if kind == "PU":
        return predictive_uncertainty(preds)
    if kind == "AU":
        return aleatoric_uncertainty(preds)
    if kind == "EU":
        return epistemic_uncertainty(preds)
    raise ValidationError(f"decompose supports PU/AU/EU, got {kind!r}")
