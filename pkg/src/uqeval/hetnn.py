"""Multilabel heteroscedastic classifier evaluation.

The method predicts a logit mean and standard deviation per (sample,
class); its loss is binary cross-entropy over Monte-Carlo perturbed
logits. This module evaluates that loss and converts (mu, sigma) into a
PredictionTensor so the IT decomposition applies downstream.

Randomness is a counter-based Philox stream keyed by the seed; arrays are
drawn in one fixed-shape call so results are independent of evaluation
order and thread count.
"""

from dataclasses import dataclass

import numpy as np

from .decomposition import PredictionTensor, ValidationError

DEFAULT_MC_SAMPLES = 16
DEFAULT_MEMBERS = 5

_CLIP = 1e-12


@dataclass(frozen=True)
class HetLogits:
    """N x C logit means and nonnegative standard deviations."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        if mu.shape != sigma.shape or mu.ndim != 2:
            raise ValidationError(f"mu/sigma must share an (N, C) shape, got {mu.shape} and {sigma.shape}")
        if not (np.isfinite(mu).all() and np.isfinite(sigma).all()):
            raise ValidationError("logits contain NaN/Inf")
        if sigma.min() < 0.0:
            raise ValidationError("sigma must be nonnegative")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _normal_draws(seed: int, shape: tuple) -> np.ndarray:
    return np.random.Generator(np.random.Philox(key=seed)).standard_normal(shape)


def _bce(y: np.ndarray, p: np.ndarray) -> np.ndarray:
    p = np.clip(p, _CLIP, 1.0 - _CLIP)
    return -(y * np.log(p) + (1.0 - y) * np.log1p(-p))


def hetnn_loss(
    logits: HetLogits,
    labels: np.ndarray,
    mc_samples: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
    shared_noise: bool = False,
) -> float:
    """Mean over MC draws of BCE(y, sigmoid(mu + sigma * eps)).

    Summed over classes, averaged over samples; deterministic given seed.
    `shared_noise` draws one eps per (sample, draw) shared across classes.
    """
    y = np.asarray(labels)
    if y.shape != logits.mu.shape:
        raise ValidationError(f"labels shape {y.shape} does not match logits shape {logits.mu.shape}")
    if not np.isin(y, (0, 1)).all():
        raise ValidationError("labels must be binary {0, 1}")
    if mc_samples < 1:
        raise ValidationError("mc_samples must be >= 1")
    y = y.astype(np.float64)
    n, c = logits.mu.shape
    noise_shape = (mc_samples, n, 1) if shared_noise else (mc_samples, n, c)
    eps = _normal_draws(seed, noise_shape)
    z = logits.mu[None, :, :] + logits.sigma[None, :, :] * eps
    per_draw = _bce(y[None, :, :], sigmoid(z))  # (mc, N, C)
    return float(per_draw.mean(axis=0).sum(axis=1).mean())


def hetnn_loss_grad_mu(
    logits: HetLogits,
    labels: np.ndarray,
    mc_samples: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
) -> np.ndarray:
    """Pathwise gradient of hetnn_loss w.r.t. mu under common random numbers."""
    y = np.asarray(labels, dtype=np.float64)
    n, c = logits.mu.shape
    eps = _normal_draws(seed, (mc_samples, n, c))
    z = logits.mu[None, :, :] + logits.sigma[None, :, :] * eps
    # d BCE(y, sigmoid(z)) / dz = sigmoid(z) - y
    return (sigmoid(z) - y[None, :, :]).mean(axis=0) / n


def hetnn_sample_predictions(
    logits: HetLogits,
    members: int = DEFAULT_MEMBERS,
    seed: int = 0,
) -> PredictionTensor:
    """Draw M member probability maps sigmoid(mu + sigma * eps_m)."""
    if members < 1:
        raise ValidationError("members must be >= 1")
    n, c = logits.mu.shape
    eps = _normal_draws(seed, (members, n, c))
    return PredictionTensor(sigmoid(logits.mu[None, :, :] + logits.sigma[None, :, :] * eps))
