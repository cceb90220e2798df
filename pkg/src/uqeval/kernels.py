"""Hot numeric kernels, in numba and pure-numpy builds.

Every public kernel has a `*_np` (vectorized numpy) and, when numba is
installed, a `*_nb` (@njit) build. The unsuffixed name dispatches to the
build selected by `uqeval._backend` (env var UQEVAL_NUMBA). Both builds
must agree to ~1 ulp; tests/test_kernels.py enforces parity.
"""

import math

import numpy as np
from scipy.special import gammaln

from ._backend import NUMBA_AVAILABLE, USE_NUMBA

_PROB_EPS = 1e-12  # clamp before log; perturbs entropy by < 1e-10
_LN_2PI = math.log(2.0 * math.pi)

# Asymptotic series threshold: below this the recurrence shifts the
# argument up, above it the Bernoulli-number series is accurate to ~1e-15.
_PSI_SHIFT = 10.0


# ---------------------------------------------------------------------------
# numpy builds
# ---------------------------------------------------------------------------

def binary_entropy_np(p: np.ndarray) -> np.ndarray:
    """Elementwise Bernoulli entropy in nats, with 0*log(0) == 0."""
    q = np.clip(np.asarray(p, dtype=np.float64), _PROB_EPS, 1.0 - _PROB_EPS)
    return -q * np.log(q) - (1.0 - q) * np.log1p(-q)


def digamma_np(x: np.ndarray) -> np.ndarray:
    """Digamma via upward recurrence plus asymptotic series; x > 0."""
    y = np.array(x, dtype=np.float64, copy=True)
    shifted = np.zeros_like(y)
    while True:
        small = y < _PSI_SHIFT
        if not small.any():
            break
        shifted[small] -= 1.0 / y[small]
        y[small] += 1.0
    f = 1.0 / (y * y)
    series = f * (1.0 / 12.0 - f * (1.0 / 120.0 - f * (1.0 / 252.0 - f * (
        1.0 / 240.0 - f * (1.0 / 132.0 - f * (691.0 / 32760.0 - f / 12.0))))))
    return shifted + np.log(y) - 0.5 / y - series


def trigamma_np(x: np.ndarray) -> np.ndarray:
    """Trigamma via upward recurrence plus asymptotic series; x > 0."""
    y = np.array(x, dtype=np.float64, copy=True)
    shifted = np.zeros_like(y)
    while True:
        small = y < _PSI_SHIFT
        if not small.any():
            break
        shifted[small] += 1.0 / (y[small] * y[small])
        y[small] += 1.0
    f = 1.0 / (y * y)
    series = 1.0 / y + 0.5 * f + (1.0 / y) * f * (1.0 / 6.0 - f * (
        1.0 / 30.0 - f * (1.0 / 42.0 - f / 30.0)))
    return shifted + series


def kl_beta_uniform_np(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Elementwise KL( Beta(a,b) || Beta(1,1) ), closed form."""
    a = np.asarray(alpha, dtype=np.float64)
    b = np.asarray(beta, dtype=np.float64)
    s = a + b
    ln_beta_fn = gammaln(a) + gammaln(b) - gammaln(s)
    psi_s = digamma_np(s)
    return (-ln_beta_fn
            + (a - 1.0) * (digamma_np(a) - psi_s)
            + (b - 1.0) * (digamma_np(b) - psi_s))


def ddu_nll_np(features: np.ndarray, mu: np.ndarray, var: np.ndarray) -> np.ndarray:
    """Diagonal-Gaussian negative log density.

    features: (N, D); mu, var: (C, D). Returns (N, C).
    """
    n = features.shape[0]
    c = mu.shape[0]
    out = np.empty((n, c), dtype=np.float64)
    log_const = 0.5 * np.sum(np.log(2.0 * np.pi * var), axis=1)  # (C,)
    for k in range(c):
        d2 = (features - mu[k]) ** 2 / (2.0 * var[k])
        out[:, k] = log_const[k] + d2.sum(axis=1)
    return out


# ---------------------------------------------------------------------------
# numba builds
# ---------------------------------------------------------------------------

if NUMBA_AVAILABLE:
    from numba import njit, prange

    @njit(cache=True)
    def _binary_entropy_scalar(p):
        q = p
        if q < _PROB_EPS:
            q = _PROB_EPS
        elif q > 1.0 - _PROB_EPS:
            q = 1.0 - _PROB_EPS
        return -q * math.log(q) - (1.0 - q) * math.log1p(-q)

    @njit(cache=True, parallel=True)
    def _binary_entropy_flat(p, out):
        for i in prange(p.size):
            out[i] = _binary_entropy_scalar(p[i])

    def binary_entropy_nb(p: np.ndarray) -> np.ndarray:
        p = np.ascontiguousarray(p, dtype=np.float64)
        out = np.empty(p.size, dtype=np.float64)
        _binary_entropy_flat(p.ravel(), out)
        return out.reshape(p.shape)

    @njit(cache=True)
    def _digamma_scalar(x):
        r = 0.0
        y = x
        while y < _PSI_SHIFT:
            r -= 1.0 / y
            y += 1.0
        f = 1.0 / (y * y)
        series = f * (1.0 / 12.0 - f * (1.0 / 120.0 - f * (1.0 / 252.0 - f * (
            1.0 / 240.0 - f * (1.0 / 132.0 - f * (691.0 / 32760.0 - f / 12.0))))))
        return r + math.log(y) - 0.5 / y - series

    @njit(cache=True, parallel=True)
    def _digamma_flat(x, out):
        for i in prange(x.size):
            out[i] = _digamma_scalar(x[i])

    def digamma_nb(x: np.ndarray) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.float64)
        out = np.empty(x.size, dtype=np.float64)
        _digamma_flat(x.ravel(), out)
        return out.reshape(x.shape)

    @njit(cache=True)
    def _trigamma_scalar(x):
        r = 0.0
        y = x
        while y < _PSI_SHIFT:
            r += 1.0 / (y * y)
            y += 1.0
        f = 1.0 / (y * y)
        series = 1.0 / y + 0.5 * f + (1.0 / y) * f * (1.0 / 6.0 - f * (
            1.0 / 30.0 - f * (1.0 / 42.0 - f / 30.0)))
        return r + series

    @njit(cache=True, parallel=True)
    def _trigamma_flat(x, out):
        for i in prange(x.size):
            out[i] = _trigamma_scalar(x[i])

    def trigamma_nb(x: np.ndarray) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.float64)
        out = np.empty(x.size, dtype=np.float64)
        _trigamma_flat(x.ravel(), out)
        return out.reshape(x.shape)

    @njit(cache=True, parallel=True)
    def _kl_beta_uniform_flat(a, b, out):
        for i in prange(a.size):
            s = a[i] + b[i]
            ln_beta_fn = math.lgamma(a[i]) + math.lgamma(b[i]) - math.lgamma(s)
            psi_s = _digamma_scalar(s)
            out[i] = (-ln_beta_fn
                      + (a[i] - 1.0) * (_digamma_scalar(a[i]) - psi_s)
                      + (b[i] - 1.0) * (_digamma_scalar(b[i]) - psi_s))

    def kl_beta_uniform_nb(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
        a = np.ascontiguousarray(alpha, dtype=np.float64)
        b = np.ascontiguousarray(beta, dtype=np.float64)
        out = np.empty(a.size, dtype=np.float64)
        _kl_beta_uniform_flat(a.ravel(), b.ravel(), out)
        return out.reshape(a.shape)

    @njit(cache=True, parallel=True)
    def _ddu_nll_loop(features, mu, var, out):
        n, d = features.shape
        c = mu.shape[0]
        for i in prange(n):
            for k in range(c):
                acc = 0.0
                for j in range(d):
                    acc += 0.5 * math.log(2.0 * math.pi * var[k, j])
                    diff = features[i, j] - mu[k, j]
                    acc += diff * diff / (2.0 * var[k, j])
                out[i, k] = acc

    def ddu_nll_nb(features: np.ndarray, mu: np.ndarray, var: np.ndarray) -> np.ndarray:
        features = np.ascontiguousarray(features, dtype=np.float64)
        mu = np.ascontiguousarray(mu, dtype=np.float64)
        var = np.ascontiguousarray(var, dtype=np.float64)
        out = np.empty((features.shape[0], mu.shape[0]), dtype=np.float64)
        _ddu_nll_loop(features, mu, var, out)
        return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if USE_NUMBA:
    binary_entropy = binary_entropy_nb
    digamma_arr = digamma_nb
    trigamma_arr = trigamma_nb
    kl_beta_uniform_arr = kl_beta_uniform_nb
    ddu_nll = ddu_nll_nb
else:
    binary_entropy = binary_entropy_np
    digamma_arr = digamma_np
    trigamma_arr = trigamma_np
    kl_beta_uniform_arr = kl_beta_uniform_np
    ddu_nll = ddu_nll_np
