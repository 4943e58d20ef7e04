"""Uniformity statistics for ciphertext vectors.

The pipeline is normalize -> histogram -> chi_square -> chi2_cdf. Two things
differ from a textbook Pearson test and are kept on purpose:

* ``chi_square`` works on bin *probabilities*, ``m * sum((p_j - 1/m)**2)``,
  not on counts, so it is ``n`` times smaller than the count statistic.
* ``theta`` is the CDF value (one minus the p-value) and a vector is called
  uniform when ``theta < 0.05``. A conventional test reads it the other way.

``histogram_soft`` is a smooth stand-in for ``histogram_hard`` so the theta
term can be trained by gradient descent; ``theta_soft_batch`` returns both
the values and a vector-Jacobian product through the whole pipeline.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UNIFORM_THRESHOLD = 0.05
_EPS = 1e-16
_MAX_ITER = 10_000


@dataclass(frozen=True)
class UniformityReport:
    chi_square: float
    dof: int
    theta: float
    uniform: bool
    bin_count: int

    def verdict(self) -> str:
        return "uniform" if self.uniform else "not uniform"


def normalize(values) -> np.ndarray:
    """Min-max scale to [0, 1]. A constant vector maps to 0.5 everywhere."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError(f"normalize needs at least 2 values, got shape {v.shape}")
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.full_like(v, 0.5)
    return (v - lo) / (hi - lo)


def _bin_index(h: np.ndarray, m: int) -> np.ndarray:
    # Bins are [(j-1)/m, j/m); the last one also takes h == 1.
    return np.minimum(np.floor(h * m).astype(np.int64), m - 1)


def histogram_hard(h, m: int) -> np.ndarray:
    if m < 2:
        raise ValueError(f"bin count must be >= 2, got {m}")
    h = np.asarray(h, dtype=float)
    if h.size == 0:
        raise ValueError("empty sample")
    if h.min() < 0.0 or h.max() > 1.0:
        raise ValueError("histogram_hard expects values in [0, 1]")
    counts = np.bincount(_bin_index(h.ravel(), m), minlength=m)
    return counts / h.size


def chi_square(p) -> float:
    p = np.asarray(p, dtype=float)
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"probabilities must sum to 1, got {p.sum()!r}")
    m = p.size
    return float(m * np.sum((p - 1.0 / m) ** 2))


def _gamma_series(a: float, x: float) -> float:
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_k x^k / ((a+1)...(a+k))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise ArithmeticError(f"series did not converge for a={a}, x={x}")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cont_frac(a: float, x: float) -> float:
    # Q(a, x) by modified Lentz on the Legendre continued fraction.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    f = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        f *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"continued fraction did not converge for a={a}, x={x}")
    return f * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammainc_lower(a: float, x: float) -> float:
    """Regularized lower incomplete gamma ``P(a, x) = gamma(a, x) / Gamma(a)``."""
    if a <= 0:
        raise ValueError(f"shape must be positive, got {a}")
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(1.0, _gamma_series(a, x))
    return max(0.0, 1.0 - _gamma_cont_frac(a, x))


def chi2_cdf(x: float, dof: int) -> float:
    if dof < 1:
        raise ValueError(f"dof must be >= 1, got {dof}")
    if x < 0:
        raise ValueError(f"chi-square value must be non-negative, got {x}")
    return gammainc_lower(dof / 2.0, x / 2.0)


def chi2_pdf(x: float, dof: int) -> float:
    """Density of the chi-squared distribution; derivative of :func:`chi2_cdf`."""
    if x < 0:
        return 0.0
    k = dof / 2.0
    if x == 0:
        if dof == 1:
            return math.inf
        return 0.5 if dof == 2 else 0.0
    return math.exp((k - 1.0) * math.log(x) - x / 2.0 - k * math.log(2.0) - math.lgamma(k))


def uniformity_report(values, m: int) -> UniformityReport:
    h = normalize(values)
    p = histogram_hard(h, m)
    chi2 = chi_square(p)
    theta = chi2_cdf(chi2, m - 1)
    return UniformityReport(
        chi_square=chi2, dof=m - 1, theta=theta, uniform=theta < UNIFORM_THRESHOLD, bin_count=m
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _soft_weights(h: np.ndarray, m: int, bandwidth: float):
    """Per-sample bin memberships and their derivatives wrt ``h``.

    Membership of ``h`` in bin ``[a, b)`` is ``sig((h-a)/bw) - sig((h-b)/bw)``,
    rescaled so each sample's memberships sum to one.
    """
    edges = np.arange(m + 1) / m
    sig = _sigmoid((h[..., None] - edges) / bandwidth)
    dsig = sig * (1.0 - sig) / bandwidth
    w = sig[..., :-1] - sig[..., 1:]
    dw = dsig[..., :-1] - dsig[..., 1:]
    s = sig[..., 0] - sig[..., -1]
    ds = dsig[..., 0] - dsig[..., -1]
    q = w / s[..., None]
    dq = (dw - q * ds[..., None]) / s[..., None]
    return q, dq


def histogram_soft(h, m: int, bandwidth: float) -> np.ndarray:
    """Differentiable histogram; converges to :func:`histogram_hard` as bandwidth -> 0.

    ``h`` may be 1-d (one sample set) or 2-d (a batch of sample sets, one per row).
    """
    if m < 2:
        raise ValueError(f"bin count must be >= 2, got {m}")
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    h = np.asarray(h, dtype=float)
    q, _ = _soft_weights(h, m, bandwidth)
    return q.mean(axis=-2)


def histogram_soft_vjp(h, m: int, bandwidth: float, grad_p) -> np.ndarray:
    """Gradient wrt ``h`` of ``sum(grad_p * histogram_soft(h, m, bandwidth))``."""
    h = np.asarray(h, dtype=float)
    _, dq = _soft_weights(h, m, bandwidth)
    n = h.shape[-1]
    return np.einsum("...ij,...j->...i", dq, np.asarray(grad_p, dtype=float)) / n


def normalize_batch(y: np.ndarray):
    """Row-wise min-max scaling. Returns ``(h, lo_idx, hi_idx, span)``; span 0 marks constant rows."""
    lo_idx = y.argmin(axis=1)
    hi_idx = y.argmax(axis=1)
    rows = np.arange(y.shape[0])
    lo = y[rows, lo_idx]
    span = y[rows, hi_idx] - lo
    safe = np.where(span > 0, span, 1.0)
    h = np.where(span[:, None] > 0, (y - lo[:, None]) / safe[:, None], 0.5)
    return h, lo_idx, hi_idx, span


def normalize_batch_vjp(grad_h, h, lo_idx, hi_idx, span) -> np.ndarray:
    rows = np.arange(h.shape[0])
    safe = np.where(span > 0, span, 1.0)
    g = grad_h / safe[:, None]
    np.add.at(g, (rows, lo_idx), np.sum(grad_h * (h - 1.0), axis=1) / safe)
    np.add.at(g, (rows, hi_idx), -np.sum(grad_h * h, axis=1) / safe)
    return np.where(span[:, None] > 0, g, 0.0)


def theta_soft_batch(y: np.ndarray, m: int, bandwidth: float, need_grad: bool = True):
    """Soft-histogram theta of every row of ``y``.

    Returns ``(theta, grad)`` where ``grad[b]`` is d theta[b] / d y[b]
    (``None`` when ``need_grad`` is false).
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    h, lo_idx, hi_idx, span = normalize_batch(y)
    q, dq = _soft_weights(h, m, bandwidth)
    p = q.mean(axis=1)
    chi2 = m * np.sum((p - 1.0 / m) ** 2, axis=1)
    dof = m - 1
    theta = np.array([chi2_cdf(float(c), dof) for c in chi2])
    if not need_grad:
        return theta, None
    # At chi2 == 0 every p_j is exactly 1/m, so grad_p is zero regardless.
    dtheta = np.array([chi2_pdf(float(c), dof) if c > 0 else 0.0 for c in chi2])
    grad_p = (2.0 * m * (p - 1.0 / m)) * dtheta[:, None]
    grad_h = np.einsum("bij,bj->bi", dq, grad_p) / y.shape[1]
    return theta, normalize_batch_vjp(grad_h, h, lo_idx, hi_idx, span)


def theta_hard_batch(y: np.ndarray, m: int) -> np.ndarray:
    """Hard-histogram theta of every row; the value reported in evaluations."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    return np.array([uniformity_report(row, m).theta for row in y])
