"""Response transformations for residual normality.

The Box-Cox family maps a positive response y to (y**lam - 1) / lam, with
the natural log as the lam = 0 limit.  The exponent is chosen by maximizing
the profile log-likelihood of a linear model in the transformed response:

    ll(lam) = -(n / 2) * ln(RSS(lam) / n) + (lam - 1) * sum(ln y)

where RSS(lam) is the residual sum of squares from regressing the
transformed response on a fixed design matrix.  A coarse grid locates a
bracket around the maximizer and golden-section search refines it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericError

__all__ = [
    "BoxCoxTransform",
    "boxcox_apply",
    "boxcox_invert",
    "fit_boxcox_lambda",
    "profile_loglik",
    "pearson_correlation",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _require_positive(y: np.ndarray) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1:
        raise NumericError(f"response must be one-dimensional, got shape {arr.shape}")
    ok = np.isfinite(arr) & (arr > 0.0)
    if not ok.all():
        idx = int(np.argmin(ok))
        raise NumericError(
            f"Box-Cox requires strictly positive responses; "
            f"offending value {arr[idx]!r} at index {idx} "
            f"(add a small configured offset if zeros are expected)"
        )
    return arr


# Exponents this small make lam * log(y) underflow, so the expm1 route
# would silently collapse; mathematically they are the log branch anyway.
_LOG_BRANCH_EPS = 1e-305


def boxcox_apply(y, lam: float):
    """Box-Cox transform of positive values; scalar in, scalar out."""
    scalar = np.isscalar(y)
    arr = _require_positive(np.atleast_1d(np.asarray(y, dtype=float)))
    if abs(lam) < _LOG_BRANCH_EPS:
        out = np.log(arr)
    else:
        # expm1 keeps the lam -> 0 limit smooth to machine precision.
        out = np.expm1(lam * np.log(arr)) / lam
    return float(out[0]) if scalar else out


def boxcox_invert(z, lam: float):
    """Inverse Box-Cox transform; requires lam * z + 1 > 0 when lam != 0."""
    scalar = np.isscalar(z)
    arr = np.atleast_1d(np.asarray(z, dtype=float))
    if not np.isfinite(arr).all():
        raise NumericError("inverse Box-Cox requires finite inputs")
    if abs(lam) < _LOG_BRANCH_EPS:
        out = np.exp(arr)
    else:
        inner = lam * arr
        if not (inner > -1.0).all():
            idx = int(np.argmin(inner > -1.0))
            raise NumericError(
                f"inverse Box-Cox domain violation at index {idx}: "
                f"lam * z + 1 = {inner[idx] + 1.0!r} is not positive (lam={lam!r})"
            )
        out = np.exp(np.log1p(inner) / lam)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class BoxCoxTransform:
    """A fitted Box-Cox exponent with its profile log-likelihood."""

    lam: float
    log_likelihood: float
    interval: tuple[float, float]

    def apply(self, y):
        return boxcox_apply(y, self.lam)

    def invert(self, z):
        return boxcox_invert(z, self.lam)


def _design_q(design: np.ndarray) -> np.ndarray:
    x = np.asarray(design, dtype=float)
    if x.ndim != 2 or x.shape[0] <= x.shape[1]:
        raise NumericError(
            f"design must have more rows than columns, got shape {x.shape}"
        )
    q, r = scipy.linalg.qr(x, mode="economic")
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10 * max(diag.max(), 1e-300):
        raise NumericError("design matrix is rank deficient; cannot profile lambda")
    return q


def profile_loglik(lam: float, y: np.ndarray, q: np.ndarray, log_sum: float) -> float:
    z = boxcox_apply(y, lam)
    resid = z - q @ (q.T @ z)
    rss = float(resid @ resid)
    n = y.shape[0]
    if rss <= 0.0:
        raise NumericError("zero residual sum of squares while profiling lambda")
    return -0.5 * n * math.log(rss / n) + (lam - 1.0) * log_sum


def fit_boxcox_lambda(
    y,
    design,
    interval: tuple[float, float] = (-2.0, 3.0),
    tol: float = 1e-5,
    grid_points: int = 61,
) -> BoxCoxTransform:
    """Profile-likelihood Box-Cox exponent for a fixed design matrix.

    A grid over the interval brackets the maximizer, then golden-section
    search narrows the bracket below ``tol``.  The returned exponent
    attains a profile log-likelihood at least as large as either interval
    endpoint.
    """
    arr = _require_positive(y)
    lo, hi = float(interval[0]), float(interval[1])
    if not (lo < hi):
        raise NumericError(f"invalid lambda interval {interval!r}")
    q = _design_q(design)
    if q.shape[0] != arr.shape[0]:
        raise NumericError(
            f"design has {q.shape[0]} rows but response has {arr.shape[0]}"
        )
    log_sum = float(np.log(arr).sum())

    def ll(lam: float) -> float:
        return profile_loglik(lam, arr, q, log_sum)

    grid = np.linspace(lo, hi, grid_points)
    values = [ll(g) for g in grid]
    k = int(np.argmax(values))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, grid_points - 1)]

    # Golden-section search for the maximum on [a, b].
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = ll(c), ll(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = ll(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = ll(d)
    lam = 0.5 * (a + b)
    best = ll(lam)
    if best < values[0] or best < values[-1]:
        raise NumericError("lambda search failed: interval endpoint beats the optimum")
    return BoxCoxTransform(lam=float(lam), log_likelihood=best, interval=(lo, hi))


def pearson_correlation(u, v) -> float:
    """Pearson product-moment correlation of two equal-length samples."""
    a = np.asarray(u, dtype=float)
    b = np.asarray(v, dtype=float)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise NumericError(f"correlation needs equal-length vectors, got {a.shape} and {b.shape}")
    if a.shape[0] < 2:
        raise NumericError("correlation needs at least two observations")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise NumericError("correlation inputs must be finite")
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(da @ da) * float(db @ db))
    if denom == 0.0:
        raise NumericError("correlation undefined for a constant input")
    return float(da @ db) / denom
