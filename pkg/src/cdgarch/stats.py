"""Ensemble and time-series estimators with standard errors."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .events import EnsembleGrid
from .paths import SamplePath

__all__ = [
    "ensemble_mean",
    "empirical_autocov",
    "ensemble_cov",
    "weak_dependence_check",
    "time_average",
    "ValidationRow",
    "write_validation_csv",
]


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise FloatingPointError(f"non-finite values in {what}")


def _values_at(paths, t: float) -> np.ndarray:
    if isinstance(paths, EnsembleGrid):
        return paths.x[:, paths.index(t)]
    paths = list(paths)
    if not paths:
        raise ValueError("empty path collection")
    out = np.empty(len(paths))
    for i, p in enumerate(paths):
        if not isinstance(p, SamplePath):
            raise TypeError("expected SamplePath objects")
        tg, xg, _ = p.grid_view()
        out[i] = xg[int(np.argmin(np.abs(tg - t)))]
    return out


def ensemble_mean(paths, t: float) -> tuple[float, float]:
    """Cross-path mean of ``X`` at the grid point nearest ``t`` and its SE ``s/sqrt(n)``."""
    x = _values_at(paths, t)
    if len(x) < 2:
        raise ValueError("need at least two paths")
    _check_finite(x, "ensemble values")
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(len(x)))


def empirical_autocov(series, lag: int) -> tuple[float, float]:
    """Mean-removed autocovariance at ``lag`` with divisor ``n``.

    The standard error comes from batch means over ``floor(sqrt(n))``
    batches of the lagged products.
    """
    x = np.asarray(series, dtype=float)
    n = len(x)
    if lag < 0 or lag >= n:
        raise ValueError(f"lag must lie in [0, {n - 1}]")
    _check_finite(x, "series")
    d = x - x.mean()
    prod = d[: n - lag] * d[lag:]
    est = float(prod.sum() / n)
    nb = int(math.isqrt(len(prod)))
    if nb < 2:
        return est, math.nan
    size = len(prod) // nb
    means = prod[: nb * size].reshape(nb, size).mean(axis=1)
    # SE of a mean over len(prod) products, rescaled to the divisor-n estimate
    se = float(np.std(means, ddof=1) / math.sqrt(nb) * len(prod) / n)
    return est, se


def ensemble_cov(a, b) -> tuple[float, float]:
    """Cross-path covariance of paired samples ``a``, ``b`` with a delta-method SE.

    Symmetric in its arguments.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = len(a)
    if n != len(b) or n < 2:
        raise ValueError("need two equal-length samples of size >= 2")
    _check_finite(a, "first sample")
    _check_finite(b, "second sample")
    da = a - a.mean()
    db = b - b.mean()
    prod = da * db
    est = float(prod.sum() / (n - 1))
    se = float(np.std(prod, ddof=1) / math.sqrt(n))
    return est, se


def weak_dependence_check(paths, t: float, u_list) -> list[tuple[float, float, float]]:
    """``(u, Cov(X_t, X_{t+u}), SE)`` across paths for each lag ``u``."""
    xt = _values_at(paths, t)
    out = []
    for u in u_list:
        xu = _values_at(paths, t + u)
        c, se = ensemble_cov(xt, xu)
        out.append((float(u), c, se))
    return out


def time_average(path: SamplePath, t_start: float = 0.0) -> tuple[float, float]:
    """Single-path time average of ``X`` on the reporting grid after ``t_start``.

    Provided for exploration only: it presumes ergodicity, which is not
    established here. The SE uses batch means.
    """
    tg, xg, _ = path.grid_view()
    x = xg[tg >= t_start]
    if len(x) < 4:
        raise ValueError("too few points after t_start")
    nb = int(math.isqrt(len(x)))
    size = len(x) // nb
    means = x[: nb * size].reshape(nb, size).mean(axis=1)
    return float(x.mean()), float(np.std(means, ddof=1) / math.sqrt(nb))


@dataclass
class ValidationRow:
    quantity: str
    lag: float | None
    theory: float | None
    estimate: float | None
    std_error: float | None
    passed: bool

    @property
    def z_score(self) -> float | None:
        if self.theory is None or self.estimate is None or not self.std_error:
            return None
        return (self.estimate - self.theory) / self.std_error


def write_validation_csv(rows, out) -> None:
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, bool):
            return str(v).lower()
        return repr(float(v))

    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "lag", "theory", "estimate", "std_error", "z_score", "pass"])
        for r in rows:
            w.writerow([
                r.quantity, fmt(r.lag), fmt(r.theory), fmt(r.estimate),
                fmt(r.std_error), fmt(r.z_score), fmt(r.passed),
            ])
