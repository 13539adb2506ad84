"""Grid-based Euler scheme for the variance/price pair.

On the grid ``n * delta`` the variance follows the GARCH-shaped recursion

    X_n = delta*eta + sum_k a_k X_{n-k} + sum_k b_k X_{n-k} dS_{n-k+1}

with ``a_k = delta**2 f_mu(-k delta) + (1 - c_mu delta) 1{k=1}`` and
``b_k = delta f_nu(-k delta) + c_nu 1{k=1}``. The price is updated with the
left variance value, ``Y_n = Y_{n-1} + sqrt(max(X_{n-1}, 0)) dL_n``.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from numba import njit

from .kernels import DelayModel
from .noise import IncrementSeries
from .paths import HistorySegment, SamplePath

__all__ = ["lag_count", "euler_coefficients", "euler_simulate", "euler_returns"]

_DIV_RTOL = 1e-9


def lag_count(length: float, delta: float, what: str = "delay") -> int:
    """``length / delta`` as an integer, rejecting non-divisible steps."""
    ratio = length / delta
    k = int(round(ratio))
    if abs(ratio - k) > _DIV_RTOL * max(1.0, ratio):
        raise ValueError(f"step {delta} does not divide the {what} length {length}")
    return k


def euler_coefficients(model: DelayModel, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Lag coefficients ``(a, b)``; ``a[k-1]`` multiplies ``X_{n-k}``.

    The lag counts are ``max(p/delta, 1)`` and ``max(q/delta, 1)`` so that the
    point-mass terms are kept when a delay length is zero.
    """
    kp = max(lag_count(model.p, delta, "p"), 1)
    kq = max(lag_count(model.q, delta, "q"), 1)
    lags_p = np.arange(1, kp + 1) * delta
    lags_q = np.arange(1, kq + 1) * delta
    a = np.zeros(kp)
    b = np.zeros(kq)
    if model.f_mu is not None:
        a += delta * delta * np.asarray(model.f_mu(-lags_p))
    if model.f_nu is not None:
        b += delta * np.asarray(model.f_nu(-lags_q))
    a[0] += 1.0 - model.c_mu * delta
    b[0] += model.c_nu
    return a, b


@njit(cache=True)
def _euler_core(eta, delta, a, b, x, dsx, dlx, nh, n_future, y0):
    # x[i] holds X_{i - nh}; dsx[m + nh] and dlx[m + nh] hold step m increments
    y = np.empty(n_future + 1)
    y[0] = y0
    kp = a.shape[0]
    kq = b.shape[0]
    for n in range(1, n_future + 1):
        i = n + nh
        acc = delta * eta
        for k in range(1, kp + 1):
            acc += a[k - 1] * x[i - k]
        for k in range(1, kq + 1):
            acc += b[k - 1] * x[i - k] * dsx[i - k + 1]
        x[i] = acc
        xl = x[i - 1]
        y[n] = y[n - 1] + math.sqrt(xl if xl > 0.0 else 0.0) * dlx[i]
    return y


def euler_simulate(
    model: DelayModel,
    inc: IncrementSeries,
    phi: HistorySegment,
    y0: float = 0.0,
) -> SamplePath:
    """Run the Euler recursion over all future steps of ``inc``.

    Negative variance values are not clamped; their count and first time are
    stored in ``meta``. The price update uses ``max(X, 0)`` under the root.
    """
    delta = inc.delta
    a, b = euler_coefficients(model, delta)
    nh = lag_count(model.r, delta, "history")
    n_future = inc.n_future
    x = np.empty(nh + n_future + 1)
    x[: nh + 1] = phi(np.arange(-nh, 1) * delta)
    # step m sits at dsx[m + nh]; step -nh is never used
    dsx = np.zeros(nh + n_future + 1)
    dlx = np.zeros(nh + n_future + 1)
    have = min(inc.n_history, nh)
    need = len(b) - 1
    if need > inc.n_history:
        warnings.warn(
            f"increment series has {inc.n_history} history steps but the q-window "
            f"needs {need}; missing values are zero-filled",
            stacklevel=2,
        )
    src0 = inc.n_history - have
    dsx[nh + 1 - have: nh + 1 + n_future] = inc.ds[src0:]
    dlx[nh + 1 - have: nh + 1 + n_future] = inc.dl[src0:]
    y = _euler_core(
        float(model.eta), float(delta), a, b, x, dsx, dlx, nh, n_future, float(y0)
    )
    t = np.arange(-nh, n_future + 1) * delta
    neg = np.flatnonzero(x[nh + 1:] < 0)
    meta = {
        "scheme": "euler",
        "delta": delta,
        "seed": model.noise.seed,
        "model_digest": model.digest(),
        "negative_steps": int(len(neg)),
        "first_negative_t": float(t[nh + 1 + neg[0]]) if len(neg) else None,
    }
    return SamplePath(t, x, y, nh, delta=delta, meta=meta)


def euler_returns(path: SamplePath, tau: float) -> np.ndarray:
    """Returns ``Y_t - Y_{t - tau}`` at every grid time ``t >= tau``."""
    if path.delta is None:
        raise ValueError("returns need a uniform-grid path")
    k = lag_count(tau, path.delta, "return lag")
    if k < 1:
        raise ValueError("tau must be at least one grid step")
    if k >= len(path.y):
        raise ValueError("path is shorter than one return window")
    return path.y[k:] - path.y[:-k]
