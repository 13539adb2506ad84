"""Deterministic mean of the variance process.

The mean ``m(t) = E[X_t]`` solves the linear delay equation

    m'(t) = eta - c0 m(t) + int_{-r}^0 f(u) m(t + u) du,   m = phi on [-r, 0],

with ``c0 = c_mu - kappa2 c_nu`` and ``f = f_mu + kappa2 f_nu``. Two solvers
are provided: method-of-steps RK4 on a uniform grid, and the equivalent
renewal equation ``m = zeta * m + h`` solved by trapezoid product integration.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import _numerics as nx
from .euler import lag_count
from .kernels import DelayModel, KernelSum, combine
from .paths import HistorySegment

__all__ = [
    "MeanPath",
    "solve_mean_fde",
    "renewal_kernel_zeta",
    "zeta_grid",
    "solve_mean_renewal",
    "write_mean_csv",
]


@dataclass(frozen=True, eq=False)
class MeanPath:
    """Mean function on the uniform grid ``t`` (history part included)."""

    t: np.ndarray
    m: np.ndarray
    solver: str
    step: float

    @property
    def n_history(self) -> int:
        return int(np.sum(self.t < -0.5 * self.step))

    @property
    def t_future(self) -> np.ndarray:
        return self.t[self.n_history:]

    @property
    def m_future(self) -> np.ndarray:
        return self.m[self.n_history:]

    def __call__(self, s):
        return np.interp(s, self.t, self.m)


def _horizon_steps(T: float, step: float) -> int:
    if not step > 0:
        raise ValueError("step must be positive")
    if not T > 0:
        raise ValueError("horizon T must be positive")
    return int(np.ceil(T / step - 1e-9))


def _cell_masses(f: KernelSum, step: float, nlag: int) -> np.ndarray:
    """``int_{-(k+1) step}^{-k step} f`` for ``k = 0..nlag-1``."""
    out = np.zeros(nlag)
    for a, k in f.terms:
        kind, par, tab = k.packed()
        for j in range(nlag):
            w0, w1 = nx.cell_weights(kind, par, tab, -(j + 1) * step, -j * step)
            out[j] += a * (w0 + w1)
    return out


@njit(cache=True)
def _fde_rk4(eta, c0, W, m, nr, n_steps, step):
    # m[i] holds m(t_{i - nr}); W[k] weights m(t - k*step)
    nl = W.shape[0]
    for n in range(n_steps):
        i = n + nr
        hist_full = 0.0
        hist_half = 0.0
        for k in range(1, nl):
            hist_full += W[k] * m[i - k + 1]
            hist_half += W[k] * 0.5 * (m[i - k] + m[i - k + 1])
        hist_now = 0.0
        for k in range(1, nl):
            hist_now += W[k] * m[i - k]
        mi = m[i]
        k1 = eta - c0 * mi + W[0] * mi + hist_now
        y = mi + 0.5 * step * k1
        k2 = eta - c0 * y + W[0] * y + hist_half
        y = mi + 0.5 * step * k2
        k3 = eta - c0 * y + W[0] * y + hist_half
        y = mi + step * k3
        k4 = eta - c0 * y + W[0] * y + hist_full
        m[i + 1] = mi + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def solve_mean_fde(model: DelayModel, phi: HistorySegment, T: float, step: float) -> MeanPath:
    """Method-of-steps RK4 for the mean equation.

    The delay integral is evaluated exactly for the piecewise-linear
    interpolant of the grid values (product integration), which makes the
    weights sum to ``||f||_1`` so that constant solutions are preserved.
    Intermediate RK4 stages read delayed values at half steps by linear
    interpolation.
    """
    n_steps = _horizon_steps(T, step)
    c0, f, _ = combine(model)
    nr = lag_count(model.r, step, "history") if model.r > 0 else 0
    W = f.grid_weights(step, nr) if len(f) else np.zeros(1)
    m = np.empty(nr + n_steps + 1)
    t = np.arange(-nr, n_steps + 1) * step
    m[: nr + 1] = phi(t[: nr + 1])
    _fde_rk4(float(model.eta), float(c0), W, m, nr, n_steps, float(step))
    return MeanPath(t, m, "dde", float(step))


def renewal_kernel_zeta(model: DelayModel, t: float) -> float:
    """``zeta(t) = -c0 1{t > 0} + int_0^{min(t, r)} f(-u) du``."""
    if t < 0:
        raise ValueError("zeta is defined for t >= 0")
    if t == 0:
        return 0.0
    c0, f, _ = combine(model)
    return -c0 + f.mass(-min(t, model.r), 0.0)


def zeta_grid(model: DelayModel, step: float, n: int) -> np.ndarray:
    """``zeta(k step)`` for ``k = 0..n`` with the right limit ``-c0`` at 0."""
    c0, f, f_l1 = combine(model)
    z = np.full(n + 1, -c0 + f_l1)
    if len(f) == 0:
        z[:] = -c0
        return z
    nr = lag_count(model.r, step, "history")
    acc = np.concatenate([[0.0], np.cumsum(_cell_masses(f, step, nr))])
    k = min(nr, n)
    z[: k + 1] = -c0 + acc[: k + 1]
    return z


@njit(cache=True)
def _renewal_solve(z, h, step, n_steps):
    m = np.empty(n_steps + 1)
    m[0] = h[0]
    denom = 1.0 - 0.5 * step * z[0]
    for n in range(1, n_steps + 1):
        acc = 0.5 * z[n] * m[0]
        for j in range(1, n):
            acc += z[n - j] * m[j]
        m[n] = (h[n] + step * acc) / denom
    return m


@njit(cache=True)
def _renewal_solve_tail(z, h, step, n_steps, nr):
    # same as _renewal_solve, using that z is constant beyond lag nr
    m = np.empty(n_steps + 1)
    m[0] = h[0]
    denom = 1.0 - 0.5 * step * z[0]
    zinf = z[nr]
    prefix = np.zeros(n_steps + 2)  # prefix[k] = sum_{j=1}^{k-1} m[j]
    for n in range(1, n_steps + 1):
        acc = 0.5 * z[n] * m[0]
        # j in [1, n - nr] have z[n - j] = zinf
        j_split = n - nr
        if j_split >= 1:
            acc += zinf * prefix[j_split + 1]
            j0 = j_split + 1
        else:
            j0 = 1
        for j in range(j0, n):
            acc += z[n - j] * m[j]
        m[n] = (h[n] + step * acc) / denom
        prefix[n + 1] = prefix[n] + m[n]
    return m


@njit(cache=True)
def _forcing(z, dphi, step, n_steps, nr, M):
    # h(t_n) = phi(0) - M int_0^t zeta + int_0^r (zeta(t+u) - zeta(u)) dphi(u) du
    # with dphi(u) = phi(-u) - M on the grid u = k step
    h = np.empty(n_steps + 1)
    h[0] = dphi[0] + M
    run = 0.0
    for n in range(1, n_steps + 1):
        run += 0.5 * step * (z[n - 1] + z[n])
        val = dphi[0] + M - M * run
        if nr > 0:
            acc = 0.0
            for k in range(nr + 1):
                d = (z[n + k] - z[k]) * dphi[k]
                acc += 0.5 * d if (k == 0 or k == nr) else d
            val += step * acc
        h[n] = val
    return h


def solve_mean_renewal(model: DelayModel, phi: HistorySegment, T: float, step: float) -> MeanPath:
    """Renewal-equation solver by trapezoid product integration.

    ``int_0^t zeta`` inside the forcing uses the same trapezoid sums as the
    convolution, so ``phi == M`` reproduces ``m == M`` to round-off.
    """
    n_steps = _horizon_steps(T, step)
    c0, f, f_l1 = combine(model)
    zr = -c0 + f_l1
    if zr == 0:
        raise ValueError("renewal forcing needs zeta(r) = ||f||_1 - c0 to be nonzero")
    M = -model.eta / zr
    nr = lag_count(model.r, step, "history") if model.r > 0 else 0
    z = zeta_grid(model, step, n_steps + nr)
    dphi = phi(-np.arange(nr + 1) * step) - M
    h = _forcing(z, np.atleast_1d(dphi), float(step), n_steps, nr, float(M))
    if nr > 0:
        m = _renewal_solve_tail(z, h, float(step), n_steps, nr)
    else:
        m = _renewal_solve_tail(z, h, float(step), n_steps, 1)
    t_hist = np.arange(-nr, 0) * step
    t = np.concatenate([t_hist, np.arange(n_steps + 1) * step])
    mm = np.concatenate([phi(t_hist) if nr else np.empty(0), m])
    return MeanPath(t, mm, "renewal", float(step))


def write_mean_csv(paths, out) -> None:
    """Write one or more mean paths as rows ``t, m, solver``."""
    if isinstance(paths, MeanPath):
        paths = [paths]
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "m", "solver"])
        for p in paths:
            for ti, mi in zip(p.t, p.m):
                w.writerow([repr(float(ti)), repr(float(mi)), p.solver])
