"""Event-driven simulation for compound Poisson driving noise.

Between jumps the variance solves a deterministic delay ODE, which is
integrated by classical RK4 on a dense knot history. At each jump time the
exact jump map ``X -> X (1 + c_nu dL**2)`` is applied. The integrator lands
exactly on every jump time, every reporting time, and every time at which a
past jump leaves a delay window (``T_j + p``, ``T_j + q``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _numerics as nx
from .kernels import DelayModel, pack
from .noise import JumpLog, sample_jump_events, truncate_jumps
from .paths import HistorySegment, SamplePath

__all__ = [
    "xi_evaluate",
    "event_simulate",
    "EnsembleGrid",
    "simulate_ensemble",
]


def _left_value(t, x, s):
    """Left limit at ``s`` of the linear interpolant through ``(t, x)``."""
    i = int(np.searchsorted(t, s, side="left"))
    if i < len(t) and t[i] == s:
        return float(x[i])
    if i == 0 or i >= len(t):
        raise ValueError(f"time {s} outside the stored history")
    w = (s - t[i - 1]) / (t[i] - t[i - 1])
    return float(x[i - 1] + (x[i] - x[i - 1]) * w)


def xi_evaluate(model: DelayModel, history, log: JumpLog | None, t: float) -> float:
    """Delay drift ``xi(X)_t`` from a stored history.

    ``history`` is a :class:`SamplePath` or a pair ``(times, values)`` of
    knots (a repeated time stamp marks a jump: first pre, then post value).
    The ``f_mu`` part integrates the piecewise-linear history exactly against
    the kernel; the ``f_nu`` part sums over jumps in ``(t - q, t]`` using the
    pre-jump value of ``X``.
    """
    if isinstance(history, SamplePath):
        tk, xk = history.t, history.x
    else:
        tk, xk = (np.asarray(a, dtype=float) for a in history)
    r = model.r
    if t - r < tk[0] - 1e-12 or t > tk[-1] + 1e-12:
        raise ValueError(f"history on [{tk[0]}, {tk[-1]}] does not cover [{t - r}, {t}]")
    out = 0.0
    if model.f_mu is not None:
        n = int(np.searchsorted(tk, t, side="right"))
        xs = float(SamplePath(tk, xk, np.zeros(len(tk)), 0).x_at(t))
        kind, par, tab = pack(model.f_mu)
        out += nx.delay_integral_loop(kind, par, tab, model.p, tk, xk, n, float(t), xs)
    if model.f_nu is not None and log is not None and len(log):
        q = model.q
        sel = (log.times > t - q) & (log.times <= t)
        for tj, z in zip(log.times[sel], log.sizes[sel]):
            out += float(model.f_nu(tj - t)) * _left_value(tk, xk, tj) * z * z
    return out


def _breakpoints(jt_future, jt_all, T, report_step, p, q):
    pts = [jt_future]
    if report_step is not None:
        n_rep = int(math.floor(T / report_step + 1e-9))
        pts.append(np.arange(1, n_rep + 1) * report_step)
    for lag in (p, q):
        if lag > 0:
            pts.append(jt_all + lag)
            pts.append(np.array([lag]))
    pts.append(np.array([T]))
    bp = np.unique(np.concatenate(pts))
    bp = bp[(bp > 0) & (bp <= T)]
    return bp


def event_simulate(
    model: DelayModel,
    log: JumpLog,
    phi: HistorySegment,
    y0: float = 0.0,
    h: float = 1e-3,
    report_step: float | None = None,
    horizon: float | None = None,
    check_gap: bool = False,
) -> SamplePath:
    """Simulate ``(X, Y)`` on ``[0, T]`` driven by the jumps in ``log``.

    Parameters
    ----------
    model : DelayModel
        Must have ``noise.sigma_L == 0``.
    log : JumpLog
        Jumps on ``(-r, T]``. Jumps at or before 0 only enter through the
        ``f_nu`` window; their pre-jump value is read from ``phi``.
    phi : HistorySegment
        Initial segment on ``[-r, 0]``.
    h : float
        Maximal RK4 step. Steps are shortened to land on breakpoints.
    report_step : float, optional
        Uniform reporting grid; without it only jump rows and ``T`` are kept.
    horizon : float, optional
        End time ``T``; defaults to the end of the log's horizon.
    check_gap : bool
        Reject ``h`` above a quarter of the smallest gap between jumps.

    Returns
    -------
    SamplePath
        History knots, then rows at reporting times and a pre/post pair at
        each jump (``event`` is 1 on the post-jump row).
    """
    if model.noise.sigma_L != 0:
        raise ValueError("event-driven simulation needs sigma_L = 0")
    if not h > 0:
        raise ValueError("ODE step h must be positive")
    T = float(log.horizon[1] if horizon is None else horizon)
    if T <= 0:
        raise ValueError("horizon must be positive")
    p, q, r = model.p, model.q, model.r
    if q > 0 and log.horizon[0] > -q + 1e-12:
        warnings.warn(
            "jump log starts after -q; jumps before the log start are treated as absent",
            stacklevel=2,
        )
    keep = (log.times > -q) & (log.times <= T) if q > 0 else (log.times > 0) & (log.times <= T)
    jt = np.ascontiguousarray(log.times[keep])
    jz = np.ascontiguousarray(log.sizes[keep])
    n_hist_jumps = int(np.sum(jt <= 0))
    jt_future = jt[n_hist_jumps:]
    if check_gap and len(jt_future) > 1:
        gaps = np.diff(np.concatenate([[0.0], jt_future]))
        if h > gaps.min() / 4:
            raise ValueError(
                f"h = {h} exceeds a quarter of the smallest jump gap {gaps.min():.3g}"
            )
    jxpre = np.zeros(len(jt))
    if n_hist_jumps:
        jxpre[:n_hist_jumps] = phi(jt[:n_hist_jumps])

    bp = _breakpoints(jt_future, jt, T, report_step, p, q)
    bp_jump = np.full(len(bp), -1, dtype=np.int64)
    idx = np.searchsorted(bp, jt_future)
    bp_jump[idx] = np.arange(n_hist_jumps, len(jt))
    bp_report = np.zeros(len(bp), dtype=np.bool_)
    if report_step is not None:
        ratio = bp / report_step
        bp_report = np.abs(ratio - np.round(ratio)) < 1e-9 * np.maximum(1.0, ratio)
    bp_report[-1] = True

    hist_t, hist_x = phi.knots(r)
    mk, mpar, mtab = pack(model.f_mu)
    nk, npar, ntab = pack(model.f_nu)
    cap = int(T / h) + 2 * len(bp) + len(jt) + len(hist_t) + 16
    tk, xk, rt, rx, ry, rev = nx.event_core(
        float(model.eta), float(model.c_mu), float(model.c_nu),
        mk, mpar, mtab, float(p), nk, npar, ntab, float(q),
        hist_t, hist_x, jt, jz, jxpre, n_hist_jumps,
        bp, bp_jump, bp_report, float(h), float(y0), cap,
    )
    nh = len(hist_t) - 1
    t = np.concatenate([hist_t[:-1], rt])
    x = np.concatenate([hist_x[:-1], rx])
    event = np.concatenate([np.zeros(nh, dtype=np.int8), rev])
    meta = {
        "scheme": "events",
        "h": h,
        "report_step": report_step,
        "horizon": T,
        "seed": model.noise.seed,
        "model_digest": model.digest(),
        "n_jumps": int(len(jt_future)),
    }
    jumps = JumpLog((min(log.horizon[0], -q), T), jt, jz)
    return SamplePath(
        t, x, ry, nh, delta=report_step, event=event, meta=meta,
        knots=(tk, xk), jumps=jumps,
    )


@dataclass
class EnsembleGrid:
    """Many paths sampled on one uniform reporting grid ``t``.

    ``x[i, k]`` and ``y[i, k]`` are path ``i`` at ``t[k]`` (post-jump values).
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    meta: dict

    @property
    def n_paths(self) -> int:
        return self.x.shape[0]

    def index(self, s: float) -> int:
        return int(np.argmin(np.abs(self.t - s)))


def _grid_rows(path: SamplePath, grid: np.ndarray):
    t, x, y = path.grid_view()
    k = np.searchsorted(t, grid)
    return x[k], y[k]


def simulate_ensemble(
    model: DelayModel,
    n_paths: int,
    horizon: float,
    phi: HistorySegment,
    h: float = 1e-2,
    report_step: float = 0.1,
    seed: int | None = None,
    truncate: int | None = None,
    first_path: int = 0,
) -> EnsembleGrid:
    """Independent event-driven paths on a shared reporting grid.

    Path ``i`` uses the jump substream ``(seed, first_path + i)``; jumps are
    drawn on ``(-r, T]`` so that the ``f_nu`` window starts filled.
    """
    seed = model.noise.seed if seed is None else seed
    n_rep = int(math.floor(horizon / report_step + 1e-9))
    grid = np.arange(n_rep + 1) * report_step
    xs = np.empty((n_paths, n_rep + 1))
    ys = np.empty((n_paths, n_rep + 1))
    lo = -model.r
    for i in range(n_paths):
        log = sample_jump_events(model.noise, (lo, horizon), seed=seed, path=first_path + i)
        if truncate is not None:
            log = truncate_jumps(log, truncate)
        path = event_simulate(model, log, phi, 0.0, h, report_step, horizon)
        xs[i], ys[i] = _grid_rows(path, grid)
    meta = {
        "scheme": "events",
        "h": h,
        "report_step": report_step,
        "horizon": horizon,
        "seed": seed,
        "n_paths": n_paths,
        "model_digest": model.digest(),
    }
    return EnsembleGrid(grid, xs, ys, meta)
