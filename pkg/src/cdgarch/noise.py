"""Driving Lévy noise: compound Poisson jumps plus an optional Brownian part.

Randomness comes from numpy's counter-based Philox generator. A stream is
keyed by ``(seed, path)`` through :class:`numpy.random.SeedSequence`, so path
``k`` of an ensemble draws the same numbers no matter how many other paths are
simulated or in which order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "NoiseSpec",
    "IncrementSeries",
    "JumpLog",
    "make_rng",
    "derive_moments",
    "sample_increments",
    "sample_jump_events",
    "truncate_jumps",
    "bin_jumps",
    "write_increments_csv",
    "read_increments_csv",
    "write_jump_log_csv",
    "read_jump_log_csv",
]

_U64 = 2**64


def make_rng(seed: int, path: int = 0, stream: int = 0) -> np.random.Generator:
    """Philox generator for substream ``(seed, path, stream)``.

    ``stream`` separates independent uses within one path (increments vs.
    jump events) so that they never share draws.
    """
    if not 0 <= seed < _U64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    ss = np.random.SeedSequence([int(seed), int(path), int(stream)])
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class NoiseSpec:
    """Parameters of the driving Lévy process ``L``.

    ``L`` is ``sigma_L * B`` plus a compound Poisson process with intensity
    ``lambda_L`` and Normal(``mu_J``, ``sigma_J**2``) jump sizes.
    """

    sigma_L: float = 0.0
    lambda_L: float = 1.0
    mu_J: float = 0.0
    sigma_J: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma_L < 0 or self.lambda_L < 0 or self.sigma_J < 0:
            raise ValueError("sigma_L, lambda_L and sigma_J must be nonnegative")
        if not 0 <= self.seed < _U64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def degenerate(self) -> bool:
        return self.sigma_L == 0 and self.lambda_L == 0

    @property
    def kappa2(self) -> float:
        return derive_moments(self)[0]

    @property
    def kappa4(self) -> float:
        return derive_moments(self)[1]

    def as_dict(self) -> dict:
        return {
            "sigma_L": self.sigma_L,
            "lambda_L": self.lambda_L,
            "mu_J": self.mu_J,
            "sigma_J": self.sigma_J,
            "seed": self.seed,
        }


def derive_moments(spec: NoiseSpec) -> tuple[float, float]:
    """Mean and variance rates ``(kappa2, kappa4)`` of ``S = [L, L]``.

    ``kappa2 = E[S_1]`` and ``kappa4`` is the intensity times the fourth
    moment of the Gaussian jump law; the Brownian part only shifts ``S``
    deterministically and contributes nothing to ``kappa4``.
    """
    m, s = spec.mu_J, spec.sigma_J
    kappa2 = spec.sigma_L**2 + spec.lambda_L * (m * m + s * s)
    kappa4 = spec.lambda_L * (m**4 + 6 * m * m * s * s + 3 * s**4)
    return float(kappa2), float(kappa4)


@dataclass(frozen=True)
class IncrementSeries:
    """Grid increments of ``L`` and ``S``.

    Entry ``i`` covers the step ``((n - 1) * delta, n * delta]`` with
    ``n = i - n_history + 1``, so the first ``n_history`` entries lie in
    ``(-n_history * delta, 0]``.
    """

    delta: float
    n_history: int
    dl: np.ndarray
    ds: np.ndarray

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if len(self.dl) != len(self.ds):
            raise ValueError("dl and ds must have equal length")
        if self.n_history < 0 or self.n_history > len(self.dl):
            raise ValueError("n_history out of range")

    @property
    def n_future(self) -> int:
        return len(self.dl) - self.n_history

    @property
    def t(self) -> np.ndarray:
        """Right end point of each step."""
        n = np.arange(len(self.dl)) - self.n_history + 1
        return n * self.delta


@dataclass(frozen=True)
class JumpLog:
    """Jump times and sizes of a compound Poisson ``L`` on ``(t_start, t_end]``."""

    horizon: tuple[float, float]
    times: np.ndarray
    sizes: np.ndarray

    def __post_init__(self):
        t0, t1 = self.horizon
        times = np.asarray(self.times, dtype=float)
        sizes = np.asarray(self.sizes, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "sizes", sizes)
        if times.shape != sizes.shape or times.ndim != 1:
            raise ValueError("times and sizes must be 1-d arrays of equal length")
        if len(times):
            if np.any(np.diff(times) <= 0):
                raise ValueError("jump times must be strictly increasing")
            if times[0] <= t0 or times[-1] > t1:
                raise ValueError("jump times must lie in (t_start, t_end]")
        if np.any(sizes == 0):
            raise ValueError("zero-size jumps are not stored")

    def __len__(self) -> int:
        return len(self.times)

    def qv_increment(self, a: float, b: float) -> float:
        """Increment of ``S`` over ``(a, b]``."""
        sel = (self.times > a) & (self.times <= b)
        return float(np.sum(self.sizes[sel] ** 2))

    def restrict(self, a: float, b: float) -> "JumpLog":
        sel = (self.times > a) & (self.times <= b)
        return JumpLog((a, b), self.times[sel], self.sizes[sel])


def sample_increments(
    spec: NoiseSpec,
    delta: float,
    n_history: int,
    n_future: int,
    path: int = 0,
) -> IncrementSeries:
    """Draw ``n_history + n_future`` i.i.d. increments of ``(L, S)`` on a grid.

    Each step draws a Poisson(``delta * lambda_L``) jump count, the jump sizes,
    and one Brownian increment; ``ds`` is ``sigma_L**2 * delta`` plus the sum
    of squared jump sizes.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    n = int(n_history) + int(n_future)
    rng = make_rng(spec.seed, path, stream=0)
    counts = rng.poisson(delta * spec.lambda_L, size=n)
    z = rng.normal(spec.mu_J, spec.sigma_J, size=int(counts.sum()))
    owner = np.repeat(np.arange(n), counts)
    jump_l = np.bincount(owner, weights=z, minlength=n)
    jump_s = np.bincount(owner, weights=z * z, minlength=n)
    brown = rng.normal(0.0, 1.0, size=n) * (spec.sigma_L * np.sqrt(delta))
    dl = brown + jump_l
    ds = spec.sigma_L**2 * delta + jump_s
    return IncrementSeries(float(delta), int(n_history), dl, ds)


def sample_jump_events(
    spec: NoiseSpec,
    horizon: tuple[float, float],
    seed: int | None = None,
    path: int = 0,
) -> JumpLog:
    """Exact jump times and sizes of the compound Poisson ``L`` on ``horizon``.

    Inter-arrival times are Exponential(``lambda_L``); times are kept exactly,
    not snapped to a grid.
    """
    if spec.sigma_L != 0:
        raise ValueError(
            "event-driven noise needs sigma_L = 0; fold the Brownian part into "
            "c_mu and f_mu first"
        )
    if not spec.lambda_L > 0:
        raise ValueError("event-driven noise needs lambda_L > 0")
    t0, t1 = float(horizon[0]), float(horizon[1])
    if t1 < t0:
        raise ValueError("horizon end precedes its start")
    rng = make_rng(spec.seed if seed is None else seed, path, stream=1)
    length = t1 - t0
    # draw gaps in blocks until the horizon is covered
    block = max(16, int(spec.lambda_L * length * 1.2) + 16)
    gaps = rng.exponential(1.0 / spec.lambda_L, size=block)
    while gaps.sum() <= length:
        gaps = np.concatenate([gaps, rng.exponential(1.0 / spec.lambda_L, size=block)])
    times = t0 + np.cumsum(gaps)
    times = times[times <= t1]
    sizes = rng.normal(spec.mu_J, spec.sigma_J, size=len(times))
    keep = (sizes != 0) & (times > t0)
    return JumpLog((t0, t1), times[keep], sizes[keep])


def truncate_jumps(log: JumpLog, n: int) -> JumpLog:
    """Keep only the jumps with ``|size| >= 1/n``."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    keep = np.abs(log.sizes) >= 1.0 / n
    return JumpLog(log.horizon, log.times[keep], log.sizes[keep])


def bin_jumps(log: JumpLog, delta: float, n_history: int, n_future: int) -> IncrementSeries:
    """Aggregate a jump log onto the grid used by :func:`sample_increments`.

    A jump at ``T`` falls in step ``n = ceil(T / delta)``; jumps outside the
    covered steps are ignored.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    n = n_history + n_future
    step = np.ceil(log.times / delta).astype(np.int64)
    idx = step + n_history - 1
    ok = (idx >= 0) & (idx < n)
    dl = np.bincount(idx[ok], weights=log.sizes[ok], minlength=n).astype(float)
    ds = np.bincount(idx[ok], weights=log.sizes[ok] ** 2, minlength=n).astype(float)
    return IncrementSeries(float(delta), int(n_history), dl, ds)


def write_increments_csv(inc: IncrementSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "dl", "ds"])
        for t, a, b in zip(inc.t, inc.dl, inc.ds):
            w.writerow([repr(float(t)), repr(float(a)), repr(float(b))])


def read_increments_csv(path) -> IncrementSeries:
    data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    t, dl, ds = data[:, 0], data[:, 1], data[:, 2]
    if len(t) < 2:
        raise ValueError("need at least two rows to infer the grid step")
    delta = float(t[1] - t[0])
    n_history = int(np.sum(t <= 0.5 * delta))
    return IncrementSeries(delta, n_history, dl, ds)


def write_jump_log_csv(log: JumpLog, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["T_j", "dL"])
        for t, z in zip(log.times, log.sizes):
            w.writerow([repr(float(t)), repr(float(z))])


def read_jump_log_csv(path, horizon: tuple[float, float] | None = None) -> JumpLog:
    """Read a jump log; without ``horizon`` the span of the stored times is used."""
    data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    times = data[:, 0] if data.size else np.empty(0)
    sizes = data[:, 1] if data.size else np.empty(0)
    if horizon is None:
        if len(times) == 0:
            raise ValueError("empty log needs an explicit horizon")
        horizon = (float(np.nextafter(times[0], -np.inf)), float(times[-1]))
    return JumpLog(horizon, times, sizes)
