"""Initial segments, sample paths and path comparison."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "HistorySegment",
    "SamplePath",
    "compare_paths",
    "write_path_csv",
    "read_path_csv",
]


@dataclass(frozen=True, eq=False)
class HistorySegment:
    """Initial function ``Phi`` on ``[-r, 0]``.

    Stored as knots ``times`` (increasing, ending at 0) and nonnegative
    ``values``, linearly interpolated in between. A constant segment has a
    single knot at 0.
    """

    r: float
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.atleast_1d(np.asarray(self.times, dtype=float))
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.r < 0:
            raise ValueError("history length r must be nonnegative")
        if times.shape != values.shape or times.ndim != 1 or len(times) == 0:
            raise ValueError("times and values must be equal-length 1-d arrays")
        if np.any(np.diff(times) <= 0):
            raise ValueError("history knots must be strictly increasing")
        if abs(times[-1]) > 1e-12:
            raise ValueError("history must end at t = 0")
        if len(times) > 1 and times[0] > -self.r + 1e-9 * max(1.0, self.r):
            raise ValueError("history knots do not cover [-r, 0]")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("history values must be finite and nonnegative")

    @classmethod
    def constant(cls, r: float, value: float) -> "HistorySegment":
        return cls(float(r), np.array([0.0]), np.array([float(value)]))

    @classmethod
    def from_function(cls, fn, r: float, n: int = 201) -> "HistorySegment":
        if r == 0:
            return cls(0.0, np.array([0.0]), np.array([float(fn(0.0))]))
        t = np.linspace(-r, 0.0, n)
        return cls(float(r), t, np.asarray(fn(t), dtype=float))

    @property
    def is_constant(self) -> bool:
        return len(self.values) == 1 or bool(np.all(self.values == self.values[0]))

    @property
    def phi0(self) -> float:
        return float(self.values[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if len(self.times) == 1:
            out = np.full(t.shape, self.values[0])
        else:
            out = np.interp(t, self.times, self.values)
        return out if t.shape else float(out)

    def knots(self, r: float, min_knots: int = 2) -> tuple[np.ndarray, np.ndarray]:
        """Knots covering ``[-r, 0]`` suitable for the compiled integrators."""
        if r > self.r + 1e-9 * max(1.0, r):
            raise ValueError(f"history covers [-{self.r}, 0] but [-{r}, 0] is needed")
        if r == 0:
            return np.array([0.0]), np.array([self.phi0])
        if len(self.times) == 1:
            t = np.linspace(-r, 0.0, min_knots)
            return t, np.full(min_knots, self.values[0])
        inner = self.times[self.times > -r]
        t = np.concatenate([[-r], inner])
        return t, self(t)


@dataclass(eq=False)
class SamplePath:
    """A simulated ``(X, Y)`` path.

    ``t`` and ``x`` include the history part on ``[-r, 0]`` (the first
    ``n_history`` entries lie strictly before 0). ``y`` is aligned with
    ``t[n_history:]``. Event-driven paths may repeat a time stamp at a jump,
    with ``event`` marking the post-jump row. ``knots`` keeps the dense
    integrator history and ``jumps`` the driving jump log when available.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    n_history: int
    delta: float | None = None
    event: np.ndarray | None = None
    meta: dict = field(default_factory=dict)
    knots: tuple | None = None
    jumps: object = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if len(self.t) != len(self.x):
            raise ValueError("t and x must have equal length")
        if len(self.y) != len(self.t) - self.n_history:
            raise ValueError("y must be aligned with the non-history part of t")

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t_future(self) -> np.ndarray:
        return self.t[self.n_history:]

    @property
    def x_future(self) -> np.ndarray:
        return self.x[self.n_history:]

    @property
    def horizon(self) -> float:
        return float(self.t[-1])

    def grid_view(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Rows with unique time stamps, keeping the post-jump value."""
        t = self.t_future
        keep = np.ones(len(t), dtype=bool)
        keep[:-1] = t[1:] != t[:-1]
        return t[keep], self.x_future[keep], self.y[keep]

    def x_at(self, s) -> np.ndarray:
        """Right-continuous linear interpolation of ``X`` at times ``s``."""
        return _interp_right(self.t, self.x, s)

    def y_at(self, s) -> np.ndarray:
        return _interp_right(self.t_future, self.y, s)


def _interp_right(t, v, s):
    s = np.asarray(s, dtype=float)
    i = np.searchsorted(t, s, side="right") - 1
    i = np.clip(i, 0, len(t) - 1)
    j = np.minimum(i + 1, len(t) - 1)
    dt = t[j] - t[i]
    w = np.where(dt > 0, (s - t[i]) / np.where(dt > 0, dt, 1.0), 0.0)
    w = np.clip(w, 0.0, 1.0)
    return v[i] + (v[j] - v[i]) * w


def compare_paths(a: SamplePath, b: SamplePath) -> tuple[float, float]:
    """Sup distance between the ``X`` paths on ``[0, T]``.

    The distance is taken over the coarser of the two grids restricted to the
    common horizon; the finer path is linearly interpolated there.
    """
    ta = a.t_future
    tb = b.t_future
    lo = max(ta[0], tb[0])
    hi = min(ta[-1], tb[-1])
    if hi < lo:
        raise ValueError("paths have disjoint horizons")
    coarse, fine = (a, b) if len(ta) <= len(tb) else (b, a)
    tc, xc, _ = coarse.grid_view()
    sel = (tc >= lo) & (tc <= hi)
    tc, xc = tc[sel], xc[sel]
    xf = fine.x_at(tc)
    diff = np.abs(xc - xf)
    k = int(np.argmax(diff))
    return float(diff[k]), float(tc[k])


def write_path_csv(path: SamplePath, out, with_history: bool = False) -> None:
    """Write ``t, x, y[, event]`` rows and a JSON metadata sidecar."""
    out = Path(out)
    start = 0 if with_history else path.n_history
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["t", "x", "y"] + (["event"] if path.event is not None else [])
        w.writerow(header)
        for i in range(start, len(path.t)):
            yi = path.y[i - path.n_history] if i >= path.n_history else float("nan")
            row = [repr(float(path.t[i])), repr(float(path.x[i])), repr(float(yi))]
            if path.event is not None:
                row.append(int(path.event[i]))
            w.writerow(row)
    meta = dict(path.meta)
    meta.setdefault("delta", path.delta)
    with open(out.with_suffix(".json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def read_path_csv(src) -> SamplePath:
    src = Path(src)
    with open(src) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(src, delimiter=",", skiprows=1, ndmin=2)
    n_hist = int(np.sum(data[:, 0] < 0))
    event = data[:, 3].astype(np.int8) if "event" in header else None
    meta = {}
    side = src.with_suffix(".json")
    if side.exists():
        meta = json.loads(side.read_text())
    return SamplePath(
        data[:, 0], data[:, 1], data[n_hist:, 2], n_hist,
        delta=meta.get("delta"), event=event, meta=meta,
    )


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")
