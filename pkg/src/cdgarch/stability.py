"""Stationarity, positivity and moment-bound conditions, and the root scan.

The characteristic function of the mean equation is

    Delta(z) = z + c0 - int_{-r}^0 exp(z u) f(u) du.

Roots are counted with the argument principle on the boundary of a
rectangle; the rightmost root is isolated by repeated halving of the
rectangle and polished by complex Newton iteration.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConditionError, ContourTooCoarseError
from .kernels import DelayModel, combine, kernel_norms

__all__ = [
    "StabilityReport",
    "stationary_mean",
    "positivity_floor",
    "moment_bound_report",
    "DeltaFunction",
    "characteristic_delta",
    "scan_roots",
    "real_root",
    "dominant_root",
    "default_rect",
    "theoretical_return_autocov",
    "analyze",
]

DEFAULT_PANELS = 10_000
NEWTON_MAXIT = 50
NEWTON_TOL = 1e-12


def stationary_mean(model: DelayModel) -> float:
    """``M = eta / (c0 - ||f||_1)``; requires ``c0 > ||f||_1``."""
    c0, _, f_l1 = combine(model)
    if not c0 > f_l1:
        raise ConditionError(
            f"no stationary mean: need c0 > ||f||_1, got c0 = {c0:.6g} <= {f_l1:.6g}"
        )
    return model.eta / (c0 - f_l1)


def positivity_floor(model: DelayModel) -> float:
    """``x- = eta / (c_mu - ||f_mu||_1)``; requires ``c_mu > ||f_mu||_1``."""
    fm = model.f_mu_l1
    if not model.c_mu > fm:
        raise ConditionError(
            f"no positivity floor: need c_mu > ||f_mu||_1, got "
            f"c_mu = {model.c_mu:.6g} <= {fm:.6g}"
        )
    return model.eta / (model.c_mu - fm)


@dataclass
class StabilityReport:
    """Condition checks, bound constants and root-scan outcome for a model."""

    kappa2: float
    kappa4: float
    c0: float
    f_l1: float
    f_mu_l1: float
    f_nu_l1: float
    f_nu_l2: float
    mean_stationary: bool
    M: float | None
    x_floor: float | None
    C1_minus: float
    C1_plus: float
    C2_minus: float
    C2_plus: float
    l1_bound: float | None
    l2_bound: float | None
    ex0: float | None = None
    ex0_sq: float | None = None
    roots_in_rhp: int | None = None
    scan_rect: tuple | None = None
    dominant_root: tuple | None = None
    quadrature_flag: bool | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = asdict(self)
        extra = d.pop("extra")
        if d["dominant_root"] is not None:
            re, im = d.pop("dominant_root")
            d["dominant_root_re"], d["dominant_root_im"] = re, im
        else:
            d.pop("dominant_root")
            d["dominant_root_re"] = d["dominant_root_im"] = None
        if d["scan_rect"] is not None:
            d["scan_rect"] = "[{}, {}]x[{}, {}]i".format(*d["scan_rect"])
        d.update(extra)
        return d

    def to_text(self) -> str:
        return "".join(f"{k} = {_fmt(v)}\n" for k, v in self.as_dict().items())

    def write_csv(self, out) -> None:
        import csv

        with open(out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["key", "value"])
            for k, v in self.as_dict().items():
                w.writerow([k, _fmt(v)])


def _fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def moment_bound_report(model: DelayModel, ex0: float, ex0_sq: float) -> StabilityReport:
    """Uniform first and second moment bound constants.

    ``C1 = c_mu - kappa2 c_nu -/+ (||f_mu||_1 + kappa2 ||f_nu||_1)`` and
    ``C2 = c_mu - kappa2 c_nu - kappa4 c_nu**2 / 2 -/+ (||f_mu||_1 +
    kappa4 ||f_nu||_2)``. A bound is reported only when its ``C-`` is
    positive.
    """
    if ex0 < 0 or ex0_sq < ex0 * ex0 * (1 - 1e-12):
        raise ValueError("need E[X0] >= 0 and E[X0^2] >= E[X0]^2")
    k2, k4 = model.kappa2, model.kappa4
    fm1 = model.f_mu_l1
    fn1, fn2, _ = kernel_norms(model.f_nu)
    c0 = model.c_mu - k2 * model.c_nu
    f_l1 = fm1 + k2 * fn1
    base2 = c0 - 0.5 * k4 * model.c_nu**2
    C1m, C1p = c0 - f_l1, c0 + f_l1
    C2m, C2p = base2 - (fm1 + k4 * fn2), base2 + (fm1 + k4 * fn2)
    eta = model.eta
    l1 = 2 * eta / C1m + ex0 * C1p / C1m if C1m > 0 else None
    l2 = (eta / C2m) ** 2 + ex0_sq * C2p / C2m if C2m > 0 else None
    stat = c0 > f_l1
    x_floor = eta / (model.c_mu - fm1) if model.c_mu > fm1 else None
    return StabilityReport(
        kappa2=k2, kappa4=k4, c0=c0, f_l1=f_l1, f_mu_l1=fm1, f_nu_l1=fn1, f_nu_l2=fn2,
        mean_stationary=stat, M=eta / (c0 - f_l1) if stat else None, x_floor=x_floor,
        C1_minus=C1m, C1_plus=C1p, C2_minus=C2m, C2_plus=C2p,
        l1_bound=l1, l2_bound=l2, ex0=ex0, ex0_sq=ex0_sq,
    )


class DeltaFunction:
    """Vectorised ``Delta(z)`` and ``Delta'(z)`` by the composite trapezoid rule."""

    def __init__(self, model: DelayModel, panels: int = DEFAULT_PANELS):
        c0, f, _ = combine(model)
        self.c0 = float(c0)
        self.panels = int(panels)
        r = f.support
        if len(f) == 0 or r == 0:
            self.u = np.zeros(0)
            self.wf = np.zeros(0)
        else:
            self.u = np.linspace(-r, 0.0, self.panels + 1)
            wt = np.full(self.panels + 1, r / self.panels)
            wt[[0, -1]] *= 0.5
            self.wf = wt * np.asarray(f(self.u))

    def _moment(self, z, power, chunk=256):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.zeros(z.shape, dtype=complex)
        if len(self.u) == 0:
            return out
        w = self.wf * self.u**power if power else self.wf
        for i in range(0, len(z), chunk):
            zz = z[i:i + chunk]
            out[i:i + chunk] = np.exp(np.outer(zz, self.u)) @ w
        return out

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        val = z + self.c0 - self._moment(z, 0)
        return complex(val[0]) if scalar else val

    def derivative(self, z):
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        val = 1.0 - self._moment(z, 1)
        return complex(val[0]) if scalar else val


def characteristic_delta(model: DelayModel, z, panels: int = DEFAULT_PANELS):
    """``Delta(z) = z + c0 - int_{-r}^0 e^{zu} f(u) du`` (trapezoid rule)."""
    return DeltaFunction(model, panels)(z)


def default_rect(model: DelayModel) -> tuple[float, float, float, float]:
    """``[0, 10 s] x [-20 s, 20 s]`` with ``s = c0 + ||f||_1 + 1``."""
    c0, _, f_l1 = combine(model)
    s = abs(c0) + f_l1 + 1.0
    return (0.0, 10.0 * s, -20.0 * s, 20.0 * s)


def _side_increments(delta, a, b, n, max_rounds=16):
    s = np.linspace(0.0, 1.0, n)
    v = delta(a + (b - a) * s)
    for _ in range(max_rounds):
        if not np.all(np.isfinite(v)) or np.any(v == 0):
            raise ContourTooCoarseError(f"Delta vanishes on the contour side {a} -> {b}")
        inc = np.angle(v[1:] / v[:-1])
        bad = np.abs(inc) > math.pi / 4
        if not bad.any():
            break
        mid = 0.5 * (s[:-1] + s[1:])[bad]
        vm = delta(a + (b - a) * mid)
        s = np.concatenate([s, mid])
        v = np.concatenate([v, vm])
        order = np.argsort(s)
        s, v = s[order], v[order]
    if np.any(v == 0):
        raise ContourTooCoarseError(f"Delta vanishes on the contour side {a} -> {b}")
    inc = np.angle(v[1:] / v[:-1])
    if np.max(np.abs(inc)) > math.pi / 2:
        raise ContourTooCoarseError(
            f"argument increment {np.max(np.abs(inc)):.3f} > pi/2 on side {a} -> {b}; "
            "a root may lie on or very near the contour"
        )
    return float(inc.sum()), v


def _winding(delta, rect, density):
    x0, x1, y0, y1 = rect
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    total = 0.0
    vmin = math.inf
    for i in range(4):
        tot, v = _side_increments(delta, corners[i], corners[(i + 1) % 4], density)
        total += tot
        vmin = min(vmin, float(np.min(np.abs(v))))
    w = total / (2 * math.pi)
    k = int(round(w))
    if abs(w - k) > 1e-6:
        raise ContourTooCoarseError(f"non-integral winding number {w}")
    return k, vmin


def _newton(delta, z, maxit=NEWTON_MAXIT, tol=NEWTON_TOL):
    for _ in range(maxit):
        d = delta(z)
        if abs(d) < tol:
            return z, True
        step = d / delta.derivative(z)
        z = z - step
        if abs(step) < 1e-15 * (1.0 + abs(z)):
            return z, abs(delta(z)) < 1e-9
    return z, abs(delta(z)) < tol


def _inside(z, rect):
    x0, x1, y0, y1 = rect
    return x0 <= z.real <= x1 and y0 <= z.imag <= y1


def _rightmost(delta, rect, count, density, depth=0):
    """Rightmost root inside ``rect`` known to hold ``count`` roots."""
    x0, x1, y0, y1 = rect
    width, height = x1 - x0, y1 - y0
    if count == 1:
        z, ok = _newton(delta, complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)))
        if ok and _inside(z, rect):
            return z
    if depth > 80:
        return None
    # off-centre cuts so that a real root never lies on a cut line
    split_x = width >= height or (count > 1 and width > 1e-6 * (1 + abs(x1)))
    for frac in (0.5123, 0.4789, 0.5377):
        if split_x:
            xm = x0 + frac * width
            halves = [(xm, x1, y0, y1), (x0, xm, y0, y1)]
        else:
            ym = y0 + frac * height
            halves = [(x0, x1, ym, y1), (x0, x1, y0, ym)]
        try:
            counts = [_winding(delta, sub, density)[0] for sub in halves]
            break
        except ContourTooCoarseError:
            continue
    else:
        return None
    for sub, c in zip(halves, counts):
        if c > 0:
            z = _rightmost(delta, sub, c, density, depth + 1)
            if z is not None:
                return z
    return None


def scan_roots(
    model: DelayModel,
    rect: tuple[float, float, float, float] | None = None,
    grid_density: int = 200,
    panels: int = DEFAULT_PANELS,
    locate: bool = True,
) -> tuple[int, complex | None]:
    """Count zeros of ``Delta`` in ``rect = (x0, x1, y0, y1)`` and find the rightmost.

    Each side is sampled at ``grid_density`` points and refined where the
    argument of ``Delta`` turns by more than pi/4 between samples.
    """
    delta = DeltaFunction(model, panels)
    rect = default_rect(model) if rect is None else tuple(float(v) for v in rect)
    count, _ = _winding(delta, rect, grid_density)
    dom = None
    if count > 0 and locate:
        dom = _rightmost(delta, rect, count, grid_density)
        if dom is not None and abs(dom.imag) < 1e-10:
            dom = complex(dom.real, 0.0)
    return count, dom


def real_root(model: DelayModel, panels: int = DEFAULT_PANELS, tol: float = 1e-13) -> float:
    """The unique real zero of ``Delta`` by bisection.

    ``Delta`` is increasing on the real axis because ``f >= 0``, and this
    zero is the rightmost root in the complex plane.
    """
    delta = DeltaFunction(model, panels)
    c0, _, f_l1 = combine(model)

    def g(x):
        return delta(complex(x, 0.0)).real

    lo = -abs(c0) - 1.0
    while g(lo) > 0:
        lo *= 2
    hi = max(1.0, f_l1 - c0 + 1.0)
    while g(hi) < 0:
        hi *= 2
    while hi - lo > tol * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dominant_root(model: DelayModel, grid_density: int = 200,
                  panels: int = DEFAULT_PANELS) -> complex:
    """Rightmost zero of ``Delta`` from a scan whose left edge lies left of it."""
    c0, _, f_l1 = combine(model)
    s = abs(c0) + f_l1 + 1.0
    left = -abs(c0) - 1.0
    rect = (left, 10.0 * s, -20.0 * s, 20.0 * s)
    count, dom = scan_roots(model, rect, grid_density, panels)
    if dom is None:
        raise RuntimeError("root scan did not isolate a dominant root")
    return dom


def theoretical_return_autocov(model: DelayModel, u: float) -> float:
    """``kappa2 M (1 - u)_+`` for unit-length returns."""
    if u < 0:
        raise ValueError("lag must be nonnegative")
    return model.kappa2 * stationary_mean(model) * max(1.0 - u, 0.0)


def analyze(
    model: DelayModel,
    ex0: float | None = None,
    ex0_sq: float | None = None,
    rect: tuple | None = None,
    grid_density: int = 200,
    panels: int = DEFAULT_PANELS,
) -> StabilityReport:
    """Full report: conditions, bounds, right-half-plane root count, dominant root.

    ``ex0`` defaults to ``M`` when it exists (and ``x-``, or 0, otherwise);
    ``ex0_sq`` defaults to ``ex0**2`` (deterministic initial value).
    """
    c0, _, f_l1 = combine(model)
    if ex0 is None:
        if c0 > f_l1:
            ex0 = model.eta / (c0 - f_l1)
        else:
            ex0 = 0.0
    if ex0_sq is None:
        ex0_sq = ex0 * ex0
    rep = moment_bound_report(model, ex0, ex0_sq)
    rect = default_rect(model) if rect is None else tuple(rect)
    count, _ = scan_roots(model, rect, grid_density, panels, locate=False)
    rep.roots_in_rhp = count
    rep.scan_rect = rect
    dom = dominant_root(model, grid_density, panels)
    rep.dominant_root = (dom.real, dom.imag)
    coarse = DeltaFunction(model, panels)(dom)
    fine = DeltaFunction(model, 2 * panels)(dom)
    rep.quadrature_flag = bool(abs(coarse - fine) > 1e-9)
    rep.extra = {"grid_density": grid_density, "panels": panels}
    return rep
