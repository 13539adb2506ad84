"""Delay kernels ``f_mu``, ``f_nu`` and the CDGARCH delay model.

The delay measures are a point mass at zero plus a nonnegative density on
``[-support, 0]``. A zero delay length is represented by an absent kernel
(``None``) rather than a zero-width one.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _numerics as nx
from .noise import NoiseSpec, derive_moments

__all__ = [
    "ExponentialKernel",
    "TabulatedKernel",
    "DelayModel",
    "KernelSum",
    "kernel_norms",
    "combine",
    "volterra_F",
    "pack",
    "load_tabulated_csv",
]

_TRAPZ_PANELS = 10_000
_EMPTY = np.zeros(1)


class _KernelBase:
    support: float

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        kind, par, tab = self.packed()
        out = np.array([nx.kernel_value(kind, par, tab, float(v)) for v in u.ravel()])
        return out.reshape(u.shape) if u.shape else float(out[0])

    def mass(self, a: float, b: float) -> float:
        """``int_a^b f(u) du`` (zero for an empty interval)."""
        if b <= a:
            return 0.0
        kind, par, tab = self.packed()
        w0, w1 = nx.cell_weights(kind, par, tab, float(a), float(b))
        return w0 + w1

    def packed(self):
        raise NotImplementedError

    @property
    def l1(self) -> float:
        return kernel_norms(self)[0]


@dataclass(frozen=True)
class ExponentialKernel(_KernelBase):
    """``f(u) = w * (exp(lam * u) - exp(-lam * support))`` on ``[-support, 0]``.

    The subtracted constant makes ``f(-support) = 0``.
    """

    w: float
    lam: float
    support: float

    def __post_init__(self):
        if not (self.w > 0 and self.lam > 0 and self.support > 0):
            raise ValueError("exponential kernel needs w, lambda, support > 0")

    def packed(self):
        par = np.array([self.w, self.lam, self.support, math.exp(-self.lam * self.support)])
        return 1, par, _EMPTY

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        inside = (u >= -self.support) & (u <= 0)
        return np.where(inside, self.w * self.lam * np.exp(self.lam * u), 0.0)

    def as_dict(self) -> dict:
        return {"kind": "exponential", "w": self.w, "lambda": self.lam, "support": self.support}


@dataclass(frozen=True, eq=False)
class TabulatedKernel(_KernelBase):
    """Kernel given by values on a uniform grid over ``[-support, 0]``.

    Values are linearly interpolated between grid points.
    """

    support: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if not self.support > 0:
            raise ValueError("tabulated kernel support must be positive")
        if vals.ndim != 1 or len(vals) < 2:
            raise ValueError("tabulated kernel needs at least two values")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("kernel values must be finite and nonnegative")
        if vals[0] != 0:
            warnings.warn(
                "tabulated kernel is nonzero at its left end; the delay drift "
                "will jump when past events leave the window",
                stacklevel=3,
            )

    @classmethod
    def from_function(cls, fn, support: float, n: int = 1001) -> "TabulatedKernel":
        u = np.linspace(-support, 0.0, n)
        return cls(support, np.asarray(fn(u), dtype=float))

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(-self.support, 0.0, len(self.values))

    def packed(self):
        du = self.support / (len(self.values) - 1)
        return 2, np.array([self.support, du, 0.0, 0.0]), self.values

    def as_dict(self) -> dict:
        return {"kind": "tabulated", "support": self.support, "values": self.values.tolist()}


def load_tabulated_csv(path) -> TabulatedKernel:
    """Read a kernel from a CSV with header ``u,f`` on a uniform grid ending at 0."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    u, f = data[:, 0], data[:, 1]
    if len(u) < 2 or abs(u[-1]) > 1e-12:
        raise ValueError("tabulated kernel grid must have >= 2 points and end at u = 0")
    du = np.diff(u)
    if np.any(du <= 0) or np.max(np.abs(du - du[0])) > 1e-9 * abs(u[0]):
        raise ValueError("tabulated kernel grid must be uniform and increasing")
    return TabulatedKernel(float(-u[0]), f)


def pack(kernel):
    """Packed ``(kind, par, tab)`` triple for the compiled routines."""
    if kernel is None:
        return 0, np.zeros(4), _EMPTY
    return kernel.packed()


def kernel_norms(k) -> tuple[float, float, float]:
    """``(L1, L2, sup)`` norms of a kernel over its support.

    The exponential L1 norm is closed form; everything else uses the
    composite trapezoid rule (at the tabulation points for tabulated
    kernels, on 10^4 panels for exponential ones).
    """
    if k is None:
        return 0.0, 0.0, 0.0
    if isinstance(k, ExponentialKernel):
        lam, r = k.lam, k.support
        l1 = k.w * (1.0 / lam - math.exp(-lam * r) * (1.0 / lam + r))
        u = np.linspace(-r, 0.0, _TRAPZ_PANELS + 1)
        fu = k.w * (np.exp(lam * u) - math.exp(-lam * r))
    else:
        u = k.grid
        fu = k.values
        l1 = float(np.trapezoid(fu, u))
    l2 = math.sqrt(float(np.trapezoid(fu * fu, u)))
    return float(l1), l2, float(np.max(fu))


@dataclass(frozen=True)
class DelayModel:
    """Parameters of the CDGARCH(p, q) variance equation.

    ``c_mu`` is the mean-reversion rate, ``c_nu`` the immediate jump response,
    and ``f_mu``/``f_nu`` the densities acting on past levels and past
    quadratic-variation increments.
    """

    eta: float
    c_mu: float
    c_nu: float
    f_mu: object = None
    f_nu: object = None
    noise: NoiseSpec = field(default_factory=NoiseSpec)

    def __post_init__(self):
        if not (self.eta > 0 and self.c_mu > 0 and self.c_nu > 0):
            raise ValueError("eta, c_mu and c_nu must be positive")

    @property
    def p(self) -> float:
        return 0.0 if self.f_mu is None else float(self.f_mu.support)

    @property
    def q(self) -> float:
        return 0.0 if self.f_nu is None else float(self.f_nu.support)

    @property
    def r(self) -> float:
        return max(self.p, self.q)

    @property
    def kappa2(self) -> float:
        return derive_moments(self.noise)[0]

    @property
    def kappa4(self) -> float:
        return derive_moments(self.noise)[1]

    @property
    def c0(self) -> float:
        return self.c_mu - self.kappa2 * self.c_nu

    @property
    def f_mu_l1(self) -> float:
        return kernel_norms(self.f_mu)[0]

    @property
    def f_nu_l1(self) -> float:
        return kernel_norms(self.f_nu)[0]

    @property
    def f_l1(self) -> float:
        return self.f_mu_l1 + self.kappa2 * self.f_nu_l1

    def as_dict(self) -> dict:
        def kd(k):
            return None if k is None else k.as_dict()

        return {
            "eta": self.eta,
            "c_mu": self.c_mu,
            "c_nu": self.c_nu,
            "f_mu": kd(self.f_mu),
            "f_nu": kd(self.f_nu),
            "noise": self.noise.as_dict(),
        }

    def digest(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


class KernelSum:
    """Nonnegative combination ``sum_i a_i k_i`` of delay kernels."""

    def __init__(self, terms):
        self.terms = [(float(a), k) for a, k in terms if k is not None and a != 0]

    @property
    def support(self) -> float:
        return max((k.support for _, k in self.terms), default=0.0)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        for a, k in self.terms:
            out = out + a * np.asarray(k(u))
        return out if u.shape else float(out)

    def mass(self, a: float, b: float) -> float:
        return sum(c * k.mass(a, b) for c, k in self.terms)

    def grid_weights(self, step: float, nlag: int) -> np.ndarray:
        """Product-integration weights on the lag grid ``0, step, ..., nlag*step``."""
        out = np.zeros(nlag + 1)
        for a, k in self.terms:
            kind, par, tab = k.packed()
            out += a * nx.grid_weights(kind, par, tab, float(step), int(nlag))
        return out

    @property
    def l1(self) -> float:
        return sum(a * kernel_norms(k)[0] for a, k in self.terms)

    def __len__(self):
        return len(self.terms)


def combine(m: DelayModel) -> tuple[float, KernelSum, float]:
    """``c0 = c_mu - kappa2 c_nu``, ``f = f_mu + kappa2 f_nu`` and ``||f||_1``."""
    k2 = m.kappa2
    f = KernelSum([(1.0, m.f_mu), (k2, m.f_nu)])
    return m.c_mu - k2 * m.c_nu, f, m.f_mu_l1 + k2 * m.f_nu_l1


def volterra_F(k, t: float, s: float) -> float:
    """Volterra kernel ``F(t, s) = int_{[max(-r, s - t), min(s, 0)]} f``."""
    if k is None:
        return 0.0
    lo = max(-k.support, s - t)
    hi = min(s, 0.0)
    if hi <= lo:
        return 0.0
    return k.mass(lo, hi)
