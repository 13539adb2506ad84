"""Acceptance battery: twelve numerical and Monte Carlo checks.

Each check returns a :class:`CriterionResult` with a pass flag, a one-line
summary and table rows for the validation CSV. The ``full`` suite runs at the
stated sample sizes; ``quick`` shrinks the ensembles for interactive use but
keeps every tolerance.

Runtime limits are measured after a warm-up call that triggers JIT
compilation, so they time the computation rather than the compiler.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .euler import euler_simulate
from .events import EnsembleGrid, event_simulate, simulate_ensemble
from .kernels import DelayModel, ExponentialKernel, combine
from .mean import solve_mean_fde, solve_mean_renewal
from .noise import (
    NoiseSpec,
    bin_jumps,
    derive_moments,
    make_rng,
    sample_increments,
    sample_jump_events,
    truncate_jumps,
)
from .paths import HistorySegment, SamplePath, compare_paths
from .stability import (
    DeltaFunction,
    dominant_root,
    moment_bound_report,
    positivity_floor,
    real_root,
    scan_roots,
    stationary_mean,
    theoretical_return_autocov,
)
from .stats import ValidationRow, ensemble_cov, ensemble_mean

__all__ = ["CriterionResult", "Battery", "SUITES", "reference_model", "cogarch_model"]

SUITES = {
    "full": {"ensemble": 2000, "floor_paths": 100, "euler_draws": 20, "random_models": 20,
             "ucp_models": 10},
    "quick": {"ensemble": 200, "floor_paths": 20, "euler_draws": 20, "random_models": 5,
              "ucp_models": 10},
}

JUMP_EPS_REL = 1e-3


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    summary: str
    rows: list = field(default_factory=list)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] AC{self.number:<2d} {self.name}: {self.summary} ({self.seconds:.1f} s)"


def reference_model(seed: int = 0) -> DelayModel:
    k = ExponentialKernel(1.0, 2.0, 1.0)
    return DelayModel(1.0, 3.0, 0.5, k, k, NoiseSpec(0.0, 1.0, 0.0, 1.0, seed))


def cogarch_model(c_mu=1.0, c_nu=0.25, seed: int = 0) -> DelayModel:
    return DelayModel(1.0, c_mu, c_nu, None, None, NoiseSpec(0.0, 1.0, 0.0, 1.0, seed))


def _random_stable_model(rng, seed) -> DelayModel:
    while True:
        noise = NoiseSpec(0.0, rng.uniform(0.5, 2.0), rng.uniform(-0.3, 0.3),
                          rng.uniform(0.5, 1.2), seed)
        f_mu = ExponentialKernel(rng.uniform(0.2, 2.0), rng.uniform(0.5, 3.0),
                                 rng.uniform(0.2, 2.0))
        f_nu = ExponentialKernel(rng.uniform(0.2, 2.0), rng.uniform(0.5, 3.0),
                                 rng.uniform(0.2, 2.0))
        m = DelayModel(rng.uniform(0.5, 2.0), rng.uniform(1.0, 4.0), rng.uniform(0.1, 0.5),
                       f_mu, f_nu, noise)
        c0, _, f_l1 = combine(m)
        if c0 > f_l1 + 0.05 and m.c_mu > m.f_mu_l1:
            return m


def _warm_up():
    m = reference_model()
    phi = HistorySegment.constant(1.0, 0.5)
    log = sample_jump_events(m.noise, (-1.0, 0.5))
    event_simulate(m, log, phi, 0.0, 0.1, 0.1)
    event_simulate(cogarch_model(), sample_jump_events(m.noise, (0.0, 0.5)),
                   HistorySegment.constant(0.0, 1.0), 0.0, 0.1, 0.1)
    euler_simulate(cogarch_model(), sample_increments(m.noise, 0.1, 0, 5),
                   HistorySegment.constant(0.0, 1.0))
    euler_simulate(m, sample_increments(m.noise, 0.1, 10, 5), phi)
    solve_mean_fde(m, phi, 0.5, 0.1)
    solve_mean_renewal(m, phi, 0.5, 0.1)


def jump_identity_errors(path: SamplePath, c_nu: float) -> np.ndarray:
    """``|dX - c_nu X(T-) dL**2| / max(dX, eps)`` at every jump of an event path.

    ``eps = 1e-3 X(T-)`` absorbs the rounding of ``X(T) - X(T-)`` for jumps
    that move ``X`` by less than a few ulps.
    """
    post = np.flatnonzero(path.event == 1)
    if len(post) == 0:
        return np.zeros(0)
    pre = post - 1
    z = path.jumps.sizes[path.jumps.times > 0]
    xp = path.x[pre]
    dx = path.x[post] - xp
    eps = JUMP_EPS_REL * xp
    return np.abs(dx - c_nu * xp * z * z) / np.maximum(dx, eps)


class Battery:
    """Runs the acceptance criteria; shares ensembles between checks."""

    def __init__(self, model: DelayModel | None = None, seed: int = 20240917,
                 suite: str = "full"):
        if suite not in SUITES:
            raise ValueError(f"unknown suite {suite!r}")
        self.seed = int(seed)
        self.model = reference_model(self.seed) if model is None else model
        self.sizes = SUITES[suite]
        self.suite = suite
        self._ensemble: EnsembleGrid | None = None
        self._floor_paths: list | None = None
        self._cogarch_path: SamplePath | None = None
        self._warm = False

    def warm_up(self):
        if not self._warm:
            _warm_up()
            self._warm = True

    # shared data -----------------------------------------------------------

    def stationary_ensemble(self) -> EnsembleGrid:
        """Event-driven paths from ``phi == M`` to ``T = 50`` on a 0.1 grid."""
        if self._ensemble is None:
            M = stationary_mean(self.model)
            phi = HistorySegment.constant(self.model.r, M)
            self._ensemble = simulate_ensemble(
                self.model, self.sizes["ensemble"], 50.0, phi, h=0.01,
                report_step=0.1, seed=self.seed,
            )
        return self._ensemble

    def floor_paths(self) -> list:
        if self._floor_paths is None:
            m = self.model
            x_floor = positivity_floor(m)
            phi = HistorySegment.constant(m.r, x_floor)
            out = []
            for i in range(self.sizes["floor_paths"]):
                log = sample_jump_events(m.noise, (-m.r, 50.0), seed=self.seed + 4, path=i)
                out.append(event_simulate(m, log, phi, 0.0, 0.01, 0.1))
            self._floor_paths = out
        return self._floor_paths

    def cogarch_path(self) -> SamplePath:
        if self._cogarch_path is None:
            m = cogarch_model(seed=self.seed)
            log = sample_jump_events(m.noise, (0.0, 20.0), seed=self.seed + 2)
            phi = HistorySegment.constant(0.0, 0.5)
            self._cogarch_path = event_simulate(m, log, phi, 0.0, 1e-3, 0.01)
        return self._cogarch_path

    # criteria --------------------------------------------------------------

    def ac1_noise_moments(self) -> CriterionResult:
        spec = NoiseSpec(0.0, 1.0, 0.0, 1.0, self.seed + 1)
        k2, k4 = derive_moments(spec)
        n, delta = 1_000_000, 1.0
        t0 = time.perf_counter()
        inc = sample_increments(spec, delta, 0, n)
        rate = inc.ds / delta
        mean = float(rate.mean())
        se_mean = float(rate.std(ddof=1) / math.sqrt(n))
        var_rate = float(inc.ds.var(ddof=1) / delta)
        d2 = (inc.ds - inc.ds.mean()) ** 2
        se_var = float(d2.std(ddof=1) / math.sqrt(n) / delta)
        secs = time.perf_counter() - t0
        ok_mean = abs(mean - k2) <= 0.01 * k2
        ok_var = abs(var_rate - k4) <= 0.05 * k4
        rows = [
            ValidationRow("dS_rate_mean", 0.0, k2, mean, se_mean, ok_mean),
            ValidationRow("dS_rate_variance", 0.0, k4, var_rate, se_var, ok_var),
        ]
        ok = ok_mean and ok_var and secs < 10
        return CriterionResult(
            1, "noise moments", ok,
            f"E[dS]/delta = {mean:.5f} (kappa2 = {k2}), Var[dS]/delta = {var_rate:.4f} "
            f"(kappa4 = {k4}), delta = {delta}, n = {n}", rows, secs)

    def ac2_cogarch_closed_form(self) -> CriterionResult:
        self.warm_up()
        t0 = time.perf_counter()
        path = self.cogarch_path()
        secs = time.perf_counter() - t0
        m = cogarch_model()
        err = cogarch_closed_form_error(path, m.eta, m.c_mu)
        ok = err < 1e-8 and secs < 5
        row = ValidationRow("cogarch_max_rel_error", None, 0.0, err, None, err < 1e-8)
        return CriterionResult(
            2, "COGARCH closed form", ok,
            f"max relative error {err:.2e} over T = 20 with h = 1e-3, "
            f"{path.meta['n_jumps']} jumps", [row], secs)

    def ac3_jump_identity(self) -> CriterionResult:
        t0 = time.perf_counter()
        paths = [(self.cogarch_path(), cogarch_model().c_nu)]
        paths += [(p, self.model.c_nu) for p in self.floor_paths()]
        worst, n_events = 0.0, 0
        for p, c_nu in paths:
            e = jump_identity_errors(p, c_nu)
            n_events += len(e)
            if len(e):
                worst = max(worst, float(e.max()))
        secs = time.perf_counter() - t0
        ok = worst < 1e-12
        row = ValidationRow("jump_identity_max", None, 0.0, worst, None, ok)
        return CriterionResult(
            3, "jump identity", ok,
            f"max normalised error {worst:.2e} over {n_events} events on {len(paths)} paths",
            [row], secs)

    def ac4_positivity_floor(self) -> CriterionResult:
        self.warm_up()
        t0 = time.perf_counter()
        x_floor = positivity_floor(self.model)
        lows = [float(np.min(p.knots[1])) for p in self.floor_paths()]
        secs = time.perf_counter() - t0
        low = min(lows)
        ok = low >= x_floor * (1 - 1e-9)
        row = ValidationRow("min_X_over_floor", None, 1.0, low / x_floor, None, ok)
        return CriterionResult(
            4, "positivity floor", ok,
            f"min X = {low:.12f} vs x- = {x_floor:.12f} on {len(lows)} paths to T = 50",
            [row], secs)

    def ac5_euler_convergence(self) -> CriterionResult:
        self.warm_up()
        t0 = time.perf_counter()
        m = cogarch_model(c_mu=2.0, c_nu=0.5, seed=self.seed)
        T = 10.0
        phi = HistorySegment.constant(0.0, stationary_mean(m))
        ratios, d_coarse, d_fine = [], [], []
        for i in range(self.sizes["euler_draws"]):
            log = sample_jump_events(m.noise, (0.0, T), seed=self.seed + 5, path=i)
            ref = event_simulate(m, log, phi, 0.0, 1e-3, 5e-3)
            d = []
            for delta in (1e-2, 5e-3):
                inc = bin_jumps(log, delta, 0, int(round(T / delta)))
                d.append(compare_paths(euler_simulate(m, inc, phi), ref)[0])
            d_coarse.append(d[0])
            d_fine.append(d[1])
            ratios.append(d[0] / d[1])
        secs = time.perf_counter() - t0
        ratios = np.array(ratios)
        mean_ratio = float(ratios.mean())
        ok_ratio = 1.5 <= mean_ratio <= 2.5
        rows = [ValidationRow("euler_sup_ratio", None, 2.0, mean_ratio,
                              float(ratios.std(ddof=1) / math.sqrt(len(ratios))), ok_ratio)]
        return CriterionResult(
            5, "Euler convergence", ok_ratio and secs < 60,
            f"mean ratio {mean_ratio:.3f} (median {np.median(ratios):.3f}); mean sup "
            f"distance {np.mean(d_coarse):.3e} -> {np.mean(d_fine):.3e}", rows, secs)

    def ac6_mean_cross_solver(self) -> CriterionResult:
        self.warm_up()
        m = self.model
        M = stationary_mean(m)
        phi = HistorySegment.from_function(lambda t: M + 0.5 * np.cos(3.0 * t), m.r, 1001)
        t0 = time.perf_counter()
        a = solve_mean_fde(m, phi, 20.0, 1e-3)
        b = solve_mean_renewal(m, phi, 20.0, 1e-3)
        secs = time.perf_counter() - t0
        gap = float(np.max(np.abs(a.m_future - b.m_future)))
        ok = gap <= 1e-6
        row = ValidationRow("mean_solver_gap", None, 0.0, gap, None, ok)
        return CriterionResult(
            6, "mean solver cross-validation", ok and secs < 5,
            f"sup |m_dde - m_renewal| = {gap:.2e} on [0, 20] at step 1e-3", [row], secs)

    def ac7_stationary_mean(self) -> CriterionResult:
        self.warm_up()
        m = self.model
        M = stationary_mean(m)
        phi = HistorySegment.constant(m.r, M)
        t0 = time.perf_counter()
        dev = max(
            float(np.max(np.abs(solve_mean_fde(m, phi, 20.0, 1e-3).m_future - M))),
            float(np.max(np.abs(solve_mean_renewal(m, phi, 20.0, 1e-3).m_future - M))),
        )
        ens = self.stationary_ensemble()
        T = float(ens.t[-1])
        est, se = ensemble_mean(ens, T)
        secs = time.perf_counter() - t0
        ok_solvers = dev <= 1e-9
        ok_mc = abs(est - M) <= 3 * se
        rows = [
            ValidationRow("mean_solver_stationarity", None, 0.0, dev, None, ok_solvers),
            ValidationRow("ensemble_mean_X_T", T, M, est, se, ok_mc),
        ]
        return CriterionResult(
            7, "stationary mean", ok_solvers and ok_mc and secs < 180,
            f"solver deviation {dev:.1e}; E[X_{T:g}] = {est:.4f} +/- {se:.4f} vs M = {M:.4f} "
            f"({ens.n_paths} paths)", rows, secs)

    def ac8_mean_decay_rate(self) -> CriterionResult:
        self.warm_up()
        m = self.model
        M = stationary_mean(m)
        t0 = time.perf_counter()
        alpha = dominant_root(m).real
        T = 12.0 / abs(alpha) + 1.0
        mp = solve_mean_fde(m, HistorySegment.constant(m.r, M + 1.0), T, 1e-3)
        t = mp.t_future
        sel = (t >= 2.0 / abs(alpha)) & (t <= 12.0 / abs(alpha))
        slope = float(np.polyfit(t[sel], np.log(np.abs(mp.m_future[sel] - M)), 1)[0])
        secs = time.perf_counter() - t0
        rel = abs(slope - alpha) / abs(alpha)
        ok = rel <= 0.05
        row = ValidationRow("mean_decay_slope", None, alpha, slope, None, ok)
        return CriterionResult(
            8, "exponential mean convergence", ok,
            f"fitted slope {slope:.6f} vs Re z* = {alpha:.6f} (rel. diff {rel:.1e})",
            [row], secs)

    def ac9_root_scan(self) -> CriterionResult:
        t0 = time.perf_counter()
        rng = make_rng(self.seed, 0, stream=9)
        counts = []
        for _ in range(self.sizes["random_models"]):
            m = _random_stable_model(rng, self.seed)
            counts.append(scan_roots(m, (0.0, 10.0, -50.0, 50.0), locate=False)[0])
        noise = NoiseSpec(0.0, 1.0, 0.0, 1.0, self.seed)
        unstable = DelayModel(1.0, 1.0, 0.5, ExponentialKernel(3.0, 2.0, 1.0),
                              ExponentialKernel(2.0, 1.0, 1.0), noise)
        n_u, z = scan_roots(unstable, (0.0, 10.0, -50.0, 50.0))
        x_bis = real_root(unstable)
        resid = abs(DeltaFunction(unstable)(z)) if z is not None else math.inf
        gap = abs(z - x_bis) if z is not None else math.inf
        secs = time.perf_counter() - t0
        ok_stable = all(c == 0 for c in counts)
        ok_unstable = n_u >= 1 and gap < 1e-8 and resid < 1e-10
        rows = [
            ValidationRow("rhp_roots_stable_models", None, 0.0, float(sum(counts)), None,
                          ok_stable),
            ValidationRow("unstable_root_vs_bisection", None, x_bis,
                          None if z is None else z.real, None, ok_unstable),
        ]
        return CriterionResult(
            9, "root-scan consistency", ok_stable and ok_unstable,
            f"{len(counts)} stable models with RHP counts {sorted(set(counts))}; unstable root "
            f"{'none' if z is None else f'{z.real:.12f}'} vs bisection {x_bis:.12f} "
            f"(|Delta| = {resid:.1e})", rows, secs)

    def ac10_return_autocov(self) -> CriterionResult:
        self.warm_up()
        t0 = time.perf_counter()
        ens = self.stationary_ensemble()
        t = 10.0
        i0, i1 = ens.index(t), ens.index(t - 1.0)
        r0 = ens.y[:, i0] - ens.y[:, i1]
        rows, ok = [], True
        for u in (0.0, 0.5, 1.5):
            j0, j1 = ens.index(t + u), ens.index(t + u - 1.0)
            ru = ens.y[:, j0] - ens.y[:, j1]
            est, se = ensemble_cov(r0, ru)
            theory = theoretical_return_autocov(self.model, u)
            good = abs(est - theory) <= 3 * se
            ok &= good
            rows.append(ValidationRow("return_autocov", u, theory, est, se, good))
        secs = time.perf_counter() - t0
        desc = ", ".join(f"u={r.lag:g}: {r.estimate:.4f} vs {r.theory:.4f} (z={r.z_score:+.2f})"
                         for r in rows)
        return CriterionResult(10, "return autocovariance", ok and secs < 300, desc, rows, secs)

    def ac11_ucp_truncation(self) -> CriterionResult:
        self.warm_up()
        t0 = time.perf_counter()
        rng = make_rng(self.seed, 0, stream=11)
        T = 10.0
        sup2, sup16 = [], []
        for i in range(self.sizes["ucp_models"]):
            m = _random_stable_model(rng, self.seed)
            phi = HistorySegment.constant(m.r, stationary_mean(m))
            log = sample_jump_events(m.noise, (-m.r, T), seed=self.seed + 11, path=i)
            full = event_simulate(m, log, phi, 0.0, 0.01, 0.05)
            d = {}
            for n in (2, 16):
                tr = event_simulate(m, truncate_jumps(log, n), phi, 0.0, 0.01, 0.05)
                d[n] = compare_paths(tr, full)[0]
            sup2.append(d[2])
            sup16.append(d[16])
        secs = time.perf_counter() - t0
        med2, med16 = float(np.median(sup2)), float(np.median(sup16))
        ok = med16 < 0.25 * med2
        row = ValidationRow("ucp_median_ratio", None, 0.25, med16 / med2, None, ok)
        return CriterionResult(
            11, "ucp truncation", ok,
            f"median sup|X^n - X|: n=2 {med2:.3e}, n=16 {med16:.3e}", [row], secs)

    def ac12_moment_bound(self) -> CriterionResult:
        self.warm_up()
        t0 = time.perf_counter()
        m = self.model
        M = stationary_mean(m)
        rep = moment_bound_report(m, M, M * M)
        ens = self.stationary_ensemble()
        means = ens.x.mean(axis=0)
        top = float(means.max())
        secs = time.perf_counter() - t0
        ok = rep.l1_bound is not None and top <= rep.l1_bound
        row = ValidationRow("max_ensemble_mean_over_l1_bound", None, rep.l1_bound, top, None, ok)
        return CriterionResult(
            12, "moment-bound sanity", ok,
            f"max_t mean X = {top:.4f} <= L1 bound {rep.l1_bound:.4f}", [row], secs)

    def run_all(self, progress=None) -> list[CriterionResult]:
        out = []
        for k in range(1, 13):
            fn = getattr(self, _NAMES[k])
            res = fn()
            if progress is not None:
                progress(res)
            out.append(res)
        return out


def cogarch_closed_form_error(path: SamplePath, eta: float, c_mu: float) -> float:
    """Max relative deviation of the stored knots from the between-jump closed form."""
    tk, xk = path.knots
    level = eta / c_mu
    jt = path.jumps.times[path.jumps.times > 0]
    T = path.horizon
    starts = np.concatenate([[0.0], jt])
    ends = np.concatenate([jt, [T]])
    worst = 0.0
    for s, e in zip(starts, ends):
        lo = int(np.searchsorted(tk, s, side="right")) - 1  # post-jump knot at s
        hi = int(np.searchsorted(tk, e, side="left"))       # pre-jump knot at e
        if e == T:
            hi = len(tk) - 1
        seg_t, seg_x = tk[lo:hi + 1], xk[lo:hi + 1]
        x0 = seg_x[0]
        exact = level + (x0 - level) * np.exp(-c_mu * (seg_t - s))
        worst = max(worst, float(np.max(np.abs(seg_x - exact) / np.abs(exact))))
    return worst


_NAMES = {
    1: "ac1_noise_moments",
    2: "ac2_cogarch_closed_form",
    3: "ac3_jump_identity",
    4: "ac4_positivity_floor",
    5: "ac5_euler_convergence",
    6: "ac6_mean_cross_solver",
    7: "ac7_stationary_mean",
    8: "ac8_mean_decay_rate",
    9: "ac9_root_scan",
    10: "ac10_return_autocov",
    11: "ac11_ucp_truncation",
    12: "ac12_moment_bound",
}
