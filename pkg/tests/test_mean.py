import math

import numpy as np
import pytest
from scipy import integrate

from cdgarch.kernels import DelayModel, ExponentialKernel, TabulatedKernel
from cdgarch.mean import (
    renewal_kernel_zeta,
    solve_mean_fde,
    solve_mean_renewal,
    write_mean_csv,
    zeta_grid,
)
from cdgarch.noise import NoiseSpec
from cdgarch.paths import HistorySegment
from cdgarch.stability import dominant_root, stationary_mean

NOISE = NoiseSpec(0.0, 1.0, 0.0, 1.0, 1)
K = ExponentialKernel(1.0, 2.0, 1.0)


@pytest.fixture
def model():
    return DelayModel(1.0, 3.0, 0.5, K, K, NOISE)


@pytest.fixture
def scalar():
    return DelayModel(1.0, 2.0, 0.5, None, None, NOISE)


@pytest.mark.parametrize("solver", [solve_mean_fde, solve_mean_renewal])
def test_stationary_history_is_preserved(model, solver):
    M = stationary_mean(model)
    mp = solver(model, HistorySegment.constant(1.0, M), 20.0, 1e-3)
    assert np.max(np.abs(mp.m_future - M)) < 1e-9


def test_fde_scalar_closed_form(scalar):
    c0 = scalar.c0
    mp = solve_mean_fde(scalar, HistorySegment.constant(0.0, 2.0), 5.0, 1e-3)
    t = mp.t_future
    exact = 1 / c0 + (2.0 - 1 / c0) * np.exp(-c0 * t)
    assert np.max(np.abs(mp.m_future - exact)) < 1e-8


def test_renewal_scalar_closed_form(scalar):
    c0 = scalar.c0
    mp = solve_mean_renewal(scalar, HistorySegment.constant(0.0, 2.0), 5.0, 1e-3)
    t = mp.t_future
    exact = 1 / c0 + (2.0 - 1 / c0) * np.exp(-c0 * t)
    assert np.max(np.abs(mp.m_future - exact)) < 1e-7


def test_cross_solver_agreement(model):
    M = stationary_mean(model)
    phi = HistorySegment.from_function(lambda t: M + 0.5 * np.cos(3.0 * t), 1.0, 1001)
    a = solve_mean_fde(model, phi, 20.0, 1e-3)
    b = solve_mean_renewal(model, phi, 20.0, 1e-3)
    assert np.array_equal(a.t, b.t)
    assert np.max(np.abs(a.m_future - b.m_future)) < 1e-6


def test_history_part_equals_phi(model):
    phi = HistorySegment.from_function(lambda t: 1 + t * t, 1.0, 101)
    for solver in (solve_mean_fde, solve_mean_renewal):
        mp = solver(model, phi, 1.0, 0.01)
        assert mp.n_history == 100
        assert np.allclose(mp.m[:101], phi(mp.t[:101]))


def test_decay_rate_matches_dominant_root(model):
    M = stationary_mean(model)
    alpha = dominant_root(model).real
    mp = solve_mean_fde(model, HistorySegment.constant(1.0, M + 1.0), 8.0, 1e-3)
    t = mp.t_future
    sel = (t > 2.0) & (t < 7.0)
    slope = np.polyfit(t[sel], np.log(np.abs(mp.m_future[sel] - M)), 1)[0]
    assert abs(slope - alpha) < 0.05 * abs(alpha)


def test_fde_refinement_without_delay(scalar):
    phi = HistorySegment.constant(0.0, 2.0)
    ref = solve_mean_fde(scalar, phi, 2.0, 0.1 / 8)(2.0)
    e = [abs(solve_mean_fde(scalar, phi, 2.0, s)(2.0) - ref) for s in (0.1, 0.05)]
    assert e[0] / e[1] >= 8


def test_fde_refinement_with_delay(model):
    # linear delayed interpolation limits the order to two
    M = stationary_mean(model)
    phi = HistorySegment.constant(1.0, M + 1.0)
    ref = solve_mean_fde(model, phi, 3.0, 0.1 / 16)(3.0)
    e = [abs(solve_mean_fde(model, phi, 3.0, s)(3.0) - ref) for s in (0.1, 0.05)]
    assert e[0] / e[1] >= 3.5


def test_zeta_values(model):
    c0, r = model.c0, model.r
    assert renewal_kernel_zeta(model, 0.0) == 0.0
    assert renewal_kernel_zeta(model, r) == pytest.approx(-c0 + model.f_l1, rel=1e-14)
    assert renewal_kernel_zeta(model, 3 * r) == renewal_kernel_zeta(model, r)
    half, _ = integrate.quad(lambda u: 2 * float(K(-u)), 0.0, r / 2, epsabs=1e-14)
    assert renewal_kernel_zeta(model, r / 2) == pytest.approx(half - c0, abs=1e-10)


def test_zeta_rejects_negative_time(model):
    with pytest.raises(ValueError):
        renewal_kernel_zeta(model, -0.1)


def test_zeta_grid_matches_pointwise(model):
    z = zeta_grid(model, 0.01, 200)
    assert z[0] == -model.c0
    for k in (1, 37, 100, 150, 200):
        assert z[k] == pytest.approx(renewal_kernel_zeta(model, k * 0.01), abs=1e-13)


def test_renewal_rejects_critical_model():
    # c0 = ||f||_1 = 0.5 exactly, so zeta(r) vanishes
    k = TabulatedKernel(1.0, np.array([0.0, 1.0]))
    m = DelayModel(1.0, 1.5, 1.0, k, None, NOISE)
    assert m.c0 == m.f_l1 == 0.5
    with pytest.raises(ValueError):
        solve_mean_renewal(m, HistorySegment.constant(1.0, 1.0), 1.0, 0.01)


def test_rejects_nonpositive_step(model):
    with pytest.raises(ValueError):
        solve_mean_fde(model, HistorySegment.constant(1.0, 1.0), 1.0, 0.0)


def test_mean_csv(tmp_path, scalar):
    phi = HistorySegment.constant(0.0, 1.0)
    a = solve_mean_fde(scalar, phi, 0.5, 0.1)
    b = solve_mean_renewal(scalar, phi, 0.5, 0.1)
    write_mean_csv([a, b], tmp_path / "mean.csv")
    lines = (tmp_path / "mean.csv").read_text().splitlines()
    assert lines[0] == "t,m,solver"
    assert len(lines) == 1 + 12
    assert lines[-1].endswith(",renewal")
    assert math.isclose(float(lines[1].split(",")[1]), 1.0)
