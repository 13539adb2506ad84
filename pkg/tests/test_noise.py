import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdgarch.noise import (
    JumpLog,
    NoiseSpec,
    bin_jumps,
    derive_moments,
    read_increments_csv,
    read_jump_log_csv,
    sample_increments,
    sample_jump_events,
    truncate_jumps,
    write_increments_csv,
    write_jump_log_csv,
)


def test_kappa2_unit_jump_law():
    k2, _ = derive_moments(NoiseSpec(0.0, 1.0, 0.0, 1.0))
    assert k2 == 1.0


def test_pure_brownian_moments():
    assert derive_moments(NoiseSpec(1.0, 0.0, 0.0, 0.0)) == (1.0, 0.0)


def test_kappa4_matches_monte_carlo_fourth_moment():
    _, k4 = derive_moments(NoiseSpec(0.0, 1.0, 0.0, 1.0))
    assert k4 == 3.0
    z = np.random.default_rng(1).normal(0.0, 1.0, 1_000_000)
    z4 = z**4
    assert abs(z4.mean() - k4) < 3 * z4.std() / math.sqrt(len(z4))


def test_kappa4_shifted_jump_law():
    _, k4 = derive_moments(NoiseSpec(0.0, 2.0, 0.5, 0.7))
    m, s = 0.5, 0.7
    assert k4 == pytest.approx(2.0 * (m**4 + 6 * m * m * s * s + 3 * s**4), rel=1e-14)


def test_degenerate_spec_gives_zero_moments():
    spec = NoiseSpec(0.0, 0.0, 0.3, 1.0)
    assert spec.degenerate
    assert derive_moments(spec) == (0.0, 0.0)


def test_negative_parameters_rejected():
    with pytest.raises(ValueError):
        NoiseSpec(-1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        NoiseSpec(0.0, 1.0, 0.0, 1.0, seed=-1)


def test_no_jump_increments_are_exact():
    inc = sample_increments(NoiseSpec(1.0, 0.0, 0.0, 0.0, 3), 0.01, 5, 100)
    assert np.all(inc.ds == 0.01)
    assert len(inc.dl) == len(inc.ds) == 105


def test_increments_deterministic():
    spec = NoiseSpec(0.3, 2.0, 0.1, 0.8, 99)
    a = sample_increments(spec, 0.01, 10, 500, path=4)
    b = sample_increments(spec, 0.01, 10, 500, path=4)
    assert np.array_equal(a.dl, b.dl) and np.array_equal(a.ds, b.ds)
    c = sample_increments(spec, 0.01, 10, 500, path=5)
    assert not np.array_equal(a.dl, c.dl)


def test_increment_mean_lln(unit_noise):
    inc = sample_increments(unit_noise, 0.01, 0, 1_000_000)
    se = inc.ds.std() / math.sqrt(len(inc.ds))
    assert abs(inc.ds.mean() - 0.01) < 3 * se


def test_increment_second_moment_matches_kappa4(unit_noise):
    # Var(dS) = kappa4 * delta for a pure-jump S
    delta = 0.01
    inc = sample_increments(unit_noise, delta, 0, 1_000_000)
    v = (inc.ds - inc.ds.mean()) ** 2
    assert abs(v.mean() - 3.0 * delta) < 3 * v.std() / math.sqrt(len(v))


def test_increments_reject_nonpositive_delta(unit_noise):
    with pytest.raises(ValueError):
        sample_increments(unit_noise, 0.0, 0, 10)


@given(st.floats(0.0, 2.0), st.floats(0.0, 5.0), st.floats(0.001, 0.5))
@settings(max_examples=30, deadline=None)
def test_ds_dominates_brownian_floor(sigma_l, lam, delta):
    spec = NoiseSpec(sigma_l, lam, 0.2, 1.0, 5)
    inc = sample_increments(spec, delta, 3, 50)
    assert np.all(inc.ds >= sigma_l**2 * delta)


def test_mean_interarrival(unit_noise):
    log = sample_jump_events(unit_noise, (0.0, 10_000.0))
    gaps = np.diff(np.concatenate([[0.0], log.times]))
    assert abs(gaps.mean() - 1.0) < 3 * gaps.std() / math.sqrt(len(gaps))


def test_empty_horizon(unit_noise):
    log = sample_jump_events(unit_noise, (0.0, 0.0))
    assert len(log) == 0


def test_jump_events_deterministic(unit_noise):
    a = sample_jump_events(unit_noise, (-1.0, 50.0), seed=8)
    b = sample_jump_events(unit_noise, (-1.0, 50.0), seed=8)
    assert np.array_equal(a.times, b.times) and np.array_equal(a.sizes, b.sizes)


def test_jump_events_reject_brownian_part():
    with pytest.raises(ValueError):
        sample_jump_events(NoiseSpec(0.1, 1.0, 0.0, 1.0), (0.0, 1.0))


def test_jump_log_qv_is_sum_of_squares(unit_noise):
    log = sample_jump_events(unit_noise, (0.0, 20.0))
    sel = (log.times > 3.0) & (log.times <= 11.0)
    assert log.qv_increment(3.0, 11.0) == np.sum(log.sizes[sel] ** 2)


def _small_log():
    return JumpLog((0.0, 3.0), np.array([0.5, 1.5, 2.5]), np.array([0.05, 0.6, -2.0]))


def test_truncate_threshold_one():
    assert truncate_jumps(_small_log(), 1).sizes.tolist() == [-2.0]


def test_truncate_threshold_half():
    out = truncate_jumps(_small_log(), 2)
    assert out.sizes.tolist() == [0.6, -2.0]
    assert out.times.tolist() == [1.5, 2.5]


def test_truncate_below_minimum_keeps_everything():
    log = JumpLog((0.0, 3.0), np.array([0.5, 1.5]), np.array([0.01, -0.3]))
    out = truncate_jumps(log, 1000)
    assert np.array_equal(out.sizes, log.sizes)


@given(st.integers(1, 50), st.integers(1, 50))
@settings(max_examples=40, deadline=None)
def test_truncation_monotone(n1, n2):
    n1, n2 = sorted((n1, n2))
    log = sample_jump_events(NoiseSpec(0.0, 3.0, 0.0, 0.5, 2), (0.0, 30.0))
    a = set(truncate_jumps(log, n1).times)
    b = set(truncate_jumps(log, n2).times)
    assert a <= b


def test_jump_log_invariants():
    with pytest.raises(ValueError):
        JumpLog((0.0, 1.0), np.array([0.5, 0.4]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        JumpLog((0.0, 1.0), np.array([0.5]), np.array([0.0]))
    with pytest.raises(ValueError):
        JumpLog((0.0, 1.0), np.array([1.5]), np.array([1.0]))


def test_bin_jumps_places_jump_in_ceiling_step():
    log = JumpLog((-1.0, 1.0), np.array([-0.25, 0.3, 0.35]), np.array([1.0, 2.0, -1.0]))
    inc = bin_jumps(log, 0.1, 10, 10)
    # step n covers ((n-1) delta, n delta]; index = n + n_history - 1
    assert inc.ds[np.ceil(-0.25 / 0.1).astype(int) + 9] == 1.0
    assert inc.ds[3 + 9] == 4.0
    assert inc.ds[4 + 9] == 1.0
    assert inc.ds.sum() == 6.0


def test_increment_csv_round_trip(tmp_path):
    inc = sample_increments(NoiseSpec(0.2, 1.0, 0.0, 1.0, 4), 0.25, 4, 12)
    write_increments_csv(inc, tmp_path / "inc.csv")
    back = read_increments_csv(tmp_path / "inc.csv")
    assert back.n_history == 4
    assert np.array_equal(back.dl, inc.dl) and np.array_equal(back.ds, inc.ds)


def test_jump_log_csv_round_trip(tmp_path, unit_noise):
    log = sample_jump_events(unit_noise, (0.0, 15.0))
    write_jump_log_csv(log, tmp_path / "log.csv")
    back = read_jump_log_csv(tmp_path / "log.csv", horizon=(0.0, 15.0))
    assert np.array_equal(back.times, log.times)
    assert np.array_equal(back.sizes, log.sizes)
