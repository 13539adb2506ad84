import math

import numpy as np
import pytest

from cdgarch.events import EnsembleGrid
from cdgarch.paths import SamplePath
from cdgarch.stats import (
    ValidationRow,
    empirical_autocov,
    ensemble_cov,
    ensemble_mean,
    time_average,
    weak_dependence_check,
    write_validation_csv,
)


def _paths(values_at_t, n=21, dt=0.1):
    t = np.arange(n) * dt
    return [SamplePath(t, np.full(n, float(v)), np.zeros(n), 0, delta=dt) for v in values_at_t]


def test_ensemble_mean_constant_paths():
    assert ensemble_mean(_paths([2.5] * 5), 1.0) == (2.5, 0.0)


def test_ensemble_mean_two_paths():
    est, se = ensemble_mean(_paths([1.0, 3.0]), 0.5)
    assert est == 2.0 and se == pytest.approx(1.0)


def test_ensemble_mean_rejects_empty():
    with pytest.raises(ValueError):
        ensemble_mean([], 0.0)


def test_ensemble_mean_on_grid():
    g = EnsembleGrid(np.array([0.0, 1.0]), np.array([[1.0, 1.0], [1.0, 3.0]]),
                     np.zeros((2, 2)), {})
    assert ensemble_mean(g, 1.0) == (2.0, pytest.approx(1.0))


def test_autocov_constant_series():
    for lag in range(5):
        assert empirical_autocov(np.full(100, 4.2), lag)[0] == 0.0


def test_autocov_alternating_series():
    n = 1000
    x = np.tile([1.0, -1.0], n // 2)
    est, _ = empirical_autocov(x, 1)
    assert est == pytest.approx(-(n - 1) / n)
    assert empirical_autocov(x, 0)[0] == 1.0


def test_autocov_rejects_long_lag():
    with pytest.raises(ValueError):
        empirical_autocov(np.ones(10), 10)


def test_autocov_white_noise_within_se(rng):
    x = rng.normal(size=40_000)
    est, se = empirical_autocov(x, 3)
    assert abs(est) < 4 * se
    v, _ = empirical_autocov(x, 0)
    assert v == pytest.approx(1.0, abs=0.03)


def test_nan_is_an_error():
    with pytest.raises(FloatingPointError):
        empirical_autocov(np.array([1.0, np.nan, 2.0]), 1)
    with pytest.raises(FloatingPointError):
        ensemble_cov(np.array([1.0, np.inf]), np.array([1.0, 2.0]))


def test_cov_symmetry(rng):
    a, b = rng.normal(size=(2, 500))
    assert ensemble_cov(a, b) == ensemble_cov(b, a)


def test_se_shrinks_with_sample_size():
    ratios = []
    for seed in range(20):
        r = np.random.default_rng(seed)
        _, s1 = ensemble_cov(*r.normal(size=(2, 1000)))
        _, s2 = ensemble_cov(*r.normal(size=(2, 2000)))
        ratios.append(s1 / s2)
    assert np.mean(ratios) == pytest.approx(math.sqrt(2), rel=0.05)


def test_weak_dependence_zero_noise():
    out = weak_dependence_check(_paths([1.0, 1.0, 1.0]), 0.5, [0.0, 0.5, 1.0])
    assert [row[1] for row in out] == [0.0, 0.0, 0.0]


def test_weak_dependence_lag_zero_is_variance(rng):
    vals = rng.normal(size=50)
    out = weak_dependence_check(_paths(vals), 1.0, [0.0])
    assert out[0][1] == pytest.approx(np.var(vals, ddof=1))
    assert out[0][1] >= 0


def test_time_average():
    t = np.arange(101) * 0.1
    p = SamplePath(t, np.where(t >= 5.0, 2.0, 0.0), np.zeros(101), 0, delta=0.1)
    est, se = time_average(p, 5.0)
    assert est == 2.0 and se == 0.0


def test_validation_csv(tmp_path):
    rows = [ValidationRow("autocov", 0.5, 1.0, 1.2, 0.1, True),
            ValidationRow("flag", None, None, None, None, False)]
    assert rows[0].z_score == pytest.approx(2.0)
    write_validation_csv(rows, tmp_path / "v.csv")
    lines = (tmp_path / "v.csv").read_text().splitlines()
    assert lines[0] == "quantity,lag,theory,estimate,std_error,z_score,pass"
    assert lines[1].endswith(",true")
    assert lines[2] == "flag,,,,,,false"
