import json

import numpy as np
import pytest

from cdgarch.paths import HistorySegment, SamplePath, compare_paths, read_path_csv, write_path_csv


def _ramp_path(n=101, dt=0.1, shift=0.0):
    t = np.arange(n) * dt
    return SamplePath(t, np.sin(t) + 2.0 + shift, t.copy(), 0, delta=dt)


def test_history_constant():
    h = HistorySegment.constant(2.0, 0.7)
    assert h.is_constant and h.phi0 == 0.7
    assert np.all(h(np.linspace(-2, 0, 5)) == 0.7)
    t, v = h.knots(2.0)
    assert t[0] == -2.0 and t[-1] == 0.0 and np.all(v == 0.7)


def test_history_from_function_interpolates():
    h = HistorySegment.from_function(lambda t: 1 + t * t, 1.0, 101)
    assert h(-0.5) == pytest.approx(1.25, abs=1e-4)
    assert h.phi0 == 1.0


def test_history_validation():
    with pytest.raises(ValueError):
        HistorySegment(1.0, np.array([-1.0, -0.5]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        HistorySegment(1.0, np.array([-1.0, 0.0]), np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        HistorySegment(1.0, np.array([-0.5, 0.0]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        HistorySegment.constant(0.5, 1.0).knots(1.0)


def test_sample_path_alignment_checked():
    with pytest.raises(ValueError):
        SamplePath(np.arange(5.0), np.ones(5), np.zeros(5), 1)


def test_grid_view_keeps_post_jump_value():
    t = np.array([0.0, 0.5, 0.5, 1.0])
    x = np.array([1.0, 0.9, 1.4, 1.2])
    p = SamplePath(t, x, np.zeros(4), 0, event=np.array([0, 0, 1, 0]))
    tg, xg, _ = p.grid_view()
    assert tg.tolist() == [0.0, 0.5, 1.0]
    assert xg.tolist() == [1.0, 1.4, 1.2]
    assert p.x_at(0.5) == 1.4


def test_compare_identical():
    a = _ramp_path()
    assert compare_paths(a, a)[0] == 0.0


def test_compare_constant_shift():
    a = _ramp_path()
    b = _ramp_path(shift=-0.3)
    d, _ = compare_paths(a, b)
    assert d == pytest.approx(0.3, abs=1e-14)


def test_compare_uses_coarser_grid():
    coarse = _ramp_path(11, 1.0)
    fine = _ramp_path(1001, 0.01)
    d, at = compare_paths(coarse, fine)
    assert d < 1e-12
    assert at in coarse.t


def test_compare_rejects_disjoint():
    a = _ramp_path()
    t = np.arange(5) * 0.1 + 100.0
    b = SamplePath(t, np.ones(5), np.zeros(5), 0)
    with pytest.raises(ValueError):
        compare_paths(a, b)


def test_path_csv_round_trip(tmp_path):
    t = np.array([-0.2, -0.1, 0.0, 0.1, 0.1, 0.2])
    x = np.array([1.0, 1.0, 1.0, 0.95, 1.3, 1.25])
    y = np.array([0.0, 0.0, 0.2, 0.2])
    p = SamplePath(t, x, y, 2, event=np.array([0, 0, 0, 0, 1, 0]), meta={"seed": 3})
    write_path_csv(p, tmp_path / "p.csv", with_history=True)
    back = read_path_csv(tmp_path / "p.csv")
    assert back.n_history == 2
    assert np.array_equal(back.x, x) and np.array_equal(back.y, y)
    assert back.event.tolist() == [0, 0, 0, 0, 1, 0]
    assert json.loads((tmp_path / "p.json").read_text())["seed"] == 3
