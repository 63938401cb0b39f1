import numpy as np
import pytest

from trisymp import fs_demo
from trisymp.forms import FS, fd_error, pullback


def test_difference_is_two_dtheta_next():
    res = fs_demo.difference_residuals(1000, 0)
    assert max(r["vs_2dtheta_b"] for r in res.values()) <= 1e-10


def test_difference_is_closed_and_primitive_is_consistent():
    for lam in (1, 2, 3):
        assert fs_demo.difference_closedness(lam) < 1e-6
    assert fs_demo.omega_chart_independence() <= 1e-10
    assert fd_error(fs_demo.fs_field(), np.array([0.8, 0.4, 1.1, 2.0])) < 1e-8


def test_difference_periods():
    per = fs_demo.difference_periods(1)
    assert per["theta_b"] == pytest.approx(4 * np.pi)
    assert per["theta_a"] == pytest.approx(0.0, abs=1e-12)


def test_transversality_on_central_torus():
    tr = fs_demo.fs_transversality()
    assert tr["equal"] and tr["positive"] and tr["cocycle_sum"] == 0.0
    assert set(tr["densities"].values()) == {4.0}


def test_coordinate_change_inverse_and_singularity(rng):
    p = fs_demo.random_overlap_points(20, 3)
    new, J = fs_demo.coordinate_change(p)
    # applying the change three times returns to the original chart
    q = p
    for _ in range(3):
        q, _ = fs_demo.coordinate_change(q)
    np.testing.assert_allclose(q[:, [0, 2]], p[:, [0, 2]])
    np.testing.assert_allclose(np.mod(q[:, [1, 3]] - p[:, [1, 3]] + np.pi, 2 * np.pi) - np.pi, 0, atol=1e-12)
    h = 1e-6
    num = (fs_demo.coordinate_change(p[0] + [0, 0, h, 0])[0] - fs_demo.coordinate_change(p[0] - [0, 0, h, 0])[0]) / (2 * h)
    np.testing.assert_allclose(num, J[0][:, 2], rtol=1e-6)
    with pytest.raises(ValueError):
        fs_demo.coordinate_change([1.0, 0.0, 0.0, 0.0])


def test_chart_point():
    pt = fs_demo.FsChartPoint(4, 1.0, 7.0, 2.0, -1.0)
    assert pt.lam == 1 and 0 <= pt.theta_a < 2 * np.pi and 0 <= pt.theta_b < 2 * np.pi
    with pytest.raises(ValueError):
        fs_demo.FsChartPoint(1, -1.0, 0, 1, 0)
    a = fs_demo.fs_primitive(pt)
    assert a.chart == FS and a.degree == 1


def test_table():
    text, ok = fs_demo.fs_table()
    assert ok and "beta1" in text and "chart" in text
