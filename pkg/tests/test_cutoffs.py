import numpy as np
import pytest

from trisymp import cutoffs

EPS = 0.01


def _profiles():
    return [cutoffs.Phi(EPS), cutoffs.psi_q(EPS), cutoffs.psi_q(EPS, 0.4), cutoffs.phi_p(EPS, 10 * EPS),
            cutoffs.phi_p(EPS, 10 * EPS, 0.3), cutoffs.phi_B(0.02, 0.04), cutoffs.annulus_phi1(0.1),
            cutoffs.annulus_phi2(EPS, 0.1)]


@pytest.mark.parametrize("prof", _profiles(), ids=lambda p: p.name)
def test_knot_values(prof):
    np.testing.assert_allclose(prof(np.array(prof.knots)), prof.values, atol=1e-12)


@pytest.mark.parametrize("prof", _profiles(), ids=lambda p: p.name)
def test_derivative_matches_central_difference(prof):
    lo, hi = prof.knots[0] - 0.01, prof.knots[-1] + 0.01
    x = np.linspace(lo, hi, 997)
    h = 1e-7
    fd = (prof(x + h) - prof(x - h)) / (2 * h)
    assert np.abs(fd - prof.deriv(x)).max() < 1e-5 * max(1.0, np.abs(prof.deriv(x)).max())


@pytest.mark.parametrize("prof", _profiles(), ids=lambda p: p.name)
def test_monotone_intervals(prof):
    for lo, hi, sign in prof.monotone:
        x = np.linspace(lo, hi, 203)[1:-1]
        assert np.all(sign * prof.deriv(x) > 0)


def test_profile_shapes():
    Phi = cutoffs.Phi(EPS)
    s = np.linspace(0, 2 * EPS, 11)
    np.testing.assert_allclose(Phi(s), 1 - s)
    assert np.all(Phi(np.linspace(3 * EPS, 5 * EPS, 9)) == 0)
    psi = cutoffs.psi_q(EPS)
    assert np.all(psi(np.linspace(0, 2 * EPS, 9)) == 0) and np.all(psi(np.linspace(5 * EPS, 1, 9)) == 1)
    php = cutoffs.phi_p(EPS, 10 * EPS)
    assert np.all(php(np.linspace(0, EPS, 9)) == 0)
    assert np.all(php(np.linspace(2 * EPS, 4 * EPS, 9)) == 1)
    assert php(10 * EPS) == 0


def test_smoothstep_is_c2_at_ends():
    h = 1e-4
    for u in (0.0, 1.0):
        assert cutoffs.smoothstep_d(u) == 0
        second = (cutoffs.smoothstep(u + h) - 2 * cutoffs.smoothstep(u) + cutoffs.smoothstep(u - h)) / h**2
        assert abs(second) < 1e-2


def test_weight_array_broadcasts():
    w = np.array([0.0, 0.25, 0.5])
    s = np.linspace(0, 0.2, 17)
    batch = cutoffs.psi_q(EPS, w).both(s[:, None])
    for k, wk in enumerate(w):
        single = cutoffs.psi_q(EPS, wk).both(s)
        np.testing.assert_array_equal(batch[0][:, k], single[0])
        np.testing.assert_array_equal(batch[1][:, k], single[1])
