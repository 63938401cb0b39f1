"""C^2 cutoff profiles built from the quintic smoothstep."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


def smoothstep(u):
    """S(u) = 6u^5 - 15u^4 + 10u^3 on [0, 1], clamped outside; S', S'' vanish at both ends."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    return u**3 * (10 - 15 * u + 6 * u * u)


def smoothstep_d(u):
    u = np.asarray(u, dtype=float)
    inside = (u > 0) & (u < 1)
    return np.where(inside, 30 * u * u * (1 - u) ** 2, 0.0)


def weighted_step(u, w=0.0):
    """(1 - w) S + w S^2: still monotone from 0 to 1 with the same flat ends.

    ``w`` may be an array broadcasting against ``u``, one weight per profile.
    """
    S = smoothstep(u)
    return (1 - w) * S + w * S * S


def weighted_step_d(u, w=0.0):
    return smoothstep_d(u) * (1 - w + 2 * w * smoothstep(u))


@dataclass(frozen=True)
class CutoffProfile:
    """A named C^2 profile with value and derivative.

    ``knots`` are the breakpoints of the piecewise definition, ``values`` the
    profile there. ``monotone`` lists (lo, hi, sign) intervals on which the
    derivative has the given strict sign in the interior.
    """

    name: str
    func: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    knots: tuple[float, ...]
    values: tuple[float, ...]
    support: tuple[float, float]
    monotone: tuple[tuple[float, float, int], ...] = ()

    def __call__(self, s):
        return self.func(np.asarray(s, dtype=float))[0]

    def deriv(self, s):
        return self.func(np.asarray(s, dtype=float))[1]

    def both(self, s):
        return self.func(np.asarray(s, dtype=float))


def _ramp(s, a, b, w=0.0):
    """0 before a, 1 after b."""
    u = (s - a) / (b - a)
    return weighted_step(u, w), weighted_step_d(u, w) / (b - a)


def Phi(eps: float) -> CutoffProfile:
    """1 - s up to 2 eps, bent down to 0 on [2 eps, 3 eps], 0 afterwards."""

    def f(s):
        r, dr = _ramp(s, 2 * eps, 3 * eps)
        v = (1 - s) * (1 - r)
        dv = -(1 - r) - (1 - s) * dr
        return v, dv

    return CutoffProfile("Phi", f, (2 * eps, 3 * eps, 4 * eps), (1 - 2 * eps, 0.0, 0.0),
                         (-np.inf, 3 * eps), ((2 * eps, 3 * eps, -1),))


def psi_q(eps: float, w: float = 0.0) -> CutoffProfile:
    """0 for s <= 2 eps, 1 for s >= 5 eps, increasing in between."""

    def f(s):
        return _ramp(s, 2 * eps, 5 * eps, w)

    return CutoffProfile("psi_q", f, (2 * eps, 5 * eps), (0.0, 1.0), (2 * eps, np.inf), ((2 * eps, 5 * eps, 1),))


def phi_p(eps: float, depth: float, w: float = 0.0) -> CutoffProfile:
    """Collar profile of a transverse-annulus form: rises on [eps, 2 eps], 1 on [2 eps, 4 eps],
    falls to 0 at the collar depth."""

    def f(s):
        up, dup = _ramp(s, eps, 2 * eps, w)
        down, ddown = _ramp(s, 4 * eps, depth, w)
        return up * (1 - down), dup * (1 - down) - up * ddown

    return CutoffProfile("phi_p", f, (eps, 2 * eps, 4 * eps, depth), (0.0, 1.0, 1.0, 0.0), (eps, depth),
                         ((eps, 2 * eps, 1), (4 * eps, depth, -1)))


def phi_B(R1: float, R2: float) -> CutoffProfile:
    """1 for R <= R1, 0 for R >= R2 (argument is the squared radius)."""

    def f(R):
        r, dr = _ramp(R, R1, R2)
        return 1 - r, -dr

    return CutoffProfile("phi_B", f, (R1, R2), (1.0, 0.0), (-np.inf, R2), ((R1, R2, -1),))


def annulus_phi1(width: float) -> CutoffProfile:
    """Bump (1 - (t/width)^2)^3 on [-width, width]."""

    def f(t):
        u = t / width
        inside = np.abs(u) < 1
        base = np.where(inside, 1 - u * u, 0.0)
        return base**3, np.where(inside, -6 * u * base**2 / width, 0.0)

    return CutoffProfile("phi_1", f, (-width, 0.0, width), (0.0, 1.0, 0.0), (-width, width),
                         ((-width, 0.0, 1), (0.0, width, -1)))


def annulus_phi2(eps: float, width: float) -> CutoffProfile:
    """0 for s <= eps, 1 on [2 eps, 1 - width], 0 for s >= 1 + width."""

    def f(s):
        up, dup = _ramp(s, eps, 2 * eps)
        down, ddown = _ramp(s, 1 - width, 1 + width)
        return up * (1 - down), dup * (1 - down) - up * ddown

    return CutoffProfile("phi_2", f, (eps, 2 * eps, 1 - width, 1 + width), (0.0, 1.0, 1.0, 0.0), (eps, 1 + width),
                         ((eps, 2 * eps, 1), (1 - width, 1 + width, -1)))
