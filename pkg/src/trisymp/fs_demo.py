"""The Fubini-Study primitives on the standard genus-1 trisection of CP^2.

Chart lam is {z_{lam-1} = 1} with polar coordinates (r_a, theta_a, r_b, theta_b)
for z_lam = r_a e^{i theta_a}, z_{lam+1} = r_b e^{i theta_b}. Chart indices are
cyclic in {1, 2, 3}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forms import FS, Chart, FormField, FormValue, fd_error, pullback, wedge

TORUS = Chart("torus", ("theta1", "theta2"), 1)
IDENTITY_TOL = 1e-10


def _cyc(lam: int) -> int:
    return (lam - 1) % 3 + 1


@dataclass(frozen=True)
class FsChartPoint:
    lam: int
    r_a: float
    theta_a: float
    r_b: float
    theta_b: float

    def __post_init__(self):
        if self.r_a < 0 or self.r_b < 0:
            raise ValueError("radii must be nonnegative")
        object.__setattr__(self, "lam", _cyc(self.lam))
        object.__setattr__(self, "theta_a", float(self.theta_a) % (2 * np.pi))
        object.__setattr__(self, "theta_b", float(self.theta_b) % (2 * np.pi))

    @property
    def coords(self) -> np.ndarray:
        return np.array([self.r_a, self.theta_a, self.r_b, self.theta_b])


def _phi(x, y):
    return 1.0 / (1.0 + x * x + y * y)


def _as_coords(point) -> np.ndarray:
    if isinstance(point, FsChartPoint):
        return point.coords
    return np.asarray(point, dtype=float)


def fs_primitive(point) -> FormValue:
    """alpha = phi(r_a, r_b) (2 r_a^2 dtheta_a + 2 r_b^2 dtheta_b), phi(x, y) = 1 / (1 + x^2 + y^2)."""
    p = _as_coords(point)
    ra, rb = p[..., 0], p[..., 2]
    ph = _phi(ra, rb)
    z = np.zeros_like(ra)
    return FormValue(1, np.stack([z, 2 * ph * ra**2, z, 2 * ph * rb**2], -1), FS)


def fs_omega(point) -> FormValue:
    """d of the primitive, computed by hand."""
    p = _as_coords(point)
    ra, rb = p[..., 0], p[..., 2]
    ph2 = _phi(ra, rb) ** 2
    dA_ra = 4 * ra * ph2 * (1 + rb**2)
    dA_rb = -4 * ra**2 * rb * ph2
    dB_ra = -4 * rb**2 * ra * ph2
    dB_rb = 4 * rb * ph2 * (1 + ra**2)
    z = np.zeros_like(ra)
    # basis order: ra^tha, ra^rb, ra^thb, tha^rb, tha^thb, rb^thb
    return FormValue(2, np.stack([dA_ra, z, dB_ra, -dA_rb, z, dB_rb], -1), FS)


def fs_field() -> FormField:
    lower = np.array([0.0, -np.inf, 0.0, -np.inf])
    return FormField(fs_primitive, fs_omega, FS, lower=lower, name="fs_primitive")


def coordinate_change(point) -> tuple[np.ndarray, np.ndarray]:
    """Chart lam coordinates to chart lam-1 coordinates and the Jacobian d(new)/d(old).

    s_{lam-1} = 1/r_b, psi_{lam-1} = -theta_b, s_lam = r_a/r_b, psi_lam = theta_a - theta_b.
    """
    p = _as_coords(point)
    ra, ta, rb, tb = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    if np.any(rb == 0):
        raise ValueError("coordinate change undefined where r_b = 0")
    new = np.stack([1 / rb, -tb, ra / rb, ta - tb], -1)
    J = np.zeros(p.shape[:-1] + (4, 4))
    J[..., 0, 2] = -1 / rb**2
    J[..., 1, 3] = -1.0
    J[..., 2, 0] = 1 / rb
    J[..., 2, 2] = -ra / rb**2
    J[..., 3, 1] = 1.0
    J[..., 3, 3] = -1.0
    return new, J


def fs_cocycle_difference(lam: int, point) -> FormValue:
    """alpha_lam minus the pullback of alpha_{lam-1} through the coordinate change.

    The primitive has the same formula in every chart, so lam only labels the
    chart; it is validated and kept for symmetry with the cocycle indexing.
    """
    _cyc(lam)
    new, J = coordinate_change(point)
    return fs_primitive(point) - pullback(fs_primitive(new), J, FS)


def stated_difference(point) -> FormValue:
    """The displayed closed form of the difference: 2 r_a^2 dtheta_a."""
    p = _as_coords(point)
    z = np.zeros(p.shape[:-1])
    return FormValue(1, np.stack([z, 2 * p[..., 0] ** 2, z, z], -1), FS)


def derived_difference(point) -> FormValue:
    """What the difference simplifies to: phi (2 + 2 r_a^2 + 2 r_b^2) dtheta_b = 2 dtheta_b."""
    p = _as_coords(point)
    z = np.zeros(p.shape[:-1])
    return FormValue(1, np.stack([z, z, z, 2 + z], -1), FS)


def random_overlap_points(n: int = 1000, seed: int = 0, r_range=(0.05, 3.0)) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = rng.uniform(*r_range, size=(n, 2))
    th = rng.uniform(0, 2 * np.pi, size=(n, 2))
    return np.stack([r[:, 0], th[:, 0], r[:, 1], th[:, 1]], -1)


def difference_residuals(n: int = 1000, seed: int = 0) -> dict:
    """Max residual of the pulled-back difference against both closed forms, per chart."""
    pts = random_overlap_points(n, seed)
    out = {}
    for lam in (1, 2, 3):
        diff = fs_cocycle_difference(lam, pts)
        out[lam] = {
            "vs_2r^2dtheta_a": float(np.abs(diff.coeffs - stated_difference(pts).coeffs).max()),
            "vs_2dtheta_b": float(np.abs(diff.coeffs - derived_difference(pts).coeffs).max()),
        }
    return out


def difference_field(lam: int) -> FormField:
    def der(p):
        p = np.asarray(p, float)
        # d(alpha_lam) - pullback of d(alpha_{lam-1}); both are omega_FS
        new, J = coordinate_change(p)
        return fs_omega(p) - pullback(fs_omega(new), J, FS)

    return FormField(lambda p: fs_cocycle_difference(lam, p), der, FS,
                     lower=np.array([0.0, -np.inf, 0.0, -np.inf]), name=f"fs_difference_{lam}")


def difference_closedness(lam: int, n: int = 20, seed: int = 1, h: float = 1e-5) -> float:
    """Largest |d(difference)| by central differences over random overlap points."""
    from .forms import exterior_derivative_fd

    pts = random_overlap_points(n, seed, (0.3, 2.0))
    fld = difference_field(lam)
    return float(max(np.abs(exterior_derivative_fd(fld, p, h).coeffs).max() for p in pts))


def omega_chart_independence(n: int = 50, seed: int = 2) -> float:
    """omega_FS in chart lam against the pullback of omega_FS from chart lam-1."""
    pts = random_overlap_points(n, seed)
    new, J = coordinate_change(pts)
    return float(np.abs(fs_omega(pts).coeffs - pullback(fs_omega(new), J, FS).coeffs).max())


def difference_periods(lam: int, point=(0.7, 0.3, 1.3, 2.1), n: int = 2048) -> dict:
    """Integrals of the difference over the theta_a and theta_b circles through a point."""
    p = np.asarray(point, float)
    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    out = {}
    for name, idx in (("theta_a", 1), ("theta_b", 3)):
        pts = np.repeat(p[None], n, axis=0)
        pts[:, idx] = th
        coef = fs_cocycle_difference(lam, pts).coeffs[:, idx]
        out[name] = float(coef.mean() * 2 * np.pi)
    return out


def fs_cocycle_entries() -> list[FormValue]:
    """(2 dtheta_1, 2 dtheta_2, -2 dtheta_1 - 2 dtheta_2) on the central torus."""
    b1 = FormValue(1, np.array([2.0, 0.0]), TORUS)
    b2 = FormValue(1, np.array([0.0, 2.0]), TORUS)
    return [b1, b2, -(b1 + b2)]


def fs_transversality() -> dict:
    b = fs_cocycle_entries()
    dens = {f"beta{i + 1}^beta{(i + 1) % 3 + 1}": float(wedge(b[i], b[(i + 1) % 3]).top()) for i in range(3)}
    vals = list(dens.values())
    total = b[0] + b[1] + b[2]
    return {"densities": dens, "equal": bool(max(vals) - min(vals) == 0.0), "positive": bool(min(vals) > 0),
            "cocycle_sum": float(np.abs(total.coeffs).max())}


def fs_table(n: int = 1000, seed: int = 0) -> tuple[str, bool]:
    """Printable table of entries, densities and identity residuals; ok when every
    verified identity is within IDENTITY_TOL."""
    entries = fs_cocycle_entries()
    tr = fs_transversality()
    res = difference_residuals(n, seed)
    fd = {lam: fd_error(fs_field(), np.array([0.8, 0.4, 1.1, 2.0]) * lam) for lam in (1, 2, 3)}
    indep = omega_chart_independence()
    lines = ["entry    dtheta1  dtheta2"]
    for i, e in enumerate(entries):
        lines.append(f"beta{i + 1}    {e.coeffs[0]:+7.3f}  {e.coeffs[1]:+7.3f}")
    lines.append("")
    for k, v in tr["densities"].items():
        lines.append(f"{k:<12} {v:+.6g} dtheta1^dtheta2")
    lines.append(f"beta1+beta2+beta3 max coeff {tr['cocycle_sum']:.3g}")
    lines.append("")
    lines.append("chart  |diff - 2 dtheta_b|  |diff - 2 r_a^2 dtheta_a|")
    for lam in (1, 2, 3):
        lines.append(f"{lam:>5}  {res[lam]['vs_2dtheta_b']:19.3e}  {res[lam]['vs_2r^2dtheta_a']:24.3e}")
    lines.append(f"omega_FS chart independence {indep:.3e}")
    lines.append(f"d(primitive) fd residual {max(fd.values()):.3e}")
    ok = (tr["equal"] and tr["positive"] and tr["cocycle_sum"] == 0.0 and indep <= IDENTITY_TOL
          and all(r["vs_2dtheta_b"] <= IDENTITY_TOL for r in res.values()))
    return "\n".join(lines), bool(ok)
