"""Four-dimensional forms on the spine and their positivity checks.

Sector lambda uses the collar chart (t, s, x, y) with t = phi_lambda and
s = phi_{lambda-1}; dt^ds^dx^dy is the positive volume in every sector.
Surface data enters through per-sample covectors: face samples carry the
constant discrete covectors (f = 0 there), zero-chart samples carry the Morse
model beta_1 = a(x dx - y dy), beta_2 = a(y dx + x dy).
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import cutoffs, dec
from .cocycle import CocycleTriple, SignAssignment, assign_signs, morse_scale, wedge_density
from .forms import ANNULUS, BASE, COLLAR, SLICE, FormField, FormValue, d, wedge, wedge_abs, wedge_all
from .foliation import TraceError, cover_complement_of_B, transverse_path

STRICT_REL = 1e-10
NONNEG_TOL = 1e-10
CASES = (0, 1, 2, 3, 4)
INEQUALITIES = ("dalpha^2", "dt^alpha^dalpha", "-dt^(alpha-3beta)^dalpha", "zeta^alphahat^dalphahat")


class InfeasibleBudget(RuntimeError):
    def __init__(self, message, best=None, report=None):
        super().__init__(message)
        self.best = best
        self.report = report


# ---------------------------------------------------------------- coordinates

_DPHI = {1: np.array([0.0, 1.0]), 2: np.array([-1.0, -1.0]), 3: np.array([1.0, 0.0])}


def _cyc(lam: int) -> int:
    return (lam - 1) % 3 + 1


def phi_coords(p1, p2):
    """(phi_1, phi_2, phi_3) = (p2, -p1 - p2, p1)."""
    p1, p2 = np.asarray(p1, float), np.asarray(p2, float)
    return p2, -p1 - p2, p1


def sector_coords(lam: int, p1, p2):
    """(t, s) = (phi_lam, phi_{lam-1})."""
    phi = phi_coords(p1, p2)
    return phi[_cyc(lam) - 1], phi[_cyc(lam - 1) - 1]


def in_handlebody(lam: int, p1, p2, tol: float = 1e-12):
    """H_lam = {phi_{lam-1} >= 0, phi_lam = 0}."""
    t, s = sector_coords(lam, p1, p2)
    return (s >= -tol) & (np.abs(t) <= tol)


def in_sector(lam: int, p1, p2):
    """Z_lam = {max(-phi_{lam-1}, phi_lam) <= 0}."""
    t, s = sector_coords(lam, p1, p2)
    return np.maximum(-s, t) <= 0


def collar_jacobian(lam: int) -> np.ndarray:
    """d(t, s, x, y) / d(p1, p2, x, y) for sector lam."""
    J = np.zeros((4, 4))
    J[0, :2] = _DPHI[_cyc(lam)]
    J[1, :2] = _DPHI[_cyc(lam - 1)]
    J[2, 2] = J[3, 3] = 1.0
    return J


# ---------------------------------------------------------------- constants

@dataclass(frozen=True)
class ConstantBudget:
    epsilon: float
    delta: float
    C: float
    radii: tuple[float, float, float] = (0.01, 0.02, 0.04)
    depth_factor: float = 10.0

    def __post_init__(self):
        R0, R1, R2 = self.radii
        if not (0 < R0 < R1 < R2):
            raise ValueError(f"radii must satisfy 0 < R0 < R1 < R2, got {self.radii}")
        if self.epsilon <= 0 or self.delta <= 0 or self.C <= 0:
            raise ValueError("epsilon, delta and C must be positive")
        if self.depth_factor <= 8:
            raise ValueError("collar depth must exceed 8 epsilon")

    @property
    def depth(self) -> float:
        return self.depth_factor * self.epsilon

    def with_(self, **kw) -> "ConstantBudget":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["radii"] = list(self.radii)
        out["depth"] = self.depth
        return out


@dataclass(frozen=True)
class GridSpec:
    n_s: int = 9
    n_t: int = 9
    polar_levels: int = 6
    polar_angles: int = 4

    def s_values(self, budget: ConstantBudget) -> tuple[np.ndarray, np.ndarray]:
        e = budget.epsilon
        s, case = [], []
        for k in range(4):
            s.append(np.linspace(k * e, (k + 1) * e, self.n_s))
            case.append(np.full(self.n_s, k))
        # the last case stops short of the collar depth, where every cutoff is flat
        s.append(np.linspace(4 * e, budget.depth, self.n_s + 1)[:-1])
        case.append(np.full(self.n_s, 4))
        return np.concatenate(s), np.concatenate(case)

    def t_values(self, budget: ConstantBudget) -> np.ndarray:
        return np.linspace(-budget.epsilon, budget.epsilon, self.n_t)

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------- assembly

@dataclass(frozen=True)
class ZeroChart:
    vertex: int
    a: float  # Morse scale
    sigma: int  # value of f near the zero
    orient: int  # sign of beta_1 ^ beta_2


@dataclass(frozen=True, eq=False)
class SpineAssembly:
    triple: CocycleTriple
    signs: SignAssignment
    strips: np.ndarray  # (3, k, F, 2) PD strip covectors per sector, zero-padded; kappa beta_{lam+1} last
    kappa: float
    charts: tuple[ZeroChart, ...]
    b_faces: np.ndarray  # faces replaced by zero charts
    default_radii: tuple[float, float, float]
    bumps: tuple = ()
    transverse: tuple = ()  # (q, p, SurfacePath or error string)

    @property
    def surface(self):
        return self.triple.surface

    @property
    def n_strips(self) -> int:
        return self.strips.shape[1]

    def strip_weights(self) -> np.ndarray:
        k = self.n_strips
        return 0.5 * np.arange(k) / max(k - 1, 1)


def star_inradius(surface, vertex: int) -> float:
    """Distance from a vertex to the far edges of its star."""
    best = np.inf
    for f, k in surface.vertex_faces()[vertex]:
        e = surface.face_edges[f, (k + 1) % 3]
        best = min(best, 2 * surface.areas[f] / np.linalg.norm(e))
    return float(best)


def default_radii(triple: CocycleTriple) -> tuple[float, float, float]:
    if not triple.zero_set:
        return (0.01, 0.02, 0.04)
    r = min(star_inradius(triple.surface, z.vertex) for z in triple.zero_set)
    return ((0.25 * r) ** 2, (0.5 * r) ** 2, (0.75 * r) ** 2)


def build_assembly(triple: CocycleTriple, signs: SignAssignment | None = None, kappa: float | None = None,
                   seed: int = 0, bumps=None, with_transverse: bool = True) -> SpineAssembly:
    """Cover, zero charts and sign data for the spine forms."""
    s = triple.surface
    zeros = list(triple.zero_set)
    signs = assign_signs(zeros, seed, s) if signs is None else signs
    b_faces = dec.zero_faces(s, zeros) if zeros else np.zeros(s.n_faces, bool)
    c1 = triple.covector(1)
    if kappa is None:
        kappa = 1.0 if zeros else 0.0
    if bumps is None:
        # sector lam needs strips positive against beta_lam
        bumps = tuple(tuple(cover_complement_of_B(s, triple.covector(lam), 0.0, zeros,
                                                  forbid=b_faces if zeros else None)) for lam in (1, 2, 3))
    per = []
    for lam in (1, 2, 3):
        st = [b.covectors(s) for b in bumps[lam - 1]]
        if kappa > 0:
            st.append(kappa * triple.covector(lam + 1))
        per.append(st)
    k = max(len(st) for st in per)
    strips = np.zeros((3, k, s.n_faces, 2))
    for lam, st in enumerate(per):
        for i, c in enumerate(st):
            # the kappa strip always takes the last slot
            j = k - 1 if (kappa > 0 and i == len(st) - 1) else i
            strips[lam, j] = c
    dens = wedge_density(c1, triple.covector(2))
    orient = 1 if np.median(dens) >= 0 else -1
    charts = tuple(ZeroChart(z.vertex, morse_scale(triple, z), int(signs.value[z.vertex]), orient) for z in zeros)
    trans = []
    if with_transverse:
        zmap = {z.vertex: z for z in zeros}
        for q, p in signs.pairing:
            try:
                trans.append((q, p, transverse_path(s, c1, zmap[q], zmap[p])))
            except TraceError as exc:
                trans.append((q, p, str(exc)))
    return SpineAssembly(triple, signs, strips, float(kappa), charts, b_faces, default_radii(triple),
                         tuple(bumps), tuple(trans))


# ---------------------------------------------------------------- surface data

@dataclass(frozen=True, eq=False)
class SurfaceData:
    """Per-sample surface quantities; every array shares the leading batch shape."""

    beta: np.ndarray  # (..., 3, 2)
    f: np.ndarray
    df: np.ndarray  # (..., 2)
    strips: np.ndarray  # (..., 3, k, 2)
    muB: np.ndarray  # (..., 2) covector of phi_B f (x dy - y dx)
    dmuB: np.ndarray  # coefficient of d mu_B against dx^dy
    R: np.ndarray
    face: np.ndarray  # face index, -1 on charts
    chart: np.ndarray  # chart index, -1 on faces

    def expand(self, n: int) -> "SurfaceData":
        """Append n singleton axes after the batch axis (for grid broadcasting)."""
        def e(a, trailing):
            shape = a.shape[: a.ndim - trailing] + (1,) * n + a.shape[a.ndim - trailing:]
            return a.reshape(shape)
        return SurfaceData(e(self.beta, 2), e(self.f, 0), e(self.df, 1), e(self.strips, 3), e(self.muB, 1),
                           e(self.dmuB, 0), e(self.R, 0), e(self.face, 0), e(self.chart, 0))


def _concat(parts: list[SurfaceData]) -> SurfaceData:
    return SurfaceData(*(np.concatenate([getattr(p, k) for p in parts]) for k in SurfaceData.__dataclass_fields__))


def face_data(asm: SpineAssembly, faces) -> SurfaceData:
    faces = np.asarray(faces, dtype=int)
    n = len(faces)
    k = asm.n_strips
    return SurfaceData(
        np.transpose(asm.triple.covectors[:, faces], (1, 0, 2)),
        np.zeros(n), np.zeros((n, 2)),
        np.transpose(asm.strips[:, :, faces], (2, 0, 1, 3)),
        np.zeros((n, 2)), np.zeros(n), np.full(n, np.inf), faces, -np.ones(n, dtype=int),
    )


def chart_data(asm: SpineAssembly, j: int, xy, radii) -> SurfaceData:
    ch = asm.charts[j]
    xy = np.asarray(xy, float).reshape(-1, 2)
    x, y = xy[:, 0], xy[:, 1]
    R = x * x + y * y
    pB, dpB = cutoffs.phi_B(radii[1], radii[2]).both(R)
    f = ch.sigma * pB
    df = (ch.sigma * dpB * 2)[:, None] * xy
    g = f * pB
    gR = 2 * ch.sigma * pB * dpB
    b1 = ch.a * np.stack([x, -y], axis=1)
    b2 = ch.orient * ch.a * np.stack([y, x], axis=1)
    beta = np.stack([b1, b2, -b1 - b2], axis=1)
    strips = np.zeros((len(x), 3, asm.n_strips, 2))
    if asm.kappa > 0:
        for lam in range(3):
            strips[:, lam, -1] = asm.kappa * beta[:, (lam + 1) % 3]
    n = len(x)
    return SurfaceData(beta, f, df, strips, g[:, None] * np.stack([-y, x], axis=1), 2 * g + 2 * R * gR, R,
                       -np.ones(n, dtype=int), np.full(n, j))


def polar_points(radii, levels: int = 6, angles: int = 4) -> np.ndarray:
    """Centre plus ``levels`` squared-radius levels up to R2, ``angles`` directions each."""
    R0, R1, R2 = radii
    base = [R0 / 2, R0, (R0 + R1) / 2, R1, (R1 + R2) / 2, R2]
    Rs = np.array(base[:levels] if levels <= 6 else np.linspace(R0 / 2, R2, levels))
    th = np.pi / 8 + np.arange(angles) * 2 * np.pi / angles
    pts = [np.zeros(2)]
    for R in Rs:
        for a in th:
            pts.append(np.sqrt(R) * np.array([np.cos(a), np.sin(a)]))
    return np.array(pts)


def surface_samples(asm: SpineAssembly, radii, grid: GridSpec = GridSpec()) -> tuple[SurfaceData, list[str]]:
    # zero-star faces stay in as discrete samples: outside the Morse disk only the kappa strip covers them
    faces = np.arange(asm.surface.n_faces)
    parts = [face_data(asm, faces)]
    labels = [f"{'bface' if asm.b_faces[f] else 'face'}{f}" for f in faces]
    pts = polar_points(radii, grid.polar_levels, grid.polar_angles)
    for j, ch in enumerate(asm.charts):
        parts.append(chart_data(asm, j, pts, radii))
        labels += [f"zero{ch.vertex}:{i}" for i in range(len(pts))]
    return _concat(parts), labels


# ---------------------------------------------------------------- profiles

@dataclass(frozen=True)
class Profiles:
    Phi: cutoffs.CutoffProfile
    psi: tuple
    php: tuple
    # the same per-strip profiles evaluated in one call, the weight array broadcasting last
    psi_all: cutoffs.CutoffProfile | None = None
    php_all: cutoffs.CutoffProfile | None = None

    def mu_H_coeffs(self, s):
        """Per-strip coefficient c_i(s) = phi_p,i(s) - psi_q,i(s) and its derivative, stacked last."""
        s = np.asarray(s, float)
        if not self.php:
            z = np.zeros(s.shape + (0,))
            return z, z, z, z
        pv, pd = self.php_all.both(s[..., None])
        qv, qd = self.psi_all.both(s[..., None])
        return pv, pd, qv, qd


@lru_cache(maxsize=64)
def _profiles(eps: float, depth: float, weights: tuple) -> Profiles:
    w = np.array(weights)
    return Profiles(cutoffs.Phi(eps), tuple(cutoffs.psi_q(eps, x) for x in weights),
                    tuple(cutoffs.phi_p(eps, depth, x) for x in weights),
                    cutoffs.psi_q(eps, w), cutoffs.phi_p(eps, depth, w))


def profiles(asm: SpineAssembly, budget: ConstantBudget) -> Profiles:
    return _profiles(budget.epsilon, budget.depth, tuple(np.round(asm.strip_weights(), 12)))


# ---------------------------------------------------------------- collar forms

def _one(dt, ds, surf, chart=COLLAR) -> FormValue:
    """1-form with dt, ds coefficients and a surface covector."""
    dt, ds, sx, sy = np.broadcast_arrays(dt, ds, surf[..., 0], surf[..., 1])
    return FormValue(1, np.stack([dt, ds, sx, sy], -1), chart)


def _surf1(v, chart=COLLAR) -> FormValue:
    z = np.zeros(v.shape[:-1])
    return _one(z, z, v, chart)


def collar_forms(sd: SurfaceData, s, t, lam: int, budget: ConstantBudget | None, prof: Profiles | None,
                 extended: bool = True) -> dict[str, FormValue]:
    """All forms of sector lam at collar points.

    ``extended=False`` gives the neighbourhood-of-Sigma forms (Phi = 1 - s,
    no mu_H, no mu_B): omega_0 and mu_Sigma as first defined.
    """
    s = np.asarray(s, float)
    t = np.asarray(t, float)
    i, j = _cyc(lam) - 1, _cyc(lam + 1) - 1
    b_l, b_l1 = sd.beta[..., i, :], sd.beta[..., j, :]
    f = sd.f
    zero = np.zeros(np.broadcast_shapes(f.shape, s.shape, t.shape))
    bt_l = _one(zero, f + zero, b_l + s[..., None] * sd.df)
    bt_l1 = _one(f + zero, zero, b_l1 + t[..., None] * sd.df)
    dt, ds = d("t"), d("s")
    dxdy = wedge(d("x"), d("y"))
    if extended:
        Phi, dPhi = prof.Phi.both(s)
    else:
        Phi, dPhi = 1 - s, -np.ones_like(s)
    mu_sigma = bt_l.scale(t + 2) + bt_l1.scale(Phi + zero)
    dmu_sigma = wedge(dt, bt_l) + wedge(ds, bt_l1).scale(dPhi + zero)
    out = {"beta_tilde": bt_l, "beta_tilde_next": bt_l1, "mu_sigma": mu_sigma, "dmu_sigma": dmu_sigma}
    if not extended:
        return out
    P = sd.strips[..., i, :, :]
    pv, pd, qv, qd = prof.mu_H_coeffs(s)
    c, cd = pv - qv, pd - qd
    M = (c[..., None] * P).sum(-2)
    Q = (cd[..., None] * P).sum(-2)
    Mq = (-qv[..., None] * P).sum(-2)
    Qq = (-qd[..., None] * P).sum(-2)
    mu_H, dmu_H = _surf1(M + zero[..., None]), wedge(ds, _surf1(Q + zero[..., None]))
    mu_B, dmu_B = _surf1(sd.muB + zero[..., None]), dxdy.scale(sd.dmuB + zero)
    k = 1.0 / budget.C
    alpha = mu_sigma + mu_H.scale(k) + mu_B.scale(budget.delta)
    dalpha = dmu_sigma + dmu_H.scale(k) + dmu_B.scale(budget.delta)
    out.update(mu_H=mu_H, dmu_H=dmu_H, mu_q=_surf1(Mq + zero[..., None]), dmu_q=wedge(ds, _surf1(Qq + zero[..., None])),
               mu_p=_surf1((pv[..., None] * P).sum(-2) + zero[..., None]),
               dmu_p=wedge(ds, _surf1((pd[..., None] * P).sum(-2) + zero[..., None])),
               mu_B=mu_B, dmu_B=dmu_B, alpha=alpha, dalpha=dalpha)
    return out


def _point_sd(asm, model, xy, radii) -> SurfaceData:
    kind, idx = model
    n = int(np.prod(np.shape(xy)[:-1])) if np.ndim(xy) > 1 else 1
    if kind == "face":
        return face_data(asm, np.full(n, idx))
    return chart_data(asm, idx, xy, radii)


def alpha_field(asm: SpineAssembly, lam: int, budget: ConstantBudget, model=("face", 0),
                name: str = "alpha") -> FormField:
    """A collar form as a FormField over points (t, s, x, y); ``name`` selects the form and
    its analytic derivative (alpha, mu_sigma, mu_H, mu_q, mu_p, mu_B, beta_tilde)."""
    prof = profiles(asm, budget)
    dname = {"alpha": "dalpha", "mu_sigma": "dmu_sigma", "mu_H": "dmu_H", "mu_q": "dmu_q", "mu_p": "dmu_p",
             "mu_B": "dmu_B", "beta_tilde": None}[name]

    def forms(p):
        p = np.asarray(p, float)
        flat = p.reshape(-1, 4)
        sd = _point_sd(asm, model, flat[:, 2:], budget.radii)
        return collar_forms(sd, flat[:, 1], flat[:, 0], lam, budget, prof), p.shape[:-1]

    def ev(p):
        F, shape = forms(p)
        v = F[name]
        return FormValue(v.degree, v.coeffs.reshape(shape + v.coeffs.shape[-1:]), COLLAR)

    def der(p):
        F, shape = forms(p)
        v = F[dname] if dname else FormValue(2, np.zeros(F[name].coeffs.shape[:-1] + (6,)), COLLAR)
        return FormValue(2, v.coeffs.reshape(shape + (6,)), COLLAR)

    return FormField(ev, der, COLLAR, name=f"{name}_{lam}")


# ---------------------------------------------------------------- forms on the base chart

def base_forms(sd: SurfaceData, p1, p2) -> dict:
    """beta_tilde_lam = beta_lam + d(phi_{lam-1} f) on Sigma x D^2 in (p1, p2, x, y)."""
    p1, p2 = np.asarray(p1, float), np.asarray(p2, float)
    phi = phi_coords(p1, p2)
    out = {}
    for lam in (1, 2, 3):
        k = _cyc(lam - 1)
        dp = _DPHI[k]
        ph = phi[k - 1]
        surf = sd.beta[..., lam - 1, :] + ph[..., None] * sd.df
        out[lam] = _one(sd.f * dp[0], sd.f * dp[1], surf, BASE)
    return out


def omega0_base(sd: SurfaceData, p1, p2, presentation: int | None = None) -> FormValue:
    """omega_0 = dp2 ^ bt_1 - dp1 ^ bt_2, or dt ^ bt_lam - ds ^ bt_{lam+1} for a presentation lam."""
    bt = base_forms(sd, p1, p2)
    if presentation is None:
        return wedge(d("p2", BASE), bt[1]) - wedge(d("p1", BASE), bt[2])
    lam = _cyc(presentation)
    dt = _one(_DPHI[lam][0], _DPHI[lam][1], np.zeros(2), BASE)
    ds = _one(_DPHI[_cyc(lam - 1)][0], _DPHI[_cyc(lam - 1)][1], np.zeros(2), BASE)
    return wedge(dt, bt[lam]) - wedge(ds, bt[_cyc(lam + 1)])


def mu_sigma_base(sd: SurfaceData, p1, p2, lam: int) -> FormValue:
    """(t + 2) bt_lam - (s - 1) bt_{lam+1} with t = phi_lam, s = phi_{lam-1}."""
    bt = base_forms(sd, p1, p2)
    t, s = sector_coords(lam, p1, p2)
    return bt[_cyc(lam)].scale(t + 2) - bt[_cyc(lam + 1)].scale(s - 1)


def zeta_base(lam: int) -> FormValue:
    a, b = _DPHI[_cyc(lam)], _DPHI[_cyc(lam - 1)]
    return _one(a[0] - b[0], a[1] - b[1], np.zeros(2), BASE)


def to_base(form: FormValue, lam: int) -> FormValue:
    from .forms import pullback
    return pullback(form, collar_jacobian(lam), BASE)


def alpha_hat(asm, budget, sd: SurfaceData, p1, p2, lam: int, piece: str) -> FormValue:
    """The boundary primitive of Y_lam on one of its pieces, in base coordinates.

    piece "H" is alpha_lam over nu(H_lam), "Hprev" is alpha_{lam-1} - 3 bt_{lam-1}
    over nu(H_{lam-1}), "Sigma" is mu_Sigma,lam + delta mu_B.
    """
    prof = profiles(asm, budget)
    if piece == "H":
        t, s = sector_coords(lam, p1, p2)
        return to_base(collar_forms(sd, s, t, lam, budget, prof)["alpha"], lam)
    if piece == "Hprev":
        m = _cyc(lam - 1)
        t, s = sector_coords(m, p1, p2)
        F = collar_forms(sd, s, t, m, budget, prof)
        return to_base(F["alpha"] - F["beta_tilde"].scale(3.0), m)
    if piece == "Sigma":
        mu = mu_sigma_base(sd, p1, p2, lam)
        return mu + _surf1(sd.muB, BASE).scale(budget.delta)
    raise ValueError(f"unknown piece {piece!r}")


# ---------------------------------------------------------------- inequality suite

@dataclass
class VerificationReport:
    budget: dict
    grid: dict
    entries: list  # dicts: lambda, case, inequality, region, min, max, scale, n, strict, nonneg, argmin
    omega0: dict
    passed: bool
    failing: list
    samples: list | None = None  # rows for CSV export

    def min_by(self, **match) -> float:
        vals = [e["min"] for e in self.entries if all(e[k] == v for k, v in match.items())]
        return float(min(vals)) if vals else float("nan")

    def cases_failing(self) -> list[int]:
        return sorted({e["case"] for e in self.entries if not e["strict"]})

    def margin(self) -> float:
        """Smallest normalised minimum minus the strictness threshold."""
        vals = [e["min_rel"] - STRICT_REL for e in self.entries]
        return float(min(vals)) if vals else 0.0

    def to_dict(self) -> dict:
        return {"budget": self.budget, "grid": self.grid, "entries": self.entries, "omega0": self.omega0,
                "pass": self.passed, "failing": self.failing, "margin": self.margin()}

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=1, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "case", "region", "sample", "t", "s", "x", "y"] + list(INEQUALITIES))
        for row in self.samples or []:
            w.writerow([f"{v:.10g}" if isinstance(v, float) else v for v in row])
        return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def _top(F: FormValue) -> np.ndarray:
    return F.top()


def sector_values(asm, budget, grid, sd: SurfaceData, lam: int) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Top-degree coefficients (against dt^ds^dx^dy) on the (surface, s, t) grid, each with the
    pointwise sum of absolute products entering it as scale."""
    prof = profiles(asm, budget)
    s, case = grid.s_values(budget)
    t = grid.t_values(budget)
    S = s[None, :, None]
    T = t[None, None, :]
    F = collar_forms(sd.expand(2), S, T, lam, budget, prof)
    a, da, bt = F["alpha"], F["dalpha"], F["beta_tilde"]
    a3 = a - bt.scale(3.0)
    dt, ds = d("t"), d("s")
    ab = lambda *f: wedge_abs(*f).coeffs[..., 0]
    return {
        "dalpha^2": (_top(wedge(da, da)), ab(da, da)),
        "dt^alpha^dalpha": (_top(wedge_all(dt, a, da)), ab(dt, a, da)),
        "-dt^(alpha-3beta)^dalpha": (-_top(wedge_all(dt, a3, da)), ab(dt, a3, da)),
        "zeta^Sigma": (_top(wedge_all(dt - ds, a, da)), ab(dt - ds, a, da)),
    }


def _rel(v, scale):
    return np.where(scale > 0, v / np.where(scale > 0, scale, 1.0), np.where(v > 0, 1.0, np.where(v < 0, -1.0, 0.0)))


def inequality_suite(asm: SpineAssembly, budget: ConstantBudget, grid: GridSpec = GridSpec(),
                     keep_samples: bool = False) -> VerificationReport:
    """Minima of the four spine inequalities per sector, case and region (tube R <= R0 or outer).

    A value is strict when it exceeds STRICT_REL times the sum of absolute
    products making up the same coefficient, so rounding cannot fake a sign.
    """
    sd, labels = surface_samples(asm, budget.radii, grid)
    s, case = grid.s_values(budget)
    t = grid.t_values(budget)
    n_surf = len(labels)
    tube = np.broadcast_to((sd.R <= budget.radii[0])[:, None, None], (n_surf, len(s), len(t)))
    cases = np.broadcast_to(case[None, :, None], tube.shape)
    vals = {lam: sector_values(asm, budget, grid, sd, lam) for lam in (1, 2, 3)}
    for lam in (1, 2, 3):
        # Y_lam: coorientation dt - ds over nu(Sigma) (case 0), dt over nu(H_lam),
        # -dt over nu(H_{lam-1}) where the primitive is alpha_{lam-1} - 3 bt_{lam-1}
        pv, ps = vals[_cyc(lam - 1)]["-dt^(alpha-3beta)^dalpha"]
        cv, cs = vals[lam]["dt^alpha^dalpha"]
        zv, zs = vals[lam]["zeta^Sigma"]
        use_prev = _rel(pv, ps) < _rel(cv, cs)
        v = np.where(cases == 0, zv, np.where(use_prev, pv, cv))
        sc = np.where(cases == 0, zs, np.where(use_prev, ps, cs))
        vals[lam]["zeta^alphahat^dalphahat"] = (v, sc)
    entries, failing = [], []
    for lam in (1, 2, 3):
        for name in INEQUALITIES:
            v, sc = vals[lam][name]
            r = _rel(v, sc)
            for k in CASES:
                for region, mask in (("outer", ~tube), ("tube", tube)):
                    m = mask & (cases == k)
                    if not m.any():
                        continue
                    idx = np.unravel_index(np.argmin(np.where(m, r, np.inf)), v.shape)
                    rmin = float(r[idx])
                    strict = bool(rmin >= STRICT_REL)
                    e = {"lambda": lam, "case": k, "inequality": name, "region": region,
                         "min": float(v[m].min()), "max": float(v[m].max()), "min_rel": rmin,
                         "scale": float(sc[m].max()), "n": int(m.sum()), "strict": strict,
                         "nonneg": bool(v[m].min() >= -NONNEG_TOL),
                         "argmin": {"sample": labels[idx[0]], "s": float(s[idx[1]]), "t": float(t[idx[2]]),
                                    "value": float(v[idx])}}
                    entries.append(e)
                    if not strict:
                        failing.append([lam, k, name, region])
    om = omega0_check(asm, budget, grid, sd)
    rows = None
    if keep_samples:
        rows = []
        xy = np.zeros((n_surf, 2))
        pts = polar_points(budget.radii, grid.polar_levels, grid.polar_angles)
        charts = sd.chart >= 0
        xy[charts] = np.tile(pts, (len(asm.charts), 1))
        for lam in (1, 2, 3):
            V = [vals[lam][n][0] for n in INEQUALITIES]
            for a in range(n_surf):
                reg = "tube" if sd.R[a] <= budget.radii[0] else "outer"
                for b in range(len(s)):
                    for c in range(len(t)):
                        rows.append([lam, int(case[b]), reg, labels[a], float(t[c]), float(s[b]),
                                     float(xy[a, 0]), float(xy[a, 1])] + [float(x[a, b, c]) for x in V])
    return VerificationReport(budget.to_dict(), grid.to_dict(), entries, om, bool(not failing and om["pass"]),
                              failing, rows)


def omega0_check(asm, budget, grid, sd=None) -> dict:
    """omega_0 ^ omega_0 on the neighbourhood of Sigma: nonnegative, zero exactly on B x D^2."""
    if sd is None:
        sd, _ = surface_samples(asm, budget.radii, grid)
    s = np.linspace(0, budget.epsilon, grid.n_s)
    t = grid.t_values(budget)
    mins, zero_ok, origin_ok = [], True, True
    centre = (sd.chart >= 0) & (sd.R == 0)
    for lam in (1, 2, 3):
        F = collar_forms(sd.expand(2), s[None, :, None], t[None, None, :], lam, None, None, extended=False)
        w = wedge(F["dmu_sigma"], F["dmu_sigma"]).top()
        scale = float(np.abs(w).max()) or 1.0
        mins.append(float(w.min()))
        zero = np.abs(w) <= 1e-12 * scale
        expected = np.broadcast_to(centre[:, None, None], w.shape)
        zero_ok &= bool(np.array_equal(zero, expected))
        i0 = int(np.argmin(np.abs(t)))
        origin_ok &= bool(np.array_equal(zero[:, 0, i0], centre))
    return {"min": min(mins), "nonneg": bool(min(mins) >= -NONNEG_TOL), "zero_locus_is_B": zero_ok,
            "zero_locus_at_origin_is_B": origin_ok, "n_B_samples": int(centre.sum()),
            "pass": bool(min(mins) >= -NONNEG_TOL and zero_ok and origin_ok)}


# ---------------------------------------------------------------- handlebody lemmas

def _slice_sample_grid(asm, budget, grid, s_values):
    sd, labels = surface_samples(asm, budget.radii, grid)
    return sd, labels, np.asarray(s_values, float)


def _slice_forms(asm, budget, sd, s, lam=1):
    """Forms restricted to t = 0 in the slice chart (s, x, y)."""
    F = collar_forms(sd.expand(1), s[None, :], np.zeros_like(s)[None, :], lam, budget, profiles(asm, budget))
    drop = lambda v: FormValue(v.degree, _restrict(v), SLICE)
    return {k: drop(v) for k, v in F.items()}


def _restrict(v: FormValue) -> np.ndarray:
    """Drop every component containing dt (collar index 0)."""
    from .forms import basis
    keep = [i for i, I in enumerate(basis(4, v.degree)) if 0 not in I]
    return v.coeffs[..., keep]


def mu_q_check(asm, budget, grid: GridSpec = GridSpec()) -> dict:
    """bt ^ d mu_q >= 0 on the collar, strictly positive for s in [3 eps, 5 eps) outside R <= R0."""
    e = budget.epsilon
    s = np.concatenate([np.linspace(0, 3 * e, grid.n_s, endpoint=False), np.linspace(3 * e, 5 * e, grid.n_s + 1)[:-1],
                        np.linspace(5 * e, budget.depth, grid.n_s + 1)[:-1]])
    sd, labels = surface_samples(asm, budget.radii, grid)
    out = {}
    for lam in (1, 2, 3):
        F = _slice_forms(asm, budget, sd, s, lam)
        v = wedge(F["beta_tilde"], F["dmu_q"]).top()
        strip = (s >= 3 * e) & (s < 5 * e)
        outer = (sd.R > budget.radii[0])[:, None] & strip[None, :]
        scale = float(np.abs(v).max()) or 1.0
        out[lam] = {"min": float(v.min()), "min_strict_region": float(v[outer].min()) if outer.any() else None,
                    "nonneg": bool(v.min() >= -NONNEG_TOL * scale),
                    "strict": bool(outer.any() and v[outer].min() >= STRICT_REL * scale)}
    return {"per_lambda": out, "pass": all(o["nonneg"] and o["strict"] for o in out.values())}


def _w_eps_s(budget, grid):
    return np.linspace(5 * budget.epsilon, budget.depth, grid.n_s + 1)[:-1]


def mu_H_check(asm, budget, grid: GridSpec = GridSpec()) -> dict:
    """bt ^ d mu_H: nonnegative for s >= 2 eps and a volume form on W_eps (outside the S tube)."""
    e = budget.epsilon
    s_all = np.linspace(2 * e, budget.depth, 4 * grid.n_s + 1)[:-1]
    sd, _ = surface_samples(asm, budget.radii, grid)
    out = {}
    for lam in (1, 2, 3):
        F = _slice_forms(asm, budget, sd, s_all, lam)
        v = wedge(F["beta_tilde"], F["dmu_H"]).top()
        w = s_all >= 5 * e
        outer = (sd.R > budget.radii[0])[:, None] & w[None, :]
        tube = (sd.R <= budget.radii[0])[:, None] & w[None, :]
        scale = float(np.abs(v).max()) or 1.0
        out[lam] = {"min": float(v.min()), "min_W_outer": float(v[outer].min()),
                    "min_W_tube": float(v[tube].min()) if tube.any() else None,
                    "nonneg": bool(v.min() >= -NONNEG_TOL * scale),
                    "volume_on_W": bool(v[outer].min() >= STRICT_REL * scale)}
    return {"per_lambda": out, "pass": all(o["nonneg"] and o["volume_on_W"] for o in out.values())}


def contact_pm_check(asm, budget, grid: GridSpec = GridSpec()) -> dict:
    """alpha_+- = +-C bt + mu_H on W_eps: alpha_+ ^ d alpha_+ > 0 and alpha_- ^ d alpha_- < 0.

    Strictness is required outside the tube R <= R0 around the 1-complex S,
    where bt ^ d mu_H degenerates; inside the tube the sign must not flip.
    """
    s = _w_eps_s(budget, grid)
    sd, labels = surface_samples(asm, budget.radii, grid)
    tube = np.broadcast_to((sd.R <= budget.radii[0])[:, None], (len(labels), len(s)))
    res = {}
    ok = True
    for lam in (1, 2, 3):
        F = _slice_forms(asm, budget, sd, s, lam)
        bt, mu, dmu = F["beta_tilde"], F["mu_H"], F["dmu_H"]
        plus = wedge(bt.scale(budget.C) + mu, dmu).top()
        minus = wedge(bt.scale(-budget.C) + mu, dmu).top()
        sp = float(np.abs(plus).max()) or 1.0
        sm = float(np.abs(minus).max()) or 1.0
        r = {"plus_min_outer": float(plus[~tube].min()), "minus_max_outer": float(minus[~tube].max()),
             "plus_min_tube": float(plus[tube].min()) if tube.any() else None,
             "minus_max_tube": float(minus[tube].max()) if tube.any() else None}
        r["positive"] = bool(plus[~tube].min() >= STRICT_REL * sp and (not tube.any() or plus[tube].min() >= -NONNEG_TOL))
        r["negative"] = bool(minus[~tube].max() <= -STRICT_REL * sm and (not tube.any() or minus[tube].max() <= NONNEG_TOL))
        ok &= r["positive"] and r["negative"]
        res[lam] = r
    return {"C": budget.C, "per_lambda": res, "pass": bool(ok)}


def mu_p_annulus_check(eps: float = 0.05, width: float = 0.1, n: int = 50) -> dict:
    """mu_p = phi_2(s) phi_1(t) dt in the chart (s, t, theta) with bt = dtheta, on an n^3 grid."""
    p1, p2 = cutoffs.annulus_phi1(width), cutoffs.annulus_phi2(eps, width)
    s = np.linspace(0, 1 + 2 * width, n)
    t = np.linspace(-width, width, n)
    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    S, T, TH = np.meshgrid(s, t, th, indexing="ij")
    v1, d1 = p1.both(T)
    v2, d2 = p2.both(S)
    z = np.zeros_like(S)
    mu = FormValue(1, np.stack([z, v2 * v1, z], -1), ANNULUS)
    # d mu = d(phi_2 phi_1) ^ dt = phi_2' phi_1 ds ^ dt
    dmu = wedge(FormValue(1, np.stack([d2 * v1, v2 * d1, z], -1), ANNULUS), d("t", ANNULUS))
    bt = FormValue(1, np.stack([z, z, z + 1.0], -1), ANNULUS)
    vol = wedge(bt, dmu).top()
    scale = float(np.abs(vol).max())
    pos = vol > STRICT_REL * scale
    neg = vol < -STRICT_REL * scale
    U = (np.abs(S - 1) <= width / 2) & (np.abs(T) <= width / 2)
    Up = (np.abs(S - 1) <= width) & (np.abs(T) <= width)
    support_ok = bool(np.all(mu.norm()[(S <= eps) | (S >= 1 + width) | (np.abs(T) >= width)] == 0))
    pos_on_U = bool(np.all(vol[U & (np.abs(T) < width)] > STRICT_REL * scale))
    pos_in_Up = bool(np.all(Up[pos]))
    neg_in_collar = bool(np.all(((S >= eps) & (S <= 2 * eps))[neg]))
    return {"grid": [n, n, n], "support_in_chart": support_ok, "positive_on_U": pos_on_U,
            "positive_support_in_U_prime": pos_in_Up, "negative_support_in_eps_2eps": neg_in_collar,
            "n_positive": int(pos.sum()), "n_negative": int(neg.sum()),
            "pass": support_ok and pos_on_U and pos_in_Up and neg_in_collar}


# ---------------------------------------------------------------- constants

@dataclass(frozen=True)
class SearchBox:
    """Log ranges for the sweep. delta is swept through the product delta*C: the
    shell where d mu_B < 0 needs delta*C bounded, the covering needs C >~ 1/eps."""

    epsilon: tuple[float, float] = (1e-4, 1e-2)
    invC: tuple[float, float] = (1e-9, 1e-3)
    deltaC: tuple[float, float] = (1e-4, 1.0)
    n: tuple[int, int, int] = (5, 4, 3)
    bisect_steps: int = 4
    robust_rounds: int = 6
    sweep_grid: GridSpec = GridSpec(5, 3)

    def to_dict(self):
        return asdict(self)


@dataclass
class SearchResult:
    budget: ConstantBudget
    margin: float
    thresholds: dict
    box: dict
    report: VerificationReport
    evaluations: int
    monotone: dict

    def to_dict(self):
        return {"budget": self.budget.to_dict(), "margin": self.margin, "thresholds": self.thresholds,
                "box": self.box, "evaluations": self.evaluations, "monotonicity": self.monotone}


FACTORS = (1, 2, 4)


def _box_points(b: ConstantBudget):
    """Three budget points per axis: shrink eps, shrink delta, grow C, one at a time."""
    pts = {"epsilon": [], "delta": [], "C": []}
    for k in FACTORS:
        pts["epsilon"].append(b.with_(epsilon=b.epsilon / k))
        pts["delta"].append(b.with_(delta=b.delta / k))
        pts["C"].append(b.with_(C=b.C * k))
    return pts


def monotonicity_check(asm, budget, grid: GridSpec = GridSpec()) -> dict:
    """Verdicts at the per-axis box points around ``budget``."""
    out, ok = {}, True
    for ax, pts in _box_points(budget).items():
        verdicts = [inequality_suite(asm, p, grid).passed for p in pts]
        out[ax] = [{"value": getattr(p, ax), "pass": v} for p, v in zip(pts, verdicts)]
        # a pass may never be followed by a fail further along the axis
        ok &= all(v or not any(verdicts[:i]) for i, v in enumerate(verdicts))
        ok &= verdicts[0] or not any(verdicts)
    out["monotone"] = bool(ok)
    return out


def constant_search(asm: SpineAssembly, grid: GridSpec = GridSpec(), box: SearchBox = SearchBox(),
                    radii=None, depth_factor: float = 10.0, fixed: dict | None = None) -> SearchResult:
    """Log sweep over (eps, 1/C, delta*C), then per-axis bisection toward the feasibility edge.

    The sweep runs on ``box.sweep_grid``; every accepted budget is re-verified
    on ``grid``. ``fixed`` pins any of epsilon, delta, C. The returned budget
    is tightened until all per-axis box points pass on ``grid`` (C grows when
    shrinking eps fails, delta shrinks when growing C fails).
    """
    radii = asm.default_radii if radii is None else tuple(radii)
    fixed = dict(fixed or {})
    eps_ax = [fixed["epsilon"]] if "epsilon" in fixed else np.geomspace(box.epsilon[1], box.epsilon[0], box.n[0])
    ic_ax = [1.0 / fixed["C"]] if "C" in fixed else np.geomspace(box.invC[1], box.invC[0], box.n[1])
    dc_ax = [None] if "delta" in fixed else np.geomspace(box.deltaC[1], box.deltaC[0], box.n[2])
    count = 0

    def run(b, g):
        nonlocal count
        count += 1
        return inequality_suite(asm, b, g)

    best, best_margin, worst = None, -np.inf, None
    for e in eps_ax:
        for ic in ic_ax:
            for dc in dc_ax:
                C = float(1 / ic)
                dl = fixed["delta"] if dc is None else float(dc / C)
                b = ConstantBudget(float(e), dl, C, radii, depth_factor)
                rep = run(b, box.sweep_grid)
                if rep.passed:
                    # near-ties go to the earlier point: larger eps, smaller C
                    m = float(f"{rep.margin():.3g}")
                    if m > best_margin:
                        full = run(b, grid)
                        if full.passed:
                            best, best_margin = b, m
                elif worst is None or rep.margin() > worst[0]:
                    worst = (rep.margin(), b, rep)
    if best is None:
        msg = "no feasible budget in the search box"
        if worst is not None:
            msg += f"; least violating {worst[1].to_dict()} fails {worst[2].failing[:6]}"
        raise InfeasibleBudget(msg, worst[1] if worst else None, worst[2] if worst else None)

    def passes(b):
        try:
            return run(b, grid).passed
        except ValueError:
            return False

    thresholds = {}
    # bisect in log scale toward the unsafe side of each free axis
    for key, grow in (("epsilon", True), ("delta", True), ("C", False)):
        if key in fixed:
            continue
        lo = np.log(getattr(best, key))
        hi = lo + (np.log(64.0) if grow else -np.log(64.0))
        if passes(best.with_(**{key: float(np.exp(hi))})):
            thresholds[key] = {"feasible_beyond": float(np.exp(hi))}
            continue
        for _ in range(box.bisect_steps):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if passes(best.with_(**{key: float(np.exp(mid))})) else (lo, mid)
        thresholds[key] = {"feasible": float(np.exp(lo)), "infeasible": float(np.exp(hi))}
    b = best
    mono = None
    for _ in range(box.robust_rounds):
        mono = {}
        for ax, pts in _box_points(b).items():
            mono[ax] = [passes(p) for p in pts]
        if all(all(v) for v in mono.values()):
            break
        C, dl = b.C, b.delta
        if not all(mono["epsilon"]) and "C" not in fixed:
            C *= FACTORS[-1]
            dl /= FACTORS[-1]
        if not all(mono["C"]) and "delta" not in fixed:
            dl /= FACTORS[-1]
        if not all(mono["delta"]) and "delta" not in fixed:
            dl *= 2
        if (C, dl) == (b.C, b.delta):
            break
        b = b.with_(C=C, delta=dl)
    rep = run(b, grid)
    if not rep.passed:
        b = best
        rep = run(b, grid)
    box_info = {"epsilon": [b.epsilon / FACTORS[-1], b.epsilon], "delta": [b.delta / FACTORS[-1], b.delta],
                "C": [b.C, b.C * FACTORS[-1]]}
    mono_info = {"points": mono, "monotone": bool(mono and all(all(v) for v in mono.values()))}
    return SearchResult(b, rep.margin(), thresholds, box_info, rep, count, mono_info)


def family_sweep(assemblies: list, budget: ConstantBudget, grid: GridSpec = GridSpec()) -> dict:
    from .cocycle import isoperiodic_check
    reports = [inequality_suite(a, budget, grid) for a in assemblies]
    verdicts = [r.passed for r in reports]
    try:
        iso = isoperiodic_check([a.triple for a in assemblies])
    except ValueError as exc:
        iso = {"isoperiodic": False, "error": str(exc)}
    uniform = bool(all(verdicts))
    return {"reports": reports, "verdicts": verdicts, "identical_verdicts": len(set(verdicts)) <= 1,
            "uniform": uniform, "verdict": "uniform" if uniform else "non-uniform", "isoperiodic": iso}
