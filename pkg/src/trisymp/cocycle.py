"""The triple (beta_1, beta_2, beta_3) on the central surface, its zero set and signs."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import dec
from .dec import DiscreteOneForm, HomologyBasis, MetricWeights, ZeroPoint
from .mesh import TriangulatedSurface


class DegenerateZeros(ValueError):
    pass


def rot90(c: np.ndarray) -> np.ndarray:
    """Covector rotation S with S dx = dy, S dy = -dx."""
    return np.stack([-c[..., 1], c[..., 0]], axis=-1)


@dataclass(frozen=True, eq=False)
class CocycleTriple:
    surface: TriangulatedSurface
    weights: MetricWeights
    basis: HomologyBasis
    beta: np.ndarray  # (3, E) edge values
    covectors: np.ndarray  # (3, F, 2) face covectors
    zero_set: list = field(default_factory=list)

    def form(self, lam: int) -> DiscreteOneForm:
        """beta_lam for lam in 1..3 (cyclic)."""
        return DiscreteOneForm(self.beta[(lam - 1) % 3])

    def covector(self, lam: int) -> np.ndarray:
        return self.covectors[(lam - 1) % 3]

    def scaled(self, c: float) -> "CocycleTriple":
        return CocycleTriple(self.surface, self.weights, self.basis, c * self.beta, c * self.covectors, self.zero_set)


def make_triple(surface, weights, beta: DiscreteOneForm, basis: HomologyBasis | None = None,
                flip_convention: bool = False) -> CocycleTriple:
    """beta_1 = beta, beta_2 = -*beta, beta_3 = -beta_1 - beta_2.

    Edge values of beta_2 come from the period-matrix star. Face covectors use
    the pointwise conjugate S c_1, the nonconforming harmonic conjugate of
    beta, so beta_1 ^ beta_2 = |c_1|^2 on every face. ``flip_convention``
    uses +*beta instead (a regression control).
    """
    basis = dec.homology_basis(surface) if basis is None else basis
    zeros = dec.find_zeros(surface, beta)
    bad = [z for z in zeros if z.index <= -2 or z.index >= 1]
    if bad:
        faces = sorted({f for z in bad for f, _ in surface.vertex_faces()[z.vertex]})
        raise DegenerateZeros(f"degenerate zeros at vertices {[z.vertex for z in bad]}, faces {faces[:20]}")
    sign = -1.0 if flip_convention else 1.0
    b1 = beta.edge_values
    b2 = -sign * dec.hodge_star(surface, weights, beta, basis).edge_values
    b3 = -b1 - b2
    c1 = dec.face_covectors(surface, beta)
    c2 = sign * rot90(c1)
    c3 = -c1 - c2
    return CocycleTriple(surface, weights, basis, np.stack([b1, b2, b3]), np.stack([c1, c2, c3]), zeros)


def wedge_density(c_a: np.ndarray, c_b: np.ndarray) -> np.ndarray:
    """Coefficient of a ^ b against dx ^ dy for per-face covectors."""
    return c_a[..., 0] * c_b[..., 1] - c_a[..., 1] * c_b[..., 0]


def validate_triple(triple: CocycleTriple, tol: float = 1e-10) -> dict:
    s = triple.surface
    closed = [dec.closedness_residual(s, triple.form(l)) for l in (1, 2, 3)]
    sum_res = float(np.max(np.abs(triple.beta.sum(axis=0)), initial=0.0))
    cov_sum = float(np.max(np.abs(triple.covectors.sum(axis=0)), initial=0.0))
    dens = [wedge_density(triple.covector(l), triple.covector(l + 1)) for l in (1, 2, 3)]
    mins = [float(d.min()) for d in dens]
    zf = dec.zero_faces(s, triple.zero_set)
    scale = float(np.max(np.abs(dens[0]), initial=1.0)) or 1.0
    # positive floor away from zeros, relative to the largest density
    off_b = [float(d[~zf].min()) if (~zf).any() else np.inf for d in dens]
    zero_match = all(_zeros_match(s, triple.zero_set, dec.find_zeros(s, triple.form(l))) for l in (2, 3))
    density_match = float(max(np.max(np.abs(dens[1] - dens[0])), np.max(np.abs(dens[2] - dens[0]))))
    cup = dec.cup_pairing(s, triple.form(1), triple.form(2))
    verdict = (
        max(closed) <= tol
        and sum_res == 0.0
        and min(mins) >= -tol
        and min(off_b) > 1e-8 * scale
        and cup > 0
        and zero_match
    )
    return {
        "closedness_residuals": closed,
        "sum_residual": sum_res,
        "covector_sum_residual": cov_sum,
        "density_minima": mins,
        "density_minima_off_B": off_b,
        "density_pairwise_mismatch": density_match,
        "zero_vertices": [z.vertex for z in triple.zero_set],
        "zero_indices": [z.index for z in triple.zero_set],
        "zero_set_consistent": bool(zero_match),
        "cup_pairing": cup,
        "pass": bool(verdict),
    }


def _zeros_match(surface, za, zb) -> bool:
    """Same count, and a bijection moving each zero by at most one edge."""
    if len(za) != len(zb):
        return False
    nbrs: dict = {}
    for a, b in surface.edges:
        nbrs.setdefault(a, set()).add(b)
        nbrs.setdefault(b, set()).add(a)
    free = [z.vertex for z in zb]
    for z in za:
        near = [v for v in free if v == z.vertex or v in nbrs.get(z.vertex, ())]
        if not near:
            return False
        free.remove(near[0])
    return True


@dataclass(frozen=True)
class SignAssignment:
    value: dict  # vertex -> +-1
    pairing: list  # (q vertex, p vertex): negative, positive

    def apply(self, zeros: list[ZeroPoint]) -> list[ZeroPoint]:
        return [ZeroPoint(z.vertex, z.face, z.barycentric, z.index, self.value[z.vertex]) for z in zeros]


def assign_signs(zero_set: list[ZeroPoint], seed: int = 0, surface: TriangulatedSurface | None = None) -> SignAssignment:
    """Balanced signs with a greedy nearest-neighbour pairing (negative, positive)."""
    n = len(zero_set)
    if n % 2:
        raise ValueError(f"odd number of zeros ({n}); cannot balance signs")
    if n == 0:
        return SignAssignment({}, [])
    verts = [z.vertex for z in zero_set]
    if surface is not None:
        D = np.array([dec.vertex_distances(surface, [v])[verts] for v in verts])
    else:
        D = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).astype(float)
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    free = set(range(n))
    value, pairing = {}, []
    for i in order:
        if i not in free:
            continue
        free.discard(i)
        j = min(free, key=lambda k: (D[i, k], k))
        free.discard(j)
        value[verts[i]], value[verts[j]] = -1, 1
        pairing.append((verts[i], verts[j]))
    return SignAssignment(value, pairing)


def isoperiodic_check(family, tol: float = 1e-8) -> dict:
    """family: list of CocycleTriple sharing a homology basis."""
    if not family:
        return {"periods": [], "isoperiodic": True}
    n_loops = len(family[0].basis.loops)
    rows = []
    for t in family:
        if len(t.basis.loops) != n_loops or t.surface.n_edges != family[0].surface.n_edges:
            raise ValueError("family members do not share a homology basis")
        rows.append(np.concatenate([dec.periods(t.form(1), t.basis), dec.periods(t.form(2), t.basis)]))
    rows = np.array(rows)
    spread = float(np.max(np.abs(rows - rows[0]), initial=0.0))
    return {"periods": rows.tolist(), "max_deviation": spread, "isoperiodic": bool(spread <= tol)}


def morse_scale(triple: CocycleTriple, zero: ZeroPoint) -> float:
    """Estimate a in beta ~ a (x dx - y dy) from |c| / r over the star of the zero."""
    s = triple.surface
    c = triple.covector(1)
    ratios = []
    for f, k in s.vertex_faces()[zero.vertex]:
        cen = s.corner_positions(f).mean(axis=0) - s.corner_positions(f)[k]
        ratios.append(np.linalg.norm(c[f]) / np.linalg.norm(cen))
    return float(np.median(ratios))


def triple_to_json(triple: CocycleTriple, signs: SignAssignment | None = None) -> str:
    zeros = signs.apply(triple.zero_set) if signs else triple.zero_set
    data = {
        "n_edges": int(triple.surface.n_edges),
        "beta": [b.tolist() for b in triple.beta],
        "zeros": [
            {"vertex": z.vertex, "face": z.face, "barycentric": list(z.barycentric), "index": z.index, "sign": z.sign}
            for z in zeros
        ],
    }
    return json.dumps(data, indent=1, sort_keys=True)
