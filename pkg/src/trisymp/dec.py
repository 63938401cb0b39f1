"""Discrete exterior calculus on closed triangulated surfaces.

A discrete 1-form is an array of values on the oriented edges of a surface.
Metric data are cotan weights. Harmonic forms are computed by correcting a
closed representative of the requested cohomology class by an exact form,
using a direct sparse solve.
"""
from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import MeshError, TriangulatedSurface


@dataclass(frozen=True, eq=False)
class MetricWeights:
    edge_weights: np.ndarray
    vertex_areas: np.ndarray


@dataclass(frozen=True, eq=False)
class DiscreteOneForm:
    edge_values: np.ndarray
    degenerate: bool = False  # set when a zero of index <= -2 was seen

    def __add__(self, other: "DiscreteOneForm") -> "DiscreteOneForm":
        return DiscreteOneForm(self.edge_values + other.edge_values)

    def __sub__(self, other: "DiscreteOneForm") -> "DiscreteOneForm":
        return DiscreteOneForm(self.edge_values - other.edge_values)

    def __neg__(self) -> "DiscreteOneForm":
        return DiscreteOneForm(-self.edge_values)

    def scale(self, c: float) -> "DiscreteOneForm":
        return DiscreteOneForm(c * self.edge_values)


@dataclass(frozen=True)
class ZeroPoint:
    vertex: int
    face: int
    barycentric: tuple[float, float, float]
    index: int
    sign: int = 0


@dataclass(frozen=True, eq=False)
class HomologyBasis:
    loops: list  # each loop: list of (edge id, +-1)
    generators: np.ndarray  # the non-tree, non-cotree edges
    tree: np.ndarray  # bool mask of primal spanning-tree edges
    cotree: np.ndarray  # bool mask of dual spanning-tree edges
    cocycles: np.ndarray = field(default=None)  # (2g, E) closed forms dual to loops


# ---------------------------------------------------------------- operators

def d0(surface: TriangulatedSurface) -> sp.csr_matrix:
    """Vertex -> edge coboundary."""
    E = surface.n_edges
    rows = np.repeat(np.arange(E), 2)
    cols = surface.edges.ravel()
    vals = np.tile([-1.0, 1.0], E)
    return sp.csr_matrix((vals, (rows, cols)), shape=(E, surface.n_vertices))


def d1(surface: TriangulatedSurface) -> sp.csr_matrix:
    """Edge -> face coboundary (signed sum around each triangle)."""
    F = surface.n_faces
    rows = np.repeat(np.arange(F), 3)
    cols = surface.face_edge_ids.ravel()
    vals = surface.face_edge_signs.ravel().astype(float)
    return sp.csr_matrix((vals, (rows, cols)), shape=(F, surface.n_edges))


def _cotangents(surface: TriangulatedSurface) -> np.ndarray:
    """cot of the angle opposite face-edge slot k, shape (F, 3)."""
    fe = surface.face_edges
    out = np.empty(fe.shape[:2])
    for k in range(3):
        u = fe[:, (k + 2) % 3]
        w = -fe[:, (k + 1) % 3]
        dot = np.einsum("ij,ij->i", u, w)
        cross = u[:, 0] * w[:, 1] - u[:, 1] * w[:, 0]
        out[:, k] = dot / np.abs(cross)
    return out


def cotan_weights(surface: TriangulatedSurface) -> MetricWeights:
    cot = _cotangents(surface)
    w = np.zeros(surface.n_edges)
    np.add.at(w, surface.face_edge_ids.ravel(), 0.5 * cot.ravel())
    areas = np.zeros(surface.n_vertices)
    np.add.at(areas, surface.triangles.ravel(), np.repeat(surface.areas / 3.0, 3))
    return MetricWeights(w, areas)


def flip_edge(surface: TriangulatedSurface, e: int) -> TriangulatedSurface:
    """Flip one edge of a translation surface."""
    if not surface.translation:
        raise MeshError("edge flips need a translation structure")
    f0, f1 = surface.edge_faces[e]
    k0, k1 = surface.edge_slots[e]
    if f0 == f1:
        raise MeshError(f"edge {e} borders a single face twice")
    t0, t1 = surface.triangles[f0], surface.triangles[f1]
    fe0, fe1 = surface.face_edges[f0], surface.face_edges[f1]
    a, b, c = t0[k0], t0[(k0 + 1) % 3], t0[(k0 + 2) % 3]
    dv = t1[(k1 + 2) % 3]
    pa = np.zeros(2)
    pb = fe0[k0]
    pc = pb + fe0[(k0 + 1) % 3]
    pd = pa + fe1[(k1 + 1) % 3]  # f1 runs b -> a -> d
    tris = surface.triangles.copy()
    fes = surface.face_edges.copy()
    tris[f0] = (a, dv, c)
    fes[f0] = (pd - pa, pc - pd, pa - pc)
    tris[f1] = (dv, b, c)
    fes[f1] = (pb - pd, pc - pb, pd - pc)
    return TriangulatedSurface(surface.n_vertices, tris, fes, True, surface.positions, surface.name)


def delaunay(surface: TriangulatedSurface, tol: float = 1e-12, max_flips: int | None = None) -> TriangulatedSurface:
    """Flip edges until every cotan weight is >= -tol."""
    max_flips = 10 * surface.n_edges if max_flips is None else max_flips
    for _ in range(max_flips):
        w = cotan_weights(surface).edge_weights
        bad = np.flatnonzero(w < -tol)
        if len(bad) == 0:
            return surface
        if not surface.translation:
            raise MeshError(f"negative cotan weights on edges {bad[:10].tolist()} and no translation structure to flip")
        surface = flip_edge(surface, int(bad[np.argmin(w[bad])]))
    raise MeshError("Delaunay flipping did not terminate")


def prepare(surface: TriangulatedSurface) -> tuple[TriangulatedSurface, MetricWeights]:
    surface = delaunay(surface)
    return surface, cotan_weights(surface)


# ---------------------------------------------------------------- topology

def homology_basis(surface: TriangulatedSurface) -> HomologyBasis:
    """Tree-cotree generators. Each loop is a generator edge closed up through the primal tree."""
    V, E, F = surface.n_vertices, surface.n_edges, surface.n_faces
    adj: list[list[tuple[int, int]]] = [[] for _ in range(V)]
    for e, (a, b) in enumerate(surface.edges):
        adj[a].append((e, b))
        adj[b].append((e, a))
    tree = np.zeros(E, bool)
    parent_edge = -np.ones(V, int)
    seen = np.zeros(V, bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for e, w in adj[v]:
            if not seen[w]:
                seen[w] = True
                tree[e] = True
                parent_edge[w] = e
                queue.append(w)
    if not seen.all():
        raise MeshError("surface is disconnected")

    cotree = np.zeros(E, bool)
    fseen = np.zeros(F, bool)
    fseen[0] = True
    queue = deque([0])
    while queue:
        f = queue.popleft()
        for k in range(3):
            e = surface.face_edge_ids[f, k]
            if tree[e]:
                continue
            g, _ = surface.neighbor(f, k)
            if not fseen[g]:
                fseen[g] = True
                cotree[e] = True
                queue.append(g)
    generators = np.flatnonzero(~tree & ~cotree)

    def root_path(v):
        # edges (id, sign) walking from the root to v
        path = []
        while parent_edge[v] >= 0:
            e = parent_edge[v]
            a, b = surface.edges[e]
            path.append((int(e), 1 if b == v else -1))
            v = a if b == v else b
        return path[::-1]

    loops = []
    for e in generators:
        a, b = surface.edges[e]
        to_a = root_path(a)
        to_b = root_path(b)
        back_b = [(i, -s) for i, s in to_b[::-1]]
        loop = to_a + [(int(e), 1)] + back_b
        loops.append(_cancel(loop))
    basis = HomologyBasis(loops, generators, tree, cotree)
    object.__setattr__(basis, "cocycles", _dual_cocycles(surface, basis))
    return basis


def _cancel(loop):
    out = []
    for item in loop:
        if out and out[-1][0] == item[0] and out[-1][1] == -item[1]:
            out.pop()
        else:
            out.append(item)
    while len(out) > 1 and out[0][0] == out[-1][0] and out[0][1] == -out[-1][1]:
        out = out[1:-1]
    return out


def _dual_cocycles(surface: TriangulatedSurface, basis: HomologyBasis) -> np.ndarray:
    """Closed forms zeta_i with zeta_i(loop_j) = delta_ij.

    Tree edges get 0, generator edges the identity; cotree values follow
    from closedness by peeling leaves of the dual tree.
    """
    F = surface.n_faces
    n = len(basis.generators)
    Z = np.zeros((n, surface.n_edges))
    Z[np.arange(n), basis.generators] = 1.0
    unknown_count = np.zeros(F, int)
    for f in range(F):
        unknown_count[f] = basis.cotree[surface.face_edge_ids[f]].sum()
    solved = ~basis.cotree.copy()
    leaves = deque(np.flatnonzero(unknown_count == 1).tolist())
    while leaves:
        f = leaves.popleft()
        if unknown_count[f] != 1:
            continue
        ids = surface.face_edge_ids[f]
        signs = surface.face_edge_signs[f]
        k = [j for j in range(3) if not solved[ids[j]]][0]
        rest = sum(signs[j] * Z[:, ids[j]] for j in range(3) if j != k)
        Z[:, ids[k]] = -rest / signs[k]
        solved[ids[k]] = True
        unknown_count[f] -= 1
        g, _ = surface.neighbor(f, k)
        unknown_count[g] -= 1
        if unknown_count[g] == 1:
            leaves.append(g)
    if not solved.all():
        raise MeshError("dual tree peeling failed")
    return Z


def loop_from_vertices(surface: TriangulatedSurface, path, vectors=None) -> list[tuple[int, int]]:
    """Convert a closed vertex path [(a, b), ...] to signed edges.

    ``vectors`` optionally disambiguates parallel edges by displacement.
    """
    lookup: dict = {}
    ev = surface.edge_vectors
    for e, (a, b) in enumerate(surface.edges):
        lookup.setdefault((a, b), []).append((e, 1, ev[e]))
        lookup.setdefault((b, a), []).append((e, -1, -ev[e]))
    loop = []
    for i, (a, b) in enumerate(path):
        cands = lookup.get((a, b))
        if not cands:
            raise MeshError(f"no edge between {a} and {b}")
        if vectors is not None:
            cands = sorted(cands, key=lambda c: np.linalg.norm(c[2] - vectors[i]))
        loop.append((int(cands[0][0]), cands[0][1]))
    return loop


def basis_from_loops(surface: TriangulatedSurface, loops) -> HomologyBasis:
    """Homology basis with prescribed loops; dual cocycles re-solved against them."""
    ref = homology_basis(surface)
    if len(loops) != len(ref.loops):
        raise MeshError(f"expected {len(ref.loops)} loops, got {len(loops)}")
    # M[i, j] = ref_i(loop_j); the new cocycles A ref need A M = I
    M = np.array([[loop_period(z, loop) for loop in loops] for z in ref.cocycles])
    if abs(np.linalg.det(M)) < 1e-9:
        raise MeshError("loops do not form a homology basis")
    Z = np.linalg.solve(M, ref.cocycles)
    return HomologyBasis(list(loops), ref.generators, ref.tree, ref.cotree, Z)


def intersection_matrix(surface: TriangulatedSurface, basis: HomologyBasis) -> np.ndarray:
    """Algebraic intersections of the basis loops, as cup products of the dual cocycles."""
    Z = basis.cocycles
    n = len(Z)
    M = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            M[i, j] = cup_pairing(surface, DiscreteOneForm(Z[i]), DiscreteOneForm(Z[j]))
    return M


def harmonic_dimension(surface: TriangulatedSurface, weights: MetricWeights | None = None, dense: bool = False) -> int:
    """dim ker d1 / im d0. ``dense`` computes ker d1 cap ker d0^T W by SVD instead."""
    if not dense:
        return surface.n_edges - (surface.n_vertices - 1) - (surface.n_faces - 1)
    weights = cotan_weights(surface) if weights is None else weights
    A = np.vstack([d1(surface).toarray(), (d0(surface).T @ sp.diags(weights.edge_weights)).toarray()])
    sv = np.linalg.svd(A, compute_uv=False)
    tol = sv.max() * max(A.shape) * 1e-12
    return int(A.shape[1] - np.sum(sv > tol))


# ---------------------------------------------------------------- harmonic forms

def _solve_exact_part(surface, weights, omega: np.ndarray) -> np.ndarray:
    D0 = d0(surface)
    W = sp.diags(weights.edge_weights)
    L = (D0.T @ W @ D0).tocsc()
    rhs = D0.T @ (weights.edge_weights * omega)
    L = L[1:, 1:]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", spla.MatrixRankWarning)
            u = spla.spsolve(L, rhs[1:])
    except (RuntimeError, spla.MatrixRankWarning) as exc:
        raise MeshError(f"singular Laplacian (disconnected mesh?): {exc}") from None
    if not np.all(np.isfinite(u)):
        raise MeshError("singular Laplacian (disconnected mesh?)")
    return D0 @ np.concatenate([[0.0], u])


def harmonic_projection(surface, weights, omega: DiscreteOneForm) -> DiscreteOneForm:
    """Harmonic part of a closed form (same periods)."""
    w = omega.edge_values
    return DiscreteOneForm(w - _solve_exact_part(surface, weights, w))


def harmonic_representative(surface, weights, target_periods, basis: HomologyBasis | None = None) -> DiscreteOneForm:
    basis = homology_basis(surface) if basis is None else basis
    target = np.asarray(target_periods, float)
    if target.shape != (len(basis.loops),):
        raise ValueError(f"expected {len(basis.loops)} periods, got {target.shape}")
    zeta = target @ basis.cocycles if len(target) else np.zeros(surface.n_edges)
    h = harmonic_projection(surface, weights, DiscreteOneForm(zeta))
    if np.allclose(target, 0):
        return h
    zeros = find_zeros(surface, h)
    return DiscreteOneForm(h.edge_values, degenerate=any(z.index <= -2 for z in zeros))


def harmonic_basis(surface, weights, basis: HomologyBasis) -> np.ndarray:
    """Harmonic representatives of the dual cocycles, shape (2g, E)."""
    return np.array([harmonic_projection(surface, weights, DiscreteOneForm(z)).edge_values for z in basis.cocycles])


def face_covectors(surface: TriangulatedSurface, beta) -> np.ndarray:
    """Constant covector per face reproducing the edge values of a closed form, shape (F, 2)."""
    vals = beta.edge_values if isinstance(beta, DiscreteOneForm) else np.asarray(beta)
    fe = surface.face_edges
    a = surface.face_edge_signs * vals[surface.face_edge_ids]
    # solve c . e0 = a0, c . e1 = a1
    M = fe[:, :2, :]
    return np.linalg.solve(M, a[:, :2, None])[..., 0]


def period_matrices(surface, weights, basis: HomologyBasis):
    """Cup matrix P and cotan Gram matrix G of the harmonic basis."""
    H = harmonic_basis(surface, weights, basis)
    C = np.array([face_covectors(surface, h) for h in H])  # (n, F, 2)
    A = surface.areas
    G = np.einsum("f,ifk,jfk->ij", A, C, C)
    P = np.einsum("f,if,jf->ij", A, C[..., 0], C[..., 1]) - np.einsum("f,if,jf->ij", A, C[..., 1], C[..., 0])
    return H, P, G


def hodge_star(surface, weights, beta: DiscreteOneForm, basis: HomologyBasis | None = None) -> DiscreteOneForm:
    """Discrete star on harmonic 1-forms, with the convention *dx = -dy.

    The harmonic part of beta is expanded in the harmonic basis and mapped by
    the period matrix J = P^-1 G, which realises int a ^ S b = <a, b> for the
    standard rotation S (S dx = dy). The result is -S beta. Exact components
    of beta are discarded.
    """
    basis = homology_basis(surface) if basis is None else basis
    if len(basis.loops) == 0:
        return DiscreteOneForm(np.zeros(surface.n_edges))
    H, P, G = period_matrices(surface, weights, basis)
    coeffs = periods(beta, basis)
    J = np.linalg.solve(P, G)
    return DiscreteOneForm(-(J @ coeffs) @ H)


def is_closed(surface, beta: DiscreteOneForm, tol: float = 1e-10) -> bool:
    return bool(np.max(np.abs(d1(surface) @ beta.edge_values), initial=0.0) <= tol)


def closedness_residual(surface, beta: DiscreteOneForm) -> float:
    return float(np.max(np.abs(d1(surface) @ beta.edge_values), initial=0.0))


def coclosedness_residual(surface, weights, beta: DiscreteOneForm) -> float:
    return float(np.max(np.abs(d0(surface).T @ (weights.edge_weights * beta.edge_values)), initial=0.0))


# ---------------------------------------------------------------- periods, cup

def periods(beta, basis: HomologyBasis) -> np.ndarray:
    vals = beta.edge_values if isinstance(beta, DiscreteOneForm) else np.asarray(beta)
    return np.array([sum(s * vals[e] for e, s in loop) for loop in basis.loops])


def loop_period(beta, loop) -> float:
    vals = beta.edge_values if isinstance(beta, DiscreteOneForm) else np.asarray(beta)
    return float(sum(s * vals[e] for e, s in loop))


def cup_density(surface, b1: DiscreteOneForm, b2: DiscreteOneForm) -> np.ndarray:
    """Per-face simplicial wedge 1/2 (a01 b02 - a02 b01)."""
    def corner_values(beta):
        a = surface.face_edge_signs * beta.edge_values[surface.face_edge_ids]
        return a[:, 0], -a[:, 2]  # v0->v1, v0->v2
    a01, a02 = corner_values(b1)
    b01, b02 = corner_values(b2)
    return 0.5 * (a01 * b02 - a02 * b01)


def cup_pairing(surface, b1: DiscreteOneForm, b2: DiscreteOneForm) -> float:
    return float(np.sum(cup_density(surface, b1, b2)))


# ---------------------------------------------------------------- zeros

def _link_signs(surface, beta: np.ndarray):
    """For every corner, signs of the forward differences to the other two corners."""
    vals = surface.face_edge_signs * beta[surface.face_edge_ids]  # slot k: corner k -> k+1
    tri = surface.triangles
    out = np.empty((surface.n_faces, 3, 2), int)
    for k in range(3):
        v = tri[:, k]
        w1, w2 = tri[:, (k + 1) % 3], tri[:, (k + 2) % 3]
        x1 = vals[:, k]
        x2 = -vals[:, (k + 2) % 3]
        # symbolic tie-break: u += eps * vertex id
        s1 = np.where(x1 > 0, 1, np.where(x1 < 0, -1, np.where(w1 > v, 1, -1)))
        s2 = np.where(x2 > 0, 1, np.where(x2 < 0, -1, np.where(w2 > v, 1, -1)))
        out[:, k, 0], out[:, k, 1] = s1, s2
    return out


def vertex_indices(surface, beta) -> np.ndarray:
    vals = beta.edge_values if isinstance(beta, DiscreteOneForm) else np.asarray(beta)
    sg = _link_signs(surface, vals)
    changes = np.zeros(surface.n_vertices, int)
    np.add.at(changes, surface.triangles.ravel(), (sg[..., 0] != sg[..., 1]).ravel().astype(int))
    return 1 - changes // 2


def find_zeros(surface, beta) -> list[ZeroPoint]:
    """Vertices of nonzero index for a closed form (discrete Poincare-Hopf)."""
    idx = vertex_indices(surface, beta)
    first = {}
    for f, tri in enumerate(surface.triangles):
        for k, v in enumerate(tri):
            if v not in first:
                first[v] = (f, k)
    out = []
    for v in np.flatnonzero(idx != 0):
        f, k = first[int(v)]
        bary = [0.0, 0.0, 0.0]
        bary[k] = 1.0
        out.append(ZeroPoint(int(v), f, tuple(bary), int(idx[v])))
    return out


def zero_faces(surface, zeros) -> np.ndarray:
    """Faces incident to any zero vertex."""
    zv = {z.vertex for z in zeros}
    return np.array([any(v in zv for v in tri) for tri in surface.triangles])


def vertex_distances(surface, sources, metric_limit: float = np.inf) -> np.ndarray:
    """Dijkstra distance along edges from a set of vertices."""
    import heapq

    lengths = surface.edge_lengths
    adj: list[list[tuple[int, float]]] = [[] for _ in range(surface.n_vertices)]
    for e, (a, b) in enumerate(surface.edges):
        adj[a].append((b, lengths[e]))
        adj[b].append((a, lengths[e]))
    dist = np.full(surface.n_vertices, np.inf)
    heap = [(0.0, int(s)) for s in sources]
    for _, s in heap:
        dist[s] = 0.0
    heapq.heapify(heap)
    while heap:
        dd, v = heapq.heappop(heap)
        if dd > dist[v] or dd > metric_limit:
            continue
        for w, l in adj[v]:
            if dd + l < dist[w]:
                dist[w] = dd + l
                heapq.heappush(heap, (dd + l, w))
    return dist
