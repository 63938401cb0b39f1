"""Kernel foliations of closed 1-forms on translation surfaces.

Paths are stored as face-local samples. Two flavours are produced:
straight-line traces (leaves, gradient lines), which move exactly from face to
face, and edge-midpoint polylines found by graph search, whose segment in each
face runs between midpoints of two of its edges.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import dec
from .dec import DiscreteOneForm, ZeroPoint
from .mesh import MeshError, TriangulatedSurface


class TraceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SurfacePath:
    faces: np.ndarray  # (N,) face of each sample
    points: np.ndarray  # (N, 2) face-local coordinates (corner 0 at origin)
    closed: bool
    # per segment: (face, start, end) in face-local coordinates
    segments: list = field(default_factory=list)
    # edges crossed in order, with +1 when crossing into the edge's left face
    crossings: list = field(default_factory=list)
    stop_reason: str = ""

    def length(self) -> float:
        return float(sum(np.linalg.norm(b - a) for _, a, b in self.segments))

    def margin(self, covectors: np.ndarray, refine: int = 1) -> float:
        """min over segment samples of beta(unit tangent)."""
        vals = []
        for f, a, b in self.segments:
            d = b - a
            n = np.linalg.norm(d)
            if n == 0:
                continue
            # beta is constant on a face; refine only repeats the evaluation
            vals.extend([covectors[f] @ (d / n)] * refine)
        return float(min(vals)) if vals else float("nan")

    def reversed(self) -> "SurfacePath":
        segs = [(f, b, a) for f, a, b in self.segments[::-1]]
        cross = [(e, -s) for e, s in self.crossings[::-1]]
        return SurfacePath(self.faces[::-1], self.points[::-1], self.closed, segs, cross, self.stop_reason)

    def barycentric(self, surface: TriangulatedSurface) -> np.ndarray:
        out = np.empty((len(self.faces), 3))
        for i, (f, p) in enumerate(zip(self.faces, self.points)):
            out[i] = barycentric(surface, int(f), p)
        return out

    def to_json_obj(self, surface: TriangulatedSurface) -> dict:
        bary = self.barycentric(surface)
        return {
            "closed": self.closed,
            "samples": [[int(f), [float(x) for x in b]] for f, b in zip(self.faces, bary)],
        }


def barycentric(surface: TriangulatedSurface, f: int, p: np.ndarray) -> np.ndarray:
    P = surface.corner_positions(f)
    T = np.array([P[1] - P[0], P[2] - P[0]]).T
    l12 = np.linalg.solve(T, p - P[0])
    return np.array([1 - l12.sum(), l12[0], l12[1]])


def _path_from_segments(segments, crossings, closed, reason="") -> SurfacePath:
    faces = [f for f, _, _ in segments] + ([segments[-1][0]] if segments else [])
    pts = [a for _, a, _ in segments] + ([segments[-1][2]] if segments else [])
    return SurfacePath(np.array(faces, int), np.array(pts, float).reshape(-1, 2), closed, list(segments),
                       list(crossings), reason)


def _cross_into(surface, f, k):
    """Crossing sign for leaving face f through slot k."""
    # f is the left face of its edge when its slot agrees with the edge orientation
    e = surface.face_edge_ids[f, k]
    return int(e), (1 if surface.face_edge_signs[f, k] == -1 else -1)


# ---------------------------------------------------------------- straight traces

def _exit(P, p, d, skip=None):
    """First edge slot hit by the ray p + tau d inside triangle P; returns (slot, tau, param)."""
    best = None
    for k in range(3):
        if k == skip:
            continue
        a, b = P[k], P[(k + 1) % 3]
        e = b - a
        M = np.array([d, -e]).T
        det = np.linalg.det(M)
        if abs(det) < 1e-15:
            continue
        tau, u = np.linalg.solve(M, a - p)
        if tau > 1e-13 and -1e-12 <= u <= 1 + 1e-12:
            if best is None or tau < best[1]:
                best = (k, tau, u)
    return best


def trace_straight(surface: TriangulatedSurface, field_fn, start_face: int, start_point: np.ndarray,
                   max_len: float, stop_fn=None, close_tol: float = 1e-9) -> SurfacePath:
    """Follow the per-face direction field_fn(face) from a face-local point."""
    if not surface.translation:
        raise MeshError("tracing needs a translation surface")
    f, p = int(start_face), np.asarray(start_point, float)
    p0, f0 = p.copy(), f
    segs, cross = [], []
    total, skip = 0.0, None
    scale = float(np.mean(surface.edge_lengths))
    for _ in range(100000):
        d = field_fn(f)
        nd = np.linalg.norm(d)
        if nd == 0:
            return _path_from_segments(segs, cross, False, "zero field")
        d = d / nd
        P = surface.corner_positions(f)
        hit = _exit(P, p, d, skip)
        if hit is None:
            raise TraceError(f"trace left face {f} without crossing an edge")
        k, tau, u = hit
        q = p + tau * d
        if stop_fn is not None:
            s = stop_fn(f, p, q)
            if s is not None:
                segs.append((f, p.copy(), s))
                return _path_from_segments(segs, cross, False, "near zero")
        if min(u, 1 - u) < 1e-9:
            raise TraceError("trace hit a vertex; perturb the start point")
        # closing: the start point lies on this segment
        if total > 0 and f == f0:
            w = p0 - p
            along = w @ d
            if -close_tol * scale <= along <= tau + close_tol * scale and np.linalg.norm(w - along * d) <= close_tol * scale:
                segs.append((f, p.copy(), p0.copy()))
                return _path_from_segments(segs, cross, True, "closed")
        if total + tau >= max_len:
            q = p + (max_len - total) * d
            segs.append((f, p.copy(), q))
            return _path_from_segments(segs, cross, False, "max_len")
        segs.append((f, p.copy(), q.copy()))
        total += tau
        g, kg = surface.neighbor(f, k)
        cross.append(_cross_into(surface, f, k))
        # same point in the neighbour's frame: edge param u measured from its corner kg+1
        Pg = surface.corner_positions(g)
        p = Pg[(kg + 1) % 3] + u * (Pg[kg] - Pg[(kg + 1) % 3])
        f, skip = g, kg
    raise TraceError("trace exceeded the step budget")


def _zero_stop(surface, zeros, radius):
    """Stop function: halt when a segment comes within radius of a zero vertex."""
    zv = {z.vertex for z in zeros}
    if not zv or radius <= 0:
        return None

    def stop(f, p, q):
        P = surface.corner_positions(f)
        for k, v in enumerate(surface.triangles[f]):
            if v in zv:
                c = P[k]
                d = q - p
                tt = np.clip((c - p) @ d / (d @ d), 0, 1)
                if np.linalg.norm(p + tt * d - c) <= radius:
                    # step to the first point at distance radius
                    a, b, cc = d @ d, 2 * d @ (p - c), (p - c) @ (p - c) - radius**2
                    disc = max(b * b - 4 * a * cc, 0.0)
                    t1 = max((-b - np.sqrt(disc)) / (2 * a), 0.0)
                    return p + t1 * d
        return None

    return stop


def _start_ok(surface, zeros, face, point, radius):
    P = surface.corner_positions(face)
    for k, v in enumerate(surface.triangles[face]):
        if any(z.vertex == v for z in zeros) and np.linalg.norm(point - P[k]) <= radius:
            return False
    return True


def trace_leaf(surface, covectors, start: tuple[int, np.ndarray], max_len: float, zeros=(),
               R0: float = 0.0, direction: int = 1) -> SurfacePath:
    """Leaf of ker beta through a face-local start point (direction S^-1 of the dual vector, rotated)."""
    face, point = start
    point = np.asarray(point, float)
    radius = np.sqrt(R0)
    if not _start_ok(surface, zeros, face, point, radius):
        raise TraceError("start point lies inside the zero neighbourhood")
    field_fn = lambda f: direction * np.array([-covectors[f][1], covectors[f][0]])
    return trace_straight(surface, field_fn, face, point, max_len, _zero_stop(surface, zeros, radius))


# ---------------------------------------------------------------- midpoint graph search

def _midpoints(surface, f):
    P = surface.corner_positions(f)
    return np.array([(P[k] + P[(k + 1) % 3]) / 2 for k in range(3)])


def _midpoint_search(surface, covectors, start_face, start_point, goal_fn, forbid=None, simple=True):
    """BFS along strictly beta-increasing midpoint segments.

    States are (face, entry slot). goal_fn(face, entry_slot, entry_point)
    returns a final point or None. With ``simple`` each face is entered at
    most once, which makes the polyline embedded; otherwise faces may repeat.
    """
    F = surface.n_faces
    forbid = np.zeros(F, bool) if forbid is None else forbid
    c0 = covectors[start_face]
    M0 = _midpoints(surface, start_face)
    visited = np.zeros(F, bool)
    visited[start_face] = True
    queue = deque()
    parent = {}
    for k in range(3):
        if c0 @ (M0[k] - start_point) > 0:
            g, kg = surface.neighbor(start_face, k)
            if forbid[g]:
                continue
            state = (g, kg)
            if state not in parent:
                parent[state] = (None, k)
                queue.append(state)
    expanded = set()
    while queue:
        g, kg = queue.popleft()
        Mg = _midpoints(surface, g)
        end = goal_fn(g, kg, Mg[kg])
        if end is not None:
            chain = [(g, kg)]
            st = (g, kg)
            while parent[st][0] is not None:
                st = parent[st][0]
                chain.append(st)
            chain.reverse()
            first_slot = parent[chain[0]][1]
            segs = [(start_face, np.asarray(start_point, float), M0[first_slot])]
            cross = [_cross_into(surface, start_face, first_slot)]
            for i, (h, kh) in enumerate(chain):
                Mh = _midpoints(surface, h)
                if i + 1 < len(chain):
                    out_slot = parent[chain[i + 1]][1]
                    segs.append((h, Mh[kh], Mh[out_slot]))
                    cross.append(_cross_into(surface, h, out_slot))
                else:
                    segs.append((h, Mh[kh], end))
            return segs, cross
        if simple:
            if visited[g]:
                continue
            visited[g] = True
        elif (g, kg) in expanded or g == start_face:
            continue
        expanded.add((g, kg))
        for k in range(3):
            if k == kg or covectors[g] @ (Mg[k] - Mg[kg]) <= 0:
                continue
            h, kh = surface.neighbor(g, k)
            if forbid[h] or (simple and visited[h] and h != start_face):
                continue
            state = (h, kh)
            if state not in parent:
                parent[state] = ((g, kg), k)
                queue.append(state)
    return None


def is_embedded(path: SurfacePath) -> bool:
    """No face carries two segments (apart from the two halves at a closed path's start)."""
    faces = [f for f, _, _ in path.segments]
    if path.closed and len(faces) > 1 and faces[0] == faces[-1]:
        faces = faces[:-1]
    return len(set(faces)) == len(faces)


def closed_transversal(surface, covectors, point: tuple[int, np.ndarray], zeros=(), R0: float = 0.0,
                       forbid=None, max_len: float | None = None, method: str = "auto") -> SurfacePath:
    """Closed path through a face-local point with beta(tangent) > 0 throughout.

    First follows the dual gradient line; if that does not return to the
    point, searches the midpoint graph.
    """
    face, p = point
    p = np.asarray(p, float)
    if not _start_ok(surface, zeros, face, p, np.sqrt(R0)):
        raise TraceError("point lies inside the zero neighbourhood")
    if max_len is None:
        max_len = 4.0 * float(np.sqrt(surface.areas.sum()))
    if method == "auto" and (forbid is None or not forbid.any()):
        try:
            path = trace_straight(surface, lambda f: covectors[f], face, p, max_len,
                                  _zero_stop(surface, zeros, np.sqrt(R0)))
            if path.closed and path.margin(covectors) > 0:
                return path
        except TraceError:
            pass
    c = covectors[face]

    def goal(g, kg, m_in):
        if g == face and c @ (p - m_in) > 0:
            return p
        return None

    found = _midpoint_search(surface, covectors, face, p, goal, forbid)
    if found is None:
        # immersed fallback; crossings are kept, which is all the PD form uses
        found = _midpoint_search(surface, covectors, face, p, goal, forbid, simple=False)
    if found is None:
        raise TraceError(f"no closed transversal found through face {face}")
    segs, cross = found
    return _path_from_segments(segs, cross, True, "closed")


def transverse_path(surface, covectors, q: ZeroPoint, p: ZeroPoint) -> SurfacePath:
    """Embedded path from zero q to zero p with beta(tangent) > 0 on its interior."""
    if q is None or p is None:
        raise TraceError("transverse paths need a pair of zeros")
    vf = surface.vertex_faces()
    targets = {f: k for f, k in vf[p.vertex]}
    for f, k in vf[q.vertex]:
        P = surface.corner_positions(f)
        start = P[k]

        def goal(g, kg, m_in):
            if g in targets:
                end = surface.corner_positions(g)[targets[g]]
                if covectors[g] @ (end - m_in) > 0:
                    return end
            return None

        found = _midpoint_search(surface, covectors, f, start, goal)
        if found is not None:
            segs, cross = found
            return _path_from_segments(segs, cross, False, "reached zero")
    for f, k in vf[q.vertex]:
        start = surface.corner_positions(f)[k]
        found = _midpoint_search(surface, covectors, f, start, goal, simple=False)
        if found is not None:
            segs, cross = found
            return _path_from_segments(segs, cross, False, "reached zero")
    raise TraceError(f"no transverse path from vertex {q.vertex} to {p.vertex}")


# ---------------------------------------------------------------- Poincare-dual bumps

@dataclass(frozen=True, eq=False)
class BumpForm:
    form: DiscreteOneForm
    support: np.ndarray  # bool per face: the strip
    path: SurfacePath
    width: int = 1  # strip width in face rings

    def covectors(self, surface) -> np.ndarray:
        return dec.face_covectors(surface, self.form)


def pd_bump(surface, path: SurfacePath, width: int = 1, covectors=None) -> BumpForm:
    """Poincare dual of a closed edge-crossing path, supported on the faces it crosses.

    The value on an edge is the signed number of times the path crosses it.
    On a face crossed once this is dh for h the indicator of the corner left
    alone on one side of the path, so the form is the one-ring bump phi(s) ds
    of the strip. Periods are the intersection numbers with the path.
    """
    if not path.closed:
        raise ValueError("pd_bump needs a closed path")
    if width != 1:
        raise ValueError("only one-face-ring strips are supported")
    vals = np.zeros(surface.n_edges)
    strip = np.zeros(surface.n_faces, bool)
    for e, s in path.crossings:
        # crossing into the left face of a->b lowers nothing on a, so the left vertex carries h = 1
        vals[e] -= s
        strip[surface.edge_faces[e]] = True
    bump = BumpForm(DiscreteOneForm(vals), strip, path, width)
    if covectors is not None:
        dens = _density(covectors, bump.covectors(surface))
        if dens.min() < -1e-12 * max(1.0, float(np.abs(dens).max())):
            raise ValueError("strip geometry gives beta ^ PD < 0 on some face")
    return bump


def _density(ca, cb):
    return ca[:, 0] * cb[:, 1] - ca[:, 1] * cb[:, 0]


def face_zero_distance(surface, zeros) -> np.ndarray:
    """Flat distance from each face centroid to the nearest zero, exact on zero stars and an
    edge-path upper bound elsewhere."""
    if not zeros:
        return np.full(surface.n_faces, np.inf)
    vd = dec.vertex_distances(surface, [z.vertex for z in zeros])
    out = np.full(surface.n_faces, np.inf)
    zv = {z.vertex for z in zeros}
    for f in range(surface.n_faces):
        P = surface.corner_positions(f)
        cen = P.mean(axis=0)
        for k, v in enumerate(surface.triangles[f]):
            d = np.linalg.norm(cen - P[k]) + (0.0 if v in zv else vd[v])
            out[f] = min(out[f], d)
    return out


def _strip_through(surface, covectors, f, zeros, forbid=None) -> BumpForm:
    """A PD strip crossing face f: through its centroid, else through an admissible midpoint segment."""
    P = surface.corner_positions(f)
    M = _midpoints(surface, f)
    points = [P.mean(axis=0)]
    for i in range(3):
        for j in range(3):
            if i != j and covectors[f] @ (M[j] - M[i]) > 0:
                points.append(0.5 * (M[i] + M[j]) + 1e-3 * (P.mean(axis=0) - 0.5 * (M[i] + M[j])))
    last = None
    for k, pt in enumerate(points):
        for method in (("auto", "midpoint") if k == 0 else ("midpoint",)):
            try:
                path = closed_transversal(surface, covectors, (f, pt), zeros, 0.0, forbid=forbid, method=method)
                return pd_bump(surface, path, covectors=covectors)
            except (TraceError, ValueError) as exc:
                last = exc
    raise TraceError(f"no closed transversal crosses face {f}: {last}")


def cover_complement_of_B(surface, covectors, R0: float, zeros=(), budget: int | None = None,
                          tol: float = 1e-12, forbid=None) -> list[BumpForm]:
    """Greedy cover of faces outside the sqrt(R0)-neighbourhood of the zeros by PD strips.

    ``forbid`` marks faces no strip may enter (for instance the zero stars).
    """
    budget = surface.n_faces if budget is None else budget
    # the closed star of a zero vertex always belongs to B: a one-ring strip with
    # positive density cannot pass through every face touching a saddle
    need = (face_zero_distance(surface, list(zeros)) > np.sqrt(R0)) & ~dec.zero_faces(surface, list(zeros))
    covered = np.zeros(surface.n_faces, bool)
    bumps = []
    while True:
        todo = np.flatnonzero(need & ~covered)
        if len(todo) == 0:
            return bumps
        if len(bumps) >= budget:
            raise TraceError(f"cover incomplete after {budget} strips; uncovered faces {todo[:50].tolist()}")
        f = int(todo[0])
        bump = _strip_through(surface, covectors, f, zeros, forbid)
        dens = _density(covectors, bump.covectors(surface))
        newly = dens > tol * max(1.0, float(dens.max()))
        if not newly[f]:
            raise TraceError(f"strip through face {f} does not cover it")
        covered |= newly
        bumps.append(bump)


def bump_sum(surface, bumps) -> DiscreteOneForm:
    vals = np.zeros(surface.n_edges)
    for b in bumps:
        vals += b.form.edge_values
    return DiscreteOneForm(vals)


def intersection_numbers(path: SurfacePath, basis) -> np.ndarray:
    """Signed crossings of each basis loop with a path (loop dotted with PD(path))."""
    out = np.zeros(len(basis.loops))
    cnt: dict = {}
    for e, s in path.crossings:
        cnt[e] = cnt.get(e, 0) + s
    for i, loop in enumerate(basis.loops):
        out[i] = -sum(sl * cnt.get(e, 0) for e, sl in loop)
    return out


# ---------------------------------------------------------------- level sets

def circle_primitive(surface, beta: np.ndarray) -> np.ndarray:
    """Vertex lifts u with u(b) - u(a) = beta(e) along a spanning tree."""
    V = surface.n_vertices
    adj: list[list[tuple[int, int, int]]] = [[] for _ in range(V)]
    for e, (a, b) in enumerate(surface.edges):
        adj[a].append((b, e, 1))
        adj[b].append((a, e, -1))
    u = np.full(V, np.nan)
    u[0] = 0.0
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w, e, s in adj[v]:
            if np.isnan(u[w]):
                u[w] = u[v] + s * beta[e]
                queue.append(w)
    return u


def regular_level_multicurve(surface, beta, theta: float, zeros=(), tol: float = 1e-9) -> list[SurfacePath]:
    """Components of {u = theta mod 1} for a closed form with integral periods."""
    vals = beta.edge_values if isinstance(beta, DiscreteOneForm) else np.asarray(beta)
    u = circle_primitive(surface, vals)
    frac = np.mod(u - theta, 1.0)
    near = np.minimum(frac, 1 - frac)
    crit = [np.mod(u[z.vertex], 1.0) for z in zeros]
    for cv in crit:
        dd = abs(np.mod(cv - theta + 0.5, 1.0) - 0.5)
        if dd < 1e-6:
            raise ValueError(f"theta={theta} is a critical value; try theta={np.mod(theta + 0.01, 1.0):.4f}")
    if near.min() < tol:
        v = int(np.argmin(near))
        raise ValueError(f"level passes through vertex {v}; try theta={np.mod(theta + 1e-3, 1.0):.6f}")

    # crossings keyed by (edge, integer level offset in the edge's own lift)
    ends: dict = {}
    pieces = []
    for f in range(surface.n_faces):
        tri = surface.triangles[f]
        a = surface.face_edge_signs[f] * vals[surface.face_edge_ids[f]]
        U = np.array([u[tri[0]], u[tri[0]] + a[0], u[tri[0]] + a[0] + a[1]])
        P = surface.corner_positions(f)
        lo, hi = U.min(), U.max()
        m0, m1 = int(np.ceil(lo - theta)), int(np.floor(hi - theta))
        for m in range(m0, m1 + 1):
            L = theta + m
            pts = []
            for k in range(3):
                u0, u1 = U[k], U[(k + 1) % 3]
                if (u0 - L) * (u1 - L) < 0:
                    tt = (L - u0) / (u1 - u0)
                    e = int(surface.face_edge_ids[f, k])
                    ea, eb = surface.edges[e]
                    # edge-lift level: shift so the edge tail carries its own u value
                    tail_face_val = u0 if surface.face_edge_signs[f, k] == 1 else u1
                    shift = int(round(tail_face_val - u[ea]))
                    key = (e, int(round(L - shift - theta)))
                    pts.append((key, P[k] + tt * (P[(k + 1) % 3] - P[k])))
            if len(pts) != 2:
                raise ValueError(f"level degenerate on face {f}")
            idx = len(pieces)
            pieces.append((f, pts[0], pts[1]))
            for key, _ in pts:
                ends.setdefault(key, []).append(idx)
    used = np.zeros(len(pieces), bool)
    curves = []
    for start in range(len(pieces)):
        if used[start]:
            continue
        segs, cross = [], []
        f, (k0, p0), (k1, p1) = pieces[start]
        used[start] = True
        segs.append((f, p0, p1))
        cur_key = k1
        while True:
            cross.append((cur_key[0], 0))
            nxt = [i for i in ends[cur_key] if not used[i]]
            if not nxt:
                break
            i = nxt[0]
            used[i] = True
            g, (ka, pa), (kb, pb) = pieces[i]
            if ka == cur_key:
                segs.append((g, pa, pb))
                cur_key = kb
            else:
                segs.append((g, pb, pa))
                cur_key = ka
        if cur_key != k0:
            raise ValueError("level curve did not close")
        curves.append(_path_from_segments(segs, cross, True, "level"))
    return curves


def curve_homology(surface, curve: SurfacePath, beta, basis) -> np.ndarray:
    """Intersection numbers of basis loops with a level curve, signed by beta on crossed edges."""
    vals = beta.edge_values if isinstance(beta, DiscreteOneForm) else np.asarray(beta)
    out = np.zeros(len(basis.loops))
    for i, loop in enumerate(basis.loops):
        for e, sl in loop:
            n = sum(1 for ce, _ in curve.crossings if ce == e)
            out[i] += n * sl * np.sign(vals[e])
    return out


def pants_check(surface, beta, zeros, thetas=None) -> dict:
    """One regular level per complementary interval of the critical values; Euler count per piece.

    A circle-valued primitive of a harmonic form has no local extrema, so every
    component of a piece meets both boundary levels and has chi <= 0. A piece
    with one saddle (chi = -1) is therefore one pair of pants plus
    (boundary - 3) / 2 parallel annuli.
    """
    vals = beta.edge_values if isinstance(beta, DiscreteOneForm) else np.asarray(beta)
    u = circle_primitive(surface, vals)
    crit = sorted(np.mod(u[z.vertex], 1.0) for z in zeros)
    if not crit:
        return {"intervals": [], "pants": False}
    if thetas is None:
        bounds = crit + [crit[0] + 1.0]
        thetas = []
        for a, b in zip(bounds[:-1], bounds[1:]):
            if b - a < 1e-9:
                continue
            # nudge off vertex values
            t = (a + b) / 2
            for _ in range(50):
                fr = np.mod(u - t, 1.0)
                if np.minimum(fr, 1 - fr).min() > 1e-7:
                    break
                t += (b - a) * 1e-3
            thetas.append(float(np.mod(t, 1.0)))
    levels = [regular_level_multicurve(surface, vals, t, zeros) for t in thetas]
    n = len(thetas)
    order = np.argsort(thetas)
    ts = [thetas[i] for i in order]
    lv = [levels[i] for i in order]
    pieces = []
    for i in range(n):
        a, b = ts[i], ts[(i + 1) % n] + (1.0 if i == n - 1 else 0.0)
        inside = [cv for cv in crit if a < cv < b or a < cv + 1 < b]
        chi = -len(inside)
        nb = len(lv[i]) + len(lv[(i + 1) % n])
        ok = chi == -1 and nb >= 3 and (nb - 3) % 2 == 0
        pieces.append({"interval": [a, b], "euler_characteristic": chi, "boundary_curves": nb,
                       "annuli": (nb - 3) // 2 if ok else None, "pants": ok})
    return {
        "thetas": ts,
        "curves_per_level": [len(c) for c in lv],
        "pieces": pieces,
        "total_curves": int(sum(len(c) for c in lv)),
        "pants": bool(pieces) and all(p["pants"] for p in pieces),
    }


def paths_to_json(surface, paths, groups=None) -> str:
    if groups is None:
        return json.dumps([p.to_json_obj(surface) for p in paths], indent=1)
    return json.dumps({k: [p.to_json_obj(surface) for p in v] for k, v in groups.items()}, indent=1)
