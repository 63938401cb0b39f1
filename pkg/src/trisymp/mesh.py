"""Closed oriented triangulated surfaces.

Each face stores its three edge vectors (corner k to corner k+1) in a 2D
frame. On a translation surface all faces share one frame and neighbouring
faces differ only by a translation; meshes read from 3D OFF files get an
independent frame per face and only support the metric operations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class MeshError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TriangulatedSurface:
    n_vertices: int
    triangles: np.ndarray  # (F, 3)
    face_edges: np.ndarray  # (F, 3, 2) edge k: corner k -> corner k+1
    translation: bool = True
    positions: np.ndarray | None = None  # optional embedding, for export only
    name: str = "surface"
    edges: np.ndarray = field(init=False)  # (E, 2), v0 < v1 except loops
    face_edge_ids: np.ndarray = field(init=False)  # (F, 3)
    face_edge_signs: np.ndarray = field(init=False)  # (F, 3) +1 if face edge agrees
    edge_faces: np.ndarray = field(init=False)  # (E, 2) [left face, right face]
    edge_slots: np.ndarray = field(init=False)  # (E, 2) slot in each face

    def __post_init__(self):
        tri = np.asarray(self.triangles, dtype=int)
        fe = np.asarray(self.face_edges, dtype=float)
        object.__setattr__(self, "triangles", tri)
        object.__setattr__(self, "face_edges", fe)
        # edges are keyed by their vertex pair plus edge vector so that the
        # one-vertex octagon surface (many loops at the cone point) is handled
        half = {}
        for f in range(len(tri)):
            for k in range(3):
                a, b = tri[f, k], tri[f, (k + 1) % 3]
                half[(f, k)] = (a, b)
        pairs = {}
        for (f, k), (a, b) in half.items():
            vec = fe[f, k]
            key = (a, b, *np.round(vec, 9)) if self.translation else (a, b)
            pairs.setdefault(key, []).append((f, k))
        edges, ef, es = [], [], []
        eid = -np.ones((len(tri), 3), dtype=int)
        esign = np.zeros((len(tri), 3), dtype=int)
        seen = set()
        for key, hs in pairs.items():
            if key in seen:
                continue
            a, b = key[0], key[1]
            okey = (b, a, *np.round(-np.asarray(key[2:]), 9)) if self.translation else (b, a)
            opp = pairs.get(okey, [])
            if len(hs) != 1 or len(opp) != 1:
                raise MeshError(f"edge {a}-{b} is not shared by exactly two oppositely oriented faces")
            seen.add(key)
            seen.add(okey)
            (f0, k0), (f1, k1) = hs[0], opp[0]
            idx = len(edges)
            # edge orientation follows the half-edge in f0; f0 is its left face
            edges.append((a, b))
            ef.append((f0, f1))
            es.append((k0, k1))
            eid[f0, k0], esign[f0, k0] = idx, 1
            eid[f1, k1], esign[f1, k1] = idx, -1
        object.__setattr__(self, "edges", np.array(edges, dtype=int).reshape(-1, 2))
        object.__setattr__(self, "face_edge_ids", eid)
        object.__setattr__(self, "face_edge_signs", esign)
        object.__setattr__(self, "edge_faces", np.array(ef, dtype=int).reshape(-1, 2))
        object.__setattr__(self, "edge_slots", np.array(es, dtype=int).reshape(-1, 2))
        closing = np.abs(fe.sum(axis=1)).max() if len(fe) else 0.0
        if closing > 1e-9:
            raise MeshError("face edge vectors do not close up")
        if np.any(self.areas <= 0):
            raise MeshError(f"faces {np.flatnonzero(self.areas <= 0)[:10].tolist()} are degenerate or inverted")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.triangles)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic) // 2

    @property
    def areas(self) -> np.ndarray:
        e0, e1 = self.face_edges[:, 0], self.face_edges[:, 1]
        return 0.5 * (e0[:, 0] * e1[:, 1] - e0[:, 1] * e1[:, 0])

    @property
    def edge_vectors(self) -> np.ndarray:
        """Edge vectors in the frame of each edge's left face."""
        f, k = self.edge_faces[:, 0], self.edge_slots[:, 0]
        return self.face_edges[f, k]

    @property
    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edge_vectors, axis=1)

    def corner_positions(self, f: int) -> np.ndarray:
        """Corner coordinates of face f with corner 0 at the origin."""
        e = self.face_edges[f]
        return np.array([[0.0, 0.0], e[0], e[0] + e[1]])

    def centroid_offset(self, f: int) -> np.ndarray:
        return self.corner_positions(f).mean(axis=0)

    def vertex_faces(self) -> list[list[tuple[int, int]]]:
        out: list[list[tuple[int, int]]] = [[] for _ in range(self.n_vertices)]
        for f, tri in enumerate(self.triangles):
            for k, v in enumerate(tri):
                out[v].append((f, k))
        return out

    def cone_angles(self) -> np.ndarray:
        ang = np.zeros(self.n_vertices)
        for f in range(self.n_faces):
            e = self.face_edges[f]
            for k in range(3):
                u, w = e[k], -e[(k - 1) % 3]
                c = np.dot(u, w) / (np.linalg.norm(u) * np.linalg.norm(w))
                ang[self.triangles[f, k]] += np.arccos(np.clip(c, -1, 1))
        return ang

    def neighbor(self, f: int, k: int) -> tuple[int, int]:
        """Face and slot across edge slot k of face f."""
        e = self.face_edge_ids[f, k]
        side = 0 if self.edge_faces[e, 0] == f and self.edge_slots[e, 0] == k else 1
        return int(self.edge_faces[e, 1 - side]), int(self.edge_slots[e, 1 - side])


def flat_torus(n: int = 8, m: int | None = None, a=(1.0, 0.0), b=(0.0, 1.0)) -> TriangulatedSurface:
    """n x m grid on the torus R^2 / (Z a + Z b), each cell split along a diagonal."""
    m = n if m is None else m
    a, b = np.asarray(a, float), np.asarray(b, float)
    ua, ub = a / n, b / m

    def vid(i, j):
        return (i % n) * m + (j % m)

    tris, fes = [], []
    for i in range(n):
        for j in range(m):
            v00, v10, v11, v01 = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            tris.append((v00, v10, v11))
            fes.append((ua, ub, -ua - ub))
            tris.append((v00, v11, v01))
            fes.append((ua + ub, -ua, -ub))
    pos = np.array([[i, j] for i in range(n) for j in range(m)], float) @ np.stack([ua, ub])
    return TriangulatedSurface(n * m, np.array(tris), np.array(fes), True, pos, name=f"torus{n}x{m}")


def jiggled_torus(n: int = 8, amplitude: float = 0.15, seed: int = 0) -> TriangulatedSurface:
    """flat_torus(n) with every vertex displaced by up to ``amplitude`` grid cells.

    The displacement is periodic, so the lattice and hence the combinatorics and
    the homology periods of the underlying translation structure are unchanged.
    """
    base = flat_torus(n)
    rng = np.random.default_rng(seed)
    disp = rng.uniform(-amplitude, amplitude, size=(n * n, 2)) / n
    fes = base.face_edges.copy()
    for f, tri in enumerate(base.triangles):
        for k in range(3):
            fes[f, k] += disp[tri[(k + 1) % 3]] - disp[tri[k]]
    pos = base.positions + disp
    return TriangulatedSurface(base.n_vertices, base.triangles, fes, True, pos, name=f"torus{n}_jiggle{seed}")


def torus_standard_loops(n: int, m: int | None = None) -> list[list[tuple[int, int]]]:
    """The a-loop (row j = 0) and b-loop (column i = 0) of flat_torus as vertex paths."""
    m = n if m is None else m
    loop_a = [(i * m, ((i + 1) % n) * m) for i in range(n)]
    loop_b = [(j, (j + 1) % m) for j in range(m)]
    return [loop_a, loop_b]


def regular_polygon(sides: int, radius: float = 1.0) -> np.ndarray:
    k = np.arange(sides)
    ang = 2 * np.pi * k / sides + np.pi / sides
    return radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def polygon_surface(poly: np.ndarray, pairing: list[tuple[int, int]], n: int = 4,
                    name: str = "polygon") -> TriangulatedSurface:
    """Translation surface from a convex polygon with sides glued in pairs.

    Side k runs poly[k] -> poly[k+1]. Each pair (i, j) must have antiparallel
    sides of equal length; side i is glued to side j by a translation. The
    polygon is fanned from its centroid and every fan triangle subdivided n
    times.
    """
    poly = np.asarray(poly, float)
    P = len(poly)
    side = lambda k: poly[(k + 1) % P] - poly[k]
    partner = {}
    for i, j in pairing:
        if np.linalg.norm(side(i) + side(j)) > 1e-9:
            raise MeshError(f"sides {i} and {j} are not antiparallel translates")
        partner[i], partner[j] = j, i
    if sorted(partner) != list(range(P)):
        raise MeshError("pairing must use every side exactly once")
    center = poly.mean(axis=0)

    # corners are identified by following the gluing around; union-find on corners
    parent = list(range(P))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in pairing:
        # start of side i glues to end of side j and vice versa
        for u, w in ((i, (j + 1) % P), ((i + 1) % P, j)):
            parent[find(u)] = find(w)

    keys: dict = {}

    def vkey(k, i, j):
        # fan triangle k: center + (i/n)(poly[k]-c) + (j/n)(poly[k+1]-c)
        if i == 0 and j == 0:
            return ("center",)
        if i + j == n:
            if j == 0:
                return ("corner", find(k))
            if i == 0:
                return ("corner", find((k + 1) % P))
            s, u = k, j
            if s > partner[s]:
                s, u = partner[s], n - u
            return ("side", s, u)
        if j == 0:
            return ("radial", k, i)
        if i == 0:
            return ("radial", (k + 1) % P, j)
        return ("int", k, i, j)

    def vid(key):
        if key not in keys:
            keys[key] = len(keys)
        return keys[key]

    tris, fes = [], []
    for k in range(P):
        A, B = (poly[k] - center) / n, (poly[(k + 1) % P] - center) / n
        pos = lambda i, j: i * A + j * B
        for i in range(n):
            for j in range(n - i):
                c = [(i, j), (i + 1, j), (i, j + 1)]
                tris.append([vid(vkey(k, *q)) for q in c])
                p = [pos(*q) for q in c]
                fes.append([p[1] - p[0], p[2] - p[1], p[0] - p[2]])
                if i + j < n - 1:
                    c = [(i + 1, j), (i + 1, j + 1), (i, j + 1)]
                    tris.append([vid(vkey(k, *q)) for q in c])
                    p = [pos(*q) for q in c]
                    fes.append([p[1] - p[0], p[2] - p[1], p[0] - p[2]])
    surf = TriangulatedSurface(len(keys), np.array(tris), np.array(fes), True, None, name=name)
    return surf


def octagon_surface(n: int = 4) -> TriangulatedSurface:
    """Genus-2 surface: regular octagon with opposite sides glued."""
    poly = regular_polygon(8)
    return polygon_surface(poly, [(k, k + 4) for k in range(4)], n, name=f"octagon{n}")


def read_off(path: str | Path) -> TriangulatedSurface:
    """OFF reader. Faces get independent planar frames (no translation structure)."""
    lines = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        text = raw.split("#", 1)[0].strip()
        if text:
            lines.append((lineno, text))
    if not lines:
        raise MeshError(f"{path}: empty file")
    idx = 0
    if lines[0][1].upper().startswith("OFF"):
        rest = lines[0][1][3:].strip()
        if rest:
            lines[0] = (lines[0][0], rest)
        else:
            idx = 1
    try:
        lineno, text = lines[idx]
        nv, nf = (int(x) for x in text.split()[:2])
        verts = []
        for lineno, text in lines[idx + 1: idx + 1 + nv]:
            verts.append([float(x) for x in text.split()[:3]])
        faces = []
        for lineno, text in lines[idx + 1 + nv: idx + 1 + nv + nf]:
            parts = [int(x) for x in text.split()]
            if parts[0] != 3 or len(parts) < 4:
                raise MeshError(f"line {lineno}: only triangles are supported")
            faces.append(parts[1:4])
    except (ValueError, IndexError) as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"{path}: parse error at line {lineno}: {exc}") from None
    if len(verts) != nv or len(faces) != nf:
        raise MeshError(f"{path}: expected {nv} vertices and {nf} faces")
    verts = np.array(verts)
    faces = np.array(faces)
    if faces.min() < 0 or faces.max() >= nv:
        raise MeshError(f"{path}: face index out of range")
    fes = []
    for tri in faces:
        p = verts[tri]
        u, w = p[1] - p[0], p[2] - p[0]
        ex = u / np.linalg.norm(u)
        nrm = np.cross(u, w)
        ey = np.cross(nrm, ex)
        ey /= np.linalg.norm(ey)
        q = np.stack([(p - p[0]) @ ex, (p - p[0]) @ ey], axis=1)
        fes.append([q[1] - q[0], q[2] - q[1], q[0] - q[2]])
    return TriangulatedSurface(nv, faces, np.array(fes), False, verts, name=Path(path).stem)


def write_off(surface: TriangulatedSurface, path: str | Path) -> None:
    if surface.positions is None:
        raise MeshError("surface has no embedding to write")
    pos = surface.positions
    if pos.shape[1] == 2:
        pos = np.hstack([pos, np.zeros((len(pos), 1))])
    out = ["OFF", f"{surface.n_vertices} {surface.n_faces} {surface.n_edges}"]
    out += [" ".join(f"{c:.17g}" for c in p) for p in pos]
    out += [f"3 {a} {b} {c}" for a, b, c in surface.triangles]
    Path(path).write_text("\n".join(out) + "\n")


def read_polygon_gluing(path: str | Path, n: int = 4) -> TriangulatedSurface:
    """Polygon-gluing text format.

    ::

        # comment
        vertices
        x0 y0
        ...
        pairs
        0 4
        1 5
    """
    section = None
    verts, pairs = [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if text.lower() in ("vertices", "pairs"):
            section = text.lower()
            continue
        try:
            if section == "vertices":
                x, y = (float(v) for v in text.split()[:2])
                verts.append((x, y))
            elif section == "pairs":
                i, j = (int(v) for v in text.split()[:2])
                pairs.append((i, j))
            else:
                raise ValueError("data before a section header")
        except ValueError as exc:
            raise MeshError(f"{path}: line {lineno}: {exc}") from None
    return polygon_surface(np.array(verts), pairs, n, name=Path(path).stem)


def torus_loops(surface: TriangulatedSurface, n: int, m: int | None = None):
    """Signed-edge versions of torus_standard_loops for flat_torus(n, m)."""
    from .dec import loop_from_vertices

    m = n if m is None else m
    la, lb = torus_standard_loops(n, m)
    return [loop_from_vertices(surface, la), loop_from_vertices(surface, lb)]


def read_edge_lengths(path: str | Path) -> dict[int, float]:
    """Edge-length override file: one ``edge_id length`` pair per line."""
    out: dict[int, float] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            e, length = text.split()[:2]
            out[int(e)] = float(length)
        except ValueError as exc:
            raise MeshError(f"{path}: line {lineno}: {exc}") from None
        if out[int(e)] <= 0:
            raise MeshError(f"{path}: line {lineno}: edge length must be positive")
    return out


def apply_edge_lengths(surface: TriangulatedSurface, lengths: dict[int, float]) -> TriangulatedSurface:
    """Rebuild face frames from edge lengths (overrides replace the current lengths).

    The result carries an intrinsic metric only, so it has no translation structure.
    """
    ell = surface.edge_lengths.copy()
    for e, v in lengths.items():
        if not 0 <= e < surface.n_edges:
            raise MeshError(f"edge id {e} out of range (surface has {surface.n_edges} edges)")
        ell[e] = v
    fes = []
    for f in range(surface.n_faces):
        a, b, c = ell[surface.face_edge_ids[f]]
        if not (a < b + c and b < a + c and c < a + b):
            raise MeshError(f"face {f}: edge lengths {a:.6g}, {b:.6g}, {c:.6g} violate the triangle inequality")
        # corner 0 at the origin, edge 0 along x; edge 2 closes back to corner 0
        x = (a * a + c * c - b * b) / (2 * a)
        p2 = np.array([x, np.sqrt(max(c * c - x * x, 0.0))])
        p1 = np.array([a, 0.0])
        fes.append([p1, p2 - p1, -p2])
    return TriangulatedSurface(surface.n_vertices, surface.triangles, np.array(fes), False,
                               surface.positions, name=surface.name)
