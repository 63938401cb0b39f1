"""Surface loading and the harmonic-to-spine pipeline shared by the CLI and tests."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dec, mesh, spine
from .cocycle import CocycleTriple, make_triple
from .config import ConfigError, RunConfig

# fixed generic periods for genus 2; nondegenerate zeros on octagon meshes
GENUS2_PERIODS = (1.0, 0.37, -0.21, 0.6)


@dataclass(frozen=True, eq=False)
class LoadedSurface:
    surface: mesh.TriangulatedSurface
    weights: dec.MetricWeights
    basis: dec.HomologyBasis
    kind: str


def load_surface(cfg: RunConfig) -> LoadedSurface:
    """``torus:N``, ``jiggle:N:SEED``, ``octagon:N`` or a path to an OFF / polygon-gluing file."""
    spec = cfg.mesh
    kind = "file"
    loops_n = None
    try:
        if spec.startswith("torus:"):
            n = int(spec.split(":")[1])
            surf, kind, loops_n = mesh.flat_torus(n), "torus", n
        elif spec.startswith("jiggle:"):
            _, n, sd = spec.split(":")
            surf, kind, loops_n = mesh.jiggled_torus(int(n), cfg.jiggle, int(sd)), "torus", int(n)
        elif spec.startswith("octagon:"):
            surf, kind = mesh.octagon_surface(int(spec.split(":")[1])), "octagon"
        else:
            path = cfg.resolve(spec)
            if not path.exists():
                raise ConfigError(f"mesh file not found: {path}")
            surf = mesh.read_off(path) if path.suffix.lower() == ".off" else mesh.read_polygon_gluing(path)
    except ValueError as exc:
        if isinstance(exc, (ConfigError, mesh.MeshError)):
            raise
        raise ConfigError(f"bad mesh spec {spec!r}: {exc}") from None
    if cfg.edge_lengths:
        surf = mesh.apply_edge_lengths(surf, mesh.read_edge_lengths(cfg.resolve(cfg.edge_lengths)))
    surf, w = dec.prepare(surf)
    if loops_n is not None:
        basis = dec.basis_from_loops(surf, mesh.torus_loops(surf, loops_n))
    else:
        basis = dec.homology_basis(surf)
    return LoadedSurface(surf, w, basis, kind)


def default_periods(genus: int, seed: int = 0) -> np.ndarray:
    if genus == 1:
        return np.array([1.0, 0.0])
    if genus == 2:
        return np.array(GENUS2_PERIODS)
    rng = np.random.default_rng(seed)
    p = rng.uniform(-1, 1, 2 * genus)
    p[0] = 1.0
    return p


def read_form(path) -> np.ndarray:
    vals = []
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            vals.append(float(text.split()[-1]))
        except ValueError as exc:
            raise ConfigError(f"{path}: line {lineno}: {exc}") from None
    return np.array(vals)


def harmonic_form(ls: LoadedSurface, cfg: RunConfig, periods=None) -> dec.DiscreteOneForm:
    s = ls.surface
    if cfg.form is not None:
        vals = read_form(cfg.resolve(cfg.form))
        if len(vals) != s.n_edges:
            raise ConfigError(f"form file has {len(vals)} values, mesh has {s.n_edges} edges")
        beta = dec.DiscreteOneForm(vals)
        if not dec.is_closed(s, beta, 1e-8):
            raise ConfigError("form file is not closed")
        return dec.harmonic_projection(s, ls.weights, beta)
    if periods is None:
        periods = cfg.periods if cfg.periods is not None else default_periods(s.genus, cfg.seed)
    periods = np.asarray(periods, float)
    if periods.shape != (len(ls.basis.loops),):
        raise ConfigError(f"need {len(ls.basis.loops)} periods for genus {s.genus}, got {len(periods)}")
    return dec.harmonic_representative(s, ls.weights, periods, ls.basis)


def triple_from_config(cfg: RunConfig, ls: LoadedSurface | None = None, periods=None) -> CocycleTriple:
    ls = load_surface(cfg) if ls is None else ls
    beta = harmonic_form(ls, cfg, periods)
    return make_triple(ls.surface, ls.weights, beta, ls.basis, flip_convention=cfg.flip_convention)


def grid_from_config(cfg: RunConfig) -> spine.GridSpec:
    return spine.GridSpec(cfg.grid_s, cfg.grid_t, cfg.polar_levels, cfg.polar_angles)


def box_from_config(cfg: RunConfig) -> spine.SearchBox:
    return spine.SearchBox(epsilon=cfg.epsilon_range, invC=cfg.invC_range, deltaC=cfg.deltaC_range, n=cfg.sweep)


def assembly_from_config(cfg: RunConfig, triple: CocycleTriple) -> spine.SpineAssembly:
    return spine.build_assembly(triple, kappa=cfg.kappa, seed=cfg.seed)


def budget_for(cfg: RunConfig, asm: spine.SpineAssembly, grid=None):
    """A pinned budget when epsilon, delta and C are all given, else a constant search.

    Returns (budget, search result or None).
    """
    grid = grid_from_config(cfg) if grid is None else grid
    radii = cfg.radii if cfg.radii is not None else asm.default_radii
    if len(cfg.pinned) == 3:
        return spine.ConstantBudget(cfg.epsilon, cfg.delta, cfg.C, tuple(radii), cfg.depth_factor), None
    res = spine.constant_search(asm, grid, box_from_config(cfg), radii, cfg.depth_factor, cfg.pinned)
    return res.budget, res


def family_triples(cfg: RunConfig) -> list[CocycleTriple]:
    """Isoperiodic: jiggled tori sharing periods. Scaling: one mesh, periods multiplied by 1..k."""
    n = int(cfg.mesh.split(":")[1]) if cfg.mesh.split(":")[0] in ("torus", "jiggle") else 8
    out = []
    for k in range(cfg.family_size):
        if cfg.family == "isoperiodic":
            sub = RunConfig(**{**cfg.to_dict(), "mesh": f"jiggle:{n}:{cfg.seed + k}", "base_dir": cfg.base_dir})
            out.append(triple_from_config(sub))
        else:
            ls = load_surface(cfg)
            base = cfg.periods if cfg.periods is not None else default_periods(ls.surface.genus, cfg.seed)
            out.append(triple_from_config(cfg, ls, np.asarray(base) * (k + 1)))
    return out
