"""Acceptance criteria 1-9, each at its stated tolerance and runtime.

Every test records one PASS/FAIL line, printed again in the terminal summary.
Run alone with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import GENUS2_CFG, TORUS_CFG, record
from oracles import wedge_oracle
from trisymp import cli, dec, fs_demo, mesh, pipeline, spine
from trisymp.cocycle import isoperiodic_check, make_triple, validate_triple
from trisymp.config import RunConfig
from trisymp.forms import exterior_derivative_fd, wedge

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


# ---------------------------------------------------------------- 1

def test_criterion_1_fs_cocycle_difference():
    t0 = time.perf_counter()
    pts = fs_demo.random_overlap_points(1000, seed=0)
    worst = 0.0
    for lam in (1, 2, 3):
        diff = fs_demo.fs_cocycle_difference(lam, pts)
        # 2 r_lam^2 dtheta_lam: r_lam, theta_lam are the chart's (r_a, theta_a)
        target = fs_demo.stated_difference(pts)
        worst = max(worst, float(np.abs(diff.coeffs - target.coeffs).max()))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < 1.0
    record(1, ok, f"max residual {worst:.3e} (tol 1e-10), {dt:.2f}s")
    assert worst <= 1e-10, f"difference is not 2 r^2 dtheta_lam: max residual {worst:.3e}"
    assert dt < 1.0


# ---------------------------------------------------------------- 2

def _collar_points(rng, budget, model, n):
    e = budget.epsilon
    t = rng.uniform(-e, e, n)
    s = rng.uniform(0.05 * e, budget.depth - 0.05 * e, n)
    if model[0] == "face":
        xy = rng.uniform(0, 1, (n, 2))
    else:
        r = rng.uniform(0, 1.2 * np.sqrt(budget.radii[2]), n)
        th = rng.uniform(0, 2 * np.pi, n)
        xy = np.stack([r * np.cos(th), r * np.sin(th)], -1)
    return np.column_stack([t, s, xy])


def _fs_points(rng, n):
    p = fs_demo.random_overlap_points(n, int(rng.integers(1 << 30)), (0.3, 2.0))
    return p


def _fields(asm, budget, rng, n):
    """(field, points, step) for every constructor field."""
    out = []
    e = budget.epsilon
    face = int(np.flatnonzero(~asm.b_faces)[0])
    for lam in (1, 2, 3):
        for model in (("face", face), ("chart", 0)):
            for name in ("alpha", "mu_sigma", "mu_H", "mu_q", "mu_p", "mu_B", "beta_tilde"):
                out.append((spine.alpha_field(asm, lam, budget, model, name), _collar_points(rng, budget, model, n), e / 50))
    out.append((fs_demo.fs_field(), _fs_points(rng, n), 1e-3))
    for lam in (1, 2, 3):
        out.append((fs_demo.difference_field(lam), _fs_points(rng, n), 1e-3))
    return out


def test_criterion_2_algebra_oracle(genus2_asm, genus2_budget):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    n = 200
    problems = []
    worst_wedge, worst_ratio = 0.0, np.inf
    fields = _fields(genus2_asm, genus2_budget, rng, n)
    for fld, P, h in fields:
        a, da = fld(P), fld.derivative(P)
        # wedge against the brute-force permutation oracle
        for x, y in ((a, da), (da, da)):
            got = wedge(x, y).coeffs
            ref = wedge_oracle(x, y)
            err = float(np.abs(got - ref).max() / max(np.abs(ref).max(), 1.0))
            worst_wedge = max(worst_wedge, err)
            if err > 1e-12:
                problems.append(f"{fld.name}: wedge mismatch {err:.2e}")
        # d against central differences; O(h^2) means the error quarters when h halves
        e1 = float(np.abs(exterior_derivative_fd(fld, P, h).coeffs - da.coeffs).max())
        e2 = float(np.abs(exterior_derivative_fd(fld, P, h / 2).coeffs - da.coeffs).max())
        scale = max(float(np.abs(da.coeffs).max()), 1.0)
        floor = 1e-9 * scale
        if e1 > 1e-2 * scale:
            problems.append(f"{fld.name}: fd error {e1:.2e} at h={h:.1e}")
        if e1 > floor:
            ratio = e1 / max(e2, 1e-300)
            worst_ratio = min(worst_ratio, ratio)
            if not 3.0 <= ratio <= 5.0:
                problems.append(f"{fld.name}: error ratio {ratio:.2f} on halving h")
    dt = time.perf_counter() - t0
    ok = not problems and dt < 10.0
    record(2, ok, f"{len(fields)} fields x {n} points: wedge rel err {worst_wedge:.1e}, "
                  f"min halving ratio {worst_ratio:.2f}, {dt:.1f}s")
    assert not problems, problems[:10]
    assert dt < 10.0


# ---------------------------------------------------------------- 3

def test_criterion_3_hodge_suite():
    t0 = time.perf_counter()
    n = 32
    surf, w = dec.prepare(mesh.flat_torus(n))
    assert surf.n_faces >= 2 * n * n
    basis = dec.basis_from_loops(surf, mesh.torus_loops(surf, n))
    h = dec.harmonic_representative(surf, w, [1.0, 0.0], basis)
    # the constant form dx integrates to the x-extent of each edge
    dx = surf.edge_vectors[:, 0]
    edge_err = float(np.abs(h.edge_values - dx).max())

    g2 = pipeline.load_surface(GENUS2_CFG)
    dims = (dec.harmonic_dimension(surf, w), dec.harmonic_dimension(g2.surface, g2.weights))
    z_t = dec.find_zeros(surf, h)
    z_g = dec.find_zeros(g2.surface, pipeline.harmonic_form(g2, GENUS2_CFG))
    idx_t, idx_g = sum(z.index for z in z_t), sum(z.index for z in z_g)
    dt = time.perf_counter() - t0
    ok = (edge_err <= 1e-6 and dims == (2, 4) and (len(z_t), len(z_g)) == (0, 2)
          and (idx_t, idx_g) == (0, -2) and dt < 30)
    record(3, ok, f"edge error {edge_err:.1e}, dims {dims}, zeros {(len(z_t), len(z_g))}, "
                  f"index sums {(idx_t, idx_g)}, {dt:.1f}s")
    assert edge_err <= 1e-6
    assert dims == (2, 4)
    assert (len(z_t), len(z_g)) == (0, 2)
    assert (idx_t, idx_g) == (2 - 2 * 1, 2 - 2 * 2)
    assert dt < 30


# ---------------------------------------------------------------- 4

def test_criterion_4_triple_validation():
    t0 = time.perf_counter()
    rows = []
    for cfg in (TORUS_CFG, GENUS2_CFG):
        ls = pipeline.load_surface(cfg)
        tri = make_triple(ls.surface, ls.weights, pipeline.harmonic_form(ls, cfg), ls.basis)
        v = validate_triple(tri)
        zf = dec.zero_faces(ls.surface, tri.zero_set)
        dens_ok = min(v["density_minima"]) >= -1e-10
        # zero only on B-faces: strictly positive everywhere else
        off_b_ok = min(v["density_minima_off_B"]) > 0
        rows.append((ls.surface.genus, v["pass"] and dens_ok and off_b_ok and v["cup_pairing"] > 0,
                     v["cup_pairing"], int(zf.sum())))
    dt = time.perf_counter() - t0
    ok = all(r[1] for r in rows) and dt < 30
    record(4, ok, "; ".join(f"genus {g}: {'ok' if good else 'bad'} cup {c:.3g}, {nb} B-faces"
                            for g, good, c, nb in rows) + f", {dt:.1f}s")
    assert all(r[1] for r in rows), rows
    assert dt < 30


# ---------------------------------------------------------------- 5

def _strict_everywhere(rep: spine.VerificationReport, region=None) -> list:
    bad = []
    for lam in (1, 2, 3):
        for k in spine.CASES:
            for name in spine.INEQUALITIES:
                es = [e for e in rep.entries if e["lambda"] == lam and e["case"] == k and e["inequality"] == name
                      and (region is None or e["region"] == region)]
                if not es or not all(e["strict"] and e["min"] > 0 for e in es):
                    bad.append((lam, k, name))
    return bad


def test_criterion_5_torus_spine(torus_search):
    res = torus_search.value
    rep = res.report
    bad = _strict_everywhere(rep)
    b = res.budget
    ok = rep.passed and not bad and torus_search.seconds < 300
    record(5, ok, f"eps {b.epsilon:.3g} delta {b.delta:.3g} C {b.C:.3g}, margin {res.margin:.2e}, "
                  f"{len(rep.entries)} minima, {torus_search.seconds:.0f}s")
    assert rep.passed
    assert not bad, bad
    assert torus_search.seconds < 300


# ---------------------------------------------------------------- 6

def test_criterion_6_genus2_spine(genus2_search, genus2_asm):
    res = genus2_search.value
    rep = res.report
    om = rep.omega0
    b = res.budget
    outer_bad = _strict_everywhere(rep, "outer")
    tube = [e for e in rep.entries if e["region"] == "tube"]
    tube_bad = [(e["lambda"], e["case"], e["inequality"]) for e in tube if not e["strict"]]
    charts_ok = len(genus2_asm.charts) == 2 and om["n_B_samples"] == 2
    ok = (om["min"] >= -1e-10 and om["zero_locus_is_B"] and om["zero_locus_at_origin_is_B"] and charts_ok
          and not outer_bad and bool(tube) and not tube_bad and rep.passed and genus2_search.seconds < 900)
    record(6, ok, f"omega0^2 min {om['min']:.2e}, zero locus B {om['zero_locus_is_B']}, "
                  f"eps {b.epsilon:.3g} delta {b.delta:.3g} C {b.C:.3g}, {genus2_search.seconds:.0f}s")
    assert om["min"] >= -1e-10
    assert om["zero_locus_is_B"] and om["zero_locus_at_origin_is_B"]
    assert charts_ok
    assert not outer_bad, outer_bad
    assert tube and not tube_bad, tube_bad
    assert rep.passed
    assert genus2_search.seconds < 900


# ---------------------------------------------------------------- 7

def test_criterion_7_handlebody_lemmas(torus_search, genus2_search, torus_asm, genus2_asm):
    t0 = time.perf_counter()
    ann = spine.mu_p_annulus_check(n=50)
    checks = {"mu_p annulus": ann["pass"] and ann["grid"] == [50, 50, 50]}
    for tag, asm, res in (("torus", torus_asm, torus_search.value), ("genus2", genus2_asm, genus2_search.value)):
        b = res.budget
        checks[f"{tag} contact C={b.C:.3g}"] = spine.contact_pm_check(asm, b)["pass"]
        checks[f"{tag} mu_q"] = spine.mu_q_check(asm, b)["pass"]
        checks[f"{tag} mu_H"] = spine.mu_H_check(asm, b)["pass"]
    dt = time.perf_counter() - t0
    ok = all(checks.values()) and dt < 60
    record(7, ok, ", ".join(f"{k} {'ok' if v else 'bad'}" for k, v in checks.items()) + f", {dt:.1f}s")
    assert ann["support_in_chart"] and ann["positive_on_U"]
    assert ann["positive_support_in_U_prime"] and ann["negative_support_in_eps_2eps"]
    assert all(checks.values()), checks
    assert dt < 60


# ---------------------------------------------------------------- 8

def test_criterion_8_family(torus_search):
    t0 = time.perf_counter()
    cfg = RunConfig(mesh="torus:8", periods=(1.0, 0.0), family="isoperiodic", family_size=5)
    fam = pipeline.family_triples(cfg)
    iso = isoperiodic_check(fam)
    asms = [spine.build_assembly(t) for t in fam]
    budget = spine.constant_search(asms[0]).budget
    sweep = spine.family_sweep(asms, budget)
    scaled = pipeline.family_triples(RunConfig(mesh="torus:8", periods=(1.0, 0.0), family="scaling", family_size=5))
    iso_scaled = isoperiodic_check(scaled)
    dt = time.perf_counter() - t0
    distinct = len({t.surface.positions.tobytes() for t in fam}) == 5
    ok = (len(fam) == 5 and distinct and iso["isoperiodic"] and sweep["identical_verdicts"] and all(sweep["verdicts"])
          and not iso_scaled["isoperiodic"] and dt < 300)
    record(8, ok, f"isoperiodic dev {iso['max_deviation']:.1e}, verdicts {sweep['verdicts']}, "
                  f"scaling family isoperiodic={iso_scaled['isoperiodic']}, {dt:.0f}s")
    assert distinct and iso["isoperiodic"]
    assert sweep["identical_verdicts"] and all(sweep["verdicts"])
    assert not iso_scaled["isoperiodic"]
    assert dt < 300


# ---------------------------------------------------------------- 9

def _run(cfg_name, tmp_path, sets):
    args = ["verify-spine", str(CONFIGS / cfg_name), "--out", str(tmp_path)]
    for s in sets:
        args += ["--set", s]
    code = cli.main(args)
    report = json.loads(next(tmp_path.glob("verify-spine-*/report.json")).read_text())
    return code, report


def test_criterion_9_negative_controls(tmp_path, torus_search, genus2_search):
    t0 = time.perf_counter()
    tb, gb = torus_search.value.budget, genus2_search.value.budget
    pin = lambda b, **kw: [f"{k}={v!r}" for k, v in {"epsilon": b.epsilon, "delta": b.delta, "C": b.C, **kw}.items()]
    out = {}
    (tmp_path / "flip").mkdir()
    out["flip"] = _run("torus.cfg", tmp_path / "flip", pin(tb) + ["flip_convention=true"])
    (tmp_path / "delta").mkdir()
    out["delta"] = _run("genus2.cfg", tmp_path / "delta", pin(gb, delta=1e3))
    (tmp_path / "C").mkdir()
    out["C"] = _run("genus2.cfg", tmp_path / "C", pin(gb, C=1e-3))
    dt = time.perf_counter() - t0
    fails = {k: r["suite"]["failing"] for k, (_, r) in out.items()}
    cases = {k: sorted({f[1] for f in v}) for k, v in fails.items()}
    checks = {
        "flip exit 2, case 0": out["flip"][0] == cli.EXIT_FAIL and 0 in cases["flip"],
        "delta=1e3 exit 2": out["delta"][0] == cli.EXIT_FAIL and bool(cases["delta"]),
        "C=1e-3 exit 2, case 3/4": out["C"][0] == cli.EXIT_FAIL and bool({3, 4} & set(cases["C"])),
    }
    ok = all(checks.values()) and dt < 300
    record(9, ok, ", ".join(f"{k}: {'ok' if v else 'bad'}" for k, v in checks.items())
           + f" (failing cases {cases}), {dt:.0f}s")
    assert all(checks.values()), (checks, cases)
    assert dt < 300


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
