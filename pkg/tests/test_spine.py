import json

import numpy as np
import pytest

from trisymp import spine
from trisymp.forms import BASE, COLLAR, d, pullback


def test_phi_coordinates():
    p1, p2 = np.random.default_rng(0).normal(size=(2, 50))
    phi = np.stack(spine.phi_coords(p1, p2))
    np.testing.assert_allclose(phi.sum(0), 0, atol=1e-15)
    for lam in (1, 2, 3):
        t, s = spine.sector_coords(lam, p1, p2)
        inside = spine.in_sector(lam, p1, p2)
        np.testing.assert_array_equal(inside, (t <= 0) & (s >= 0))
    # the three sectors cover the plane
    assert np.all(sum(spine.in_sector(l, p1, p2) for l in (1, 2, 3)) >= 1)


def test_handlebodies_are_sector_boundaries():
    r = np.linspace(0, 2, 9)
    for lam in (1, 2, 3):
        # H_lam is the ray phi_lam = 0, phi_{lam-1} >= 0, shared by Z_lam and Z_{lam+1}
        J = spine.collar_jacobian(lam)
        p = np.linalg.solve(J[:2, :2], np.stack([np.zeros_like(r), r]))
        assert spine.in_handlebody(lam, *p).all()
        assert spine.in_sector(lam, *p).all() and spine.in_sector(lam + 1, *p).all()


def test_collar_jacobian_pulls_back_dt_ds():
    for lam in (1, 2, 3):
        J = spine.collar_jacobian(lam)
        p1, p2 = 0.3, -0.7
        t, s = spine.sector_coords(lam, p1, p2)
        np.testing.assert_allclose(J[:2, :2] @ [p1, p2], [t, s])
        dt = pullback(d("t"), J, BASE)
        np.testing.assert_allclose(dt.coeffs[2:], 0)
        assert abs(np.linalg.det(J)) == pytest.approx(1.0)


def test_budget_validation():
    with pytest.raises(ValueError):
        spine.ConstantBudget(1e-3, 1e-3, 10, (0.02, 0.01, 0.03))
    with pytest.raises(ValueError):
        spine.ConstantBudget(-1e-3, 1e-3, 10)
    with pytest.raises(ValueError):
        spine.ConstantBudget(1e-3, 1e-3, 10, depth_factor=5)
    b = spine.ConstantBudget(1e-3, 1e-4, 10)
    assert b.depth == pytest.approx(1e-2) and b.with_(C=20).C == 20


def test_grid_covers_every_case():
    b = spine.ConstantBudget(1e-3, 1e-4, 10)
    s, case = spine.GridSpec(5, 3).s_values(b)
    assert set(case) == set(spine.CASES)
    for k in range(4):
        assert s[case == k].min() == pytest.approx(k * b.epsilon) and s[case == k].max() == pytest.approx((k + 1) * b.epsilon)
    assert s[case == 4].max() < b.depth


def test_assembly_structure(genus2_asm, torus_asm):
    a = genus2_asm
    assert a.strips.shape[0] == 3 and a.strips.shape[2] == a.surface.n_faces
    assert len(a.charts) == 2 and sorted(c.sigma for c in a.charts) == [-1, 1]
    assert a.b_faces.any()
    # cover strips stay off the zero stars; the last strip is kappa beta_{lam+1}
    assert np.all(a.strips[:, :-1][:, :, a.b_faces] == 0)
    for lam in (1, 2, 3):
        np.testing.assert_allclose(a.strips[lam - 1, -1], a.kappa * a.triple.covector(lam + 1))
    assert not torus_asm.b_faces.any() and not torus_asm.charts
    R0, R1, R2 = a.default_radii
    assert 0 < R0 < R1 < R2


def test_suite_passes_at_known_budgets(torus_asm, torus_budget, genus2_asm, genus2_budget):
    for asm, b in ((torus_asm, torus_budget), (genus2_asm, genus2_budget)):
        rep = spine.inequality_suite(asm, b)
        assert rep.passed and rep.margin() > 0 and not rep.cases_failing()
        assert rep.omega0["pass"]


def test_report_exports(genus2_asm, genus2_budget):
    grid = spine.GridSpec(3, 3, 2, 2)
    rep = spine.inequality_suite(genus2_asm, genus2_budget, grid, keep_samples=True)
    data = json.loads(rep.to_json())
    assert data["pass"] == rep.passed and len(data["entries"]) == len(rep.entries)
    rows = rep.to_csv().splitlines()
    assert rows[0].startswith("lambda,case,region,sample") and len(rows) == 1 + len(rep.samples)
    assert {e["region"] for e in rep.entries} == {"outer", "tube"}


def test_negative_budgets_fail(genus2_asm, genus2_budget):
    assert spine.inequality_suite(genus2_asm, genus2_budget.with_(delta=1e3)).cases_failing()
    rep = spine.inequality_suite(genus2_asm, genus2_budget.with_(C=1e-3))
    assert {3, 4} & set(rep.cases_failing())


def test_lemma_checks(genus2_asm, genus2_budget):
    assert spine.mu_q_check(genus2_asm, genus2_budget)["pass"]
    assert spine.mu_H_check(genus2_asm, genus2_budget)["pass"]
    assert spine.contact_pm_check(genus2_asm, genus2_budget)["pass"]
    assert not spine.contact_pm_check(genus2_asm, genus2_budget.with_(C=1e-6))["pass"]
    ann = spine.mu_p_annulus_check(n=21)
    assert ann["pass"] and ann["n_positive"] > 0 and ann["n_negative"] > 0


def test_monotonicity_around_feasible_budget(torus_asm, torus_budget):
    mono = spine.monotonicity_check(torus_asm, torus_budget, spine.GridSpec(5, 3))
    assert mono["monotone"]
    assert all(p["pass"] for p in mono["C"])


def test_search_reports_infeasible_box(genus2_asm):
    box = spine.SearchBox(epsilon=(0.05, 0.05), invC=(1.0, 1.0), deltaC=(1.0, 1.0), n=(1, 1, 1))
    with pytest.raises(spine.InfeasibleBudget) as exc:
        spine.constant_search(genus2_asm, spine.GridSpec(3, 3, 2, 2), box)
    assert exc.value.report is not None and not exc.value.report.passed


def test_family_sweep_uniform(torus_asm, torus_budget):
    res = spine.family_sweep([torus_asm, torus_asm], torus_budget, spine.GridSpec(5, 3))
    assert res["identical_verdicts"] and res["uniform"] and res["isoperiodic"]["isoperiodic"]
