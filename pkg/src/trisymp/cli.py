"""Command-line entry points.

Exit codes: 0 pass, 2 verification failure, 3 infeasible budget, 4 input error.
Every run writes into ``<output_dir>/<verb>-<config hash>/``; a relative
output_dir is taken relative to the config file.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import dec, foliation, fs_demo, pipeline, spine
from .cocycle import DegenerateZeros, assign_signs, isoperiodic_check, triple_to_json, validate_triple
from .config import ConfigError, RunConfig, load_config
from .mesh import MeshError

EXIT_PASS, EXIT_FAIL, EXIT_INFEASIBLE, EXIT_INPUT = 0, 2, 3, 4


def _dump(obj) -> str:
    return json.dumps(spine._jsonable(obj), indent=1, sort_keys=True) + "\n"


def _outdir(cfg: RunConfig, verb: str) -> Path:
    d = cfg.resolve(cfg.output_dir) / f"{verb}-{cfg.digest()}"
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_harmonic(cfg: RunConfig) -> int:
    ls = pipeline.load_surface(cfg)
    triple = pipeline.triple_from_config(cfg, ls)
    s = ls.surface
    val = validate_triple(triple)
    signs = assign_signs(triple.zero_set, cfg.seed, s) if len(triple.zero_set) % 2 == 0 else None
    report = {
        "config": cfg.to_dict(),
        "mesh": {"vertices": s.n_vertices, "edges": s.n_edges, "faces": s.n_faces, "genus": s.genus},
        "harmonic_dimension": dec.harmonic_dimension(s, ls.weights),
        "periods": {f"beta{k}": dec.periods(triple.form(k), ls.basis).tolist() for k in (1, 2, 3)},
        "zeros": [{"vertex": z.vertex, "index": z.index} for z in triple.zero_set],
        "index_sum": int(sum(z.index for z in triple.zero_set)),
        "closedness_residual": dec.closedness_residual(s, triple.form(1)),
        "coclosedness_residual": dec.coclosedness_residual(s, ls.weights, triple.form(1)),
        "validation": val,
    }
    out = _outdir(cfg, "harmonic")
    (out / "harmonic.json").write_text(_dump(report))
    (out / "triple.json").write_text(triple_to_json(triple, signs) + "\n")
    print(f"genus {s.genus}, {len(triple.zero_set)} zeros, validation {'pass' if val['pass'] else 'FAIL'}")
    print(f"wrote {out}")
    return EXIT_PASS if val["pass"] else EXIT_FAIL


def _lemmas(asm, budget, grid) -> dict:
    return {
        "mu_q": spine.mu_q_check(asm, budget, grid),
        "mu_H": spine.mu_H_check(asm, budget, grid),
        "contact_pm": spine.contact_pm_check(asm, budget, grid),
        "mu_p_annulus": spine.mu_p_annulus_check(),
    }


def _case_table(rep: spine.VerificationReport) -> str:
    lines = ["lam case region  " + "  ".join(f"{n[:12]:>12}" for n in spine.INEQUALITIES)]
    for lam in (1, 2, 3):
        for k in spine.CASES:
            for region in ("outer", "tube"):
                row = [e for e in rep.entries if e["lambda"] == lam and e["case"] == k and e["region"] == region]
                if not row:
                    continue
                by = {e["inequality"]: e for e in row}
                cells = [f"{by[n]['min']:12.3e}{'' if by[n]['strict'] else '*'}" for n in spine.INEQUALITIES]
                lines.append(f"{lam:>3} {k:>4} {region:<6}  " + " ".join(cells))
    return "\n".join(lines)


def cmd_verify_spine(cfg: RunConfig) -> int:
    triple = pipeline.triple_from_config(cfg)
    asm = pipeline.assembly_from_config(cfg, triple)
    grid = pipeline.grid_from_config(cfg)
    out = _outdir(cfg, "verify-spine")
    base = {"config": cfg.to_dict(), "strips": asm.n_strips, "kappa": asm.kappa,
            "zeros": [{"vertex": c.vertex, "sign": c.sigma, "morse_scale": c.a} for c in asm.charts]}
    try:
        budget, search = pipeline.budget_for(cfg, asm, grid)
    except spine.InfeasibleBudget as exc:
        report = {**base, "status": "infeasible", "message": str(exc),
                  "least_violating": exc.report.to_dict() if exc.report else None}
        (out / "report.json").write_text(_dump(report))
        print(f"infeasible: {exc}")
        print(f"wrote {out}")
        return EXIT_INFEASIBLE
    rep = spine.inequality_suite(asm, budget, grid, keep_samples=cfg.samples_csv)
    lemmas = _lemmas(asm, budget, grid)
    report = {**base, "status": "pass" if rep.passed else "fail", "suite": rep.to_dict(),
              "search": search.to_dict() if search else None, "lemmas": lemmas}
    (out / "report.json").write_text(_dump(report))
    if cfg.samples_csv:
        (out / "samples.csv").write_text(rep.to_csv())
    print(_case_table(rep))
    print(f"omega0: min {rep.omega0['min']:.3e}, zero locus is B: {rep.omega0['zero_locus_is_B']}")
    print(f"budget eps={budget.epsilon:.4g} delta={budget.delta:.4g} C={budget.C:.4g}; "
          f"{'PASS' if rep.passed else 'FAIL'} (failing cases {rep.cases_failing()})")
    print(f"wrote {out}")
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_fs_demo(cfg: RunConfig | None = None) -> int:
    table, ok = fs_demo.fs_table()
    print(table)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_foliate(cfg: RunConfig) -> int:
    ls = pipeline.load_surface(cfg)
    triple = pipeline.triple_from_config(cfg, ls)
    s = ls.surface
    c1 = triple.covector(1)
    zeros = list(triple.zero_set)
    forbid = dec.zero_faces(s, zeros) if zeros else None
    bumps = foliation.cover_complement_of_B(s, c1, 0.0, zeros, forbid=forbid)
    rng = np.random.default_rng(cfg.seed)
    leaves = []
    for f in rng.choice(np.flatnonzero(~dec.zero_faces(s, zeros)) if zeros else np.arange(s.n_faces), 3, replace=False):
        try:
            leaves.append(foliation.trace_leaf(s, c1, (int(f), s.corner_positions(int(f)).mean(0)), 20.0, zeros))
        except foliation.TraceError:
            continue
    signs = assign_signs(zeros, cfg.seed, s)
    zmap = {z.vertex: z for z in zeros}
    trans = []
    for q, p in signs.pairing:
        try:
            trans.append(foliation.transverse_path(s, c1, zmap[q], zmap[p]))
        except foliation.TraceError:
            pass
    beta = triple.form(1)
    per = dec.periods(beta, ls.basis)
    pants = None
    if np.allclose(per, np.round(per)) and zeros:
        pants = foliation.pants_check(s, beta, zeros)
    out = _outdir(cfg, "foliate")
    groups = {"leaves": leaves, "transversals": [b.path for b in bumps], "zero_paths": trans}
    (out / "paths.json").write_text(foliation.paths_to_json(s, [], groups) + "\n")
    summary = {"config": cfg.to_dict(), "strips": len(bumps), "leaves": len(leaves),
               "leaf_stop_reasons": [lf.stop_reason for lf in leaves],
               "transversal_margins": [b.path.margin(c1) for b in bumps],
               "zero_paths": len(trans), "pants": pants}
    (out / "foliation.json").write_text(_dump(summary))
    print(f"{len(bumps)} strips, {len(leaves)} leaves, {len(trans)} zero-to-zero transversals")
    print(f"wrote {out}")
    ok = all(b.path.margin(c1) > 0 for b in bumps) and (pants is None or pants["pants"])
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_family(cfg: RunConfig) -> int:
    triples = pipeline.family_triples(cfg)
    iso = isoperiodic_check(triples)
    asms = [pipeline.assembly_from_config(cfg, t) for t in triples]
    grid = pipeline.grid_from_config(cfg)
    out = _outdir(cfg, "family")
    try:
        budget, search = pipeline.budget_for(cfg, asms[0], grid)
    except spine.InfeasibleBudget as exc:
        (out / "family.json").write_text(_dump({"config": cfg.to_dict(), "status": "infeasible", "message": str(exc)}))
        print(f"infeasible: {exc}")
        return EXIT_INFEASIBLE
    res = spine.family_sweep(asms, budget, grid)
    report = {"config": cfg.to_dict(), "budget": budget.to_dict(), "isoperiodic": iso,
              "verdicts": res["verdicts"], "identical_verdicts": res["identical_verdicts"], "verdict": res["verdict"],
              "members": [r.to_dict() for r in res["reports"]]}
    (out / "family.json").write_text(_dump(report))
    print(f"family {cfg.family}: isoperiodic {iso['isoperiodic']}, verdicts {res['verdicts']}")
    print(f"wrote {out}")
    return EXIT_PASS if iso["isoperiodic"] and res["uniform"] else EXIT_FAIL


COMMANDS = {
    "harmonic": cmd_harmonic,
    "verify-spine": cmd_verify_spine,
    "fs-demo": cmd_fs_demo,
    "foliate": cmd_foliate,
    "family": cmd_family,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trisymp", description=__doc__.splitlines()[0])
    p.add_argument("verb", choices=sorted(COMMANDS))
    p.add_argument("config", nargs="?", help="flat key = value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.set) + ([f"output_dir={args.out}"] if args.out else [])
    try:
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.verb](cfg)
    except (ConfigError, MeshError, DegenerateZeros, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
