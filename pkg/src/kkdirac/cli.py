"""Command-line front end.

    kkdirac verify clifford [--json out.json]
    kkdirac verify geometry --config g.toml [--json out.json] [--seed N]
    kkdirac reduce --geometry g.toml --reduction r.toml [--json out.json] [--seed N]

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error.
Relative config paths that do not exist are looked up in ``$KKDIRAC_CONFIG_DIR``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .clifford import (
    build_gamma_0_3,
    build_gamma_1_2,
    lift_to_6d,
    lorentz_generators,
    su2_basis,
    verify_clifford_relation,
    verify_generator_blocks,
    verify_lorentz_closure,
    verify_pauli_products,
    verify_su2_bracket,
)
from .config import ConfigError, RunConfig, build_geometry, load_geometry_config, load_reduction_config
from .exterior import SingularFrameError
from .qi import QI
from .report import all_passed

SCHEMA_ID = "kkdirac-report"
SCHEMA_VERSION = "1.0"

CONVENTIONS = {
    "signature": {"spacetime": "(-,+,+) labels 0,1,2", "sphere": "(+,+,+) labels 5,6,7"},
    "gammas": {"spacetime": "(i sigma2, -sigma3, -sigma1)", "sphere": "(-tau3, tau1, tau2)", "bundle": "rho1 (x) I (x) gamma^a, rho2 (x) gamma^alpha (x) I"},
    "generators": "Sigma^AB = 1/4 [Gamma^A, Gamma^B]",
    "sphere_coframe": "right-invariant: dG G^-1 = e_alpha (i/2) gamma^alpha",
    "cartan_maurer": "de_alpha = lambda eps_alpha^{beta gamma} e_beta ^ e_gamma (lambda measured)",
    "curvature": "F_alpha = dA_alpha + 1/2 eps_alpha^{beta gamma} A_beta ^ A_gamma",
    "potential_index": "A^gamma_a read as A_{gamma a} = eta_aa A_gamma^a",
    "hodge": "alpha ^ *beta = <alpha, beta> vol, vol in declared orientation",
    "orientation": {"spacetime": [0, 1, 2], "sphere": [5, 6, 7], "bundle": [0, 1, 2, 5, 6, 7]},
    "volume_basis": "e0 ^ e1 ^ e2 ^ e5 ^ e6 ^ e7 = *1 ^ star1_S = -star1_S ^ *1",
    "ansatz_reading": "G eta^j in the second reduced equation read as G xi^j",
}


class CheckFailed(Exception):
    pass


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _clifford_checks(corrupt=None):
    g3, gS = build_gamma_1_2(), build_gamma_0_3()
    g6 = lift_to_6d(g3, gS)
    if corrupt is not None:
        g6 = g6.replace(corrupt, g6[corrupt] * QI(0, 1))
    checks = []
    checks += verify_clifford_relation(g3, "Clif(1,2)")
    checks += verify_clifford_relation(gS, "Clif(0,3)")
    checks += verify_clifford_relation(g6, "Clif(1,5)")
    sig6 = lorentz_generators(g6)
    checks += verify_generator_blocks(sig6, g3, gS)
    checks += verify_lorentz_closure(sig6)
    checks += verify_pauli_products()
    checks += verify_su2_bracket(su2_basis(gS))
    return checks


def cmd_verify_clifford(run: RunConfig, corrupt=None) -> dict:
    checks = _clifford_checks(corrupt)
    return {"checks": checks, "comparisons": []}


def cmd_verify_geometry(run: RunConfig) -> dict:
    from .geometry import verify_geometry

    cfg = load_geometry_config(run.geometry)
    seed = cfg.seed if run.seed is None else run.seed
    n = cfg.n if run.n is None else run.n
    geom = build_geometry(cfg)
    checks, info = verify_geometry(geom, n, seed, cfg.tolerances)
    return {"checks": checks, "comparisons": [], "geometry": info, "config": {"geometry": _geometry_dict(cfg)}}


def cmd_reduce(run: RunConfig) -> dict:
    from .reduction import NonEigenstateError, run_reduction

    gcfg = load_geometry_config(run.geometry)
    rcfg = load_reduction_config(run.reduction)
    if run.seed is not None:
        rcfg = replace(rcfg, seeds=(run.seed,))
    if run.n is not None:
        rcfg = replace(rcfg, n=run.n)
    geom = build_geometry(gcfg)
    try:
        res = run_reduction(
            geom,
            rcfg.M,
            m_mode=rcfg.m_mode,
            m=rcfg.m,
            seeds=rcfg.seeds,
            n=rcfg.n,
            tol=rcfg.tolerances["soundness"],
            strict=rcfg.strict,
            sweep=rcfg.sweep,
        )
    except NonEigenstateError as exc:
        raise CheckFailed(f"strict eigenstate violation: {exc}") from exc
    spec = res["spectrum"]
    return {
        "checks": res["checks"],
        "comparisons": res["comparisons"],
        "reduction": {
            "m": res["m"],
            "spectrum": spec.as_dict(),
            "derived_mass_matrix": res["derived_mass_matrix"],
            "instances": res["instances"],
            "lambda": {"measured": geom.sphere.lam, "exact": None if geom.sphere.lam_exact is None else str(geom.sphere.lam_exact)},
        },
        "warnings": res["warnings"],
        "flags": {"negative_mass_branch": spec.negative_branch, "hermitian": spec.hermitian, "zero_mode": not spec.m},
        "config": {"geometry": _geometry_dict(gcfg), "reduction": _reduction_dict(rcfg)},
    }


def _geometry_dict(cfg) -> dict:
    return {
        "spacetime": cfg.spacetime,
        "box": cfg.box,
        "vielbein": None if cfg.vielbein is None else [list(r) for r in cfg.vielbein],
        "potential": cfg.potential,
        "potential_seed": cfg.potential_seed,
        "potential_degree": cfg.potential_degree,
        "potential_rows": None if cfg.potential_rows is None else [list(r) for r in cfg.potential_rows],
        "invariance": cfg.invariance,
        "seed": cfg.seed,
        "n": cfg.n,
        "tolerances": cfg.tolerances,
    }


def _reduction_dict(cfg) -> dict:
    return {
        "M": str(cfg.M),
        "m_mode": cfg.m_mode,
        "m": None if cfg.m is None else str(cfg.m),
        "strict": cfg.strict,
        "seeds": list(cfg.seeds),
        "n": cfg.n,
        "sweep": cfg.sweep,
        "tolerances": cfg.tolerances,
    }


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def build_report(command: str, result: dict) -> dict:
    checks = result["checks"]
    rep = {
        "schema": SCHEMA_ID,
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "passed": all_passed(checks),
        "conventions": CONVENTIONS,
        "checks": [c.as_dict() for c in checks],
        "comparisons": [c.as_dict() for c in result.get("comparisons", [])],
        "warnings": list(result.get("warnings", [])),
    }
    for key in ("geometry", "reduction", "flags", "config"):
        if key in result:
            rep[key] = result[key]
    return rep


def _plain(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=_plain) + "\n"


def _print_human(command: str, result: dict, out) -> None:
    print(f"== {command}", file=out)
    for c in result["checks"]:
        print(c.line(), file=out)
    if result.get("comparisons"):
        print("-- comparisons with the printed forms (not gating)", file=out)
        for c in result["comparisons"]:
            print(c.line(), file=out)
    red = result.get("reduction")
    if red:
        m = red["m"]
        print(f"m ({m['mode']}) = {m['value']}; constant spinor: {m['constant_spinor']}", file=out)
        spec = red["spectrum"]
        print(f"mass matrix {spec['matrix']}, eigenvalues M + m = {spec['eigenvalues'][0]}, M - m = {spec['eigenvalues'][1]}", file=out)
    geo = result.get("geometry")
    if geo:
        print(f"lambda = {geo['lambda']['exact'] or geo['lambda']['measured']}", file=out)
    for w in result.get("warnings", []):
        print(f"warning: {w}", file=out)
    n_fail = sum(not c.passed for c in result["checks"])
    print(f"{len(result['checks']) - n_fail}/{len(result['checks'])} checks passed", file=out)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kkdirac", description="Verify the reduction of the Dirac equation on M^{1+2} x S^3.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    vs = v.add_subparsers(dest="suite", required=True)
    vc = vs.add_parser("clifford", help="exact Clifford and generator checks")
    vc.add_argument("--json", type=Path, help="write the JSON report here")
    vc.add_argument("--inject-corrupt-gamma", type=int, default=None, help=argparse.SUPPRESS)
    vg = vs.add_parser("geometry", help="connection, Hodge and interior-product identities")
    vg.add_argument("--config", required=True, help="geometry TOML")
    vg.add_argument("--json", type=Path)
    vg.add_argument("--seed", type=int)
    vg.add_argument("--points", type=int)

    r = sub.add_parser("reduce", help="reduce the six-dimensional equation and cross-check")
    r.add_argument("--geometry", required=True, help="geometry TOML")
    r.add_argument("--reduction", required=True, help="reduction TOML")
    r.add_argument("--json", type=Path)
    r.add_argument("--seed", type=int)
    r.add_argument("--points", type=int)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    command = "verify " + args.suite if args.command == "verify" else args.command
    try:
        run = RunConfig(
            command=command,
            geometry=getattr(args, "config", None) or getattr(args, "geometry", None),
            reduction=getattr(args, "reduction", None),
            seed=getattr(args, "seed", None),
            n=getattr(args, "points", None),
            output=args.json,
            verbosity=args.verbose,
        )
        if command == "verify clifford":
            result = cmd_verify_clifford(run, args.inject_corrupt_gamma)
        elif command == "verify geometry":
            result = cmd_verify_geometry(run)
        else:
            result = cmd_reduce(run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SingularFrameError as exc:
        print(f"config error: singular vielbein: {exc}", file=sys.stderr)
        return 2
    except CheckFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _print_human(command, result, out)
    if run.output is not None:
        run.output.write_text(dump_report(build_report(command, result)))
    return 0 if all_passed(result["checks"]) else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
