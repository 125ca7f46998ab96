"""Command line entry point.

Every command prints one JSON report on stdout and a short human summary on
stderr.  Exit codes: 0 success, 2 invalid input (including usage errors),
1 internal error.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
import time
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import __version__
from .crabb_davie import build_crabb_davie, cd_extension_evidence, structure_report
from .errors import ExtremalNoKernel, ValidationError
from .extensions import gap_subspace, rank_one_probe
from .linalg_core import ToleranceConfig
from .parrott import build_parrott, favoritism_check, kernel_dims, parrott_extension
from .serialize import (
    certificate_to_json,
    complex_to_json,
    dump_json,
    load_json,
    parrott_input_from_json,
    polynomial_from_json,
    polynomial_to_json,
    tuple_from_json,
    tuple_to_json,
    varopoulos_input_from_json,
)
from .tuples import check_commuting, check_contractive, check_partial_isometries
from .varopoulos import analyze, build_varopoulos
from .vonneumann import vn_defect, vn_violation_search

MAX_PROBE_K = 4

SCHEMA_HELP = """\
JSON schemas:
  matrix      {"rows": int, "cols": int, "entries": [[re, im], ...]}   (row-major)
  tuple       {"n": int, "dim": int, "ops": [matrix, ...]}
  unitaries   {"unitaries": [matrix, ...]}
  vectors     {"J": int, "x": [vec, vec, vec]}   vec entries: number or [re, im]
  polynomial  {"n_vars": int, "terms": [{"alpha": [int, ...], "c": [re, im]}, ...]}
Environment: EXTREMAL_EPS_RANK overrides the default rank tolerance.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n\n{SCHEMA_HELP}")
        raise SystemExit(2)


def _seed(args) -> int:
    if getattr(args, "seed", None) is None:
        args.seed = secrets.randbelow(2**31)
    return args.seed


def _cmd_parrott(args, tol):
    p = parrott_input_from_json(load_json(args.unitaries))
    pivot = args.pivot or p.n
    if not 1 <= pivot <= p.n:
        raise ValidationError(f"pivot must be in 1..{p.n}")
    dims = kernel_dims(p, tol)
    results = {
        "extremal": dims[pivot] == 0,
        "pivot": pivot,
        "kernel_dim": {str(k): d for k, d in dims.items()},
        "favoritism_consistent": favoritism_check(p, tol),
        "certificate": None,
    }
    if args.extend:
        try:
            results["certificate"] = certificate_to_json(parrott_extension(p, tol))
        except ExtremalNoKernel:
            pass
    summary = f"Parrott {p.n}-tuple on C^{2 * p.dim}: {'extremal' if results['extremal'] else 'not extremal'}"
    return {"unitaries": args.unitaries, "pivot": pivot, "extend": args.extend}, results, summary


def _cmd_crabb_davie(args, tol):
    if args.probe:
        k, samples, seed = args.probe
        if not 1 <= k <= 3:
            raise ValidationError("probe k must be 1, 2 or 3")
        args.seed = seed
        results = cd_extension_evidence(k, samples, seed, tol)
        summary = f"Crabb-Davie probe k={k}: {results['verdict']}"
        return {"probe": [k, samples, seed]}, results, summary
    cd = build_crabb_davie()
    if args.emit:
        dump_json(tuple_to_json(cd.tuple), args.emit)
        return {"emit": args.emit}, {"written": args.emit, "tuple": tuple_to_json(cd.tuple)}, f"wrote {args.emit}"
    results = structure_report(cd)
    return {"check": True}, results, f"Crabb-Davie structure: {'ok' if results['passed'] else 'FAILED'}"


def _cmd_varopoulos(args, tol):
    v = varopoulos_input_from_json(load_json(args.vectors))
    analysis = analyze(v, tol)
    det = analysis.lam_det
    results = {
        "J": v.J_size,
        "r": analysis.r,
        "lambda_det": complex_to_json(det) if det is not None else None,
        "lambda_det_abs": abs(det) if det is not None else None,
        **analysis.decision.to_dict(),
        "certificate": certificate_to_json(analysis.certificate) if analysis.certificate else None,
    }
    if args.emit_tuple:
        dump_json(tuple_to_json(build_varopoulos(v)), args.emit_tuple)
        results["tuple_written"] = args.emit_tuple
    summary = f"Varopoulos r={analysis.r}: {analysis.decision.label}"
    if analysis.decision.reason:
        summary += f" ({analysis.decision.reason})"
    return {"vectors": args.vectors, "emit_tuple": args.emit_tuple}, results, summary


def _cmd_check(args, tol):
    t = tuple_from_json(load_json(args.tuple))
    comm = check_commuting(t, tol)
    contr = check_contractive(t, tol)
    results = {
        "n": t.n,
        "dim": t.dim,
        "commuting": comm.to_dict(),
        "contractive": contr.to_dict(),
        "partial_isometries": check_partial_isometries(t).to_dict(),
        "norms": t.norms(),
        "gap_dim": gap_subspace(t, tol).dim,
        "in_family": comm.passed and contr.passed,
    }
    summary = f"tuple n={t.n} dim={t.dim}: commuting={comm.passed} contractive={contr.passed}"
    if not comm.passed:
        summary += f" (worst pair {comm.worst_pair}, residual {comm.worst_value:.3e})"
    return {"tuple": args.tuple}, results, summary, (0 if results["in_family"] else 2)


def _cmd_probe(args, tol):
    if not 1 <= args.k <= MAX_PROBE_K:
        raise ValidationError(f"k must be between 1 and {MAX_PROBE_K}")
    t = tuple_from_json(load_json(args.tuple))
    seed = _seed(args)
    cert = rank_one_probe(t, args.samples, args.k, seed, tol)
    results = {
        "found": cert is not None,
        "certificate": certificate_to_json(cert) if cert else None,
        "note": "absence of a certificate does not prove extremality",
    }
    summary = f"probe k={args.k} samples={args.samples}: {'certificate found' if cert else 'no certificate'}"
    return {"tuple": args.tuple, "k": args.k, "samples": args.samples}, results, summary


def _cmd_vn(args, tol):
    t = tuple_from_json(load_json(args.tuple))
    inputs = {"tuple": args.tuple, "grid": args.grid}
    if args.poly:
        p = polynomial_from_json(load_json(args.poly))
        record = vn_defect(t, p, args.grid, tol)
        inputs["poly"] = args.poly
        results = {"polynomial": polynomial_to_json(p), **record.to_dict()}
    else:
        degree, restarts = args.search
        seed = _seed(args)
        res = vn_violation_search(t, degree, restarts, args.grid, seed, tol=tol)
        inputs["search"] = [degree, restarts]
        results = {
            "polynomial": polynomial_to_json(res.polynomial),
            "certified_violation": res.certified_violation,
            "certified_ratio": res.certified_ratio,
            "certification": res.record.to_dict(),
            "search_grid": res.search_record.to_dict(),
        }
    norm = results["norm_pT"] if "norm_pT" in results else results["certification"]["norm_pT"]
    summary = f"von Neumann: ||p(T)|| = {norm:.6g}, certified violation = {results['certified_violation']}"
    return inputs, results, summary


def _cmd_build(args, tol):
    if args.kind == "crabb-davie":
        t = build_crabb_davie().tuple
    elif args.kind == "parrott":
        if not args.unitaries:
            raise ValidationError("build parrott needs --unitaries")
        t = build_parrott(parrott_input_from_json(load_json(args.unitaries)))
    else:
        if not args.vectors:
            raise ValidationError("build varopoulos needs --vectors")
        t = build_varopoulos(varopoulos_input_from_json(load_json(args.vectors)))
    payload = tuple_to_json(t)
    if args.out:
        dump_json(payload, args.out)
    inputs = {"kind": args.kind, "unitaries": args.unitaries, "vectors": args.vectors, "out": args.out}
    return inputs, {"tuple": payload, "written": args.out}, f"built {args.kind} tuple n={t.n} dim={t.dim}"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    tol = common.add_argument_group("tolerances")
    for name in ("comm", "contr", "rank", "orth", "det"):
        tol.add_argument(f"--eps-{name}", type=float, default=None, dest=f"eps_{name}")

    parser = _Parser(
        prog="extremal",
        description="Extremality decisions and extension certificates for commuting contractions.",
        epilog=SCHEMA_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, handler, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text, epilog=SCHEMA_HELP,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.set_defaults(handler=handler)
        return sp

    sp = add("parrott", _cmd_parrott, "decide extremality of a Parrott tuple")
    sp.add_argument("--unitaries", required=True)
    sp.add_argument("--pivot", type=int, default=None)
    sp.add_argument("--extend", action="store_true", help="emit a non-trivial extension when one exists")

    sp = add("crabb-davie", _cmd_crabb_davie, "checks and probes of the Crabb-Davie triple")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--check", action="store_true")
    mode.add_argument("--probe", nargs=3, type=int, metavar=("K", "SAMPLES", "SEED"))
    mode.add_argument("--emit", metavar="FILE")

    sp = add("varopoulos", _cmd_varopoulos, "decide extremality of a Varopoulos triple")
    sp.add_argument("--vectors", required=True)
    sp.add_argument("--emit-tuple", default=None)

    sp = add("check", _cmd_check, "family-membership checks for a tuple")
    sp.add_argument("--tuple", required=True)

    sp = add("probe", _cmd_probe, "search for a non-trivial extension")
    sp.add_argument("--tuple", required=True)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--samples", type=int, default=10)
    sp.add_argument("--seed", type=int, default=None)

    sp = add("vn", _cmd_vn, "von Neumann inequality check or violation search")
    sp.add_argument("--tuple", required=True)
    what = sp.add_mutually_exclusive_group(required=True)
    what.add_argument("--poly")
    what.add_argument("--search", nargs=2, type=int, metavar=("DEGREE", "RESTARTS"))
    sp.add_argument("--grid", type=int, default=64)
    sp.add_argument("--seed", type=int, default=None)

    sp = add("build", _cmd_build, "build a tuple and emit it as JSON")
    sp.add_argument("kind", choices=["parrott", "crabb-davie", "varopoulos"])
    sp.add_argument("--unitaries")
    sp.add_argument("--vectors")
    sp.add_argument("--out")
    return parser


def run(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> Tuple[int, dict]:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    tol = None
    report: Dict = {"command": args.command, "inputs": {}, "tolerances": None, "seed": None, "results": None}
    try:
        tol = ToleranceConfig.from_env(
            eps_comm=args.eps_comm, eps_contr=args.eps_contr, eps_rank=args.eps_rank,
            eps_orth=args.eps_orth, eps_det=args.eps_det,
        )
        report["tolerances"] = tol.to_dict()
        out = args.handler(args, tol)
        inputs, results, summary = out[:3]
        code = out[3] if len(out) > 3 else 0
        report.update(inputs=inputs, results=results)
    except ValidationError as exc:
        code, summary = 2, f"invalid input: {exc}"
        report["error"] = {"kind": type(exc).__name__, "message": str(exc)}
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        code, summary = 2, f"invalid input: {exc}"
        report["error"] = {"kind": type(exc).__name__, "message": str(exc)}
    except Exception as exc:  # noqa: BLE001 - reported, never swallowed silently
        code, summary = 1, f"internal error: {type(exc).__name__}: {exc}"
        report["error"] = {"kind": type(exc).__name__, "message": str(exc)}
    report["seed"] = getattr(args, "seed", None)
    report["wall_time_ms"] = (time.perf_counter() - started) * 1e3
    json.dump(_finite(report), stdout, indent=2)
    stdout.write("\n")
    stderr.write(summary + (f" [seed {report['seed']}]" if report["seed"] is not None else "") + "\n")
    return code, report


def _finite(obj):
    """Replace non-finite floats so the report is strict JSON."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not np.isfinite(obj):
        return None
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def main(argv: Optional[List[str]] = None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
