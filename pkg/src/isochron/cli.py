"""Command-line front end: ``isochron constants|manifold|verify-period|check-plane``.

Exit codes: 0 success, 1 bad input or validation failure, 2 degenerate
system, 3 integration failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .expr import ExprError, parse_scalar, print_poly, print_scalar
from .fileformat import SystemFileError, dumps, read_system, report_doc, write_atomic
from .manifold import compute_manifold, manifold_residual
from .nfengine import DegenerateSystemError, constants_report, vanishing_conditions
from .numverify import IntegrationError, build_system, scan, verdict_block
from .scalar import EvaluationError, ParamSet, UsageError
from .sysmodel import SpecError, check_invariant_plane, complexify, RealSystemSpec, substitute_params

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_INTEGRATION = 0, 1, 2, 3


class CliError(Exception):
    pass


def parse_assignments(items) -> list[dict]:
    """['c1=0,c2=c0/8', ...] -> [{'c1': '0'}, {'c2': 'c0/8'}] (one step per assignment)."""
    steps = []
    for item in items or []:
        for part in item.split(","):
            part = part.strip()
            if not part:
                continue
            name, sep, value = part.partition("=")
            if not sep or not name.strip() or not value.strip():
                raise CliError(f"bad assignment {part!r}, expected name=expr")
            steps.append({name.strip(): value.strip()})
    return steps


def _load(args):
    try:
        spec, digest = read_system(args.input)
    except FileNotFoundError:
        raise CliError(f"no such input file: {args.input}") from None
    steps = parse_assignments(getattr(args, "subs", None))
    for step in steps:
        spec = substitute_params(spec, step)
    return spec, digest, steps


def _complex(spec):
    return complexify(spec) if isinstance(spec, RealSystemSpec) else spec


def cmd_constants(args) -> int:
    spec, digest, steps = _load(args)
    if args.order < 1:
        raise CliError("--order must be at least 1")
    report = constants_report(spec, args.order, [], prune=not args.full_table, seed=args.seed)
    report.subs_chain = steps
    report.reduced_under = "; ".join(f"{k}={v}" for s in steps for k, v in s.items()) or "(none)"
    conds = None
    if args.conditions:
        if any(not p.real for p in report.spec.params.params):
            raise CliError("--conditions needs every parameter declared real")
        conds = vanishing_conditions(report)
    print(f"# {spec.name or args.input}  reduced under: {report.reduced_under}")
    for r in report.records:
        print(f"m={r.m}")
        print(f"  p' = {print_scalar(r.p)}")
        print(f"  q' = {print_scalar(r.q)}")
        print(f"  tau' = {print_scalar(r.tau)}")
        print(f"  mu' = {print_scalar(r.mu)}")
    if conds is not None:
        for m, polys in conds:
            print(f"conditions m={m}: " + ", ".join(print_poly(p) for p in polys))
    print(f"note: {report.caveat}")
    if args.output:
        write_atomic(args.output, dumps(report_doc(report, digest, conds)))
    return EXIT_OK


def cmd_manifold(args) -> int:
    spec, digest, steps = _load(args)
    cspec = _complex(spec)
    approx = compute_manifold(cspec, args.degree)
    if manifold_residual(cspec, approx):
        raise DegenerateSystemError("manifold invariance residual is not zero")
    plane = check_invariant_plane(cspec)
    coeffs = [{"a": a, "b": b, "h": print_scalar(c)} for (a, b), c in sorted(approx.coeffs.items())]
    print(f"# center manifold u = h(z, w) through degree {args.degree}")
    if not coeffs:
        print("h = 0")
    for rec in coeffs:
        print(f"  h[{rec['a']},{rec['b']}] = {rec['h']}")
    block = {"degree": args.degree, "coeffs": coeffs, "residual_zero": True}
    if plane.invariant:
        K = _cofactor_string(plane.cofactor, cspec.params)
        print(f"u = 0 is invariant, cofactor K = {K}")
        block["invariant_plane"] = {"cofactor": K}
    if args.output:
        doc = {"input_sha256": digest, "subs": steps, "manifold": block}
        write_atomic(args.output, dumps(doc))
    return EXIT_OK


def _cofactor_string(K: dict, params: ParamSet) -> str:
    names = ("z", "w", "u")
    parts = []
    for e, c in sorted(K.items(), key=lambda t: (sum(t[0]), t[0])):
        mono = "*".join(n if x == 1 else f"{n}^{x}" for n, x in zip(names, e) if x)
        coef = print_scalar(c)
        if not mono:
            parts.append(coef)
        else:
            parts.append(f"({coef})*{mono}")
    return " + ".join(parts) if parts else "0"


def _amplitudes(text: str) -> list[float]:
    try:
        lo, hi, k = text.split(":")
        lo, hi, k = float(lo), float(hi), int(k)
    except ValueError:
        raise CliError("--amplitudes expects LO:HI:K") from None
    if k < 1 or lo <= 0 or hi < lo:
        raise CliError("--amplitudes needs 0 < LO <= HI and K >= 1")
    return [lo] if k == 1 else [float(a) for a in np.linspace(lo, hi, k)]


def cmd_verify_period(args) -> int:
    spec, digest, steps = _load(args)
    assignment = {}
    for step in parse_assignments([args.params] if args.params else []):
        assignment.update(step)
    for name, value in assignment.items():
        try:
            parse_scalar(value, ParamSet())
        except ExprError as exc:
            raise CliError(f"parameter {name}: {exc}") from None
    try:
        system = build_system(spec, assignment, manifold_degree=args.manifold_degree)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    amps = _amplitudes(args.amplitudes)
    result = scan(system, amps, args.returns, args.tol, on_manifold=bool(args.manifold_degree))
    block = verdict_block(result, args.epsilon, args.tol)
    block["input_sha256"] = digest
    block["params"] = assignment
    for row in result.rows:
        print(f"a={row.amplitude:.6g}  mean period={row.mean_period:.15g}  deviation={row.deviation:.3e}")
    print(f"verdict: {block['verdict']} (epsilon={args.epsilon:g}; numerical evidence, not a proof)")
    if args.csv:
        write_atomic(args.csv, result.to_csv())
    if args.output:
        write_atomic(args.output, dumps(block))
    return EXIT_OK


def cmd_check_plane(args) -> int:
    spec, _, _ = _load(args)
    cspec = _complex(spec)
    plane = check_invariant_plane(cspec)
    if plane.invariant:
        print(f"invariant: u = 0 with cofactor K = {_cofactor_string(plane.cofactor, cspec.params)}")
    else:
        print("not invariant: du/dT has u-free terms")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isochron", description="Isochronous constants of 3D systems on center manifolds.")
    ap.add_argument("--seed", type=int, default=None, help="shuffle the engine's traversal order (results do not depend on it)")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", required=True, help="system JSON file or bundled fixture name")
        p.add_argument("--subs", action="append", default=[], metavar="NAME=EXPR[,...]",
                       help="parameter substitutions, applied left to right")

    p = sub.add_parser("constants", help="compute p'_m, q'_m, tau'_m, mu'_m")
    common(p)
    p.add_argument("--order", type=int, required=True, metavar="M")
    p.add_argument("--output", help="write the JSON report here")
    p.add_argument("--conditions", action="store_true", help="add real vanishing conditions (all parameters real)")
    p.add_argument("--full-table", action="store_true", help="compute every series coefficient (no pruning)")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("manifold", help="center-manifold approximation")
    common(p)
    p.add_argument("--degree", type=int, required=True, metavar="N")
    p.add_argument("--output")
    p.set_defaults(func=cmd_manifold)

    p = sub.add_parser("verify-period", help="numerical return-time scan")
    common(p)
    p.add_argument("--params", default="", metavar="NAME=EXPR[,...]", help="numeric value for every parameter")
    p.add_argument("--amplitudes", default="0.02:0.1:5", metavar="LO:HI:K")
    p.add_argument("--returns", type=int, default=6)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--epsilon", type=float, default=1e-7)
    p.add_argument("--manifold-degree", type=int, default=None, help="start on the degree-N manifold")
    p.add_argument("--csv", help="write return times as CSV")
    p.add_argument("--output", help="write the JSON verdict block")
    p.set_defaults(func=cmd_verify_period)

    p = sub.add_parser("check-plane", help="is u = 0 invariant?")
    common(p)
    p.set_defaults(func=cmd_check_plane)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DegenerateSystemError as exc:
        print(f"error: degenerate system: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except IntegrationError as exc:
        print(f"error: integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except (CliError, SpecError, SystemFileError, ExprError, UsageError, EvaluationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
