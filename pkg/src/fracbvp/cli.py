"""Command-line interface: ``fracbvp {certify,solve,kernels,reproduce,validate}``.

Exit codes: 0 success, 1 ran fine but the outcome is negative (certificate
conditions not met, solver not converged, validation failures), 2 bad input,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .certifier import DEFAULT_R_SEARCH, G_GAMMA_MODES, W1_MODES, certify
from .expr import ExprEvalError
from .fraccalc import UniformGrid
from .kernels import KINDS, tabulate
from .problem import BUILTINS, ProblemError, builtin_problem, load_problem, validate_spec
from .report import dumps
from .solver import fixed_point_solve

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

# Reference values for the two built-in problems: contraction constant and
# invariant-ball slack at R = 2.
REFERENCE_VALUES = {
    "example1": {"contraction_constant": 0.368, "h4_slack": -0.301},
    "example2": {"contraction_constant": 0.323, "h4_slack": -0.163},
}
REPRODUCE_TOL = {"contraction_constant": 1e-3, "h4_slack": 1e-2}

log = logging.getLogger("fracbvp")


class InputError(Exception):
    pass


def _load(source: str | None, builtin: str | None):
    if builtin is not None:
        return builtin_problem(builtin)
    if source is None:
        raise InputError("no problem given: pass a file path or --builtin NAME")
    if os.path.exists(source):
        return load_problem(source)
    if source in BUILTINS:
        return builtin_problem(source)
    raise InputError(f"{source!r} is neither a readable file nor a built-in problem ({', '.join(BUILTINS)})")


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 2:
        raise argparse.ArgumentTypeError("must be an integer >= 2")
    return v


def _damping(s: str) -> float:
    v = float(s)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError("must lie in (0, 1]")
    return v


def _add_source(p):
    p.add_argument("source", nargs="?", help="problem file or built-in name")
    p.add_argument("--builtin", choices=sorted(BUILTINS), help="use a built-in problem")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracbvp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=("json",)):
        p.add_argument("-n", "--n", type=_positive_int, default=1024, help="grid intervals (default 1024)")
        p.add_argument("-o", "--out", help="output path (default stdout)")
        p.add_argument("--format", choices=fmt, default=fmt[0])

    p = sub.add_parser("certify", help="check the existence conditions")
    _add_source(p)
    common(p)
    p.add_argument("--g-gamma-mode", choices=G_GAMMA_MODES, default="analytic_bound")
    p.add_argument("--w1-mode", choices=W1_MODES, default="exact")
    p.add_argument("--r-search", action="store_true", help="scan 200 log-spaced radii in [1e-3, 1e3]")

    p = sub.add_parser("solve", help="Picard iteration for a fixed point")
    _add_source(p)
    common(p, fmt=("json", "csv"))
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--damping", type=_damping, default=1.0)

    p = sub.add_parser("kernels", help="tabulate a kernel as CSV")
    _add_source(p)
    common(p, fmt=("csv",))
    p.add_argument("--kind", choices=KINDS, default="Ggamma")
    p.add_argument("--alpha", type=float, help="overrides the problem's alpha")
    p.add_argument("--gamma", type=float, help="overrides the problem's gamma")

    p = sub.add_parser("reproduce", help="rerun a built-in example against its reference values")
    p.add_argument("name", choices=sorted(REFERENCE_VALUES))
    common(p)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=500)

    p = sub.add_parser("validate", help="check a problem description")
    _add_source(p)
    common(p)
    return parser


def cmd_certify(args) -> int:
    spec = _load(args.source, args.builtin)
    cert = certify(
        spec,
        g_gamma_mode=args.g_gamma_mode,
        w1_mode=args.w1_mode,
        R_search=DEFAULT_R_SEARCH if args.r_search else None,
        n=args.n,
    )
    _write(dumps(cert.to_dict()), args.out)
    return EXIT_OK if cert.ok else EXIT_NEGATIVE


def cmd_solve(args) -> int:
    spec = _load(args.source, args.builtin)
    rep = fixed_point_solve(spec, UniformGrid(args.n), tol=args.tol, max_iter=args.max_iter, damping=args.damping)
    if args.format == "csv":
        _write(rep.solution_csv(), args.out)
    else:
        _write(dumps({"spec": spec.digest(), "solve": rep.to_dict()}), args.out)
    return EXIT_OK if rep.converged else EXIT_NEGATIVE


def cmd_kernels(args) -> int:
    alpha, gamma = args.alpha, args.gamma
    if args.source is not None or args.builtin is not None:
        spec = _load(args.source, args.builtin)
        alpha = spec.alpha if alpha is None else alpha
        gamma = spec.gamma if gamma is None else gamma
    if args.kind in ("G", "Ggamma") and alpha is None:
        raise InputError("kernel needs --alpha or a problem")
    if args.kind in ("Ggamma", "Hgamma") and gamma is None:
        raise InputError("kernel needs --gamma or a problem")
    try:
        table = tabulate(args.kind, alpha, gamma, UniformGrid(args.n))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _write(table.to_csv(), args.out)
    return EXIT_OK


def reproduce(name: str, n: int = 1024, tol: float = 1e-8, max_iter: int = 500) -> dict:
    """Certificate in quoted-value modes next to the reference numbers, then a solve."""
    spec = builtin_problem(name)
    cert = certify(spec, g_gamma_mode="paper", w1_mode="supplied", n=n)
    ref = REFERENCE_VALUES[name]
    comparison = {}
    for key in ("contraction_constant", "h4_slack"):
        computed = getattr(cert, key)
        diff = abs(computed - ref[key])
        comparison[key] = {
            "reference": ref[key],
            "computed": computed,
            "abs_diff": diff,
            "tolerance": REPRODUCE_TOL[key],
            "within_tolerance": diff <= REPRODUCE_TOL[key],
        }
    rep = fixed_point_solve(spec, UniformGrid(n), tol=tol, max_iter=max_iter)
    return {
        "name": name,
        "comparison": comparison,
        "certificate": cert.to_dict(),
        "solve": rep.to_dict(),
    }


def cmd_reproduce(args) -> int:
    out = reproduce(args.name, n=args.n, tol=args.tol, max_iter=args.max_iter)
    _write(dumps(out), args.out)
    ok = (
        all(c["within_tolerance"] for c in out["comparison"].values())
        and out["certificate"]["contraction_ok"]
        and out["certificate"]["h4_ok"]
        and out["solve"]["converged"]
    )
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_validate(args) -> int:
    spec = _load(args.source, args.builtin)
    report = validate_spec(spec, n_grid=args.n)
    matches = [name for name in sorted(BUILTINS) if builtin_problem(name) == spec]
    out = {
        "spec": spec.digest(),
        "matches_builtin": matches[0] if matches else None,
        "ok": report.ok,
        "checks": [{"name": i.name, "status": i.status, "detail": i.detail} for i in report.items],
    }
    _write(dumps(out), args.out)
    return EXIT_OK if report.ok else EXIT_NEGATIVE


COMMANDS = {
    "certify": cmd_certify,
    "solve": cmd_solve,
    "kernels": cmd_kernels,
    "reproduce": cmd_reproduce,
    "validate": cmd_validate,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InputError, ProblemError, OSError) as exc:
        print(f"fracbvp: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        if isinstance(exc, ExprEvalError):
            print(f"fracbvp: numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"fracbvp: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"fracbvp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
