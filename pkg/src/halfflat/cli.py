"""``halfflat`` command-line front end.

Exit codes: 0 when the check passes, 2 when it is decided false, 1 on any
error (bad input, unmet precondition).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from halfflat import __version__, catalog, jets

EXIT_PASS, EXIT_ERROR, EXIT_FALSE = 0, 1, 2


class CliError(Exception):
    pass


# ------------------------------------------------------------- inputs


def _params(args) -> dict:
    out = {}
    for item in args.param or ():
        if "=" not in item:
            raise CliError(f"--param expects name=value, got {item!r}")
        k, v = (t.strip() for t in item.split("=", 1))
        try:
            out[k] = Fraction(v)
        except ValueError:
            raise CliError(f"--param {k}: value must be rational") from None
    return out


def load_equation(spec: str, args) -> jets.Equation:
    """Catalog name or ``.eq`` path, with ``--param`` values and catalog defaults applied."""
    if spec in catalog.names():
        eq = catalog.equation(spec)
    else:
        p = Path(spec)
        if not p.is_file():
            raise CliError(f"{spec!r} is neither a catalog entry nor a readable .eq file")
        eq = jets.load(p)
    eq = eq.with_params(_params(args))
    if not getattr(args, "symbolic_params", False):
        eq = eq.with_defaults()
    return eq


def _bind_params(V, eq):
    """Substitute the equation's parameter values into a vector field."""
    from halfflat.equivalence import PointVectorField
    from halfflat.symkernel import atoms as A
    from halfflat.symkernel.expr import Expr, normalize, substitute

    b = {A.param(k): Expr.const(v) for k, v in eq.params.items() if v is not None}
    if not b:
        return V
    sub = lambda e: normalize(substitute(e, b))  # noqa: E731
    return PointVectorField(V.dim, tuple(sub(x) for x in V.xi), sub(V.phi))


def load_vector_field(spec: list, eq, eq_name: str):
    from halfflat.equivalence import read_vector_field

    if len(spec) == 1 and Path(spec[0]).is_file():
        V = read_vector_field(spec[0], eq.dim, params=tuple(eq.params))
    elif len(spec) == 1 and eq_name in catalog.names():
        V = catalog.symmetry(eq_name, spec[0])
    elif len(spec) == 2:
        V = catalog.symmetry(spec[0], spec[1])
    else:
        raise CliError(f"cannot resolve vector field {' '.join(spec)!r}")
    return _bind_params(V, eq)


def load_map(spec: str):
    from halfflat.equivalence import read_point_map

    if spec in catalog.map_names():
        return catalog.load_map(spec).map
    if not Path(spec).is_file():
        raise CliError(f"{spec!r} is neither a catalog map nor a readable map file")
    return read_point_map(spec)


def _pivot_frame(pivot: str):
    """``u[a,a]`` -> permutation frame swapping ``x1`` and ``xa``."""
    from halfflat.symkernel.parse import parse

    e = parse(pivot, dim=4)
    atoms = list(e.atoms())
    if len(atoms) != 1 or atoms[0].kind != "u" or atoms[0].order != 2 or e != parse(atoms[0].name):
        raise CliError("--pivot expects a second-order jet such as u[2,2]")
    idx = atoms[0].data
    if idx[0] != idx[1]:
        raise CliError("--pivot must be a diagonal jet u[a,a]; use --frame for mixed pivots")
    a = idx[0]
    C = [[int(i == j) for j in range(4)] for i in range(4)]
    C[0][0] = C[a - 1][a - 1] = 0
    C[0][a - 1] = C[a - 1][0] = 1
    if a == 1:
        C[0][0] = 1
    return C


# ------------------------------------------------------------ reports


def report(args, check: str, equation: str, verdict: bool, details: dict, t0: float,
           failure_bound=None) -> dict:
    return {
        "check": check,
        "equation": equation,
        "verdict": verdict,
        "details": details,
        "mode": args.mode,
        "seed": args.seed,
        "samples": args.samples,
        "failure_bound": failure_bound,
        "elapsed_ms": int((time.perf_counter() - t0) * 1000),
        "version": __version__,
    }


def emit(args, rep: dict):
    if args.json:
        print(json.dumps(rep, sort_keys=True, indent=2))
        return
    head = f"{rep['check']} {rep['equation']}: {'PASS' if rep['verdict'] else 'FAIL'}"
    print(head)
    _print_details(rep["details"], "  ")
    extra = f"mode={rep['mode']} seed={rep['seed']} samples={rep['samples']}"
    if rep["failure_bound"] is not None:
        extra += f" failure_bound={rep['failure_bound']:.3g}"
    print(f"  [{extra} elapsed={rep['elapsed_ms']}ms]")


def _print_details(d, pad):
    if isinstance(d, dict):
        for k in sorted(d):
            v = d[k]
            if isinstance(v, (dict, list)) and v:
                print(f"{pad}{k}:")
                _print_details(v, pad + "  ")
            else:
                print(f"{pad}{k}: {v}")
    elif isinstance(d, list):
        for v in d:
            if isinstance(v, list) and not any(isinstance(x, (dict, list)) for x in v):
                print(f"{pad}[{', '.join(str(x) for x in v)}]")
            elif isinstance(v, (dict, list)):
                _print_details(v, pad + "  ")
                print(f"{pad}--")
            else:
                print(f"{pad}- {v}")


# ----------------------------------------------------------- commands


def cmd_analyze(args):
    from halfflat.confgeom import characteristic_quadric
    from halfflat.symkernel.expr import render

    t0 = time.perf_counter()
    eq = load_equation(args.eq, args)
    eqs = eq.specialized()
    try:
        eqs = jets.ensure_solved(eqs)
    except jets.EquationError:
        pass
    rk = jets.characteristic_rank(eqs, mode=args.mode, seed=args.seed, samples=args.samples)
    Q = characteristic_quadric(eqs)
    M = Q.as_matrix()
    from halfflat.linalg import det

    dq = jets.restrict(det(M), eqs) if eqs.solved else det(M)
    details = {
        "dim": eq.dim,
        "rank": rk,
        "non_degenerate": rk == eq.dim,
        "det_Q": render(dq),
        "quadric": [[render(v) for v in row] for row in M],
        "solved_for": eqs.pivot.name if eqs.solved else None,
        "params": {k: (None if v is None else str(v)) for k, v in eq.params.items()},
        "lax_pair": eq.lax is not None,
    }
    return report(args, "analyze", eq.name, True, details, t0), EXIT_PASS


def cmd_halfflat(args):
    from halfflat.confgeom import halfflat_check

    t0 = time.perf_counter()
    eq = load_equation(args.eq, args)
    r = halfflat_check(eq, mode=args.mode, seed=args.seed, samples=args.samples,
                       max_order=args.max_jet_order)
    d = r.to_dict()
    for k in ("equation", "mode", "seed", "samples", "elapsed_ms", "failure_bound"):
        d.pop(k, None)
    rep = report(args, "halfflat", eq.name, r.half_flat, d, t0, r.failure_bound)
    return rep, EXIT_PASS if r.half_flat else EXIT_FALSE


def cmd_ma_relations(args):
    from halfflat.equivalence import read_matrix
    from halfflat.mongeampere import check_relations

    t0 = time.perf_counter()
    eq = load_equation(args.eq, args)
    frame = None
    if args.frame:
        frame = read_matrix(args.frame, cols=eq.dim)
    elif args.pivot:
        frame = _pivot_frame(args.pivot)
    r = check_relations(eq, mode=args.mode, seed=args.seed, samples=args.samples, frame=frame)
    d = r.to_dict()
    for k in ("equation", "mode", "seed"):
        d.pop(k, None)
    return report(args, "ma relations", eq.name, r.is_ma, d, t0), EXIT_PASS if r.is_ma else EXIT_FALSE


def cmd_ma_span(args):
    from halfflat.mongeampere import check_minor_span

    t0 = time.perf_counter()
    eq = load_equation(args.eq, args)
    v = check_minor_span(eq, trials=args.trials, seed=args.seed)
    d = v.to_dict()
    for k in ("equation", "seed"):
        d.pop(k, None)
    return report(args, "ma span", eq.name, v.member, d, t0), EXIT_PASS if v.member else EXIT_FALSE


def cmd_lax(args):
    from halfflat.laxpair import verify

    t0 = time.perf_counter()
    eq = load_equation(args.eq, args)
    r = verify(eq, mode=args.mode, seed=args.seed, samples=args.samples)
    ok = r.passed and r.null.passed
    d = r.to_dict()
    if eq.meta.get("expect"):
        d["catalog_expectation"] = eq.meta["expect"]
    return report(args, "lax verify", eq.name, ok, d, t0), EXIT_PASS if ok else EXIT_FALSE


def cmd_equiv(args):
    from halfflat.equivalence import verify_equivalence

    t0 = time.perf_counter()
    m = load_map(args.map)
    a = load_equation(args.eqA, args)
    b = load_equation(args.eqB, args)
    r = verify_equivalence(m, a, b, mode=args.mode, seed=args.seed, samples=args.samples)
    d = r.to_dict()
    d["target"] = b.name
    return report(args, "equiv verify", a.name, r.passed, d, t0), EXIT_PASS if r.passed else EXIT_FALSE


def cmd_symmetry(args):
    from halfflat.equivalence import verify_symmetry
    from halfflat.symkernel.expr import render

    t0 = time.perf_counter()
    eq = load_equation(args.eq, args)
    V = load_vector_field(args.vf, eq, args.eq)
    ok, res = verify_symmetry(V, eq, mode=args.mode, seed=args.seed, samples=args.samples)
    d = {"xi": [render(x) for x in V.xi], "phi": render(V.phi)}
    if not ok:
        d["residual"] = render(res)
    return report(args, "symmetry verify", eq.name, ok, d, t0), EXIT_PASS if ok else EXIT_FALSE


def cmd_reduce(args):
    from halfflat.equivalence import read_matrix, travelling_wave_reduce
    from halfflat.symkernel.expr import render

    t0 = time.perf_counter()
    eq = load_equation(args.eq, args)
    B = read_matrix(args.matrix, cols=4)
    red, used = travelling_wave_reduce(eq, B, seed=args.seed)
    text = jets.dumps(red)
    Path(args.out).write_text(text, encoding="utf-8")
    d = {"out": args.out, "F": render(red.F),
         "matrix": [[str(v) for v in row] for row in used],
         "perturbed": [list(r) for r in used] != [list(r) for r in B]}
    return report(args, "reduce", eq.name, True, d, t0), EXIT_PASS


def _progress(args):
    if args.json:
        return None
    return lambda msg: print(f"  .. {msg}", file=sys.stderr)


def cmd_constraints_derive(args):
    from halfflat.constraints import derive_constraints, read_jet

    t0 = time.perf_counter()
    frozen = read_jet(args.jet) if args.jet else None
    s = derive_constraints(frozen, extra_args=args.extra_args, part=args.part, seed=args.seed,
                           progress=_progress(args), completeness=args.completeness)
    d = s.to_dict()
    return report(args, "constraints derive", "formal_evolutionary", True, d, t0), EXIT_PASS


def cmd_constraints_contains(args):
    from halfflat.constraints import contains_ma, derive_constraints, read_jet

    t0 = time.perf_counter()
    frozen = read_jet(args.jet) if args.jet else None
    s = derive_constraints(frozen, part=args.part, seed=args.seed, progress=_progress(args))
    r = contains_ma(s)
    d = r.to_dict()
    d["frozen_1jet"] = s.to_dict()["frozen_1jet"]
    ok = r.all_contained
    return (report(args, "constraints contains-ma", "formal_evolutionary", ok, d, t0),
            EXIT_PASS if ok else EXIT_FALSE)


def cmd_catalog_list(args):
    t0 = time.perf_counter()
    rows = catalog.listing()
    if not args.json:
        for r in rows:
            if r["kind"] == "map":
                print(f"{r['name']:22s} map  {r['source']} -> {r['target']}  | {r['provenance']}")
            else:
                flags = []
                if r["lax"]:
                    flags.append("lax" + ("(expect fail)" if r["expect"] != "pass" else ""))
                if r["params"]:
                    flags.append("params " + ",".join(r["params"]))
                if r["symmetries"]:
                    flags.append("symmetries " + ",".join(r["symmetries"]))
                print(f"{r['name']:22s} {r['dim']}D  {'; '.join(flags):40s} | {r['provenance']}")
        return None, EXIT_PASS
    return report(args, "catalog list", "*", True, {"entries": rows}, t0), EXIT_PASS


def cmd_paper_matrix(args):
    from halfflat import acceptance

    t0 = time.perf_counter()
    cb = None if args.json else (lambda r: print(r.line(), flush=True))
    results = acceptance.run_all(include_slow=args.all, progress=cb)
    ok = all(r.ok for r in results)
    if not args.json:
        print(f"{sum(r.ok and not r.skipped for r in results)} passed, "
              f"{sum(r.skipped for r in results)} skipped, {sum(not r.ok for r in results)} failed")
        return None, EXIT_PASS if ok else EXIT_FALSE
    d = {"criteria": [r.to_dict() for r in results]}
    return report(args, "paper-matrix", "*", ok, d, t0), EXIT_PASS if ok else EXIT_FALSE


# ------------------------------------------------------------- parser


def _common() -> argparse.ArgumentParser:
    # SUPPRESS defaults let the flags appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    p.add_argument("--mode", choices=("symbolic", "sampled"), default=S)
    p.add_argument("--samples", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--json", action="store_true", default=S)
    p.add_argument("--max-jet-order", type=int, default=S)
    p.add_argument("--param", action="append", default=S, metavar="NAME=VALUE")
    p.add_argument("--symbolic-params", action="store_true", default=S,
                   help="keep parameters without --param symbolic instead of using defaults")
    return p


DEFAULTS = {"mode": "sampled", "samples": 8, "seed": 0, "json": False, "max_jet_order": 4,
            "param": None, "symbolic_params": False}


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = argparse.ArgumentParser(prog="halfflat", parents=[common],
                                description="Exact checks for second-order PDEs: half-flatness, "
                                            "Monge-Ampere type, Lax pairs, equivalences.")
    p.add_argument("--version", action="version", version=f"halfflat {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, parents=[common], **kw)
        sp.set_defaults(fn=fn)
        return sp

    add("analyze", cmd_analyze, help="rank, determinant and quadric").add_argument("eq")
    add("halfflat", cmd_halfflat, help="is W+ or W- zero on all solutions").add_argument("eq")

    ma = sub.add_parser("ma", help="Monge-Ampere checks")
    masub = ma.add_subparsers(dest="ma_command", required=True)
    r = masub.add_parser("relations", parents=[common])
    r.add_argument("eq")
    r.add_argument("--pivot", help="diagonal pivot u[a,a]; solved for it by swapping x1 and xa")
    r.add_argument("--frame", help="file with a 4x4 matrix C, new coordinates y = C x")
    r.set_defaults(fn=cmd_ma_relations)
    s = masub.add_parser("span", parents=[common])
    s.add_argument("eq")
    s.add_argument("--trials", type=int, default=3)
    s.set_defaults(fn=cmd_ma_span)

    lax = sub.add_parser("lax")
    laxsub = lax.add_subparsers(dest="lax_command", required=True)
    v = laxsub.add_parser("verify", parents=[common])
    v.add_argument("eq")
    v.set_defaults(fn=cmd_lax)

    eqv = sub.add_parser("equiv")
    eqvsub = eqv.add_subparsers(dest="equiv_command", required=True)
    v = eqvsub.add_parser("verify", parents=[common])
    v.add_argument("map", help="map file or catalog map name")
    v.add_argument("eqA")
    v.add_argument("eqB")
    v.set_defaults(fn=cmd_equiv)

    sym = sub.add_parser("symmetry")
    symsub = sym.add_subparsers(dest="symmetry_command", required=True)
    v = symsub.add_parser("verify", parents=[common])
    v.add_argument("eq")
    v.add_argument("vf", nargs="+", help="vector-field file, or catalog label (optionally preceded "
                                         "by the catalog entry)")
    v.set_defaults(fn=cmd_symmetry)

    red = add("reduce", cmd_reduce, help="travelling-wave reduction to four dimensions")
    red.add_argument("eq")
    red.add_argument("--matrix", required=True, help="d x 4 matrix file")
    red.add_argument("--out", required=True)

    con = sub.add_parser("constraints")
    consub = con.add_subparsers(dest="constraints_command", required=True)
    for name, fn in (("derive", cmd_constraints_derive), ("contains-ma", cmd_constraints_contains)):
        c = consub.add_parser(name, parents=[common])
        c.add_argument("--jet", help="frozen 1-jet file (lines u[a,b] = value)")
        c.add_argument("--part", choices=("W-", "W+"), default="W-")
        if name == "derive":
            c.add_argument("--extra-args", action="store_true",
                           help="let f depend on x, u and the first jets as well")
            c.add_argument("--completeness", action="store_true",
                           help="also run the full pipeline with third-order splits")
        c.set_defaults(fn=fn)

    cat = sub.add_parser("catalog")
    catsub = cat.add_subparsers(dest="catalog_command", required=True)
    catsub.add_parser("list", parents=[common]).set_defaults(fn=cmd_catalog_list)

    pm = add("paper-matrix", cmd_paper_matrix, help="run the acceptance matrix")
    pm.add_argument("--all", action="store_true", help="include long-running criteria")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_PASS
    for k, v in DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    if not _seed_given(argv):
        env = os.environ.get("HALFFLAT_SEED")
        if env is not None:
            try:
                args.seed = int(env)
            except ValueError:
                print("halfflat: error: HALFFLAT_SEED must be an integer", file=sys.stderr)
                return EXIT_ERROR
    try:
        rep, code = args.fn(args)
    except KeyboardInterrupt:
        return EXIT_ERROR
    except Exception as exc:  # precondition violations and malformed input
        msg = str(exc) or type(exc).__name__
        if args.json:
            print(json.dumps({"error": msg, "type": type(exc).__name__, "version": __version__},
                             sort_keys=True))
        print(f"halfflat: error: {msg}", file=sys.stderr)
        return EXIT_ERROR
    if rep is not None:
        emit(args, rep)
    return code


def _seed_given(argv) -> bool:
    argv = sys.argv[1:] if argv is None else argv
    return any(a == "--seed" or a.startswith("--seed=") for a in argv)


if __name__ == "__main__":
    sys.exit(main())
