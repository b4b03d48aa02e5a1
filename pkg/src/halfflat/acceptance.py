"""The verification matrix: one function per acceptance criterion.

Each criterion returns a :class:`CriterionResult`; ``run_all`` drives them
for ``halfflat paper-matrix`` and for ``tests/test_acceptance.py``.
"""

from __future__ import annotations

import os
import subprocess
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from halfflat import catalog, jets
from halfflat.symkernel.expr import Expr, normalize, render


@dataclass
class CriterionResult:
    number: int
    title: str
    provenance: str
    passed: bool
    limit_s: float
    elapsed: float = 0.0
    details: list = field(default_factory=list)
    skipped: bool = False

    @property
    def within_limit(self) -> bool:
        return self.elapsed <= self.limit_s

    @property
    def ok(self) -> bool:
        return self.skipped or (self.passed and self.within_limit)

    def line(self) -> str:
        if self.skipped:
            status = "SKIP"
        else:
            status = "PASS" if self.ok else "FAIL"
        return (f"[{status}] criterion {self.number:2d}: {self.title} "
                f"({self.elapsed:.1f}s, limit {self.limit_s:g}s) | {self.provenance}")

    def to_dict(self):
        return {"criterion": self.number, "title": self.title, "provenance": self.provenance,
                "passed": self.passed, "skipped": self.skipped, "within_limit": self.within_limit,
                "elapsed_ms": int(self.elapsed * 1000), "details": self.details}


class _Collector:
    def __init__(self):
        self.ok = True
        self.details = []

    def check(self, cond: bool, msg: str):
        self.details.append(("ok   " if cond else "FAIL ") + msg)
        self.ok = self.ok and bool(cond)


def _eq(name, defaults=True):
    return catalog.equation(name, defaults=defaults)


def _h2f(f: str, name: str):
    return jets.equation(name, 4, f"u[1,3] + u[2,4] + ({f})*(u[1,1]*u[2,2] - u[1,2]^2)",
                         solved=((1, 3), f"-u[2,4] - ({f})*(u[1,1]*u[2,2] - u[1,2]^2)"))


# ------------------------------------------------------------ criteria


def c1_characteristic_structure(c: _Collector):
    from halfflat.confgeom import characteristic_quadric, conformal_check, metric_representative
    from halfflat.linalg import matmul
    from halfflat.symkernel.parse import parse

    eq = _eq("heavenly2")
    Q = characteristic_quadric(eq)
    eq = jets.ensure_solved(eq)
    g, _, dq = metric_representative(Q, eq)
    c.check(conformal_check(g, Q, dq, eq), "g . Q == det(Q) Id on solutions, g = adj(Q)")
    # printed metric dx1dx3 + dx2dx4 - u22 dx3^2 + 2 u12 dx3dx4 - u11 dx4^2
    P = [[Expr({})] * 4 for _ in range(4)]
    half = Expr.const(Fraction(1, 2))
    P[0][2] = P[2][0] = half
    P[1][3] = P[3][1] = half
    P[2][2] = parse("-u[2,2]")
    P[2][3] = P[3][2] = parse("u[1,2]")
    P[3][3] = parse("-u[1,1]")
    prod = matmul(P, Q.as_matrix())
    lam = jets.restrict(prod[0][0], eq)
    diag_ok = all(jets.restrict(prod[i][j] - (lam if i == j else Expr({})), eq).is_zero()
                  for i in range(4) for j in range(4))
    c.check(diag_ok and not lam.is_zero(), f"printed metric times Q is {render(lam)} * Id (conformal)")
    c.check(render(dq) == "1/16", f"det Q restricts to {render(dq)}")


def c2_halfflat_heavenly(c: _Collector):
    from halfflat.confgeom import halfflat_check

    for name in ("heavenly2", "heavenly2_f_bilinear", "heavenly2_f_x1", "heavenly2_f_x3"):
        t = time.perf_counter()
        r = halfflat_check(_eq(name), mode="sampled", seed=0, samples=8)
        dt = time.perf_counter() - t
        c.check(r.W_minus_zero and not r.W_plus_zero and r.witness_plus is not None and dt < 120,
                f"{name} sampled: W- zero, W+ witness {r.witness_plus.component if r.witness_plus else None}, "
                f"bound {r.failure_bound:.1e}, {dt:.1f}s")
    r = halfflat_check(_eq("heavenly2"), mode="symbolic")
    c.check(r.W_minus_zero and not r.W_plus_zero,
            f"heavenly2 symbolic: W- == 0, W+ witness {r.witness_plus.expression if r.witness_plus else None}")


def c3_halfflat_first_general(c: _Collector):
    from halfflat.confgeom import halfflat_check

    for name in ("heavenly1", "heavenly1_u1", "heavenly1_u1u3", "genheavenly_c", "genheavenly_x"):
        t = time.perf_counter()
        r = halfflat_check(_eq(name), mode="sampled", seed=0, samples=8)
        dt = time.perf_counter() - t
        c.check(r.half_flat and dt < 600,
                f"{name} sampled: W+ zero {r.W_plus_zero}, W- zero {r.W_minus_zero}, {dt:.1f}s")
    # printed metric u13 dx1dx3 + u14 dx1dx4 + u23 dx2dx3 + u24 dx2dx4 for f = 1
    from halfflat.linalg import det
    from halfflat.symkernel.parse import parse

    eq = jets.ensure_solved(_eq("heavenly1"))
    G = [[Expr({})] * 4 for _ in range(4)]
    for (i, j) in ((0, 2), (0, 3), (1, 2), (1, 3)):
        v = normalize(parse(f"u[{i + 1},{j + 1}]") * Expr.const(Fraction(1, 2)))
        G[i][j] = G[j][i] = v
    dg = jets.restrict(det(G), eq)
    c.check(render(dg) == "1/16", f"det g of heavenly1 restricts to {render(dg)} = f^2/16 at f = 1")


def c4_negative_controls(c: _Collector):
    from halfflat.confgeom import halfflat_check

    for eq in (_h2f("x1*x2", "heavenly2_f_x1x2"), _eq("ma_counterexample")):
        r = halfflat_check(eq, mode="sampled", seed=0, samples=8)
        w = r.witness_minus or r.witness_plus
        c.check(not r.half_flat and r.witness_minus is not None and r.witness_plus is not None,
                f"{eq.name}: not half-flat, witness {w.component}={w.value}" if w else f"{eq.name}: no witness")


def c5_ma_relations(c: _Collector):
    from halfflat.mongeampere import check_relations, generate_relations, to_evolutionary
    from halfflat.symkernel.parse import parse

    ev, _ = to_evolutionary(_eq("heavenly2"))
    rels = generate_relations(ev.rhs)
    c.check(len(rels) == 25, f"{len(rels)} relations generated")
    # y1 = x1, y3 = x3 - x1, i.e. x3 = y1 + y3
    frame = [[1, 0, 0, 0], [0, 1, 0, 0], [-1, 0, 1, 0], [0, 0, 0, 1]]
    r = check_relations(_eq("heavenly2"), mode="symbolic", frame=frame)
    c.check(r.is_ma, f"second heavenly in the frame x3 = y1 + y3, pivot u[1,1]: "
                     f"{sum(r.passed)} of {len(r.passed)} pass")
    for name in ("heavenly2", "heavenly2_f_bilinear", "heavenly2_f_x1", "heavenly2_f_x3"):
        r = check_relations(_eq(name), mode="symbolic")
        c.check(r.is_ma, f"{name}: {sum(r.passed)} of {len(r.passed)} relations pass")
    r = check_relations(_eq("ma_counterexample"), mode="symbolic")
    bad = [(lab, res) for (lab, res), ok in zip(r.residuals, r.passed) if not ok]
    six = parse("6*u[2,2]")
    c.check(len(bad) == 1 and (bad[0][1] - six).is_zero(),
            f"counterexample fails {[lab for lab, _ in bad]} with residual "
            f"{', '.join(render(x) for _, x in bad)}")


def c6_minor_span(c: _Collector):
    from halfflat.mongeampere import check_minor_span

    base = catalog.equation("genheavenly")
    for abg, expect in (((1, 0, -1), True), ((0, 1, -1), True), ((1, 1, -2), True), ((1, 1, 1), False)):
        eq = base.with_params(dict(zip("abg", abg)))
        v = check_minor_span(eq, trials=3, seed=0)
        c.check(v.member == expect, f"(a,b,g)={abg}: member={v.member}")


def c7_lax(c: _Collector):
    from halfflat.laxpair import verify

    names = ("heavenly2_f_bilinear", "heavenly2_f_x1", "heavenly2_f_x3", "heavenly2",
             "heavenly1_u1u3", "heavenly1_u1", "heavenly1", "genheavenly_x", "genheavenly_c",
             "veronese3d", "veronese4d")
    for name in names:
        t = time.perf_counter()
        # parameters stay symbolic: c for Table 3 row 2 and a1..a4 for the 4D web
        r = verify(catalog.equation(name), mode="symbolic")
        dt = time.perf_counter() - t
        c.check(r.passed and r.null.passed and dt < 60,
                f"{name}: {r.verdict}, {r.null.criterion} {r.null.passed}, {dt:.2f}s")
    r = verify(catalog.equation("heavenly2_lax_sec13"), mode="symbolic")
    c.check(not r.null.passed, f"alternative heavenly pair: null check fails, g(X,X) = {render(r.null.values['g(X,X)'])}")


def c8_rank(c: _Collector):
    expected = {"heavenly6d": 4, "heavenly8d": 4, "veronese5d": 5}
    for name in catalog.names():
        eq = _eq(name)
        if eq.dim == 4:
            expected[name] = 4
    for name, want in expected.items():
        t = time.perf_counter()
        rk = jets.characteristic_rank(_eq(name), mode="sampled", seed=0, samples=8)
        dt = time.perf_counter() - t
        c.check(rk == want and dt < 10, f"{name}: rank {rk} (want {want}), {dt:.2f}s")


def c9_equivalences(c: _Collector):
    from halfflat.equivalence import verify_equivalence

    for name in catalog.map_names():
        me = catalog.load_map(name)
        t = time.perf_counter()
        r = verify_equivalence(me.map, _eq(me.source), _eq(me.target))
        dt = time.perf_counter() - t
        c.check(r.passed and r.factor is not None and not r.factor.is_zero() and dt < 60,
                f"{name}: {me.source} -> {me.target}, factor {render(r.factor) if r.factor else None}, {dt:.2f}s")


def c10_symmetries(c: _Collector):
    from halfflat.equivalence import bracket, fields_equal, verify_symmetry

    e3 = catalog.load("veronese3d")
    for lab in ("Y0", "Y1", "Xu", "Xu2"):
        ok, _ = verify_symmetry(e3.symmetries[lab], e3.equation)
        c.check(ok, f"veronese3d {lab} is a symmetry")
    e4 = catalog.load("veronese4d")
    for lab in ("Y0", "Y1", "Xf", "Xu2"):
        ok, _ = verify_symmetry(e4.symmetries[lab], e4.equation)
        c.check(ok, f"veronese4d {lab} is a symmetry (a1..a4 symbolic)")
    Y0, Y1, Xu = e3.symmetries["Y0"], e3.symmetries["Y1"], e3.symmetries["Xu"]
    c.check(fields_equal(bracket(Y0, Y1), Y0), "[Y0, Y1] = Y0")
    Z = bracket(Y0, Xu)
    c.check(all(v.is_zero() for v in Z.components()), "[Y0, X_u] = 0")
    Z = bracket(Y0, e3.symmetries["Xu2"])
    c.check(all(v.is_zero() for v in Z.components()), "[Y0, X_{u^2}] = 0")


def c11_constraints(c: _Collector):
    from halfflat.constraints import contains_ma, derive_constraints

    s = derive_constraints(completeness=True)
    c.check(s.rank == 30, f"rank {s.rank} at the frozen 1-jet f_u14 = f_u23 = 1")
    c.check(s.split_rank == s.rank, f"third-order splits keep the rank at {s.split_rank}")
    r = contains_ma(s)
    c.check(r.all_contained, f"{sum(x.contained for x in r.results)} of 25 relations contained")
    c.check(r.complement == 5, f"complement dimension {r.complement}")


def c12_travelling_wave(c: _Collector):
    from halfflat.equivalence import random_rank4_matrix, travelling_wave_reduce
    from halfflat.mongeampere import check_minor_span

    eq = _eq("heavenly6d")
    B = random_rank4_matrix(eq.dim, seed=0)
    eq4, used = travelling_wave_reduce(eq, B, seed=0)
    rk = jets.characteristic_rank(eq4, mode="sampled", seed=0)
    c.check(rk == 4, f"reduced equation has rank {rk} ({len(eq4.F.num)} terms)")
    v = check_minor_span(eq4, trials=3, seed=0)
    c.check(v.member, "reduced equation is in the minor span")


def c13_properties(c: _Collector):
    root = _repo_root()
    if root is None:
        c.details.append("SKIP property suites need the source checkout (tests/ not found)")
        c.ok = None
        return
    files = sorted(str(p) for p in (root / "tests").glob("test_prop_*.py"))
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *files],
                          cwd=root, capture_output=True, text=True, env=env)
    tail = [ln for ln in proc.stdout.splitlines() if ln.strip()][-1:] or ["no output"]
    c.check(proc.returncode == 0, f"{len(files)} property modules: {tail[0]}")


def _repo_root():
    for base in (Path.cwd(), Path(__file__).resolve().parents[2]):
        if (base / "tests").is_dir() and (base / "pyproject.toml").is_file():
            return base
    return None


CRITERIA = [
    (1, "characteristic structure of the second heavenly equation", "second heavenly metric", 1,
     c1_characteristic_structure, False),
    (2, "half-flatness of the second heavenly family", "Table 1", 120 * 4 + 60,
     c2_halfflat_heavenly, False),
    (3, "half-flatness of the first and general heavenly families", "Tables 2 and 3", 600 * 5,
     c3_halfflat_first_general, False),
    (4, "negative controls are not half-flat", "constraint on the Table 1 coefficients", 120,
     c4_negative_controls, False),
    (5, "Monge-Ampere relations", "system of 25 relations", 30, c5_ma_relations, False),
    (6, "minor-span test on the general heavenly plane", "Monge-Ampere definition", 5,
     c6_minor_span, False),
    (7, "Lax pairs: Frobenius and null checks", "Lax pair columns of Tables 1-3; Veronese webs",
     60 * 12, c7_lax, False),
    (8, "characteristic rank", "rank-4 examples in dimensions 6 and 8; 5D combination", 10 * 25,
     c8_rank, False),
    (9, "point equivalences", "maps between Table 1 rows", 120, c9_equivalences, False),
    (10, "symmetries and brackets", "symmetry generators of the Veronese webs", 30,
     c10_symmetries, False),
    (11, "second-order constraint system at a frozen 1-jet", "30 relations containing the 25",
     3600, c11_constraints, True),
    (12, "travelling-wave reduction of the 6D equation", "generic 4D reduction", 60,
     c12_travelling_wave, False),
    (13, "property suites", "invariants", 300, c13_properties, False),
]


def run(number: int) -> CriterionResult:
    for n, title, prov, limit, fn, _slow in CRITERIA:
        if n == number:
            col = _Collector()
            t = time.perf_counter()
            try:
                fn(col)
            except Exception as exc:  # a crash is a failed criterion, not an abort
                col.check(False, f"raised {type(exc).__name__}: {exc}")
            res = CriterionResult(n, title, prov, bool(col.ok), limit, time.perf_counter() - t, col.details)
            if col.ok is None:
                res.skipped = True
            return res
    raise KeyError(number)


def run_all(include_slow: bool = False, progress=None):
    out = []
    for n, title, prov, limit, fn, slow in CRITERIA:
        if slow and not include_slow:
            out.append(CriterionResult(n, title, prov, False, limit, 0.0,
                                       ["long-running; pass --all to include"], skipped=True))
        else:
            out.append(run(n))
        if progress:
            progress(out[-1])
    return out
