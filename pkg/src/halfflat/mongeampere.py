"""Two independent Monge-Ampere tests.

* :func:`check_relations` evaluates the 25 second-order relations on the
  right-hand side of an evolutionary form ``u[1,1] = f`` (4D).
* :func:`check_minor_span` decides whether a polynomial ``F`` is, at
  frozen first jets, a linear combination of the minors of the Hessian.

Relation count: E1a and E1b give 3 each (i in {2,3,4}); E2a and E2b are
not symmetric in (i, j) and run over the 6 ordered pairs; E2c is symmetric
and runs over the 3 unordered pairs; E3a is symmetric in all three indices
(1 relation); E3b singles out i and is symmetric in (j, k) (3 relations).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations

from gmpy2 import mpq

from halfflat import jets
from halfflat.linalg import det, field_rref, solve_combination
from halfflat.symkernel import atoms as A
from halfflat.symkernel.expr import ZERO, Expr, PoleError, as_expr, diff, normalize, render, substitute
from halfflat.symkernel.poly import canonical_terms, mono_degree

INDICES = (2, 3, 4)


class MAError(ValueError):
    pass


def _u(i, j):
    return A.jet(i, j)


def generate_relations(f, d: int = 4) -> list:
    """The 25 relations as ``(label, Expr)`` pairs, in a fixed order."""
    if d != 4:
        raise MAError("the relation system is four-dimensional")
    f = as_expr(f)
    if f.depends_on(_u(1, 1)):
        raise MAError("right-hand side contains u[1,1]")
    cache1: dict = {}
    cache2: dict = {}

    def f1(a):
        v = cache1.get(a)
        if v is None:
            v = cache1[a] = normalize(diff(f, a))
        return v

    def f2(a, b):
        key = (a.id, b.id) if a.id <= b.id else (b.id, a.id)
        v = cache2.get(key)
        if v is None:
            v = cache2[key] = normalize(diff(f1(a), b))
        return v

    out = []
    for i in INDICES:
        ui1, uii = _u(1, i), _u(i, i)
        out.append((f"E1a[{i}]", f1(uii) * f2(ui1, ui1) + f2(uii, uii)))
        out.append((f"E1b[{i}]", f1(ui1) * f2(ui1, ui1) + 2 * f2(ui1, uii)))
    for i, j in permutations(INDICES, 2):
        u1i, u1j, uii, uij = _u(1, i), _u(1, j), _u(i, i), _u(i, j)
        out.append((f"E2a[{i},{j}]", f1(u1j) * f2(u1i, u1i) + 2 * f1(u1i) * f2(u1i, u1j)
                    + 2 * f2(u1i, uij) + 2 * f2(u1j, uii)))
    for i, j in permutations(INDICES, 2):
        u1i, u1j, uii, uij = _u(1, i), _u(1, j), _u(i, i), _u(i, j)
        out.append((f"E2b[{i},{j}]", f1(uij) * f2(u1i, u1i) + 2 * f1(uii) * f2(u1i, u1j)
                    + 2 * f2(uii, uij)))
    for i, j in combinations(INDICES, 2):
        u1i, u1j, uii, ujj, uij = _u(1, i), _u(1, j), _u(i, i), _u(j, j), _u(i, j)
        out.append((f"E2c[{i},{j}]", f1(ujj) * f2(u1i, u1i) + f1(uii) * f2(u1j, u1j)
                    + 2 * f1(uij) * f2(u1i, u1j) + 2 * f2(uii, ujj) + f2(uij, uij)))
    i, j, k = INDICES
    u1i, u1j, u1k = _u(1, i), _u(1, j), _u(1, k)
    out.append(("E3a[2,3,4]", f1(u1k) * f2(u1i, u1j) + f1(u1j) * f2(u1i, u1k) + f1(u1i) * f2(u1j, u1k)
                + f2(u1i, _u(j, k)) + f2(u1j, _u(i, k)) + f2(u1k, _u(i, j))))
    for i in INDICES:
        j, k = [t for t in INDICES if t != i]
        u1i, u1j, u1k = _u(1, i), _u(1, j), _u(1, k)
        uii, ujk, uij, uik = _u(i, i), _u(j, k), _u(i, j), _u(i, k)
        out.append((f"E3b[{i};{j},{k}]", f1(ujk) * f2(u1i, u1i) + 2 * f1(uik) * f2(u1i, u1j)
                    + 2 * f1(uij) * f2(u1i, u1k) + 2 * f1(uii) * f2(u1j, u1k)
                    + 2 * f2(uii, ujk) + 2 * f2(uij, uik)))
    return [(lab, normalize(e)) for lab, e in out]


@dataclass
class MAReport:
    equation: str
    residuals: list
    passed: list
    mode: str
    seed: int
    frame: list | None = None
    witnesses: dict = field(default_factory=dict)

    @property
    def is_ma(self) -> bool:
        return all(self.passed)

    def to_dict(self):
        return {
            "equation": self.equation,
            "monge_ampere": self.is_ma,
            "mode": self.mode,
            "seed": self.seed,
            "relations": len(self.residuals),
            "failing": [
                {"relation": lab, "residual": render(r), **({"witness": self.witnesses[lab]}
                                                             if lab in self.witnesses else {})}
                for (lab, r), ok in zip(self.residuals, self.passed) if not ok
            ],
            **({"frame": [[str(v) for v in row] for row in self.frame]} if self.frame else {}),
        }


_FRAMES = None


def _candidate_frames():
    # shears x_k -> x_k + x_1 that make u[1,1] appear; identity first
    global _FRAMES
    if _FRAMES is None:
        frames = []
        for mask in range(8):
            C = [[int(i == j) for j in range(4)] for i in range(4)]
            for bit, k in enumerate((1, 2, 3)):
                if mask >> bit & 1:
                    C[k][0] = -1
            frames.append(C)
        _FRAMES = frames
    return _FRAMES


def to_evolutionary(eq, frame=None):
    """Return ``(eq', frame)`` with ``eq'`` solved for ``u[1,1]``.

    Without an explicit frame, the identity and simple shears are tried in
    a fixed order.
    """
    from halfflat.equivalence import change_vars

    eq = eq.specialized()
    if eq.solved and eq.pivot == _u(1, 1) and frame is None:
        return eq, None
    frames = [frame] if frame is not None else _candidate_frames()
    last = None
    for C in frames:
        cand = change_vars(eq, C, name=eq.name) if any(
            C[i][j] != int(i == j) for i in range(4) for j in range(4)) else eq
        try:
            return jets.solve_pivot(cand, _u(1, 1)), (C if cand is not eq else None)
        except jets.EquationError as exc:
            last = exc
    raise MAError(f"{eq.name}: cannot reach an evolutionary form u[1,1] = f ({last})")


def check_relations(eq, mode: str = "symbolic", seed: int = 0, samples: int = 8, frame=None) -> MAReport:
    if eq.dim != 4:
        raise MAError("the relation test is four-dimensional")
    ev, used = to_evolutionary(eq, frame)
    rels = generate_relations(ev.rhs)
    passed = []
    witnesses = {}
    if mode == "symbolic":
        passed = [r.is_zero() for _, r in rels]
    elif mode == "sampled":
        nz = [(i, r) for i, (_, r) in enumerate(rels) if not r.is_zero()]
        passed = [True] * len(rels)
        if nz:
            for _, vals in jets.eval_on_samples([r for _, r in nz], samples, seed):
                for (i, _), v in zip(nz, vals):
                    if v:
                        passed[i] = False
    else:
        raise ValueError(f"unknown mode {mode!r}")
    rng = random.Random(seed)
    for (lab, r), ok in zip(rels, passed):
        if not ok:
            w = _witness(r, rng)
            if w:
                witnesses[lab] = w
    return MAReport(ev.name, rels, passed, mode, seed, used, witnesses)


def _witness(r: Expr, rng):
    from halfflat.confgeom import _frac, _point_json

    atoms_ = jets.free_atoms([r])
    for _ in range(20):
        p = jets.random_point(atoms_, rng)
        try:
            v = p(r)
        except PoleError:
            continue
        if v:
            return {"point": _point_json(p), "value": _frac(v)}
    return None


# --------------------------------------------------------- minor span


@dataclass
class MinorBasis:
    dim: int
    elements: list
    labels: list

    def counts(self):
        out: dict = {}
        for lab in self.labels:
            k = lab.split("[")[0]
            out[k] = out.get(k, 0) + 1
        return out


def minor_basis(d: int = 4, sizes=None) -> MinorBasis:
    """1, the Hessian entries, and every k x k minor for 2 <= k <= d.

    ``sizes`` limits the result to minors of the listed sizes (0 for the
    constant, 1 for the entries).
    """
    sizes = set(range(d + 1)) if sizes is None else set(sizes)
    H = [[Expr.atom(A.jet(i, j)) for j in range(1, d + 1)] for i in range(1, d + 1)]
    els = []
    labels = []
    if 0 in sizes:
        els.append(Expr.const(1))
        labels.append("one")
    for i in range(1, d + 1):
        for j in range(i, d + 1):
            if 1 not in sizes:
                break
            els.append(Expr.atom(A.jet(i, j)))
            labels.append(f"entry[{i},{j}]")
    for k in sorted(sizes - {0, 1}):
        if k > d:
            continue
        for rows in combinations(range(d), k):
            for cols in combinations(range(d), k):
                if cols < rows:
                    continue  # the Hessian is symmetric: the transposed minor is equal
                els.append(normalize(det([[H[r][c] for c in cols] for r in rows])))
                labels.append(f"minor{k}[{''.join(str(r + 1) for r in rows)};"
                              f"{''.join(str(c + 1) for c in cols)}]")
    return MinorBasis(d, els, labels)


@dataclass
class SpanVerdict:
    equation: str
    member: bool
    trials: int
    seed: int
    failing_trial: int | None = None
    point: dict | None = None

    def to_dict(self):
        d = {"equation": self.equation, "monge_ampere": self.member, "trials": self.trials, "seed": self.seed}
        if self.failing_trial is not None:
            d["failing_trial"] = self.failing_trial
            d["first_jet"] = self.point
        return d


def _coeff_vector(e: Expr, index: dict):
    vec = {}
    for m, c in e.num.items():
        if m not in index:
            index[m] = len(index)
        vec[index[m]] = mpq(c)
    return vec


def check_minor_span(eq, trials: int = 3, seed: int = 0) -> SpanVerdict:
    eq = eq.specialized()
    d = eq.dim
    F = eq.F
    second = set(A.jets_of_order(d, 2))
    lower = [a for a in sorted(F.atoms(), key=lambda a: a.sortkey) if a not in second]
    for a in lower:
        if a.kind == "u" and a.order > 2:
            raise MAError("F contains jets of order > 2")
        if a.kind in ("lam", "df", "s", "param"):
            raise MAError(f"F contains a non-jet symbol {a.name}")
    basis_cache: dict = {}
    rng = random.Random(seed)
    from halfflat.confgeom import _point_json
    from halfflat.symkernel.expr import Point

    for t in range(trials):
        for _ in range(20):
            vals = {a: Expr.const(rng.randint(-10 ** 6, 10 ** 6)) for a in lower}
            try:
                Ft = normalize(substitute(F, vals))
            except PoleError:
                continue
            break
        else:
            raise MAError("could not find a regular first jet")
        if Ft.den:
            raise MAError("F is not polynomial in the second-order jets")
        # k x k minors are homogeneous of degree k, so only matching degrees can contribute
        degs = frozenset(mono_degree(m) for m in Ft.num)
        if degs not in basis_cache:
            basis_cache[degs] = minor_basis(d, degs)
        index: dict = {}
        rows = [_coeff_vector(b, index) for b in basis_cache[degs].elements]
        target = _coeff_vector(Ft, index)
        n = len(index)
        dense = [[r.get(i, mpq(0)) for i in range(n)] for r in rows]
        tv = [target.get(i, mpq(0)) for i in range(n)]
        if solve_combination(dense, tv) is None:
            pt = Point({a: v.constant_value() for a, v in vals.items()})
            return SpanVerdict(eq.name, False, trials, seed, t, _point_json(pt))
    return SpanVerdict(eq.name, True, trials, seed)
