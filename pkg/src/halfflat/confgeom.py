"""Conformal geometry of the characteristic quadric.

Pipeline: quadric ``Q`` -> metric representative -> curvature -> Weyl ->
Hodge split ``W = W+ + W-`` -> half-flatness verdict on solutions.

The curvature algebra is written once over an abstract scalar type and
runs on ``Expr`` (symbolic mode), ``mpq``/``QuadNumber`` (sampled mode)
and ``DegreeBound`` (failure-probability bookkeeping).  Its input is the
restricted 2-jet of ``Q``; the metric used internally is ``g = Q^-1`` with
derivatives from ``dg = -g dQ g``.  Since the mixed Weyl tensor and the
star operator are conformally invariant, any representative gives the same
``W+-``; :func:`metric_representative` returns the polynomial adjugate.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from gmpy2 import mpq

from halfflat import jets
from halfflat.linalg import adjugate, det, levi_civita, matmul
from halfflat.scalars import DegreeBound, QuadNumber
from halfflat.symkernel import atoms as A
from halfflat.symkernel.expr import (
    ZERO,
    Expr,
    Point,
    PoleError,
    as_expr,
    normalize,
    render,
    split_root,
)
from halfflat.symkernel.poly import degree, psqrt, rational_sqrt

SAMPLE_RESAMPLES = 20


class DegenerateQuadricError(ValueError):
    pass


class SqrtHintError(ValueError):
    pass


# --------------------------------------------------------------- tensors


_SYM_CLASSES = ("symmetric2", "riemann", "weyl", "none")


@dataclass
class TensorField:
    """Dense components keyed by 0-based index tuples.

    ``signature`` is a string of ``u``/``d`` (contravariant/covariant).
    Writes through :meth:`set` fill the whole symmetry orbit.
    """

    name: str
    signature: str
    dim: int
    symmetry: str = "none"
    comps: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.symmetry not in _SYM_CLASSES:
            raise ValueError(f"unknown symmetry class {self.symmetry}")

    def __getitem__(self, idx):
        return self.comps[idx]

    def set(self, idx, v):
        if self.symmetry == "symmetric2":
            i, j = idx
            self.comps[(i, j)] = self.comps[(j, i)] = v
        elif self.symmetry in ("riemann", "weyl"):
            a, b, c, d = idx
            neg = -v
            for (p, q, r, s), val in (((a, b, c, d), v), ((b, a, c, d), neg), ((a, b, d, c), neg),
                                      ((b, a, d, c), v), ((c, d, a, b), v), ((d, c, a, b), neg),
                                      ((c, d, b, a), neg), ((d, c, b, a), v)):
                self.comps[(p, q, r, s)] = val
        else:
            self.comps[idx] = v

    def indices(self):
        return product(range(self.dim), repeat=len(self.signature))

    def items(self):
        for idx in self.indices():
            yield idx, self.comps[idx]

    def as_matrix(self):
        d = self.dim
        return [[self.comps[(i, j)] for j in range(d)] for i in range(d)]

    def map(self, fn, name=None):
        return TensorField(name or self.name, self.signature, self.dim, self.symmetry,
                           {k: fn(v) for k, v in self.comps.items()})


def tensor_from_matrix(name, signature, M, symmetry="symmetric2") -> TensorField:
    t = TensorField(name, signature, len(M), symmetry)
    for i, row in enumerate(M):
        for j, v in enumerate(row):
            t.comps[(i, j)] = v
    return t


# ------------------------------------------------------------- quadric


def characteristic_quadric(eq) -> TensorField:
    """Contravariant ``Q^{ab} = dF/du[a,b] / (1 + delta_ab)``, restricted to solutions."""
    eq = eq.specialized()
    return tensor_from_matrix("Q", "uu", jets.quadric_matrix(eq, restricted=True))


def _restrict(e, eq):
    return jets.restrict(e, eq) if eq is not None and eq.solved else normalize(e)


def metric_representative(Q: TensorField, eq=None):
    """``(g, det g, det Q)`` with ``g = adj(Q)`` covariant.

    ``adj(Q) = det(Q) Q^-1`` is polynomial in the entries of ``Q`` and
    conformal to the inverse of the quadric.
    """
    M = [[as_expr(v) for v in row] for row in Q.as_matrix()]
    dq = _restrict(det(M), eq)
    if dq.is_zero():
        raise DegenerateQuadricError("characteristic quadric is degenerate on solutions")
    adj = [[_restrict(v, eq) for v in row] for row in adjugate(M)]
    g = tensor_from_matrix("g", "dd", adj)
    dim = len(M)
    detg = normalize(dq ** (dim - 1))
    return g, detg, dq


def conformal_check(g: TensorField, Q: TensorField, dq, eq=None) -> bool:
    """``g . Q == det(Q) Id`` identically (on solutions when ``eq`` is solved)."""
    P = matmul(g.as_matrix(), Q.as_matrix())
    n = len(P)
    for i in range(n):
        for j in range(n):
            target = dq if i == j else ZERO
            if not _restrict(P[i][j] - target, eq).is_zero():
                return False
    return True


# ------------------------------------------------------------ square root


@dataclass
class SqrtInfo:
    """How ``sqrt(det Q)`` is represented.

    ``kind`` is ``hint``, ``square`` (found by extraction) or ``formal``
    (root symbol ``s`` with radicand ``det Q``).
    """

    kind: str
    value: Expr | None
    radicand: Expr


def _expr_sqrt(e: Expr):
    """Exact square root of a rational function, or ``None``."""
    from halfflat.symkernel.poly import ONE

    num = e.num
    if not num:
        return ZERO
    r = psqrt(num)
    if r is None:
        return None
    den = []
    for f, k in e.den:
        if k % 2:
            return None
        den.append((f, k // 2))
    return Expr(r, tuple(den)) if den else Expr(r)


def sqrt_det(eq, dq: Expr, hint=None) -> SqrtInfo:
    """Square root of ``det Q`` on solutions.

    A hint (the ``sqrtdet`` field of the equation) is verified, not trusted.
    """
    if hint is None and eq is not None:
        hint = eq.specialized().sqrtdet
    if hint is not None:
        h = as_expr(hint)
        if not _restrict(h * h - dq, eq).is_zero():
            raise SqrtHintError(f"sqrtdet hint {render(h)} does not square to det {render(dq)}")
        return SqrtInfo("hint", _restrict(h, eq), dq)
    r = _expr_sqrt(dq)
    if r is not None:
        # fix the sign so the leading coefficient is positive
        from halfflat.symkernel.poly import leading_canonical

        lead = leading_canonical(r.num)
        if lead is not None and lead[1] < 0:
            r = -r
        return SqrtInfo("square", r, dq)
    return SqrtInfo("formal", None, dq)


# ------------------------------------------------------------ the 2-jet


@dataclass
class QuadricJet:
    """Restricted ``Q``, ``D_c Q`` and ``D_c D_d Q`` (c <= d), 0-based."""

    dim: int
    Q: list
    dQ: list
    ddQ: dict
    dq: Expr

    def entries(self):
        out = [v for row in self.Q for v in row]
        for M in self.dQ:
            out.extend(v for row in M for v in row)
        for M in self.ddQ.values():
            out.extend(v for row in M for v in row)
        return out


def quadric_jet(eq, max_order: int = jets.MAX_ORDER) -> QuadricJet:
    eq = eq.specialized()
    if not eq.solved:
        eq = jets.ensure_solved(eq)
    Qt = characteristic_quadric(eq)
    Q = Qt.as_matrix()
    d = eq.dim
    r = jets.restrictor(eq, max_order)
    fa = eq.formal_args

    def D(e, i):
        return normalize(r(jets.total_derivative(e, i + 1, formal_args=fa, max_order=max_order)))

    dQ = []
    for c in range(d):
        M = [[None] * d for _ in range(d)]
        for a in range(d):
            for b in range(a, d):
                M[a][b] = M[b][a] = D(Q[a][b], c)
        dQ.append(M)
    ddQ = {}
    for c in range(d):
        for e in range(c, d):
            M = [[None] * d for _ in range(d)]
            for a in range(d):
                for b in range(a, d):
                    M[a][b] = M[b][a] = D(dQ[c][a][b], e)
            ddQ[(c, e)] = M
    dq = jets.restrict(det([[as_expr(v) for v in row] for row in Q]), eq)
    if dq.is_zero():
        raise DegenerateQuadricError(f"{eq.name}: characteristic quadric is degenerate on solutions")
    return QuadricJet(d, Q, dQ, ddQ, dq)


# ------------------------------------------------------- curvature algebra


def _inverse(M):
    D = det(M)
    adj = adjugate(M)
    n = len(M)
    return [[adj[i][j] / D for j in range(n)] for i in range(n)]


def _mm(A_, B_):
    return matmul(A_, B_)


def curvature_from_quadric_jet(Q, dQ, ddQ, norm=lambda v: v):
    """Metric ``g = Q^-1``, its derivatives, Christoffels, Riemann, Ricci, scalar.

    Index convention: ``R_abcd`` with Ricci ``R_bd = g^ac R_abcd``; the
    returned dict holds plain nested lists/dicts, 0-based.
    """
    n = len(Q)
    ginv = Q
    g = [[norm(v) for v in row] for row in _inverse(Q)]
    gdQ = [_mm(g, dQ[c]) for c in range(n)]           # g dQ_c
    gdQg = [_mm(gdQ[c], g) for c in range(n)]
    dg = [[[norm(-v) for v in row] for row in gdQg[c]] for c in range(n)]  # dg[c][a][b]

    def ddg(c, e):
        if c > e:
            c, e = e, c
        return _ddg[(c, e)]

    _ddg = {}
    for c in range(n):
        for e in range(c, n):
            # D_c D_e g = g Q_c g Q_e g + g Q_e g Q_c g - g Q_ce g
            t1 = _mm(gdQ[c], gdQg[e])
            t2 = _mm(gdQ[e], gdQg[c])
            t3 = _mm(_mm(g, ddQ[(c, e)]), g)
            _ddg[(c, e)] = [[norm(t1[a][b] + t2[a][b] - t3[a][b]) for b in range(n)] for a in range(n)]

    half = Fraction(1, 2)
    # Gamma_{a,bc} = 1/2 (g_ab,c + g_ac,b - g_bc,a)
    G1 = {}
    for a in range(n):
        for b in range(n):
            for c in range(b, n):
                v = (dg[c][a][b] + dg[b][a][c] - dg[a][b][c]) * half
                G1[(a, b, c)] = G1[(a, c, b)] = norm(v)
    G2 = {}
    for e in range(n):
        for b in range(n):
            for c in range(b, n):
                acc = None
                for a in range(n):
                    t = ginv[e][a] * G1[(a, b, c)]
                    acc = t if acc is None else acc + t
                G2[(e, b, c)] = G2[(e, c, b)] = norm(acc)

    def gdd(a, b, c, d):
        # d_c d_d g_ab
        return ddg(c, d)[a][b]

    R = {}
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    for i, (a, b) in enumerate(pairs):
        for (c, d) in pairs[i:]:
            v = (gdd(a, d, b, c) + gdd(b, c, a, d) - gdd(a, c, b, d) - gdd(b, d, a, c)) * half
            for e in range(n):
                v = v + G2[(e, b, c)] * G1[(e, a, d)] - G2[(e, b, d)] * G1[(e, a, c)]
            v = norm(v)
            neg = -v
            for (p, q, r, s), val in (((a, b, c, d), v), ((b, a, c, d), neg), ((a, b, d, c), neg),
                                      ((b, a, d, c), v), ((c, d, a, b), v), ((d, c, a, b), neg),
                                      ((c, d, b, a), neg), ((d, c, b, a), v)):
                R[(p, q, r, s)] = val
    zero = Q[0][0] * 0

    def Rget(a, b, c, d):
        return R.get((a, b, c, d), zero)

    Ric = [[None] * n for _ in range(n)]
    for b in range(n):
        for d in range(b, n):
            acc = zero
            for a in range(n):
                for c in range(n):
                    if a == b or c == d:
                        continue
                    acc = acc + ginv[a][c] * Rget(a, b, c, d)
            Ric[b][d] = Ric[d][b] = norm(acc)
    scal = zero
    for b in range(n):
        for d in range(n):
            scal = scal + ginv[b][d] * Ric[b][d]
    scal = norm(scal)
    return {"g": g, "ginv": ginv, "dg": dg, "ddg": _ddg, "G1": G1, "G2": G2,
            "R": R, "Rget": Rget, "Ric": Ric, "scal": scal, "zero": zero}


def weyl_from_curvature(cur, norm=lambda v: v):
    """Covariant Weyl ``W_ijkl`` (4D Schouten formula) and mixed ``W^i_jkl``."""
    g, ginv, Ric, scal, Rget, zero = (cur[k] for k in ("g", "ginv", "Ric", "scal", "Rget", "zero"))
    n = len(g)
    if n != 4:
        raise ValueError("the Weyl/Schouten step is four-dimensional")
    half = Fraction(1, 2)
    twelfth = Fraction(1, 12)
    w = [[norm(Ric[i][j] * half - scal * twelfth * g[i][j]) for j in range(n)] for i in range(n)]
    W = {}
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    for x, (i, j) in enumerate(pairs):
        for (k, l) in pairs[x:]:
            v = (Rget(i, j, k, l) - w[i][k] * g[j][l] - w[j][l] * g[i][k]
                 + w[j][k] * g[i][l] + w[i][l] * g[j][k])
            v = norm(v)
            neg = -v
            for idx, val in (((i, j, k, l), v), ((j, i, k, l), neg), ((i, j, l, k), neg),
                             ((j, i, l, k), v), ((k, l, i, j), v), ((l, k, i, j), neg),
                             ((k, l, j, i), neg), ((l, k, j, i), v)):
                W[idx] = val
    for idx in product(range(n), repeat=4):
        W.setdefault(idx, zero)
    Wm = {}
    for i, j, k, l in product(range(n), repeat=4):
        if k == l:
            Wm[(i, j, k, l)] = zero
            continue
        if k > l:
            continue
        acc = zero
        for a in range(n):
            if ginv[i][a]:
                acc = acc + ginv[i][a] * W[(a, j, k, l)]
        acc = norm(acc)
        Wm[(i, j, k, l)] = acc
        Wm[(i, j, l, k)] = -acc
    return w, W, Wm


_EPS4 = levi_civita(4)


def hodge_star(Wm, ginv, sq, norm=lambda v: v):
    """``*W^i_jkl = 1/2 sqrt(det g) g^ia g^bc eps_ajbd W^d_ckl`` (eps_1234 = +1)."""
    n = 4
    zero = Wm[(0, 0, 0, 1)] * 0
    # M[b][d][k,l] = sum_c g^bc W^d_ckl
    M = {}
    for b, d, k, l in product(range(n), range(n), range(n), range(n)):
        if k >= l:
            continue
        acc = zero
        for c in range(n):
            if ginv[b][c]:
                acc = acc + ginv[b][c] * Wm[(d, c, k, l)]
        M[(b, d, k, l)] = acc
    # N[a][j][k,l] = sum_{b,d} eps_ajbd M[b][d][k,l]
    N = {}
    for a, j in product(range(n), repeat=2):
        if a == j:
            continue
        b, d = [t for t in range(n) if t not in (a, j)]
        e1 = _EPS4[(a, j, b, d)]
        for k in range(n):
            for l in range(k + 1, n):
                v = M[(b, d, k, l)] - M[(d, b, k, l)]
                N[(a, j, k, l)] = v if e1 > 0 else -v
    coef = sq * Fraction(1, 2)
    S = {}
    for i, j, k in product(range(n), repeat=3):
        for l in range(n):
            if k >= l:
                S.setdefault((i, j, k, l), zero)
                continue
            acc = zero
            for a in range(n):
                if a != j and ginv[i][a]:
                    acc = acc + ginv[i][a] * N[(a, j, k, l)]
            v = norm(acc * coef)
            S[(i, j, k, l)] = v
            S[(i, j, l, k)] = -v
    return S


def hodge_split(Wm, ginv, sq, norm=lambda v: v):
    """``(W+, W-)`` with ``W+- = (W +- *W)/2`` on the mixed Weyl tensor."""
    S = hodge_star(Wm, ginv, sq, norm)
    half = Fraction(1, 2)
    Wp, Wn = {}, {}
    for idx, v in Wm.items():
        s = S[idx]
        Wp[idx] = norm((v + s) * half)
        Wn[idx] = norm((v - s) * half)
    return Wp, Wn


def independent_mixed(n=4):
    """Index tuples ``(i, j, k, l)`` with ``k < l``: the stored mixed components."""
    return [(i, j, k, l) for i, j, k, l in product(range(n), repeat=4) if k < l]


# ------------------------------------------------------------ reporting


def _label(idx) -> str:
    i, j, k, l = (t + 1 for t in idx)
    return f"W^{i}_{j}{k}{l}"


def _frac(q) -> str:
    q = mpq(q)
    n, d = int(q.numerator), int(q.denominator)
    return str(n) if d == 1 else f"{n}/{d}"


def _point_json(p: Point) -> dict:
    return {a.name: _frac(v) for a, v in sorted(p.assignment.items(), key=lambda t: t[0].sortkey)}


@dataclass
class Witness:
    part: str
    component: str
    point: dict
    value: str
    expression: str | None = None

    def to_dict(self):
        d = {"part": self.part, "component": self.component, "point": self.point, "value": self.value}
        if self.expression is not None:
            d["expression"] = self.expression
        return d


@dataclass
class HalfFlatReport:
    equation: str
    W_plus_zero: bool
    W_minus_zero: bool
    mode: str
    seed: int
    samples: int
    sqrt_kind: str
    det_Q: str
    elapsed: float
    witness_plus: Witness | None = None
    witness_minus: Witness | None = None
    failure_bound: float | None = None
    max_degree: int | None = None
    root_unresolved: bool = False

    @property
    def half_flat(self) -> bool:
        return self.W_plus_zero or self.W_minus_zero

    def to_dict(self) -> dict:
        d = {
            "equation": self.equation,
            "half_flat": self.half_flat,
            "W_plus_zero": self.W_plus_zero,
            "W_minus_zero": self.W_minus_zero,
            "mode": self.mode,
            "seed": self.seed,
            "samples": self.samples,
            "sqrt_kind": self.sqrt_kind,
            "det_Q": self.det_Q,
            "root_unresolved": self.root_unresolved,
            "elapsed_ms": int(self.elapsed * 1000),
        }
        if self.witness_plus:
            d["witness_plus"] = self.witness_plus.to_dict()
        if self.witness_minus:
            d["witness_minus"] = self.witness_minus.to_dict()
        if self.failure_bound is not None:
            d["failure_bound"] = self.failure_bound
            d["max_degree"] = self.max_degree
        return d


# --------------------------------------------------------------- checks


def _degree_bound(qj: QuadricJet, info: SqrtInfo):
    def db(e):
        e = as_expr(e)
        return DegreeBound(degree(e.num) if e.num else 0,
                           {f.id: (degree(f.poly), k) for f, k in e.den})

    Q = [[db(v) for v in row] for row in qj.Q]
    dQ = [[[db(v) for v in row] for row in M] for M in qj.dQ]
    ddQ = {k: [[db(v) for v in row] for row in M] for k, M in qj.ddQ.items()}
    cur = curvature_from_quadric_jet(Q, dQ, ddQ)
    _, _, Wm = weyl_from_curvature(cur)
    if info.kind == "formal":
        sq = DegreeBound(0, 0) / db(info.radicand)
    else:
        sq = DegreeBound(0, 0) / db(info.value)
    S = hodge_star(Wm, Q, sq)
    # a + b*sqrt(r) vanishing is tested through a and b; the bound covers both
    return max(max(v.n for v in Wm.values()), max(v.n for v in S.values())) + db(info.radicand).n


def _pipeline(Q, dQ, ddQ, sq, norm):
    cur = curvature_from_quadric_jet(Q, dQ, ddQ, norm)
    w, W, Wm = weyl_from_curvature(cur, norm)
    Wp, Wn = hodge_split(Wm, cur["ginv"], sq, norm)
    return cur, W, Wm, Wp, Wn


def halfflat_check(eq, mode: str = "sampled", seed: int = 0, samples: int = 8,
                   max_order: int = jets.MAX_ORDER) -> HalfFlatReport:
    """Decide whether ``W+`` or ``W-`` vanishes on every solution of ``eq``."""
    t0 = time.perf_counter()
    eq = eq.specialized()
    if eq.dim != 4:
        raise ValueError("half-flatness is defined here for four-dimensional equations")
    if not eq.solved:
        eq = jets.ensure_solved(eq)
    qj = quadric_jet(eq, max_order)
    info = sqrt_det(eq, qj.dq)
    if mode == "symbolic":
        rep = _symbolic(eq, qj, info, seed)
    elif mode == "sampled":
        rep = _sampled(eq, qj, info, seed, samples)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    rep.elapsed = time.perf_counter() - t0
    return rep


def _root_atom_expr():
    return Expr.atom(A.root())


def _symbolic(eq, qj: QuadricJet, info: SqrtInfo, seed: int) -> HalfFlatReport:
    radicand = info.radicand if info.kind == "formal" else None

    def norm(v):
        return normalize(v, radicand) if radicand is not None else normalize(v)

    if info.kind == "formal":
        sq = norm(_root_atom_expr() / info.radicand)
    else:
        sq = norm(Expr.const(1) / info.value)
    Q = [[as_expr(v) for v in row] for row in qj.Q]
    _, _, Wm, Wp, Wn = _pipeline(Q, qj.dQ, qj.ddQ, sq, norm)
    rng = random.Random(seed)
    wit = {}
    for part, T in (("W+", Wp), ("W-", Wn)):
        wit[part] = None
        for idx in independent_mixed():
            v = T[idx]
            if v.is_zero():
                continue
            wit[part] = _symbolic_witness(part, idx, v, radicand, rng)
            break
    return HalfFlatReport(eq.name, wit["W+"] is None, wit["W-"] is None, "symbolic", seed, 0,
                          info.kind, render(qj.dq), 0.0, wit["W+"], wit["W-"],
                          root_unresolved=info.kind == "formal")


def _symbolic_witness(part, idx, v: Expr, radicand, rng) -> Witness:
    parts = split_root(v) if radicand is not None else (v, ZERO)
    target = parts[0] if not parts[0].is_zero() else parts[1]
    atoms_ = jets.free_atoms([target])
    for _ in range(SAMPLE_RESAMPLES):
        p = jets.random_point(atoms_, rng)
        try:
            val = p(target)
        except PoleError:
            continue
        if val:
            return Witness(part, _label(idx), _point_json(p), _frac(val), render(v))
    return Witness(part, _label(idx), {}, "nonzero", render(v))


def _sampled(eq, qj: QuadricJet, info: SqrtInfo, seed: int, samples: int) -> HalfFlatReport:
    entries = qj.entries()
    extra = [info.radicand] + ([info.value] if info.value is not None else [])
    atoms_ = jets.free_atoms(entries + extra)
    rng = random.Random(seed)
    d = qj.dim
    zeros = {"W+": True, "W-": True}
    wit = {"W+": None, "W-": None}
    for _ in range(samples):
        for _attempt in range(SAMPLE_RESAMPLES):
            p = jets.random_point(atoms_, rng)
            try:
                res = _eval_point(qj, info, p, d)
            except (PoleError, ZeroDivisionError):
                continue
            break
        else:
            raise PoleError(f"{eq.name}: {SAMPLE_RESAMPLES} consecutive samples hit a pole")
        Wp, Wn = res
        for part, T in (("W+", Wp), ("W-", Wn)):
            if wit[part] is not None:
                continue
            for idx in independent_mixed():
                v = T[idx]
                if v:
                    zeros[part] = False
                    wit[part] = Witness(part, _label(idx), _point_json(p), _scalar_str(v))
                    break
    deg = _degree_bound(qj, info)
    bound = min(1.0, samples * deg / 10 ** 6)
    return HalfFlatReport(eq.name, zeros["W+"], zeros["W-"], "sampled", seed, samples, info.kind,
                          render(qj.dq), 0.0, wit["W+"], wit["W-"], bound, deg,
                          root_unresolved=info.kind == "formal")


def _scalar_str(v) -> str:
    if isinstance(v, QuadNumber):
        return f"{_frac(v.a)} + {_frac(v.b)}*s"
    return _frac(v)


def _eval_point(qj: QuadricJet, info: SqrtInfo, p: Point, d: int):
    Q = [[p(v) for v in row] for row in qj.Q]
    dQ = [[[p(v) for v in row] for row in M] for M in qj.dQ]
    ddQ = {k: [[p(v) for v in row] for row in M] for k, M in qj.ddQ.items()}
    if info.kind == "formal":
        r = p(info.radicand)
        if not r:
            raise PoleError("radicand vanishes at the sample point")
        sq = QuadNumber(0, 1, r) / r     # 1/sqrt(r) = s/r
    else:
        sv = p(info.value)
        if not sv:
            raise PoleError("square root vanishes at the sample point")
        sq = 1 / sv
    if not det(Q):
        raise PoleError("quadric degenerate at the sample point")
    _, _, _, Wp, Wn = _pipeline(Q, dQ, ddQ, sq, lambda v: v)
    return Wp, Wn


# --------------------------------------------------------- self-checks


def weyl_at_point(eq, seed: int = 0, conformal_factor=None):
    """Mixed Weyl and its split at one random solution point (for property tests).

    ``conformal_factor`` (an Expr) rescales the metric: the quadric jet of
    ``Q / phi`` is used, so the mixed Weyl must not change.
    """
    eq = eq.specialized()
    if not eq.solved:
        eq = jets.ensure_solved(eq)
    qj = quadric_jet(eq)
    if conformal_factor is not None:
        qj = _rescaled_jet(eq, qj, as_expr(conformal_factor))
    info = sqrt_det(eq, qj.dq) if conformal_factor is None else SqrtInfo("formal", None, qj.dq)
    atoms_ = jets.free_atoms(qj.entries() + [info.radicand] + ([info.value] if info.value else []))
    rng = random.Random(seed)
    for _ in range(SAMPLE_RESAMPLES):
        p = jets.random_point(atoms_, rng)
        try:
            Q = [[p(v) for v in row] for row in qj.Q]
            dQ = [[[p(v) for v in row] for row in M] for M in qj.dQ]
            ddQ = {k: [[p(v) for v in row] for row in M] for k, M in qj.ddQ.items()}
            if info.kind == "formal":
                r = p(info.radicand)
                sq = QuadNumber(0, 1, r) / r
            else:
                sq = 1 / p(info.value)
            cur, W, Wm, Wp, Wn = _pipeline(Q, dQ, ddQ, sq, lambda v: v)
            return {"point": p, "cur": cur, "W": W, "Wm": Wm, "Wp": Wp, "Wn": Wn, "sq": sq}
        except (PoleError, ZeroDivisionError):
            continue
    raise PoleError("no regular sample point found")


def _rescaled_jet(eq, qj: QuadricJet, phi: Expr) -> QuadricJet:
    r = jets.restrictor(eq)

    def D(e, i):
        return normalize(r(jets.total_derivative(e, i + 1, formal_args=eq.formal_args)))

    d = qj.dim
    Q = [[normalize(r(v / phi)) for v in row] for row in qj.Q]
    dQ = [[[D(Q[a][b], c) for b in range(d)] for a in range(d)] for c in range(d)]
    ddQ = {}
    for c in range(d):
        for e in range(c, d):
            ddQ[(c, e)] = [[D(dQ[c][a][b], e) for b in range(d)] for a in range(d)]
    dq = normalize(qj.dq / phi ** d)
    return QuadricJet(d, Q, dQ, ddQ, dq)


def rational_sqrt_of(c):
    return rational_sqrt(mpq(c))
