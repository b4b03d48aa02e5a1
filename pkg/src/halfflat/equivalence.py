"""Point transformations, point symmetries and travelling-wave reductions.

Everything here acts on 2-jets.  A point map sends source coordinates
``(x, u)`` to target coordinates ``(X, U)``; target expressions are written
with the same atom names (``x1``, ``u[1,2]``, ...) and read as ``X1``,
``U_12`` and so on.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from halfflat import jets
from halfflat.linalg import adjugate, det, field_rank
from halfflat.symkernel import atoms as A
from halfflat.symkernel.expr import (
    ZERO,
    Expr,
    PoleError,
    as_expr,
    diff,
    normalize,
    render,
    substitute,
)
from halfflat.symkernel.parse import parse


class EquivalenceError(ValueError):
    pass


# ------------------------------------------------------------ point maps


@dataclass(frozen=True)
class PointMap:
    dim: int
    X: tuple
    U: Expr

    def __post_init__(self):
        if len(self.X) != self.dim:
            raise EquivalenceError("point map needs one target expression per coordinate")
        for e in (*self.X, self.U):
            for a in e.atoms():
                if a.kind == "u" and a.order > 0:
                    raise EquivalenceError("point maps may depend on x and u only")

    def jacobian(self):
        """``d(X, U)/d(x, u)`` as a (d+1)x(d+1) matrix of Expr."""
        src = [A.var(i) for i in range(1, self.dim + 1)] + [A.jet()]
        return [[normalize(diff(t, a)) for a in src] for t in (*self.X, self.U)]


def identity_map(dim: int) -> PointMap:
    return PointMap(dim, tuple(Expr.atom(A.var(i)) for i in range(1, dim + 1)), Expr.atom(A.jet()))


def _check_jacobian(m: PointMap, seed: int = 0):
    J = m.jacobian()
    D = normalize(det(J))
    if D.is_zero():
        raise EquivalenceError("point map has singular Jacobian")
    return D


def target_jets(m: PointMap, order: int = 2) -> dict:
    """Target jets ``U_J`` expressed in source jets (up to ``order``)."""
    d = m.dim
    J = [[normalize(jets.total_derivative(Xj, i)) for Xj in m.X] for i in range(1, d + 1)]
    Dd = normalize(det(J))
    if Dd.is_zero():
        raise EquivalenceError("total Jacobian dX/dx is singular")
    adj = adjugate(J)
    Jinv = [[normalize(adj[r][c] / Dd) for c in range(d)] for r in range(d)]
    out = {(): m.U}
    level = {(): m.U}
    for _ in range(order):
        nxt = {}
        for idx, val in level.items():
            Ds = [jets.total_derivative(val, i) for i in range(1, d + 1)]
            for j in range(1, d + 1):
                key = tuple(sorted(idx + (j,)))
                if key in nxt:
                    continue
                # U_{J j} = sum_i (J^-1)_{j i} D_i U_J
                acc = ZERO
                for i in range(d):
                    if not Jinv[j - 1][i].is_zero():
                        acc = acc + Jinv[j - 1][i] * Ds[i]
                nxt[key] = normalize(acc)
        out.update(nxt)
        level = nxt
    return out


def pushforward_2jet(m: PointMap, e) -> Expr:
    """Rewrite an expression in target jets as one in source jets."""
    e = as_expr(e)
    _check_jacobian(m)
    b = {}
    for i, Xi in enumerate(m.X, 1):
        b[A.var(i)] = Xi
    for idx, val in target_jets(m, 2).items():
        b[A.jet(*idx)] = val
    return normalize(substitute(e, b))


@dataclass
class EquivalenceResult:
    passed: bool
    factor: Expr | None
    residual: Expr | None
    witness: dict | None = None

    def to_dict(self):
        d = {"passed": self.passed}
        if self.factor is not None:
            d["factor"] = render(self.factor)
        if self.witness:
            d["witness"] = self.witness
        return d


def verify_equivalence(m: PointMap, eqA, eqB, mode: str = "symbolic", seed: int = 0,
                       samples: int = 8) -> EquivalenceResult:
    """``push(F_B)`` vanishes on solutions of ``eqA``; returns ``mu = push(F_B)/F_A``."""
    eqA = eqA.specialized()
    eqB = eqB.specialized()
    if eqA.dim != eqB.dim or eqA.dim != m.dim:
        raise EquivalenceError("dimension mismatch between map and equations")
    pushed = pushforward_2jet(m, eqB.F)
    solvedA = jets.ensure_solved(eqA)
    res = jets.restrict(pushed, solvedA)
    mu = normalize(pushed / eqA.F)
    if mode == "sampled":
        zero = _sampled_zero(res, seed, samples)
    else:
        zero = res.is_zero()
    if not zero:
        return EquivalenceResult(False, None, res, _witness(res, seed))
    if mu.is_zero():
        return EquivalenceResult(False, mu, res)
    return EquivalenceResult(True, mu, res)


def _sampled_zero(e: Expr, seed: int, samples: int) -> bool:
    for _, vals in jets.eval_on_samples([e], samples, seed):
        if vals[0]:
            return False
    return True


def _witness(e: Expr, seed: int):
    try:
        [(p, [v])] = jets.eval_on_samples([e], 1, seed)
    except PoleError:
        return None
    from halfflat.confgeom import _frac, _point_json

    return {"point": _point_json(p), "value": _frac(v)}


# ----------------------------------------------------- linear frames


def change_vars(eq, C, name: str | None = None):
    """New independent variables ``y = C x``; returns the equation for ``v(y) = u(x)``.

    Second derivatives pull back as ``u_ab = sum C_ka C_lb v_kl``.
    """
    d = eq.dim
    C = [[Fraction(v) for v in row] for row in C]
    if len(C) != d or any(len(r) != d for r in C):
        raise EquivalenceError(f"frame matrix must be {d}x{d}")
    Ce = [[Expr.const(v) for v in row] for row in C]
    D = det(Ce)
    if D.is_zero():
        raise EquivalenceError("frame matrix is singular")
    adj = adjugate(Ce)
    Cinv = [[normalize(adj[r][c] / D) for c in range(d)] for r in range(d)]
    b = _linear_bindings(d, d, lambda a, k: Ce[k][a])
    # x = C^-1 y
    for i in range(d):
        acc = ZERO
        for k in range(d):
            acc = acc + Cinv[i][k] * Expr.atom(A.var(k + 1))
        b[A.var(i + 1)] = normalize(acc)
    eqs = eq.specialized()
    F = normalize(substitute(eqs.F, b))
    lax = None
    from dataclasses import replace

    return replace(eqs, name=name or f"{eq.name}_frame", F=F, pivot=None, rhs=None, sqrtdet=None,
                   lax=lax)


def _linear_bindings(d_src: int, d_tgt: int, B):
    # u_a -> sum_k B(a,k) v_k, u_ab -> sum B(a,k) B(b,l) v_kl, u -> v
    b = {}
    for a in range(d_src):
        acc = ZERO
        for k in range(d_tgt):
            c = B(a, k)
            if not c.is_zero():
                acc = acc + c * Expr.atom(A.jet(k + 1))
        b[A.jet(a + 1)] = normalize(acc)
    for a in range(d_src):
        for bb in range(a, d_src):
            acc = ZERO
            for k in range(d_tgt):
                cak = B(a, k)
                if cak.is_zero():
                    continue
                for l in range(d_tgt):
                    cbl = B(bb, l)
                    if not cbl.is_zero():
                        acc = acc + cak * cbl * Expr.atom(A.jet(k + 1, l + 1))
            b[A.jet(a + 1, bb + 1)] = normalize(acc)
    return b


def read_matrix(path, cols: int | None = None):
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            rows.append([Fraction(t) for t in s.split()])
        except ValueError:
            raise EquivalenceError(f"{path}: matrix entries must be rationals") from None
    if not rows:
        raise EquivalenceError(f"{path}: empty matrix")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise EquivalenceError(f"{path}: ragged matrix")
    if cols is not None and width != cols:
        raise EquivalenceError(f"{path}: expected {cols} columns, found {width}")
    return rows


# --------------------------------------------------------- symmetries


@dataclass(frozen=True)
class PointVectorField:
    dim: int
    xi: tuple
    phi: Expr

    def components(self):
        return (*self.xi, self.phi)


def vector_field(dim: int, xi, phi, params=()) -> PointVectorField:
    def ex(t):
        return parse(t, dim=dim, params=params) if isinstance(t, str) else as_expr(t)

    return PointVectorField(dim, tuple(ex(t) for t in xi), ex(phi))


def prolong_symmetry(V: PointVectorField, order: int = 2) -> dict:
    """Coefficients of ``pr V`` keyed by atom: ``x_i``, ``u`` and jets up to ``order``.

    ``phi^J = D_J (phi - xi^i u_i) + xi^i u_{J+i}``.
    """
    d = V.dim
    char = V.phi
    for i, x in enumerate(V.xi, 1):
        char = char - x * Expr.atom(A.jet(i))
    char = normalize(char)
    out = {A.var(i): normalize(V.xi[i - 1]) for i in range(1, d + 1)}
    out[A.jet()] = normalize(V.phi)
    level = {(): char}
    mo = max(jets.MAX_ORDER, order + 1)
    for n in range(1, order + 1):
        nxt = {}
        for idx, val in level.items():
            for j in range(1, d + 1):
                key = tuple(sorted(idx + (j,)))
                if key in nxt:
                    continue
                nxt[key] = normalize(jets.total_derivative(val, j, max_order=mo))
        for key, val in nxt.items():
            acc = val
            for i, x in enumerate(V.xi, 1):
                if not x.is_zero():
                    acc = acc + x * Expr.atom(A.jet(*key, i))
            out[A.jet(*key)] = normalize(acc)
        level = nxt
    return out


def apply_prolongation(pr: dict, e) -> Expr:
    e = as_expr(e)
    acc = ZERO
    for a in e.atoms():
        c = pr.get(a)
        if c is None or c.is_zero():
            continue
        acc = acc + c * diff(e, a)
    return normalize(acc)


def verify_symmetry(V: PointVectorField, eq, mode: str = "symbolic", seed: int = 0,
                    samples: int = 8):
    """``pr^2 V (F)`` vanishes on solutions; returns ``(passed, residual)``."""
    eq = eq.specialized()
    if V.dim != eq.dim:
        raise EquivalenceError("vector field and equation dimensions differ")
    pr = prolong_symmetry(V, 2)
    r = apply_prolongation(pr, eq.F)
    res = jets.restrict(r, jets.ensure_solved(eq))
    if mode == "sampled":
        return _sampled_zero(res, seed, samples), res
    return res.is_zero(), res


def bracket(V: PointVectorField, W: PointVectorField) -> PointVectorField:
    """Lie bracket on ``(x, u)``-space."""
    if V.dim != W.dim:
        raise EquivalenceError("dimension mismatch")
    d = V.dim
    coords = [A.var(i) for i in range(1, d + 1)] + [A.jet()]
    vc = V.components()
    wc = W.components()
    out = []
    for k in range(d + 1):
        acc = ZERO
        for a, va, wa in zip(coords, vc, wc):
            acc = acc + va * diff(wc[k], a) - wa * diff(vc[k], a)
        out.append(normalize(acc))
    return PointVectorField(d, tuple(out[:d]), out[d])


def fields_equal(V: PointVectorField, W: PointVectorField) -> bool:
    return all(normalize(a - b).is_zero() for a, b in zip(V.components(), W.components()))


def read_vector_field(path, dim: int, params=()) -> PointVectorField:
    """``xi1 = ..`` .. ``xid = ..`` and ``phi = ..`` lines (missing entries are 0)."""
    vals = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise EquivalenceError(f"{path}:{n}: expected 'key = expr'")
        k, v = (t.strip() for t in s.split("=", 1))
        vals[k] = (v, n)
    keys = {f"xi{i}" for i in range(1, dim + 1)} | {"phi"}
    extra = set(vals) - keys
    if extra:
        raise EquivalenceError(f"{path}: unknown key(s) {', '.join(sorted(extra))}")

    def ex(k):
        if k not in vals:
            return ZERO
        v, n = vals[k]
        try:
            return parse(v, dim=dim, params=params)
        except ValueError as exc:
            raise EquivalenceError(f"{path}:{n}: {exc}") from None

    return PointVectorField(dim, tuple(ex(f"xi{i}") for i in range(1, dim + 1)), ex("phi"))


def read_point_map(path, dim: int | None = None) -> PointMap:
    vals = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise EquivalenceError(f"{path}:{n}: expected 'key = expr'")
        k, v = (t.strip() for t in s.split("=", 1))
        vals[k] = (v, n)
    if "U" not in vals:
        raise EquivalenceError(f"{path}: missing U")
    d = len(vals) - 1
    if dim is not None and d != dim:
        raise EquivalenceError(f"{path}: map has {d} coordinates, expected {dim}")
    keys = {f"X{i}" for i in range(1, d + 1)} | {"U"}
    if set(vals) != keys:
        raise EquivalenceError(f"{path}: expected keys X1..X{d} and U")

    def ex(k):
        v, n = vals[k]
        try:
            return parse(v, dim=d)
        except ValueError as exc:
            raise EquivalenceError(f"{path}:{n}: {exc}") from None

    return PointMap(d, tuple(ex(f"X{i}") for i in range(1, d + 1)), ex("U"))


def point_map_text(m: PointMap) -> str:
    lines = [f"X{i} = {render(x)}" for i, x in enumerate(m.X, 1)]
    lines.append(f"U = {render(m.U)}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------- travelling waves


def travelling_wave_reduce(eq, B, name: str | None = None, seed: int = 0, attempts: int = 5):
    """Substitute ``u(x) = v(B^T x)`` for a ``d x 4`` matrix ``B`` of rank 4.

    The equation must not depend on ``x`` (a travelling wave only makes
    sense for translation-invariant coefficients).  If the reduced
    equation is degenerate, ``B`` is perturbed by a seeded random matrix
    up to ``attempts`` times.
    """
    eq = eq.specialized()
    d = eq.dim
    B = [[Fraction(v) for v in row] for row in B]
    if len(B) != d or any(len(r) != 4 for r in B):
        raise EquivalenceError(f"reduction matrix must be {d}x4")
    if field_rank([[v for v in row] for row in B]) < 4:
        raise EquivalenceError("reduction matrix has rank < 4")
    if any(a.kind == "x" for a in eq.F.atoms()):
        raise EquivalenceError("travelling-wave reduction needs an x-independent equation")
    rng = random.Random(seed)
    cur = B
    for attempt in range(attempts):
        red = _reduce_with(eq, cur, name)
        if jets.characteristic_rank(red, seed=seed) == 4:
            return red, cur
        cur = [[rng.randint(-9, 9) for _ in range(4)] for _ in range(d)]
        while field_rank([[Fraction(v) for v in r] for r in cur]) < 4:
            cur = [[rng.randint(-9, 9) for _ in range(4)] for _ in range(d)]
        cur = [[Fraction(v) for v in r] for r in cur]
    raise EquivalenceError(f"no non-degenerate reduction found in {attempts} attempts")


def _reduce_with(eq, B, name):
    d = eq.dim
    Be = [[Expr.const(v) for v in row] for row in B]
    b = _linear_bindings(d, 4, lambda a, k: Be[a][k])
    F = normalize(substitute(eq.F, b))
    if F.is_zero():
        raise EquivalenceError("reduction annihilates the equation")
    return jets.Equation(name or f"{eq.name}_reduced", 4, F)


def random_rank4_matrix(d: int, seed: int = 0):
    rng = random.Random(seed)
    while True:
        B = [[Fraction(rng.randint(-9, 9)) for _ in range(4)] for _ in range(d)]
        if field_rank(B) == 4:
            return B
