from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from halfflat import catalog, jets
from halfflat.equivalence import (PointMap, PointVectorField, bracket, prolong_symmetry,
                                  pushforward_2jet, verify_equivalence)
from halfflat.linalg import det
from halfflat.symkernel import atoms as A
from halfflat.symkernel.expr import Expr, diff, normalize, substitute
from halfflat.symkernel.parse import parse
from strategies import polys

D = 3
XU = [A.var(i) for i in range(1, D + 1)] + [A.jet()]
fields = st.tuples(*[polys(XU, max_terms=2) for _ in range(D + 1)]).map(
    lambda c: PointVectorField(D, tuple(c[:D]), c[D]))


def _jet_bracket(P: dict, R: dict) -> dict:
    coords = set(P) | set(R)
    out = {}
    for c in coords:
        acc = Expr({})
        for a in coords:
            pa, ra = P.get(a), R.get(a)
            if pa is not None and c in R:
                acc = acc + pa * diff(R[c], a)
            if ra is not None and c in P:
                acc = acc - ra * diff(P[c], a)
        out[c] = normalize(acc)
    return out


@settings(max_examples=10, deadline=None)
@given(fields, fields)
def test_prolongation_is_a_lie_morphism(V, W):
    lhs = prolong_symmetry(bracket(V, W), 2)
    rhs = _jet_bracket(prolong_symmetry(V, 2), prolong_symmetry(W, 2))
    # compare on the 2-jet coordinates; higher coordinates only appear as arguments
    for c, v in lhs.items():
        assert normalize(v - rhs.get(c, Expr({}))).is_zero(), c.name


def _inverse_eq12() -> PointMap:
    # inverse of X1 = x1 + x2 x4/x3, X2 = x2/x3, X3 = -1/x3, X4 = x4/x3, U = x3 u
    t = ["x1 + x2*x4/x3", "-x2/x3", "-1/x3", "-x4/x3"]
    return PointMap(4, tuple(parse(s, dim=4) for s in t), parse("-x3*u", dim=4))


def _compose(m: PointMap, n: PointMap) -> PointMap:
    """``m`` after ``n``."""
    b = {A.var(i + 1): n.X[i] for i in range(4)}
    b[A.jet()] = n.U
    return PointMap(4, tuple(normalize(substitute(x, b)) for x in m.X), normalize(substitute(m.U, b)))


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_map_and_inverse_compose_to_identity(seed):
    m = catalog.load_map("eq12").map
    inv = _inverse_eq12()
    rng = random.Random(seed)
    for comp in (_compose(inv, m), _compose(m, inv)):
        p = jets.random_point(XU + [A.var(4)], rng)
        vals = [p(x) for x in comp.X] + [p(comp.U)]
        want = [p(Expr.atom(A.var(i))) for i in range(1, 5)] + [p(Expr.atom(A.jet()))]
        assert vals == want


def test_inverse_map_is_an_equivalence_back():
    me = catalog.load_map("eq12")
    r = verify_equivalence(_inverse_eq12(), catalog.equation(me.target), catalog.equation(me.source))
    assert r.passed and not r.factor.is_zero()


@settings(max_examples=10, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=16, max_size=16))
def test_linear_map_scales_hessian_determinant(entries):
    B = [[Fraction(entries[4 * i + j]) for j in range(4)] for i in range(4)]
    Be = [[Expr.const(v) for v in row] for row in B]
    dB = det(Be)
    if dB.is_zero():
        return
    X = tuple(normalize(sum((Be[i][j] * Expr.atom(A.var(j + 1)) for j in range(4)), Expr({})))
              for i in range(4))
    m = PointMap(4, X, Expr.atom(A.jet()))
    H = [[Expr.atom(A.jet(i, j)) for j in range(1, 5)] for i in range(1, 5)]
    pushed = pushforward_2jet(m, det(H))
    # u_ab = B_ka B_lb U_kl, so det Hess_x = det(B)^2 det Hess_X
    assert normalize(pushed * dB * dB - det(H)).is_zero()
