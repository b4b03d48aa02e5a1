from __future__ import annotations

from fractions import Fraction

from hypothesis import assume, given, settings
from hypothesis import strategies as st

from halfflat import _kernels_py, kernels
from halfflat.symkernel import atoms as A
from halfflat.symkernel.expr import Expr, PoleError, diff, eval_rational, normalize, split_root
from strategies import ATOMS, points, polys, rational_functions

PROP = settings(max_examples=60, deadline=None)


@PROP
@given(rational_functions())
def test_normalize_idempotent(e):
    n = normalize(e)
    assert normalize(n) == n


@settings(max_examples=120, deadline=None)
@given(rational_functions(), points())
def test_normalize_preserves_value(e, p):
    try:
        v = eval_rational(e, p)
    except PoleError:
        assume(False)
    assert eval_rational(normalize(e), p) == v


@PROP
@given(rational_functions(), st.sampled_from(ATOMS), st.sampled_from(ATOMS))
def test_partial_derivatives_commute(e, a, b):
    ab = normalize(diff(diff(e, a), b))
    ba = normalize(diff(diff(e, b), a))
    assert normalize(ab - ba).is_zero()


@PROP
@given(rational_functions(), rational_functions(), st.sampled_from(ATOMS))
def test_leibniz(e1, e2, a):
    r = diff(e1 * e2, a) - diff(e1, a) * e2 - e1 * diff(e2, a)
    assert normalize(r).is_zero()


@PROP
@given(polys(), polys(), st.integers(min_value=-30, max_value=30).filter(lambda r: r != 0))
def test_root_conjugate_product(a, b, r):
    s = Expr.atom(A.root())
    rad = Expr.const(r)
    lhs = normalize((a + b * s) * (a - b * s), rad)
    assert normalize(lhs - (a * a - b * b * rad)).is_zero()


@PROP
@given(polys(), polys(), st.integers(min_value=2, max_value=30))
def test_split_root_recovers_parts(a, b, r):
    s = Expr.atom(A.root())
    e = normalize(a + b * s, Expr.const(r))
    x, y = split_root(e)
    assert normalize(x - a).is_zero() and normalize(y - b).is_zero()


@PROP
@given(polys(), polys(), st.sampled_from(ATOMS), points())
def test_kernel_backends_agree(e1, e2, a, p):
    p1, p2 = e1.num, e2.num
    vals = [None] * A.n_atoms()
    for k, v in p.items():
        vals[k.id] = Fraction(v)
    py = _kernels_py
    k = kernels
    assert k.padd(p1, p2) == py.padd(p1, p2)
    assert k.psub(p1, p2) == py.psub(p1, p2)
    assert k.pmul(p1, p2) == py.pmul(p1, p2)
    assert k.pscale(p1, Fraction(3, 7)) == py.pscale(p1, Fraction(3, 7))
    assert k.pdiff(p1, a.shift) == py.pdiff(p1, a.shift)
    assert k.peval(p1, vals) == py.peval(p1, vals)
