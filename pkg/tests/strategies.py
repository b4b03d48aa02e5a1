"""Hypothesis strategies for random jet expressions."""

from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from halfflat.symkernel import atoms as A
from halfflat.symkernel.expr import Expr

ATOMS = [A.var(1), A.var(2), A.jet(), A.jet(1), A.jet(2, 3), A.jet(1, 1), A.jet(1, 2), A.jet(3, 4)]

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def monomials(draw, atoms=ATOMS):
    e = Expr.const(draw(coeffs))
    for a in draw(st.lists(st.sampled_from(atoms), max_size=3)):
        e = e * Expr.atom(a)
    return e


@st.composite
def polys(draw, atoms=ATOMS, max_terms=4):
    e = Expr({})
    for m in draw(st.lists(monomials(atoms), min_size=1, max_size=max_terms)):
        e = e + m
    return e


@st.composite
def rational_functions(draw, atoms=ATOMS):
    n = draw(polys(atoms))
    d = draw(polys(atoms, max_terms=3))
    if d.is_zero():
        d = Expr.const(Fraction(1))
    return n / d


@st.composite
def points(draw, atoms=ATOMS):
    return {a: draw(st.fractions(min_value=-20, max_value=20, max_denominator=7)) for a in atoms}
