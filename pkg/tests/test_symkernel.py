from __future__ import annotations

from fractions import Fraction

import pytest

from halfflat.symkernel import atoms as A
from halfflat.symkernel.expr import Expr, PoleError, eval_rational, normalize, render
from halfflat.symkernel.parse import ParseError, parse


@pytest.mark.parametrize("text", [
    "u[1,3] + u[2,4] + u[1,1]*u[2,2] - u[1,2]^2",
    "(x1 - lam)/(x2 - x4)",
    "3/4*u[1]^2 - a*u",
    "df[u[1,2],u[3,3]]",
])
def test_render_parse_round_trip(text):
    e = normalize(parse(text, dim=4, params=("a",)))
    assert normalize(parse(render(e), dim=4, params=("a",))) == e


def test_jet_indices_are_sorted():
    assert parse("u[2,1]", dim=4) == parse("u[1,2]", dim=4)
    assert A.jet(3, 1, 2) is A.jet(1, 2, 3)


def test_cancellation():
    e = parse("(u[1]^2 - u[2]^2)/(u[1] - u[2])", dim=4)
    assert normalize(e) == normalize(parse("u[1] + u[2]", dim=4))


def test_pole_is_reported():
    e = parse("1/(x1 - x2)", dim=4)
    with pytest.raises(PoleError):
        eval_rational(e, {A.var(1): 3, A.var(2): 3})


def test_exact_evaluation():
    e = parse("x1/3 + u[1,1]^2", dim=4)
    assert eval_rational(e, {A.var(1): 1, A.jet(1, 1): Fraction(1, 2)}) == Fraction(7, 12)


@pytest.mark.parametrize("bad", ["u[1,", "x0", "u[5,1]", "1 +", "foo(", "u[1]]", "2^x1"])
def test_malformed_input(bad):
    with pytest.raises(ParseError):
        parse(bad, dim=4)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        Expr.atom(A.var(1)) / Expr({})
