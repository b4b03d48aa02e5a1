from __future__ import annotations

import pytest

from halfflat import jets
from halfflat.symkernel import atoms as A
from halfflat.symkernel.parse import parse

H2 = """name = h2
dim = 4
F = u[1,3] + u[2,4] + u[1,1]*u[2,2] - u[1,2]^2
solved: u[1,3] = -u[2,4] - u[1,1]*u[2,2] + u[1,2]^2
"""


def test_loads_and_restrict():
    eq = jets.loads(H2)
    assert eq.solved and eq.pivot is A.jet(1, 3)
    assert jets.restrict(parse("u[1,3,3]", dim=4), eq) == jets.restrict(
        jets.total_derivative(eq.rhs, 3), eq)


def test_restriction_eliminates_pivot_prolongations():
    eq = jets.loads(H2)
    e = jets.restrict(jets.total_derivative(jets.total_derivative(parse("u[1,3]"), 1), 4), eq)
    assert not any(a.kind == "u" and len(a.data) >= 2 and a.data.count(1) and a.data.count(3)
                   for a in e.atoms())


def test_total_derivative_of_jet():
    assert jets.total_derivative(parse("u[1,2]"), 3) == parse("u[1,2,3]")
    assert jets.total_derivative(parse("x2*u"), 2) == parse("u + x2*u[2]")


def test_max_order_enforced():
    with pytest.raises(jets.JetOrderError):
        jets.total_derivative(parse("u[1,1,1,1]"), 2)


def test_solve_pivot():
    eq = jets.solve_pivot(jets.loads(H2), A.jet(2, 4))
    assert jets.check_consistency(eq)
    with pytest.raises(jets.EquationError):
        jets.solve_pivot(jets.loads(H2), A.jet(3, 3))


def test_parameters_and_defaults():
    text = "name = p\ndim = 4\nparam a\ndefault a = 3/2\nF = u[1,3] + a*u[2,4]\n"
    eq = jets.loads(text)
    assert eq.params == {"a": None}
    assert eq.with_defaults().params == {"a": 1.5}
    assert "default a = 3/2" in jets.dumps(eq)
    with pytest.raises(jets.EquationError):
        eq.with_params({"b": 1})


@pytest.mark.parametrize("text", [
    "name = x\ndim = 4\n",
    "name = x\ndim = four\nF = u[1,1]\n",
    "name = x\ndim = 4\nF = u[1,1]\nbogus = 1\n",
    "name = x\ndim = 4\nF = u[1,1] +\n",
    "name = x\ndim = 4\nF = u[1,1]\nsolved: u[1,1] = u[1,1]\n",
    "name = x\ndim = 4\nF = u[1,1]\nlax.X = 1, 0, 0, 0\n",
    "name = x\ndim = 4\nF = u[1,1]\ndefault q = 1\n",
])
def test_malformed_files(text):
    with pytest.raises(jets.EquationError):
        jets.loads(text)


def test_rank_of_degenerate_equation():
    eq = jets.loads("name = d\ndim = 4\nF = u[1,1] + u[2,2]\n")
    assert jets.characteristic_rank(eq) == 2
