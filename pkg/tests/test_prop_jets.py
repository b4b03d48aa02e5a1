from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfflat import catalog, jets
from halfflat.symkernel import atoms as A
from halfflat.symkernel.expr import normalize
from strategies import rational_functions

JET_ATOMS = [A.var(1), A.var(3), A.jet(), A.jet(2), A.jet(1, 2), A.jet(2, 2), A.jet(3, 4), A.jet(1, 4)]


@settings(max_examples=40, deadline=None)
@given(rational_functions(JET_ATOMS), st.integers(1, 4), st.integers(1, 4))
def test_total_derivatives_commute(e, i, j):
    dij = jets.total_derivative(jets.total_derivative(e, i), j)
    dji = jets.total_derivative(jets.total_derivative(e, j), i)
    assert normalize(dij - dji).is_zero()


SOLVED = [n for n in catalog.names() if catalog.equation(n, defaults=True).dim <= 4]


@pytest.mark.parametrize("name", SOLVED)
def test_restrict_idempotent(name):
    eq = jets.ensure_solved(catalog.equation(name, defaults=True).specialized())
    e = jets.total_derivative(jets.total_derivative(eq.F, 1), 2) + eq.F * eq.F
    r = jets.restrict(e, eq)
    assert jets.restrict(r, eq) == r


@pytest.mark.parametrize("name", SOLVED)
def test_prolongation_consistent(name):
    eq = jets.ensure_solved(catalog.equation(name, defaults=True).specialized())
    assert jets.restrict(eq.F, eq).is_zero()
    for i in range(1, eq.dim + 1):
        assert jets.restrict(jets.total_derivative(eq.F, i), eq).is_zero()


def test_five_dimensional_rank():
    assert jets.characteristic_rank(catalog.equation("veronese5d", defaults=True)) == 5
