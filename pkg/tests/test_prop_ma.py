from __future__ import annotations

from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfflat import catalog
from halfflat.mongeampere import check_minor_span, check_relations, generate_relations
from halfflat.symkernel import atoms as A
from halfflat.symkernel.expr import Expr, normalize, substitute
from strategies import polys

F_ARGS = [A.jet(a, b) for a in range(1, 5) for b in range(a, 5) if (a, b) != (1, 1)]
F_ARGS += [A.var(2), A.jet(), A.jet(3)]


def relabel(e, sigma):
    """Apply the index permutation ``sigma`` (on 1..4, fixing 1) to every atom of ``e``."""
    b = {}
    for a in e.atoms():
        if a.kind == "u":
            b[a] = Expr.atom(A.jet(*sorted(sigma[i] for i in a.data)))
        elif a.kind == "x":
            b[a] = Expr.atom(A.var(sigma[a.data]))
    return normalize(substitute(e, b))


@settings(max_examples=15, deadline=None)
@given(polys(F_ARGS, max_terms=4), st.sampled_from(list(permutations((2, 3, 4)))))
def test_relations_permute_under_relabeling(f, perm):
    sigma = {1: 1, **dict(zip((2, 3, 4), perm))}
    before = {relabel(r, sigma) for _, r in generate_relations(f)}
    after = {r for _, r in generate_relations(relabel(f, sigma))}
    assert before == after


HEAVENLY = ["heavenly2", "heavenly2_f_bilinear", "heavenly2_f_x1", "heavenly2_f_x3", "heavenly1",
            "heavenly1_u1", "heavenly1_u1u3", "genheavenly", "genheavenly_c", "genheavenly_x",
            "heavenly6d", "heavenly8d"]


@pytest.mark.parametrize("name", HEAVENLY)
def test_heavenly_type_in_minor_span(name):
    assert check_minor_span(catalog.equation(name, defaults=True), trials=3, seed=1).member


@pytest.mark.parametrize("name", ["heavenly2", "heavenly2_f_bilinear", "heavenly2_f_x1",
                                  "heavenly2_f_x3"])
def test_table1_relations(name):
    assert check_relations(catalog.equation(name), mode="symbolic").is_ma


@settings(max_examples=25, deadline=None)
@given(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4))
def test_plane_family_membership(a, b, g):
    eq = catalog.equation("genheavenly").with_params({"a": a, "b": b, "g": g})
    assert check_minor_span(eq, trials=3, seed=0).member == (a + b + g == 0)
