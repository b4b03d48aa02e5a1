from __future__ import annotations

import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfflat import catalog, jets
from halfflat.confgeom import (_pipeline, _rescaled_jet, halfflat_check, hodge_star, quadric_jet,
                               weyl_at_point)
from halfflat.scalars import QuadNumber
from halfflat.symkernel.parse import parse

FOUR_D = [n for n in catalog.names() if catalog.equation(n).dim == 4]
R4 = range(4)


@pytest.fixture(scope="module", params=FOUR_D)
def at_point(request):
    return request.param, weyl_at_point(catalog.equation(request.param, defaults=True), seed=3)


def test_riemann_symmetries_and_bianchi(at_point):
    _, w = at_point
    R = w["cur"]["Rget"]
    for a, b, c, d in product(R4, repeat=4):
        r = R(a, b, c, d)
        assert r + R(b, a, c, d) == 0
        assert r + R(a, b, d, c) == 0
        assert r - R(c, d, a, b) == 0
        assert r + R(a, c, d, b) + R(a, d, b, c) == 0


def test_weyl_traceless(at_point):
    _, w = at_point
    ginv, W = w["cur"]["ginv"], w["W"]
    for j, l in product(R4, repeat=2):
        assert sum(ginv[i][k] * W[(i, j, k, l)] for i in R4 for k in R4) == 0
        assert sum(w["Wm"][(i, j, i, l)] for i in R4) == 0


def test_split_sums_to_weyl(at_point):
    _, w = at_point
    for idx, v in w["Wm"].items():
        assert w["Wp"][idx] + w["Wn"][idx] - v == 0


def test_star_is_an_involution(at_point):
    # split signature: ** = +1 on 2-forms
    _, w = at_point
    ginv, sq = w["cur"]["ginv"], w["sq"]
    S = hodge_star(w["Wm"], ginv, sq)
    SS = hodge_star(S, ginv, sq)
    for idx, v in w["Wm"].items():
        assert SS[idx] - v == 0


def test_split_symbolic_heavenly2():
    from halfflat.confgeom import sqrt_det
    from halfflat.symkernel.expr import normalize

    eq = jets.ensure_solved(catalog.equation("heavenly2"))
    qj = quadric_jet(eq)
    info = sqrt_det(eq, qj.dq)
    r = jets.restrictor(eq)

    def norm(v):
        return normalize(r(v))

    assert info.kind == "square"
    sq = 1 / info.value
    _, _, Wm, Wp, Wn = _pipeline(qj.Q, qj.dQ, qj.ddQ, sq, norm)
    assert all(norm(Wp[k] + Wn[k] - Wm[k]).is_zero() for k in Wm)
    assert all(v.is_zero() for v in Wn.values())
    assert any(not v.is_zero() for v in Wp.values())


CONFORMAL_FACTORS = ["1 + u[1,2]^2", "x1^2 + 3", "2 + u[1]*u[2,2] + x4"]


@settings(max_examples=6, deadline=None)
@given(st.sampled_from(["heavenly2", "heavenly1", "genheavenly_c", "heavenly2_f_x3"]),
       st.sampled_from(CONFORMAL_FACTORS), st.integers(0, 10 ** 6))
def test_mixed_weyl_conformally_invariant(name, phi, seed):
    eq = jets.ensure_solved(catalog.equation(name, defaults=True).specialized())
    qj = quadric_jet(eq)
    qj2 = _rescaled_jet(eq, qj, parse(phi, dim=4))
    exprs = qj.entries() + qj2.entries() + [qj.dq, qj2.dq]
    rng = random.Random(seed)
    p = jets.random_point(jets.free_atoms(exprs), rng)
    out = []
    for j in (qj, qj2):
        Q = [[p(v) for v in row] for row in j.Q]
        dQ = [[[p(v) for v in row] for row in M] for M in j.dQ]
        ddQ = {k: [[p(v) for v in row] for row in M] for k, M in j.ddQ.items()}
        r = p(j.dq)
        sq = QuadNumber(0, 1, r) / r
        out.append(_pipeline(Q, dQ, ddQ, sq, lambda v: v)[2])
    assert all(out[0][k] == out[1][k] for k in out[0])


TABLES = ["heavenly2", "heavenly2_f_bilinear", "heavenly2_f_x1", "heavenly2_f_x3", "heavenly1",
          "heavenly1_u1", "heavenly1_u1u3", "genheavenly_c", "genheavenly_x"]


@pytest.mark.parametrize("name", TABLES)
def test_orientation(name):
    r = halfflat_check(catalog.equation(name, defaults=True), seed=0)
    assert r.W_plus_zero != r.W_minus_zero
    if name == "genheavenly_c":
        # with the positive root of det Q this row is anti-self-dual
        assert r.W_plus_zero and r.witness_minus is not None
    else:
        assert r.W_minus_zero and r.witness_plus is not None
