from __future__ import annotations

import pytest

from halfflat.constraints import (DegenerateJetError, contains_ma, derive_constraints,
                                  linearized_relations, random_jet, read_jet, realify)
from halfflat.linalg import field_rank
from gmpy2 import mpq


@pytest.fixture(scope="module")
def default_system():
    return derive_constraints()


def test_rank_at_default_jet(default_system):
    assert default_system.rank == 30
    assert len(default_system.columns) == 45


def test_contains_all_relations(default_system):
    r = contains_ma(default_system)
    assert r.all_contained and r.ma_rank == 25 and r.complement == 5
    assert all(c.certificate for c in r.results)


def test_self_dual_part_gives_same_count():
    s = derive_constraints(part="W+")
    assert s.rank == 30
    assert contains_ma(s).all_contained


def test_extra_arguments_add_nothing():
    s = derive_constraints(extra_args=True)
    assert s.rank == 30 and not s.extra_symbols


def test_zero_jet_is_rejected():
    with pytest.raises(DegenerateJetError):
        derive_constraints(frozen={})


def test_relations_are_linear_at_frozen_jet(default_system):
    rows = [r for _, r in linearized_relations(default_system.frozen)]
    assert len(rows) == 25 and field_rank(rows) == 25


def test_realify_doubles_rank():
    from halfflat.scalars import QuadNumber

    row = [QuadNumber(1, 2, 3), QuadNumber(0, 0, 3)]
    out = realify(row, mpq(3))
    assert len(out) == 2 and len(out[0]) == 4 and field_rank(out) == 2


def test_read_jet(tmp_path):
    p = tmp_path / "jet.txt"
    p.write_text("# default jet\nu[1,4] = 1\nu[2,3] = 1\n")
    assert read_jet(p) == derive_constraints().frozen


@pytest.mark.slow
def test_completeness_splits(default_system):
    s = derive_constraints(completeness=True)
    assert s.split_rank == s.rank == 30


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_generic_jets(seed):
    s = derive_constraints(frozen=random_jet(seed))
    assert s.rank == 30
    r = contains_ma(s)
    assert r.all_contained and r.complement == 5
