"""Unit tests for the half-flatness, Monge-Ampere, Lax and equivalence checks."""

from __future__ import annotations

import json

import pytest

from halfflat import catalog, jets
from halfflat.confgeom import DegenerateQuadricError, halfflat_check
from halfflat.equivalence import (EquivalenceError, change_vars, identity_map, read_matrix,
                                  travelling_wave_reduce, verify_equivalence)
from halfflat.laxpair import LamVectorField, LaxError, frobenius_check
from halfflat.mongeampere import MAError, check_relations, generate_relations, to_evolutionary
from halfflat.symkernel.parse import parse


def test_report_is_deterministic():
    a = halfflat_check(catalog.equation("heavenly2"), seed=5).to_dict()
    b = halfflat_check(catalog.equation("heavenly2"), seed=5).to_dict()
    a.pop("elapsed_ms")
    b.pop("elapsed_ms")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_flat_wave_equation_is_conformally_flat():
    r = halfflat_check(catalog.equation("wave4d"), mode="symbolic")
    assert r.W_plus_zero and r.W_minus_zero


def test_symbolic_and_sampled_agree():
    eq = catalog.equation("heavenly1")
    s = halfflat_check(eq, mode="symbolic")
    p = halfflat_check(eq, mode="sampled")
    assert (s.W_plus_zero, s.W_minus_zero) == (p.W_plus_zero, p.W_minus_zero)
    assert p.failure_bound is not None and 0 < p.failure_bound < 1


def test_degenerate_quadric_rejected():
    eq = jets.loads("name = d\ndim = 4\nF = u[1,1] + u[2,2]\nsolved: u[1,1] = -u[2,2]\n")
    with pytest.raises(DegenerateQuadricError):
        halfflat_check(eq)


def test_unknown_mode():
    with pytest.raises(ValueError):
        halfflat_check(catalog.equation("heavenly2"), mode="fast")


def test_relations_need_evolutionary_form():
    f = parse("u[1,2]*u[3,4]")
    assert len(generate_relations(f)) == 25
    with pytest.raises(MAError):
        generate_relations(parse("u[1,1]"))
    with pytest.raises(MAError):
        to_evolutionary(catalog.equation("heavenly1"), frame=[[1, 0, 0, 0], [0, 1, 0, 0],
                                                               [0, 0, 1, 0], [0, 0, 0, 1]])


def test_sampled_relations_find_counterexample():
    r = check_relations(catalog.equation("ma_counterexample"), mode="sampled")
    assert not r.is_ma and r.witnesses


def test_lax_errors():
    eq = catalog.equation("heavenly2")
    X = LamVectorField.parse(4, ["1", "0", "0", "lam"])
    with pytest.raises(LaxError):
        frobenius_check(X, X.scaled(parse("u[1,2]")), eq)
    with pytest.raises(LaxError):
        frobenius_check(X, LamVectorField.parse(4, ["u[1,1,1]", "0", "0", "0"]), eq)
    with pytest.raises(LaxError):
        LamVectorField.parse(3, ["1", "0"])


def test_identity_map_is_not_an_equivalence_between_rows():
    a = catalog.equation("heavenly2_f_x3")
    r = verify_equivalence(identity_map(4), a, a)
    assert r.passed
    r = verify_equivalence(identity_map(4), a, catalog.equation("heavenly2"))
    assert not r.passed and r.witness


def test_frame_change_keeps_type():
    C = [[1, 0, 0, 0], [0, 1, 0, 0], [-1, 0, 1, 0], [0, 0, 0, 1]]
    eq = change_vars(catalog.equation("heavenly2"), C)
    assert check_relations(eq, mode="symbolic").is_ma
    with pytest.raises(EquivalenceError):
        change_vars(eq, [[1, 0, 0, 0]] * 4)


def test_reduction_requirements(tmp_path):
    eq = catalog.equation("heavenly6d")
    with pytest.raises(EquivalenceError):
        travelling_wave_reduce(eq, [[1, 0, 0, 0]] * 6)
    with pytest.raises(EquivalenceError):
        travelling_wave_reduce(catalog.equation("genheavenly_x"), [[1, 0, 0, 0], [0, 1, 0, 0],
                                                                   [0, 0, 1, 0], [0, 0, 0, 1]])
    p = tmp_path / "m.txt"
    p.write_text("1 2\n3\n")
    with pytest.raises(EquivalenceError):
        read_matrix(p)
