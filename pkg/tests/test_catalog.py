from __future__ import annotations

import pytest

from halfflat import catalog, jets
from halfflat.laxpair import verify

NAMES = catalog.names()


def test_listing_covers_entries_and_maps():
    rows = catalog.listing()
    assert [r["name"] for r in rows] == list(NAMES) + list(catalog.map_names())
    assert all(r["provenance"] for r in rows)


@pytest.mark.parametrize("name", NAMES)
def test_solved_form_is_consistent(name):
    eq = catalog.equation(name, defaults=True).specialized()
    if eq.solved:
        assert jets.check_consistency(eq)


@pytest.mark.parametrize("name", NAMES)
def test_round_trip(name):
    eq = catalog.equation(name)
    back = jets.loads(jets.dumps(eq))
    assert back.F == eq.F and back.rhs == eq.rhs and back.pivot == eq.pivot
    assert back.lax == eq.lax and back.params == eq.params
    assert back.meta.get("defaults") == eq.meta.get("defaults")


@pytest.mark.parametrize("name", [n for n in NAMES if catalog.load(n).has_lax])
def test_lax_pairs_match_expectation(name):
    e = catalog.load(name)
    r = verify(e.equation)
    assert (r.passed and r.null.passed) == (e.expect == "pass")


def test_parameter_defaults():
    assert catalog.equation("genheavenly", defaults=True).params == {"a": 1, "b": 1, "g": -2}
    assert catalog.equation("genheavenly_c", defaults=True).params == {"c": 2}
    assert catalog.equation("veronese4d", defaults=True).params == {"a1": 1, "a2": 2, "a3": 3, "a4": 5}
    assert all(v is None for v in catalog.equation("veronese4d").params.values())


def test_unknown_names():
    with pytest.raises(catalog.CatalogError):
        catalog.load("nope")
    with pytest.raises(catalog.CatalogError):
        catalog.load_map("nope")
    with pytest.raises(catalog.CatalogError):
        catalog.symmetry("veronese3d", "Z9")
