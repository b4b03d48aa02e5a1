"""One test per acceptance criterion; a summary line for each is printed at the end of the run."""

from __future__ import annotations

import pytest

from halfflat import acceptance

RESULTS: list = []


def _param(c):
    n, title, _prov, _limit, _fn, slow = c
    marks = [pytest.mark.slow] if slow else []
    return pytest.param(n, id=f"criterion{n:02d}", marks=marks)


@pytest.mark.parametrize("number", [_param(c) for c in acceptance.CRITERIA])
def test_criterion(number):
    r = acceptance.run(number)
    RESULTS.append(r)
    print(r.line())
    for d in r.details:
        print("   ", d)
    if r.skipped:
        pytest.skip("; ".join(r.details))
    assert r.passed, "\n".join(r.details)
    assert r.within_limit, f"took {r.elapsed:.1f}s, limit {r.limit_s}s"
