from __future__ import annotations

import pytest


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run long-running checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="long-running; use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    done = {r.number for r in RESULTS}
    for r in sorted(RESULTS, key=lambda r: r.number):
        terminalreporter.write_line(r.line())
    from halfflat.acceptance import CRITERIA

    for n, title, prov, limit, _fn, slow in CRITERIA:
        if n not in done:
            terminalreporter.write_line(f"[SKIP] criterion {n:2d}: {title} (not run"
                                        f"{'; long-running, use --runslow' if slow else ''}) | {prov}")
