import sys

import pytest

from g2flow import flows
from g2flow.scalar import MODE, set_mode


@pytest.fixture(autouse=True)
def exact_mode():
    saved = (MODE.kind, MODE.rel_tol)
    set_mode("exact", 1e-9)
    yield
    set_mode(*saved)


@pytest.fixture(scope="session")
def solutions():
    """One solution per flow at eps = 1; their symbolic states are cached on first use."""
    return {kind: flows.solution(kind, 1) for kind in flows.KINDS}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.line(n))
