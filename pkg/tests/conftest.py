import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ucpo.reasoner import materialize  # noqa: E402
from ucpo.schema import descriptor, schema_graph, seed_data  # noqa: E402


@pytest.fixture(scope="session")
def onto():
    return descriptor()


@pytest.fixture(scope="session")
def shipped():
    """Schema and seed data in one graph, as the CLI loads them."""
    g = schema_graph()
    g.update(seed_data().triple_set())
    return g


@pytest.fixture(scope="session")
def closure(shipped):
    return materialize(shipped).graph


_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line; it is echoed now and in the final summary."""
    lines = request.config.stash.setdefault(_CRITERIA, {})

    def record(n: int, ok: bool, detail: str) -> bool:
        line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}"
        print(line)
        lines[n] = line
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_CRITERIA, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
