import pytest

from zk3d.groundstate import solve_ground_state
from zk3d.spectral import make_grid


@pytest.fixture(scope="session")
def grid64():
    return make_grid(64, 3)


@pytest.fixture(scope="session")
def q64(grid64):
    return solve_ground_state(grid64).q


@pytest.fixture(scope="session")
def grid32():
    return make_grid(32, 3)


@pytest.fixture(scope="session")
def q32(grid32):
    return solve_ground_state(grid32).q


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record the one-line verdict of an acceptance criterion.

    Call as ``criterion(k, ok, detail)``; the line is echoed immediately and
    repeated, in criterion order, in the terminal summary.
    """
    lines = request.config.stash.setdefault(ACCEPTANCE, {})
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def record(k, ok, detail):
        line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines[k] = line
        with capman.global_and_fixture_disabled():
            print("\n" + line, flush=True)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
