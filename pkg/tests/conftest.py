import numpy as np
import pytest

from pgas_euler.euler_core import GasModel


@pytest.fixture
def gas():
    return GasModel()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_prims(rng, n):
    """``n`` random valid primitive states spanning several decades."""
    out = np.empty((n, 4))
    out[:, 0] = 10.0 ** rng.uniform(-2, 2, n)
    out[:, 1:3] = rng.uniform(-3, 3, (n, 2))
    out[:, 3] = 10.0 ** rng.uniform(-4, 3, n)
    return out


_CRITERIA: dict[int, tuple[str, str, str]] = {}


@pytest.fixture
def criterion(request):
    """Record a one-line verdict for an acceptance criterion.

    Call ``criterion(n, name, passed, detail)``; the verdict is printed in
    the terminal summary whether or not the test's assertions pass.
    """

    def record(n, name, verdict, detail):
        if isinstance(verdict, bool):
            verdict = "PASS" if verdict else "FAIL"
        _CRITERIA[n] = (name, verdict, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        name, verdict, detail = _CRITERIA[n]
        terminalreporter.write_line(f"[{verdict}] {n}. {name}: {detail}")
