import numpy as np
import pytest
from hypothesis import settings

from qsteer.qstate import mixture

settings.register_profile("default", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def needle_example():
    """1/2 (|00><00| + |1+><1+|): classically correlated Alice, non-orthogonal Bob states."""
    return mixture([(0.5, [0, 0, 1], [0, 0, 1]), (0.5, [0, 0, -1], [1, 0, 0])])


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one pass/fail line per acceptance criterion for the terminal summary."""
    lines = []
    request.config._acceptance_lines = lines
    return lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
