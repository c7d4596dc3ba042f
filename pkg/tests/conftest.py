import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_subcube(rng, domain, min_frac=1e-3):
    """Random cube inside ``domain`` with edge fractions in ``[min_frac, 1)``."""
    from qbnb import Cube

    width = domain.upper - domain.lower
    frac = np.exp(rng.uniform(np.log(min_frac), 0, size=domain.dim))
    h = frac * width / 2
    c = domain.lower + h + rng.uniform(size=domain.dim) * (width - 2 * h)
    return Cube(c, h)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
