import numpy as np
import pytest

from orlicz_lab import _core
from orlicz_lab.measure import MeasureSpace
from acceptance_log import LINES as ACCEPTANCE_LINES



@pytest.fixture(params=sorted(_core.BACKENDS))
def backend(request):
    with _core.use_backend(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def space64():
    r = np.random.default_rng(7)
    w = r.uniform(0.2, 1.0, 64)
    return MeasureSpace(w / w.sum())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
