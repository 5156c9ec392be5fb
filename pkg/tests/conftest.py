import numpy as np
import pytest

from fracdiff import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=["compiled", "python"])
def backend(request):
    if request.param == "compiled" and not kernels.HAVE_COMPILED:
        pytest.skip("compiled extension not built")
    previous = kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)


def random_spd(rng, n, floor=0.5):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (q * rng.uniform(floor, 5.0, n)) @ q.T


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
