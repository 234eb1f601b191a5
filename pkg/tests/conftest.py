import numpy as np
import pytest

from trimot import kernels
from trimot.kernels import _numba, _numpy

BACKENDS = {"numba": _numba, "numpy": _numpy}

# "PASS/FAIL criterion k: ..." lines collected by test_acceptance.py
ACCEPTANCE_LINES = []


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Route the solvers through one kernel implementation."""
    mod = BACKENDS[request.param]
    monkeypatch.setattr(kernels, "chain_dp", mod.chain_dp)
    monkeypatch.setattr(kernels, "ssp_matching", mod.ssp_matching)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
