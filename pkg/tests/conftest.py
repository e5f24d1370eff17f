import numpy as np
import pytest

from pairlab import kernels


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request):
    """Each available kernel implementation in turn."""
    return kernels.available_backends()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def reference_stream():
    """Ten seconds at the measured operating point."""
    from pairlab import simulate
    sig, idl = simulate.reference_arms()
    return simulate.simulate_experiment(simulate.SourceParams(), sig, idl, 10.0, seed=1)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES
    if LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(LINES):
            terminalreporter.write_line(line)
