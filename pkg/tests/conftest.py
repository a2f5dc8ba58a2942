import numpy as np
import pytest

from mfbs.hurst import ConstantHurst, SinusoidalHurst, TabulatedHurst

# lines printed at the end of the run by pytest_terminal_summary
ACCEPTANCE_LINES = []


@pytest.fixture
def sinusoid():
    return SinusoidalHurst(0.1, 0.0, 0.5, 8.4)


@pytest.fixture
def slow_sinusoid():
    return SinusoidalHurst(0.1, 0.3, 0.5, 1.0)


@pytest.fixture
def table():
    # knots chosen off the 1e-3 test grids so central differences never straddle a kink
    return TabulatedHurst((0.0, 0.5005, 1.2505, 2.5005, 6.0005, 12.0),
                          (0.45, 0.62, 0.38, 0.55, 0.7, 0.5))


@pytest.fixture
def all_variants(slow_sinusoid, table):
    return {"constant": ConstantHurst(0.7), "sinusoidal": slow_sinusoid, "tabulated": table}


@pytest.fixture
def rng():
    return np.random.default_rng(20230324)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
