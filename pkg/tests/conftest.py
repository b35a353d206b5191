import math
import warnings

import numpy as np
import pytest

from spinnoise.circuit import tuned_probe, solenoid_inductance
from spinnoise.constants import PROTON_GAMMA
from spinnoise.spins import SpinEnsemble

# reference probe and sample: 100 MHz tank, protons at 100.1 MHz
FC = 100e6
F0 = 100.1e6
OMEGA_C = 2 * math.pi * FC
OMEGA_0 = 2 * math.pi * F0
B0 = OMEGA_0 / PROTON_GAMMA
LC = 1e-7
QC = 1e3
RA = 50.0


def proton_sample(theta_s=300.0, density=1e29, t2=math.inf, ppm=1e-6, q=0.5, **kw):
    return SpinEnsemble(PROTON_GAMMA, 0.5, density, theta_s, t2, ppm, q, **kw)


def probe(theta_c=300.0, theta_a=0.0, lc=LC, qc=QC, omega_c=OMEGA_C, ra=RA):
    return tuned_probe(lc, qc, omega_c, ra, theta_c=theta_c, theta_a=theta_a)


@pytest.fixture
def sample():
    return proton_sample()


@pytest.fixture
def pc():
    return probe()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def _strict_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        yield


def approx(expected, rel=1e-6, abs=0.0):
    """``pytest.approx`` without the default 1e-12 absolute slack (PSDs here are ~1e-20)."""
    return pytest.approx(expected, rel=rel, abs=abs)


# acceptance report: one line per criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
