import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from qloss.core import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, pure
from qloss.process import dephasing, povm, projective_from_observable, trivial_measurement

settings.register_profile(
    "qloss",
    max_examples=60,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("qloss")

RHO_MIX = I2 / 2
RHO_SY = (I2 + SIGMA_Y) / 2
RHO_PLUS = pure([1, 1])
RHO_ZERO = pure([1, 0])

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.sampled_from([2, 3, 4])


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def noisy_z(a: float):
    """Unsharp sigma_z measurement with effects (I +- a sz)/2."""
    return povm([(I2 + a * SIGMA_Z) / 2, (I2 - a * SIGMA_Z) / 2], values=[1.0, -1.0])


@pytest.fixture
def Mz():
    return projective_from_observable(SIGMA_Z)


@pytest.fixture
def Mx():
    return projective_from_observable(SIGMA_X)


@pytest.fixture
def theta_z():
    return dephasing(SIGMA_Z)


@pytest.fixture
def Mtriv():
    return trivial_measurement([0.5, 0.5], 2)


@pytest.fixture
def M1():
    return noisy_z(1 / math.sqrt(2))


# one line per acceptance item, echoed in the terminal summary
ACCEPTANCE: dict = {}


@pytest.fixture
def verdict():
    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        line = f"[{number:02d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
