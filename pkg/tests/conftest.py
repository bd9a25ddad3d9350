from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pcuss.ensemble import derive_params

settings.register_profile(
    "pcuss", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("pcuss")


@pytest.fixture(scope="session")
def params0():
    return derive_params(0, 64, 4)


@pytest.fixture(scope="session")
def params1():
    return derive_params(1, 64, 2)


@pytest.fixture(scope="session")
def sep_params():
    return derive_params(1, 64, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import VERDICTS

    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[n])
