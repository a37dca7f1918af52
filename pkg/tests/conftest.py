import math

import numpy as np
import pytest

from adiabatic_lab import models

#: (criterion number, passed, detail) lines reported at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def linear_spec():
    return models.ModelSpec(theta=math.pi / 4, schedule=models.LinearTime(0.1))
