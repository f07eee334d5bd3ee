import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gradflow.stepper import parse_scheme_name  # noqa: E402

CORRECTED = ["TIF1", "NIF1", "TIF2-Heun", "NIF2-Heun", "TIF2-Ralston", "NIF2-Ralston",
             "TIF3-Heun", "NIF3-Heun", "TIF3-Ralston", "NIF3-Ralston", "TIF4-Kutta", "NIF4-Kutta"]
CERTIFIED = CORRECTED[:10]
RAW = ["IF1", "IF2-Heun", "IF2-Ralston", "IF3-Heun", "IF3-Ralston", "IF4-Kutta"]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=CORRECTED)
def corrected_name(request):
    return request.param


def tableau_kind(name):
    return parse_scheme_name(name)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
