import numpy as np
import pytest

from muhs.halfline import HalfLineGrid, ModeParams
from muhs.profiles import parse_profile


@pytest.fixture
def grid():
    return HalfLineGrid.auto(1.0, 1024)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def gaussian_rhs(grid, spec="gaussian:0.5,2"):
    return parse_profile(spec).sample(grid)


def exp_rhs(grid, c):
    return parse_profile(f"exp:{c}").sample(grid)


def mode(sigma, a):
    return ModeParams(sigma, a)


def rel_l2(u, v):
    u, v = np.asarray(u), np.asarray(v)
    return float(np.linalg.norm(u - v) / np.linalg.norm(v))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[key])
