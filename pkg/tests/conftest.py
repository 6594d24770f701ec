import numpy as np
import pytest

from bddyn.model import PARAM_NAMES, Params, table2

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def base():
    return table2(1.37)


@pytest.fixture(scope="session")
def hopf_point():
    from bddyn import hopf

    return hopf.find_rc(table2(1.37), (0.8, 2.0))


@pytest.fixture(scope="session")
def center(hopf_point):
    from bddyn import hopf

    return hopf.center_manifold(table2(1.37), hopf_point.r_c)


def random_params(rng) -> Params:
    """Broad positive parameter draws (conversion factors below one)."""
    return Params(r=rng.uniform(0.1, 5), k=rng.uniform(1, 300), a1=rng.uniform(1, 300), a2=rng.uniform(1, 300),
                  b1=rng.uniform(0.01, 3), b2=rng.uniform(0.01, 3), c1=rng.uniform(0.1, 5), c2=rng.uniform(0.1, 5),
                  delta1=rng.uniform(0.05, 2), delta2=rng.uniform(0.05, 2), e1=rng.uniform(0.05, 0.99),
                  e2=rng.uniform(0.05, 0.99))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
