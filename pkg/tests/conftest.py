import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from epicure.dynamics import EpidemicParams
from epicure.network import ba_degree_sequence, from_moments
from epicure.optimizer import CostModel

settings.register_profile(
    "epicure",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("epicure")

PAPER_MOMENTS = (1.996, 13.75)
FIG4 = EpidemicParams(zeta1=0.2, zeta2=0.15, gamma1=0.4, gamma2=0.4)
FIG5 = EpidemicParams(zeta1=0.1, zeta2=0.15, gamma1=0.1, gamma2=0.2)
PAPER_COST = CostModel(15.0, 10.0, 50.0)


@pytest.fixture(scope="session")
def ba_net():
    """500-node BA realisation with <k> = 1.996, <k^2> = 13.752."""
    return ba_degree_sequence(500, 1, 3363)


@pytest.fixture(scope="session")
def paper_moments_net():
    return from_moments(*PAPER_MOMENTS)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.LINES:
            terminalreporter.write_line(line)
