import pytest

from priorsample import models


@pytest.fixture(scope="session")
def gg():
    """Prior N(0, 1), one observation x = 1 with unit variance."""
    return models.make_gaussian_gaussian(0.0, 1.0, 1.0, 1, 1.0)


@pytest.fixture(scope="session")
def bb():
    return models.make_beta_bernoulli(1.0, 1.0, 2, 2)


@pytest.fixture(scope="session")
def const():
    return models.make_constant()


def analytic_cdf(model, coord=0):
    return lambda x: model.analytic_posterior_cdf(x, coord)


@pytest.fixture
def cdf_of():
    return analytic_cdf


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
