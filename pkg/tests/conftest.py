import numpy as np
import pytest
from click.testing import CliRunner

from esslab.distributions import DistributionSpec, sample
from esslab.grammar import parse_distribution
from esslab.registry import FamilyRegistry
from esslab.streams import stream

CATALOG = [
    "exp",
    "normal",
    "uniform",
    "weibull:0.5",
    "weibull:2",
    "pareto:1",
    "pareto:2",
    "cauchy",
    "lognormal",
    "logistic",
    "expexp",
    "sym(exp)",
    "sym(weibull:0.5)",
    "sym(pareto:2)",
]


def within(estimate, expected, stderrs=4.0):
    """``estimate`` is a SummaryStats; the band is in units of its own stderr."""
    return abs(estimate.mean - expected) <= stderrs * max(estimate.stderr, 1e-12)


@pytest.fixture
def registry():
    return FamilyRegistry()


@pytest.fixture
def rng():
    return stream(20240611)


@pytest.fixture
def uniform():
    return DistributionSpec("uniform")


@pytest.fixture
def cauchy():
    return DistributionSpec("cauchy")


@pytest.fixture(params=CATALOG)
def spec(request):
    return parse_distribution(request.param)


@pytest.fixture
def random_matrix(rng):
    def make(n, family="uniform"):
        return np.asarray(sample(DistributionSpec(family), rng, n * n)).reshape(n, n)

    return make


@pytest.fixture
def cli_runner():
    return CliRunner()
