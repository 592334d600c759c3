import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from esslab.distributions import (
    DistributionSpec,
    Family,
    TailClass,
    cdf,
    cumulative_hazard,
    quantile,
    sample,
    survival,
    symmetrize,
    tail_class,
)
from esslab.errors import DistributionError
from esslab.grammar import parse_distribution
from esslab.streams import stream

from .conftest import CATALOG


class FixedUniform:
    def __init__(self, value):
        self.value = value

    def random(self, size=None):
        return self.value if size is None else np.full(size, self.value)


@pytest.mark.parametrize(
    "text, x, expected",
    [
        ("exp", math.log(2.0), 0.5),
        ("pareto:1", 1.0, 0.0),
        ("sym(weibull:0.5)", 0.0, 0.5),
        ("sym(exp)", 0.0, 0.5),
        ("uniform", 0.25, 0.25),
        ("uniform", -1.0, 0.0),
        ("uniform", 2.0, 1.0),
    ],
)
def test_cdf_values(text, x, expected):
    assert cdf(parse_distribution(text), x) == pytest.approx(expected, abs=1e-15)


def test_survival_and_quantile_values():
    assert survival(DistributionSpec("cauchy"), 0.0) == pytest.approx(0.5)
    assert survival(DistributionSpec("pareto", 1.0), 1.0) == 1.0
    assert quantile(DistributionSpec("uniform"), 0.3) == pytest.approx(0.3)
    assert quantile(parse_distribution("sym(pareto:2)"), 0.25) == pytest.approx(-math.sqrt(2.0))


def test_cauchy_survival_far_tail_keeps_precision():
    # 1/2 - arctan(x)/pi would cancel to zero here
    assert survival(DistributionSpec("cauchy"), 1e17) == pytest.approx(1.0 / (math.pi * 1e17))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.5])
def test_weibull_hazard_is_power(alpha):
    x = np.linspace(0.0, 5.0, 11)
    spec = DistributionSpec("weibull", alpha)
    np.testing.assert_allclose(cumulative_hazard(spec, x), x**alpha, rtol=1e-12, atol=0.0)


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_symmetrized_weibull_survival_is_half_the_base(alpha):
    x = np.array([0.1, 1.0, 3.0])
    spec = symmetrize(DistributionSpec("weibull", alpha))
    np.testing.assert_allclose(survival(spec, x), 0.5 * np.exp(-(x**alpha)), rtol=1e-14)
    np.testing.assert_allclose(cdf(spec, -x), 1.0 - cdf(spec, x), atol=1e-15)


def test_sample_is_inverse_transform():
    spec = DistributionSpec("exponential")
    assert sample(spec, FixedUniform(0.5)) == pytest.approx(math.log(2.0))
    draws = sample(DistributionSpec("uniform"), FixedUniform(0.0), 3)
    assert np.all(draws > 0.0)


def test_exponential_mean():
    draws = sample(DistributionSpec("exponential"), stream(1), 10**6)
    assert abs(np.mean(draws) - 1.0) < 0.005


def test_symmetrized_sign_balance():
    draws = sample(parse_distribution("sym(weibull:0.5)"), stream(2), 10**6)
    assert abs(np.mean(draws < 0.0) - 0.5) < 0.002


def test_sample_is_deterministic_given_the_stream(spec):
    np.testing.assert_array_equal(sample(spec, stream(5), 100), sample(spec, stream(5), 100))


def test_cdf_quantile_round_trip(spec):
    p = np.linspace(0.0, 1.0, 1002)[1:-1]
    assert np.max(np.abs(cdf(spec, quantile(spec, p)) - p)) < 1e-9


@settings(max_examples=200, deadline=None)
@given(p=st.floats(min_value=1e-9, max_value=1.0 - 1e-9), text=st.sampled_from(CATALOG))
def test_quantile_round_trip_property(p, text):
    spec = parse_distribution(text)
    assert abs(cdf(spec, quantile(spec, p)) - p) < 1e-9


def test_survival_is_one_minus_cdf(spec):
    x = quantile(spec, np.linspace(0.01, 0.99, 99))
    np.testing.assert_array_equal(cdf(spec, x), 1.0 - survival(spec, x))


def test_hazard_matches_survival(spec):
    x = quantile(spec, np.linspace(0.001, 0.999, 200))
    np.testing.assert_allclose(cumulative_hazard(spec, x), -np.log(survival(spec, x)),
                               rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(cumulative_hazard(spec, x), -np.log(1.0 - cdf(spec, x)),
                               rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize(
    "text, grid",
    [
        ("exp", np.linspace(0.1, 10.0, 100)),
        ("normal", np.linspace(-5.0, 5.0, 100)),
        ("uniform", np.linspace(0.01, 0.99, 100)),
        ("logistic", np.linspace(-5.0, 5.0, 100)),
        ("expexp", np.linspace(-5.0, 3.0, 100)),
        ("weibull:1", np.linspace(0.1, 10.0, 100)),
        ("weibull:3", np.linspace(0.1, 5.0, 100)),
    ],
)
def test_ef_hazard_is_convex(text, grid):
    g = cumulative_hazard(parse_distribution(text), grid)
    assert np.all(np.diff(g, 2) >= -1e-9)


@pytest.mark.parametrize(
    "text, grid",
    [
        ("weibull:0.5", np.linspace(0.1, 10.0, 100)),
        ("pareto:1", np.linspace(1.1, 20.0, 100)),
        ("pareto:2", np.linspace(1.1, 20.0, 100)),
    ],
)
def test_se_hazard_is_concave(text, grid):
    g = cumulative_hazard(parse_distribution(text), grid)
    assert np.all(np.diff(g, 2) <= 1e-9)


@pytest.mark.slow
def test_kolmogorov_smirnov(spec):
    draws = sample(spec, stream(CATALOG.index(spec.label)), 10**5)
    result = stats.kstest(draws, lambda x: cdf(spec, x))
    # 1% family-wise across the catalog
    assert result.pvalue > 0.001


@pytest.mark.parametrize(
    "text, expected",
    [
        ("exp", TailClass.EF),
        ("normal", TailClass.EF),
        ("uniform", TailClass.EF),
        ("logistic", TailClass.EF),
        ("expexp", TailClass.EF),
        ("weibull:1", TailClass.EF),
        ("weibull:0.5", TailClass.SE),
        ("pareto:1", TailClass.SE),
        ("cauchy", TailClass.SE),
        ("lognormal", TailClass.SE),
    ],
)
def test_tail_class_catalog(text, expected):
    assert tail_class(parse_distribution(text)) == expected


@pytest.mark.parametrize(
    "kwargs",
    [
        {"family": "weibull"},
        {"family": "weibull", "shape": -1.0},
        {"family": "pareto", "shape": float("inf")},
        {"family": "normal", "shape": 2.0},
        {"family": "gamma"},
        {"family": "cauchy", "symmetrized": True},
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(DistributionError):
        DistributionSpec(**kwargs)


@pytest.mark.parametrize("family", ["normal", "cauchy", "logistic", "expexp"])
def test_symmetrize_rejects_two_sided(family):
    with pytest.raises(DistributionError):
        symmetrize(DistributionSpec(family))


def test_symmetrize_twice_is_rejected():
    with pytest.raises(DistributionError):
        symmetrize(symmetrize(DistributionSpec("exponential")))


@pytest.mark.parametrize("p", [0.0, 1.0, -0.5, 2.0, float("nan")])
def test_quantile_domain(p):
    with pytest.raises(DistributionError):
        quantile(DistributionSpec("normal"), p)


def test_hazard_rejects_zero_survival():
    with pytest.raises(DistributionError):
        cumulative_hazard(DistributionSpec("uniform"), 1.0)
    assert cumulative_hazard(DistributionSpec("normal"), 40.0) > 800.0


def test_symmetry_flags():
    assert DistributionSpec("cauchy").is_symmetric
    assert parse_distribution("sym(exp)").is_symmetric
    assert not DistributionSpec(Family.EXPONENTIAL).is_symmetric
    assert not DistributionSpec("lognormal").is_symmetric


def test_scalar_in_scalar_out():
    assert isinstance(cdf(DistributionSpec("normal"), 0.0), float)
    assert cdf(DistributionSpec("normal"), [0.0, 1.0]).shape == (2,)
