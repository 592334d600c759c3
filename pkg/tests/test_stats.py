import math

import numpy as np
import pytest
from scipy import stats as scipy_stats

from esslab.errors import PlanError
from esslab.stats import (
    Z_95,
    binomial_fit,
    chen_stein_report,
    empirical_pmf,
    poisson_fit,
    poisson_pmf,
    summarize,
)


def test_summarize():
    result = summarize([1.0, 2.0, 3.0, 4.0])
    assert result.count == 4
    assert result.mean == 2.5
    assert result.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)
    assert result.ci_lo == pytest.approx(2.5 - Z_95 * result.stderr)
    assert result.ci_lo <= result.mean <= result.ci_hi


def test_summarize_proportions_and_single_trials():
    result = summarize(np.array([True, False, False, True]))
    assert result.mean == 0.5
    single = summarize([3.0])
    assert single.stderr == 0.0 and single.ci_lo == single.ci_hi == 3.0


def test_summarize_rejects_empty():
    with pytest.raises(PlanError):
        summarize([])


def test_combined_stderr():
    a = summarize([0.0, 1.0])
    b = summarize([0.0, 2.0])
    assert a.combined_stderr(b, 2.0) == pytest.approx(math.hypot(a.stderr, 2.0 * b.stderr))


def test_empirical_pmf():
    assert empirical_pmf([0, 0, 1, 3]) == {0: 0.5, 1: 0.25, 3: 0.25}


def test_poisson_pmf_matches_scipy():
    k = np.arange(30)
    np.testing.assert_allclose(poisson_pmf(k, 2.5), scipy_stats.poisson.pmf(k, 2.5), rtol=1e-12)
    assert poisson_pmf(0, 0.0) == 1.0


def test_exact_poisson_has_zero_distance():
    pmf = {k: float(p) for k, p in enumerate(poisson_pmf(np.arange(40), 1.0))}
    assert poisson_fit(pmf, 1.0).l1_distance == pytest.approx(0.0, abs=1e-12)


def test_point_mass_at_zero():
    assert poisson_fit({0: 1.0}, 0.0).l1_distance == 0.0
    assert poisson_fit({0: 1.0}, 1.0).l1_distance == pytest.approx(2.0 * (1.0 - math.exp(-1.0)))


def test_unobserved_mass_is_counted():
    # all mass far out in the tail: distance is the full 2
    assert poisson_fit({50: 1.0}, 0.5).l1_distance == pytest.approx(2.0)


@pytest.mark.parametrize("lam", [-0.1, float("nan"), float("inf")])
def test_poisson_fit_rejects_bad_lambda(lam):
    with pytest.raises(PlanError):
        poisson_fit({0: 1.0}, lam)


def test_poisson_fit_rejects_unnormalized_pmf():
    with pytest.raises(PlanError):
        poisson_fit({0: 0.5, 1: 0.4}, 1.0)


def test_binomial_fit_on_exact_frequencies():
    n, p, size = 5, 0.2, 100_000
    expected = scipy_stats.binom.pmf(np.arange(n + 1), n, p) * size
    counts = np.repeat(np.arange(n + 1), np.round(expected).astype(int))
    fit = binomial_fit(counts, n, p)
    assert fit.l1_distance < 1e-3
    assert fit.chi2_pvalue > 0.99


def test_binomial_fit_detects_a_wrong_law():
    counts = np.ones(1000, dtype=int)
    fit = binomial_fit(counts, 5, 0.2)
    assert fit.chi2_pvalue < 1e-6
    assert fit.l1_distance > 1.0


def test_chen_stein_zero_probability():
    report = chen_stein_report(50, 0.0, 0.0, {0: 1.0})
    assert report.lam == 0.0
    assert report.bound == 0.0
    assert report.empirical_l1 == 0.0


def test_chen_stein_three_strategies():
    p, joint = 0.1, 0.01
    report = chen_stein_report(3, p, joint, {0: 0.7, 1: 0.3})
    assert report.lam == pytest.approx(3 * p)
    assert report.b1 == pytest.approx(9 * p**2)
    assert report.b2 == pytest.approx(6 * joint)
    assert report.bound <= 2.0 * (report.b1 + report.b2) + 1e-12
    factor = (1.0 - math.exp(-report.lam)) / report.lam
    assert report.bound == pytest.approx(2.0 * (report.b1 + report.b2) * factor)


def test_chen_stein_error_propagation():
    bare = chen_stein_report(100, 1e-4, 1e-6, {0: 1.0})
    assert bare.bound_stderr == 0.0
    noisy = chen_stein_report(100, 1e-4, 1e-6, {0: 1.0}, p_gamma_stderr=1e-5,
                              p_joint_stderr=1e-7)
    assert noisy.bound_stderr > 0.0
    assert noisy.bound == bare.bound


@pytest.mark.parametrize("p_gamma, p_joint", [(-0.1, 0.0), (0.1, 1.5)])
def test_chen_stein_rejects_bad_probabilities(p_gamma, p_joint):
    with pytest.raises(PlanError):
        chen_stein_report(10, p_gamma, p_joint, {0: 1.0})


def test_chen_stein_with_pure_strategies():
    n, p, joint = 3, 0.1, 0.01
    pairs_only = chen_stein_report(n, p, joint, {1: 0.6, 2: 0.4})
    report = chen_stein_report(n, p, joint, {1: 0.6, 2: 0.4}, include_pure=True)
    assert report.lam == pytest.approx(1.0 + 3 * p)
    assert report.b1 == pytest.approx(pairs_only.b1 + 1.0 / n + 2 * (n - 1) * p)
    assert report.b2 == pairs_only.b2
    factor = (1.0 - math.exp(-report.lam)) / report.lam
    assert report.bound == pytest.approx(2.0 * (report.b1 + report.b2) * factor)


def test_pure_strategies_alone_leave_a_one_over_n_bound():
    # no pair events: S_1 counts n weakly dependent indicators of mean 1/n
    n = 40
    report = chen_stein_report(n, 0.0, 0.0, {0: 0.4, 1: 0.6}, include_pure=True)
    assert report.lam == 1.0
    assert report.b1 == pytest.approx(1.0 / n)
    assert report.bound == pytest.approx(2.0 / n * (1.0 - math.exp(-1.0)))
