import math

import numpy as np
import pytest

from esslab.distributions import DistributionSpec
from esslab.errors import PlanError
from esslab.experiments import (
    BANDS,
    chen_stein_experiment,
    cross_estimator_check,
    ess_experiment,
    estimate_gamma_prob,
    estimate_joint_gamma,
    estimate_mu,
    estimate_mu_from_hull,
    existence_experiment,
    fu_curve,
    fw_curve,
    gamma_experiment,
    hull_experiment,
    mu_from_gamma,
    mu_sweep,
    pure_existence_probability,
    s1_distribution,
    s2_distribution,
    s3_exploratory,
    small_support_distribution,
)
from esslab.grammar import parse_distribution
from esslab.runner import TrialPlan
from esslab.stats import empirical_pmf, poisson_fit
from esslab.streams import stream

from .conftest import within


def plan_for(text, n, trials, seed=2024, max_support=2):
    return TrialPlan(parse_distribution(text), n, trials, seed, max_support)


def test_closed_forms():
    assert pure_existence_probability(100) == pytest.approx(1.0 - 0.99**100)
    assert pure_existence_probability(1) == 1.0
    assert mu_from_gamma(3, 0.1) == pytest.approx(0.3)
    assert mu_from_gamma(2000, 1.0 / 2000**2) == pytest.approx(0.5, rel=1e-3)


def test_gamma_base_event():
    assert within(estimate_gamma_prob(plan_for("normal", 2, 20_000)), 0.25)


def test_mu_at_two_strategies_is_the_base_event():
    assert within(estimate_mu(plan_for("cauchy", 2, 5000)), 0.25)


def test_joint_event_is_included_in_gamma():
    events = gamma_experiment(plan_for("cauchy", 10, 5000))
    assert events.joint.mean <= events.gamma.mean + 4.0 * events.joint.combined_stderr(
        events.gamma
    )
    assert estimate_joint_gamma(plan_for("cauchy", 10, 5000)) == events.joint
    assert events.mu(10) == pytest.approx(45 * events.gamma.mean)


def test_joint_event_needs_three_points():
    with pytest.raises(PlanError):
        gamma_experiment(plan_for("uniform", 2, 10))


def test_v0_vanishes_with_probability_one_over_n():
    result = hull_experiment(plan_for("exp", 20, 20_000))
    assert within(result.p_v0_zero, 1.0 / 20)
    assert not result.symmetric


def test_symmetric_laws_give_four_times_v0():
    result = hull_experiment(plan_for("sym(exp)", 50, 4000))
    assert result.symmetric
    gap = abs(result.e_v.mean - 4.0 * result.e_v0.mean)
    assert gap <= 4.0 * result.e_v.combined_stderr(result.e_v0, 4.0)


def test_existence_probabilities():
    report = existence_experiment(plan_for("uniform", 10, 3000))
    assert within(report.p_pure, pure_existence_probability(10))
    assert report.pure_oracle == pytest.approx(pure_existence_probability(10))
    assert report.p_le2.mean >= max(report.p_pure.mean, report.p_two_point.mean)
    assert report.p_le3 is None


def test_existence_reuses_a_census_run():
    plan = plan_for("cauchy", 8, 300, max_support=3)
    ess = ess_experiment(plan)
    report = existence_experiment(plan, ess=ess)
    assert report.p_le3 is not None
    assert report.p_le3.mean >= report.p_le2.mean
    assert report.p_two_point == existence_experiment(plan).p_two_point


def test_s1_is_binomial():
    result = s1_distribution(plan_for("normal", 5, 20_000))
    assert within(result.mean, 1.0)
    assert result.fit.chi2_pvalue > BANDS.s1_pvalue_min


def test_s1_single_strategy():
    result = s1_distribution(plan_for("cauchy", 1, 200))
    assert result.mean.mean == 1.0
    assert result.fit.empirical_pmf == {1: 1.0}
    assert result.fit.l1_distance == 0.0


def test_s2_distribution():
    plan = plan_for("uniform", 8, 500)
    fit = s2_distribution(plan)
    assert sum(fit.empirical_pmf.values()) == pytest.approx(1.0, abs=1e-12)
    assert fit.lam == pytest.approx(estimate_mu(plan).mean)
    assert s2_distribution(plan, lam=0.5).lam == 0.5


def test_chen_stein_experiment_structure():
    plan = plan_for("cauchy", 20, 300)
    report = chen_stein_experiment(plan)
    events = gamma_experiment(TrialPlan(plan.spec, 20, 300, plan.master_seed + 1))
    assert report.lam == pytest.approx(mu_from_gamma(20, events.gamma.mean))
    assert report.bound <= 2.0 * (report.b1 + report.b2) + 1e-12
    assert report.bound_stderr >= 0.0
    assert 0.0 <= report.empirical_l1 <= 2.0


def test_chen_stein_experiment_with_pure_strategies():
    plan = plan_for("cauchy", 20, 300)
    ess = ess_experiment(plan)
    pairs_only = chen_stein_experiment(plan, ess=ess)
    report = chen_stein_experiment(plan, ess=ess, include_pure=True)
    assert report.lam == pytest.approx(pairs_only.lam + 1.0)
    assert report.b2 == pairs_only.b2
    assert report.b1 > pairs_only.b1
    small = empirical_pmf(ess.counts[:, 0] + ess.counts[:, 1])
    assert report.empirical_l1 == pytest.approx(poisson_fit(small, report.lam).l1_distance)


def test_small_support_distribution():
    plan = plan_for("cauchy", 10, 400)
    ess = ess_experiment(plan)
    law = small_support_distribution(plan, ess=ess)
    assert law.fit_limit.lam == 1.5
    assert law.fit.lam == pytest.approx(1.0 + ess.s2.mean)
    assert law.mean.mean == pytest.approx(ess.s1.mean + ess.s2.mean)
    assert sum(law.fit.empirical_pmf.values()) == pytest.approx(1.0, abs=1e-12)


def test_s3_exploratory_report():
    report = s3_exploratory(plan_for("cauchy", 6, 200))
    assert report.fit_s3.lam == pytest.approx(1.0 / 3.0)
    assert report.fit_total.lam == pytest.approx(11.0 / 6.0)
    assert report.p_exists_limit == pytest.approx(1.0 - math.exp(-11.0 / 6.0))
    assert 0.0 <= report.p_exists.mean <= 1.0


@pytest.mark.parametrize("text", ["uniform", "cauchy"])
def test_cross_estimator_identity(text):
    check = cross_estimator_check(plan_for(text, 30, 2000))
    assert check.agrees()
    assert check.eight_mu is not None


def test_cross_estimator_skips_v_for_one_sided_laws():
    check = cross_estimator_check(plan_for("exp", 12, 300))
    assert check.eight_mu is None and check.e_v is None


def test_uniform_mu_grows():
    sweep = mu_sweep(DistributionSpec("uniform"), [5, 60], 400, 7)
    assert sweep[5].mean < sweep[60].mean


def test_hull_estimator_of_mu():
    plan = plan_for("cauchy", 40, 500)
    mu = estimate_mu_from_hull(plan)
    assert mu.mean == pytest.approx(0.5 * hull_experiment(plan).e_v0.mean)
    sweep = mu_sweep(DistributionSpec("uniform"), [5, 200], 400, 7, estimator="hull")
    assert sweep[5].mean < sweep[200].mean


def test_threads_do_not_change_estimates():
    plan = plan_for("cauchy", 15, 300)
    assert estimate_mu(plan, threads=1) == estimate_mu(plan, threads=4)
    assert hull_experiment(plan, threads=1) == hull_experiment(plan, threads=3)


def test_census_plans_need_two_strategies():
    with pytest.raises(PlanError):
        estimate_mu(plan_for("uniform", 1, 10))


def test_fu_curve_quadrant_mass():
    curve = fu_curve(DistributionSpec("uniform"), 20_000, [0.0, 0.25, 0.5, 0.99, 1.0], stream(3))
    stderr = math.sqrt(0.25 * 0.75 / 20_000)
    assert abs(curve.below_one - 0.25) <= 4.0 * stderr
    assert np.all(np.diff(curve.cdf) >= 0.0)
    assert curve.cdf[-1] == 1.0
    assert curve.cdf[-2] <= curve.below_one
    assert curve.moment_check is None


def test_fu_curve_degenerate_grid():
    curve = fu_curve(DistributionSpec("cauchy"), 1000, [1.0], stream(4))
    assert curve.cdf[0] <= 1.0


def test_fu_curve_at_two_points_is_the_quadrant_mass():
    curve = fu_curve(DistributionSpec("normal"), 2000, [0.5], stream(5), n=2)
    assert curve.moment_check == curve.below_one


@pytest.mark.parametrize("pairs", [0, 999])
def test_fu_curve_needs_enough_pairs(pairs):
    with pytest.raises(PlanError):
        fu_curve(DistributionSpec("uniform"), pairs, [0.5], stream(6))


@pytest.mark.slow
def test_integral_matches_direct_gamma_estimate():
    n = 10
    curve = fu_curve(DistributionSpec("uniform"), 200_000, [0.5], stream(8), n=n)
    direct = estimate_gamma_prob(plan_for("uniform", n, 100_000), threads=4)
    assert curve.moment_check == pytest.approx(direct.mean, rel=BANDS.moment_check_relative)


def test_fw_curve_bounds_the_joint_event():
    n = 6
    curve = fw_curve(DistributionSpec("uniform"), 20_000, [0.25, 0.5, 1.0], stream(9), n=n)
    joint = estimate_joint_gamma(plan_for("uniform", n, 20_000))
    assert joint.mean <= curve.moment_check + 4.0 * joint.stderr
    assert curve.cdf[-1] == 1.0
    # both quadrant conditions share X1, so the mass below 1 is P(X1 min, Y1 > Y2, Z1 > Z3)
    stderr = math.sqrt(curve.below_one / 20_000)
    assert abs(curve.below_one - 1.0 / 12.0) <= 4.0 * stderr


def test_fw_curve_needs_three_points():
    with pytest.raises(PlanError):
        fw_curve(DistributionSpec("uniform"), 2000, [0.5], stream(9), n=2)
