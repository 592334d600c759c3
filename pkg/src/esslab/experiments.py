"""Monte Carlo estimators for the quantities of the random-game / random-polygon
correspondence: mu_n, the laws of S_1, S_2 and S_3, P(Gamma), P(Gamma and Gamma'),
Chen-Stein bounds, hull statistics, existence probabilities and the F_U / F_W curves.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import StrEnum
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import trapezoid

from .distributions import DistributionSpec, sample
from .errors import PlanError
from .game import census, count_pure_ess, generate_game
from .hull import DEFAULT_QUAD_POINTS, _gamma_columns, hull_stats, sample_points, u_values
from .runner import DEFAULT_CHUNK_SIZE, TrialPlan, run_trials
from .stats import (
    BinomialFit,
    ChenSteinReport,
    PoissonFit,
    SummaryStats,
    binomial_fit,
    chen_stein_report,
    empirical_pmf,
    poisson_fit,
    summarize,
)
from .streams import SEED_LIMIT

logger = logging.getLogger(__name__)

MIN_CURVE_PAIRS = 1000
INTEGRATION_POINTS = 4097
_CURVE_CHUNK = 4096
CONJECTURED_S3_MEAN = 1.0 / 3.0
CONJECTURED_TOTAL_MEAN = 11.0 / 6.0
SMALL_SUPPORT_LIMIT = 1.5


@dataclass(frozen=True)
class AcceptanceBands:
    """Engineering tolerances around the asymptotic statements checked at desk scale."""

    se_mu: tuple[float, float] = (0.42, 0.58)
    se_mu_threshold: tuple[float, float] = (0.35, 0.65)
    se_two_point_exists: tuple[float, float] = (0.34, 0.44)
    se_le2_exists: tuple[float, float] = (0.73, 0.83)
    se_poisson_l1: float = 0.15
    hull_v_eq_4_min: float = 0.9
    hull_e_v: tuple[float, float] = (4.0, 4.5)
    s1_pvalue_min: float = 0.001
    s1_l1_max: float = 0.01
    moment_check_relative: float = 0.15
    mu_log_ceiling: float = 3.0
    exact_stderrs: float = 3.0
    comparison_stderrs: float = 4.0


BANDS = AcceptanceBands()


def pure_existence_probability(n: int) -> float:
    """P(S_1 > 0) = 1 - (1 - 1/n)^n."""
    return -math.expm1(n * math.log1p(-1.0 / n)) if n > 1 else 1.0


def mu_from_gamma(n: int, p_gamma: float) -> float:
    return math.comb(n, 2) * p_gamma


def _derived_seed(master_seed: int, offset: int) -> int:
    return (master_seed + offset) % SEED_LIMIT


# kernels: one trial each, outputs as a flat tuple of numbers


def ess_kernel(rng: np.random.Generator, plan: TrialPlan):
    result = census(generate_game(plan.n, plan.spec, rng), plan.max_support)
    return result.count(1), result.count(2), result.count(3)


def pure_kernel(rng: np.random.Generator, plan: TrialPlan):
    entries = np.asarray(sample(plan.spec, rng, plan.n * plan.n)).reshape(plan.n, plan.n)
    return (count_pure_ess(entries),)


def gamma_kernel(rng: np.random.Generator, plan: TrialPlan):
    x = sample(plan.spec, rng, plan.n)
    y = sample(plan.spec, rng, plan.n)
    return (_gamma_columns(x, y, 0, 1),)


def joint_gamma_kernel(rng: np.random.Generator, plan: TrialPlan):
    x = sample(plan.spec, rng, plan.n)
    y = sample(plan.spec, rng, plan.n)
    z = sample(plan.spec, rng, plan.n)
    gamma = _gamma_columns(x, y, 0, 1)
    joint = gamma and _gamma_columns(x, z, 0, 2)
    return gamma, joint


def hull_kernel(rng: np.random.Generator, plan: TrialPlan):
    stats = hull_stats(sample_points(plan.n, plan.spec, rng))
    return stats.V, stats.V0


# ESS censuses


@dataclass(frozen=True)
class EssExperiment:
    plan: TrialPlan
    counts: np.ndarray

    @property
    def s1(self) -> SummaryStats:
        return summarize(self.counts[:, 0])

    @property
    def s2(self) -> SummaryStats:
        return summarize(self.counts[:, 1])

    @property
    def s3(self) -> SummaryStats:
        return summarize(self.counts[:, 2])

    def exists(self, max_size: int) -> SummaryStats:
        return summarize(self.counts[:, :max_size].sum(axis=1) > 0)


@dataclass(frozen=True)
class ExistenceReport:
    p_pure: SummaryStats
    p_two_point: SummaryStats
    p_le2: SummaryStats
    pure_oracle: float
    p_le3: SummaryStats | None = None


def _require_game(plan: TrialPlan):
    if plan.n < 2:
        raise PlanError(f"random games need n >= 2, got {plan.n}")


def ess_experiment(
    plan: TrialPlan, *, threads: int | None = None, chunk_size: int = DEFAULT_CHUNK_SIZE
) -> EssExperiment:
    _require_game(plan)
    if plan.max_support < 2:
        plan = replace(plan, max_support=2)
    counts = run_trials(plan, ess_kernel, 3, threads=threads, chunk_size=chunk_size)
    return EssExperiment(plan, counts.astype(np.int64))


def estimate_mu(plan: TrialPlan, *, threads: int | None = None) -> SummaryStats:
    return ess_experiment(plan, threads=threads).s2


def existence_experiment(
    plan: TrialPlan, *, threads: int | None = None, ess: EssExperiment | None = None
) -> ExistenceReport:
    ess = ess or ess_experiment(plan, threads=threads)
    return ExistenceReport(
        p_pure=summarize(ess.counts[:, 0] > 0),
        p_two_point=summarize(ess.counts[:, 1] > 0),
        p_le2=ess.exists(2),
        pure_oracle=pure_existence_probability(plan.n),
        p_le3=ess.exists(3) if ess.plan.max_support >= 3 else None,
    )


@dataclass(frozen=True)
class S1Distribution:
    fit: BinomialFit
    mean: SummaryStats


def s1_distribution(plan: TrialPlan, *, threads: int | None = None) -> S1Distribution:
    counts = run_trials(plan, pure_kernel, 1, threads=threads)[:, 0].astype(np.int64)
    return S1Distribution(binomial_fit(counts, plan.n, 1.0 / plan.n), summarize(counts))


def s2_distribution(
    plan: TrialPlan,
    lam: float | None = None,
    *,
    threads: int | None = None,
    ess: EssExperiment | None = None,
) -> PoissonFit:
    """Empirical law of S_2 against Poisson(lam), by default Poisson(mean S_2)."""
    ess = ess or ess_experiment(plan, threads=threads)
    counts = ess.counts[:, 1]
    return poisson_fit(empirical_pmf(counts), float(np.mean(counts)) if lam is None else lam)


@dataclass(frozen=True)
class SmallSupportLaw:
    fit: PoissonFit
    fit_limit: PoissonFit
    mean: SummaryStats


def small_support_distribution(
    plan: TrialPlan, *, threads: int | None = None, ess: EssExperiment | None = None
) -> SmallSupportLaw:
    """Law of S_1 + S_2 against Poisson(1 + mean S_2) and its heavy-tailed limit Poisson(3/2)."""
    ess = ess or ess_experiment(plan, threads=threads)
    counts = ess.counts[:, 0] + ess.counts[:, 1]
    pmf = empirical_pmf(counts)
    return SmallSupportLaw(
        fit=poisson_fit(pmf, 1.0 + float(np.mean(ess.counts[:, 1]))),
        fit_limit=poisson_fit(pmf, SMALL_SUPPORT_LIMIT),
        mean=summarize(counts),
    )


@dataclass(frozen=True)
class ExploratoryS3:
    mean_s3: SummaryStats
    fit_s3: PoissonFit
    fit_total: PoissonFit
    p_exists: SummaryStats
    p_exists_limit: float


def s3_exploratory(plan: TrialPlan, *, threads: int | None = None) -> ExploratoryS3:
    """Non-gating report on the conjectured S_3 -> Poisson(1/3) for heavy tails."""
    ess = ess_experiment(replace(plan, max_support=3), threads=threads)
    total = ess.counts.sum(axis=1)
    return ExploratoryS3(
        mean_s3=ess.s3,
        fit_s3=poisson_fit(empirical_pmf(ess.counts[:, 2]), CONJECTURED_S3_MEAN),
        fit_total=poisson_fit(empirical_pmf(total), CONJECTURED_TOTAL_MEAN),
        p_exists=summarize(total > 0),
        p_exists_limit=-math.expm1(-CONJECTURED_TOTAL_MEAN),
    )


# the event Gamma, O(n) per trial


def estimate_gamma_prob(plan: TrialPlan, *, threads: int | None = None) -> SummaryStats:
    if plan.n < 2:
        raise PlanError(f"the event Gamma needs n >= 2, got {plan.n}")
    return summarize(run_trials(plan, gamma_kernel, 1, threads=threads)[:, 0])


@dataclass(frozen=True)
class GammaExperiment:
    gamma: SummaryStats
    joint: SummaryStats

    def mu(self, n: int) -> float:
        return mu_from_gamma(n, self.gamma.mean)


def gamma_experiment(plan: TrialPlan, *, threads: int | None = None) -> GammaExperiment:
    if plan.n < 3:
        raise PlanError(f"the joint event needs n >= 3, got {plan.n}")
    outcomes = run_trials(plan, joint_gamma_kernel, 2, threads=threads)
    return GammaExperiment(summarize(outcomes[:, 0]), summarize(outcomes[:, 1]))


def estimate_joint_gamma(plan: TrialPlan, *, threads: int | None = None) -> SummaryStats:
    return gamma_experiment(plan, threads=threads).joint


def chen_stein_experiment(
    plan: TrialPlan,
    *,
    threads: int | None = None,
    ess: EssExperiment | None = None,
    include_pure: bool = False,
) -> ChenSteinReport:
    """Chen-Stein bound from O(n) event trials, against the S_2 law from full censuses.

    With ``include_pure`` the bound and the empirical law are those of S_1 + S_2.
    The event trials use a seed derived from the plan's, so the two inputs are
    independent.
    """
    events = gamma_experiment(
        replace(plan, master_seed=_derived_seed(plan.master_seed, 1)), threads=threads
    )
    ess = ess or ess_experiment(plan, threads=threads)
    counts = ess.counts[:, 1] + (ess.counts[:, 0] if include_pure else 0)
    return chen_stein_report(
        plan.n,
        events.gamma.mean,
        events.joint.mean,
        empirical_pmf(counts),
        p_gamma_stderr=events.gamma.stderr,
        p_joint_stderr=events.joint.stderr,
        include_pure=include_pure,
    )


# convex hulls


@dataclass(frozen=True)
class HullExperiment:
    e_v: SummaryStats
    e_v0: SummaryStats
    p_v0_zero: SummaryStats
    p_v_eq_4: SummaryStats
    symmetric: bool


def hull_experiment(plan: TrialPlan, *, threads: int | None = None) -> HullExperiment:
    """Hull vertex statistics. E(V) = 4 E(V0) and the collapse V -> 4 need a symmetric law."""
    if plan.n < 2:
        raise PlanError(f"a hull needs n >= 2, got {plan.n}")
    if not plan.spec.is_symmetric:
        logger.info("%s is not symmetric; E(V) = 4 E(V0) does not apply", plan.spec)
    outcomes = run_trials(plan, hull_kernel, 2, threads=threads)
    vertices, positive = outcomes[:, 0], outcomes[:, 1]
    return HullExperiment(
        e_v=summarize(vertices),
        e_v0=summarize(positive),
        p_v0_zero=summarize(positive == 0),
        p_v_eq_4=summarize(vertices == 4),
        symmetric=plan.spec.is_symmetric,
    )


@dataclass(frozen=True)
class CrossEstimatorCheck:
    two_mu: float
    e_v0: float
    combined_stderr: float
    eight_mu: float | None = None
    e_v: float | None = None
    combined_stderr_v: float | None = None

    def agrees(self, stderrs: float = BANDS.comparison_stderrs) -> bool:
        ok = abs(self.two_mu - self.e_v0) <= stderrs * self.combined_stderr
        if self.eight_mu is not None:
            ok = ok and abs(self.eight_mu - self.e_v) <= stderrs * self.combined_stderr_v
        return ok


def cross_estimator_check(plan: TrialPlan, *, threads: int | None = None) -> CrossEstimatorCheck:
    """2 mu_n = E(V0) always, and 8 mu_n = E(V) for symmetric laws, from independent runs."""
    mu = estimate_mu(plan, threads=threads)
    hull = hull_experiment(
        replace(plan, master_seed=_derived_seed(plan.master_seed, 1)), threads=threads
    )
    check = CrossEstimatorCheck(
        two_mu=2.0 * mu.mean,
        e_v0=hull.e_v0.mean,
        combined_stderr=hull.e_v0.combined_stderr(mu, 2.0),
    )
    if hull.symmetric:
        check = replace(
            check,
            eight_mu=8.0 * mu.mean,
            e_v=hull.e_v.mean,
            combined_stderr_v=hull.e_v.combined_stderr(mu, 8.0),
        )
    return check


class MuEstimator(StrEnum):
    CENSUS = "census"
    HULL = "hull"


def estimate_mu_from_hull(plan: TrialPlan, *, threads: int | None = None) -> SummaryStats:
    """mu_n as E(V0) / 2; O(n log n) per trial, so it reaches n far beyond a full census."""
    if plan.n < 2:
        raise PlanError(f"a hull needs n >= 2, got {plan.n}")
    return summarize(0.5 * run_trials(plan, hull_kernel, 2, threads=threads)[:, 1])


MU_ESTIMATORS = {MuEstimator.CENSUS: estimate_mu, MuEstimator.HULL: estimate_mu_from_hull}


def mu_sweep(
    spec: DistributionSpec,
    ns: Sequence[int],
    trials: int,
    master_seed: int,
    *,
    threads: int | None = None,
    estimator: MuEstimator = MuEstimator.CENSUS,
) -> dict[int, SummaryStats]:
    estimate = MU_ESTIMATORS[MuEstimator(estimator)]
    return {n: estimate(TrialPlan(spec, n, trials, master_seed), threads=threads) for n in ns}


# F_U and F_W curves


@dataclass(frozen=True)
class CurveResult:
    grid: np.ndarray
    cdf: np.ndarray
    below_one: float
    samples: int
    moment_check: float | None = None


def _empirical_cdf(sorted_values: np.ndarray, total: int, grid: np.ndarray) -> np.ndarray:
    below = np.searchsorted(sorted_values, grid, side="right") / total
    return np.where(grid >= 1.0, 1.0, below)


def _moment_integral(sorted_values: np.ndarray, total: int, exponent: int) -> float:
    """exponent * int_0^1 (1 - u)^(exponent - 1) F(u^-) du, trapezoid on a cubic grid.

    With exponent 0 the integral degenerates to the mass below 1.
    """
    below_one = sorted_values.size / total
    if exponent == 0:
        return below_one
    grid = np.linspace(0.0, 1.0, INTEGRATION_POINTS) ** 3
    curve = np.searchsorted(sorted_values, grid, side="right") / total
    curve[-1] = below_one
    weight = exponent * (1.0 - grid) ** (exponent - 1)
    return float(trapezoid(weight * curve, grid))


def _check_curve_args(count: int, grid: ArrayLike) -> np.ndarray:
    if count < MIN_CURVE_PAIRS:
        raise PlanError(f"curves need at least {MIN_CURVE_PAIRS} draws, got {count}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise PlanError("grid must be a nonempty 1-d sequence of u values")
    return grid


def _u_in_chunks(p1: np.ndarray, p2: np.ndarray, spec, quad_points) -> np.ndarray:
    return np.concatenate([
        u_values(p1[start : start + _CURVE_CHUNK], p2[start : start + _CURVE_CHUNK], spec,
                 quad_points)
        for start in range(0, p1.shape[0], _CURVE_CHUNK)
    ])


def fu_curve(
    spec: DistributionSpec,
    pairs: int,
    grid: ArrayLike,
    rng: np.random.Generator,
    *,
    n: int | None = None,
    quad_points: int = DEFAULT_QUAD_POINTS,
) -> CurveResult:
    """Empirical F_U on ``grid``; with ``n`` also (n-2) int (1-u)^(n-3) F_U(u) du = P(Gamma)."""
    grid = _check_curve_args(pairs, grid)
    draws = np.asarray(sample(spec, rng, (pairs, 4)))
    quadrant = (draws[:, 0] < draws[:, 2]) & (draws[:, 1] > draws[:, 3])
    u = _u_in_chunks(draws[:, 0:2], draws[:, 2:4], spec, quad_points)
    inside = np.sort(np.minimum(u[quadrant], np.nextafter(1.0, 0.0)))
    check = None
    if n is not None:
        if n < 2:
            raise PlanError(f"the event Gamma needs n >= 2, got {n}")
        check = _moment_integral(inside, pairs, n - 2)
    return CurveResult(grid, _empirical_cdf(inside, pairs, grid), inside.size / pairs, pairs, check)


def fw_curve(
    spec: DistributionSpec,
    triples: int,
    grid: ArrayLike,
    rng: np.random.Generator,
    *,
    n: int | None = None,
    quad_points: int = DEFAULT_QUAD_POINTS,
) -> CurveResult:
    """Empirical F_W for W = max(U, U') on the shared-column configuration.

    With ``n`` also returns (n-3) int (1-u)^(n-4) F_W(u) du, an upper bound on
    P(Gamma and Gamma').
    """
    grid = _check_curve_args(triples, grid)
    # columns: X1, X2, X3, Y1, Y2, Z1, Z3
    draws = np.asarray(sample(spec, rng, (triples, 7)))
    x1, x2, x3, y1, y2, z1, z3 = draws.T
    u = _u_in_chunks(np.column_stack([x1, y1]), np.column_stack([x2, y2]), spec, quad_points)
    u_prime = _u_in_chunks(np.column_stack([x1, z1]), np.column_stack([x3, z3]), spec,
                           quad_points)
    both = (x1 < x2) & (y1 > y2) & (x1 < x3) & (z1 > z3)
    w = np.maximum(u, u_prime)
    inside = np.sort(np.minimum(w[both], np.nextafter(1.0, 0.0)))
    check = None
    if n is not None:
        if n < 3:
            raise PlanError(f"the joint event needs n >= 3, got {n}")
        check = _moment_integral(inside, triples, n - 3)
    return CurveResult(grid, _empirical_cdf(inside, triples, grid), inside.size / triples,
                       triples, check)
