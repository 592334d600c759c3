"""Monte Carlo aggregates: means with confidence intervals, Poisson and binomial
fits in the l1 norm, and the Chen-Stein bound for pair indicators.

Distances are plain l1 sums over the support (twice the total variation).
"""

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from numpy.typing import ArrayLike
from scipy import special, stats

from .errors import PlanError

Z_95 = 1.959963984540054
POISSON_TAIL = 1e-12
PMF_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SummaryStats:
    count: int
    mean: float
    stderr: float
    ci_lo: float
    ci_hi: float

    def combined_stderr(self, other: "SummaryStats", scale: float = 1.0) -> float:
        return math.hypot(self.stderr, scale * other.stderr)


@dataclass(frozen=True)
class PoissonFit:
    lam: float
    l1_distance: float
    empirical_pmf: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class BinomialFit:
    n: int
    p: float
    l1_distance: float
    chi2_statistic: float
    chi2_pvalue: float
    empirical_pmf: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ChenSteinReport:
    lam: float
    b1: float
    b2: float
    bound: float
    empirical_l1: float
    bound_stderr: float = 0.0


def summarize(values: ArrayLike) -> SummaryStats:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise PlanError("cannot summarize an empty set of trials")
    count = values.size
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(count)) if count > 1 else 0.0
    return SummaryStats(count, mean, stderr, mean - Z_95 * stderr, mean + Z_95 * stderr)


def empirical_pmf(counts: ArrayLike) -> dict[int, float]:
    counts = np.asarray(counts, dtype=np.int64)
    if counts.size == 0:
        raise PlanError("cannot build a pmf from zero trials")
    values, frequency = np.unique(counts, return_counts=True)
    return {int(k): float(f) / counts.size for k, f in zip(values, frequency)}


def _check_pmf(pmf: Mapping[int, float]):
    total = math.fsum(pmf.values())
    if abs(total - 1.0) > PMF_TOLERANCE or any(p < 0.0 for p in pmf.values()):
        raise PlanError(f"empirical pmf must be a probability vector, sums to {total!r}")


def poisson_pmf(k: ArrayLike, lam: float) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return np.exp(special.xlogy(k, lam) - lam - special.gammaln(k + 1.0))


def poisson_fit(pmf: Mapping[int, float], lam: float) -> PoissonFit:
    if lam < 0.0 or not math.isfinite(lam):
        raise PlanError(f"Poisson parameter must be nonnegative, got {lam}")
    _check_pmf(pmf)
    last = max(max(pmf), 0)
    while lam > 0.0 and special.pdtrc(last, lam) >= POISSON_TAIL:
        last += 1
    support = np.arange(last + 1)
    expected = poisson_pmf(support, lam)
    observed = np.array([pmf.get(int(k), 0.0) for k in support])
    residual = float(special.pdtrc(last, lam)) if lam > 0.0 else 0.0
    distance = math.fsum(np.abs(observed - expected)) + residual
    return PoissonFit(lam, min(distance, 2.0), dict(pmf))


def binomial_fit(counts: ArrayLike, n: int, p: float, min_expected: float = 5.0) -> BinomialFit:
    """Compare observed counts with Binomial(n, p) by l1 distance and chi-square.

    Chi-square bins with expected count below ``min_expected`` are pooled into the
    upper tail bin.
    """
    counts = np.asarray(counts, dtype=np.int64)
    pmf = empirical_pmf(counts)
    support = np.arange(n + 1)
    expected_pmf = stats.binom.pmf(support, n, p)
    observed_pmf = np.array([pmf.get(int(k), 0.0) for k in support])
    outside = math.fsum(f for k, f in pmf.items() if not 0 <= k <= n)
    distance = math.fsum(np.abs(observed_pmf - expected_pmf)) + outside

    observed = observed_pmf * counts.size
    expected = expected_pmf * counts.size
    bins_obs, bins_exp = [], []
    pending_obs = pending_exp = 0.0
    for obs, exp in zip(observed, expected):
        pending_obs += obs
        pending_exp += exp
        if pending_exp >= min_expected:
            bins_obs.append(pending_obs)
            bins_exp.append(pending_exp)
            pending_obs = pending_exp = 0.0
    if bins_exp:
        bins_obs[-1] += pending_obs
        bins_exp[-1] += pending_exp
    if len(bins_exp) < 2:
        statistic, pvalue = 0.0, 1.0
    else:
        result = stats.chisquare(bins_obs, bins_exp)
        statistic, pvalue = float(result.statistic), float(result.pvalue)
    return BinomialFit(n, p, distance, statistic, pvalue, pmf)


def chen_stein_report(
    n: int,
    p_gamma: float,
    p_joint: float,
    empirical: Mapping[int, float],
    *,
    p_gamma_stderr: float = 0.0,
    p_joint_stderr: float = 0.0,
    include_pure: bool = False,
) -> ChenSteinReport:
    """Bound for S_2 = sum of D_ij over m = C(n, 2) pairs.

    Pairs sharing an index (the pair itself included) form the neighborhood of
    dependence, so |B_a| = 2n - 3 and |B_a minus {a}| = 2n - 4. With
    ``include_pure`` the sum also holds the n pure indicators C_i, P(C_i) = 1/n,
    each neighboring the pairs that contain i; C_i D_ij = 0 leaves b2 unchanged.
    """
    for name, value in (("p_gamma", p_gamma), ("p_joint", p_joint)):
        if not 0.0 <= value <= 1.0:
            raise PlanError(f"{name} must be a probability, got {value}")
    pairs = n * (n - 1) / 2
    lam = pairs * p_gamma
    b1 = pairs * (2 * n - 3) * p_gamma**2
    b2 = pairs * (2 * n - 4) * p_joint
    slope_gamma = pairs * (2 * n - 3) * 2.0 * p_gamma
    if include_pure:
        lam += 1.0
        b1 += 1.0 / n + 2.0 * (n - 1) * p_gamma
        slope_gamma += 2.0 * (n - 1)
    factor = (1.0 - math.exp(-lam)) / lam if lam > 0.0 else 0.0
    bound = 2.0 * (b1 + b2) * factor

    # delta method on bound(p_gamma, p_joint); the factor's own slope is neglected
    d_gamma = 2.0 * slope_gamma * factor
    d_joint = 2.0 * pairs * (2 * n - 4) * factor
    bound_stderr = math.hypot(d_gamma * p_gamma_stderr, d_joint * p_joint_stderr)

    fit = poisson_fit(empirical, lam)
    return ChenSteinReport(lam, b1, b2, bound, fit.l1_distance, bound_stderr)
