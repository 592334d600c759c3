"""Command-line front end: one command per experiment, one result row per (dist, n) cell."""

import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

import click
import numpy as np

from .distributions import DistributionSpec
from .errors import DistributionError, EssLabError, GrammarError, PlanError
from .experiments import (
    MU_ESTIMATORS,
    MuEstimator,
    chen_stein_experiment,
    ess_experiment,
    estimate_gamma_prob,
    existence_experiment,
    fu_curve,
    gamma_experiment,
    hull_experiment,
    mu_from_gamma,
)
from .game import MAX_CENSUS_SUPPORT
from .grammar import parse_distribution
from .hull import DEFAULT_QUAD_POINTS
from .runner import TrialPlan
from .serializers import SCHEMAS, PlotRecord, emit_plot_data, plot_records, render, write_results
from .stats import Z_95
from .streams import check_seed, stream
from .utils import THREADS_ENV

logger = logging.getLogger(__name__)

COMMANDS = ("ess", "hull", "gamma", "chenstein", "fu", "exist", "sweep")
FORMATS = ("csv", "json")
MIN_N = {"chenstein": 3}


class RuntimeFailure(click.ClickException):
    exit_code = 3


class DistributionParam(click.ParamType):
    name = "dist"

    def convert(self, value, param, ctx):
        if isinstance(value, DistributionSpec):
            return value
        try:
            return parse_distribution(value)
        except GrammarError as exc:
            self.fail(f"{exc} (offending token `{exc.token}`)", param, ctx)
        except DistributionError as exc:
            self.fail(str(exc), param, ctx)


class IntListParam(click.ParamType):
    name = "n-list"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        try:
            numbers = tuple(int(item) for item in str(value).split(","))
        except ValueError:
            self.fail(f"`{value}` is not a comma-separated list of integers", param, ctx)
        if any(number < 1 for number in numbers):
            self.fail(f"every n must be positive, got `{value}`", param, ctx)
        return numbers


@dataclass(frozen=True)
class RunConfig:
    command: str
    dists: tuple[DistributionSpec, ...]
    ns: tuple[int, ...]
    trials: int
    seed: int
    max_support: int = 2
    out: Path | None = None
    fmt: str = "csv"
    threads: int = 1
    plot_out: Path | None = None
    pairs: int = 100_000
    grid_points: int = 101
    quad_points: int = DEFAULT_QUAD_POINTS
    include_pure: bool = False
    estimator: str = MuEstimator.CENSUS.value

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise PlanError(f"unknown command `{self.command}`")
        if not self.dists:
            raise PlanError("at least one --dist is required")
        if not self.ns:
            raise PlanError("at least one --n is required")
        smallest = MIN_N.get(self.command, 2)
        if min(self.ns) < smallest:
            raise PlanError(f"`{self.command}` needs n >= {smallest}, got {min(self.ns)}")
        if self.trials < 1:
            raise PlanError(f"trials must be at least 1, got {self.trials}")
        check_seed(self.seed)
        if not 1 <= self.max_support <= MAX_CENSUS_SUPPORT:
            raise PlanError(f"max-support must be in 1..{MAX_CENSUS_SUPPORT}")
        if self.fmt not in FORMATS:
            raise PlanError(f"unknown format `{self.fmt}`")
        if self.threads < 1:
            raise PlanError(f"threads must be at least 1, got {self.threads}")
        if self.grid_points < 1:
            raise PlanError(f"grid-points must be positive, got {self.grid_points}")
        if self.estimator not in set(MuEstimator):
            raise PlanError(f"unknown estimator `{self.estimator}`")

    @property
    def columns(self) -> tuple[str, ...]:
        if self.command == "ess" and self.max_support >= 3:
            return SCHEMAS["ess3"]
        return SCHEMAS[self.command]

    def as_meta(self) -> dict[str, Any]:
        meta = asdict(self)
        meta["dists"] = [spec.label for spec in self.dists]
        meta["ns"] = list(self.ns)
        return {
            key: str(value) if isinstance(value, Path) else value for key, value in meta.items()
        }

    def plan(self, spec: DistributionSpec, n: int) -> TrialPlan:
        return TrialPlan(spec, n, self.trials, self.seed, self.max_support)


@dataclass
class CellResult:
    rows: list[dict[str, Any]]
    summary: str
    plot: list[PlotRecord] = field(default_factory=list)


def _base(config: RunConfig, spec: DistributionSpec, n: int) -> dict[str, Any]:
    return {"seed": config.seed, "dist": spec.label, "n": n, "trials": config.trials}


def _ess_cell(config: RunConfig, spec: DistributionSpec, n: int) -> CellResult:
    ess = ess_experiment(config.plan(spec, n), threads=config.threads)
    exists = ess.exists(2)
    row = _base(config, spec, n) | {
        "mean_S1": ess.s1.mean,
        "mean_S2": ess.s2.mean,
        "stderr_S2": ess.s2.stderr,
        "P_exist_le2": exists.mean,
    }
    statistics = {"mean_S1": ess.s1, "mean_S2": ess.s2, "P_exist_le2": exists}
    if config.max_support >= 3:
        row |= {"mean_S3": ess.s3.mean, "P_exist_le3": ess.exists(3).mean}
        statistics |= {"mean_S3": ess.s3, "P_exist_le3": ess.exists(3)}
    summary = f"mu={ess.s2.mean:.4g} +/- {ess.s2.stderr:.2g} P(exist<=2)={exists.mean:.4g}"
    return CellResult([row], summary, plot_records(n, statistics))


def _hull_cell(config: RunConfig, spec: DistributionSpec, n: int) -> CellResult:
    hull = hull_experiment(config.plan(spec, n), threads=config.threads)
    row = _base(config, spec, n) | {
        "E_V": hull.e_v.mean,
        "stderr_V": hull.e_v.stderr,
        "E_V0": hull.e_v0.mean,
        "stderr_V0": hull.e_v0.stderr,
        "P_V0_zero": hull.p_v0_zero.mean,
        "stderr_V0_zero": hull.p_v0_zero.stderr,
        "P_V_eq_4": hull.p_v_eq_4.mean,
        "stderr_V_eq_4": hull.p_v_eq_4.stderr,
    }
    statistics = {
        "E_V": hull.e_v,
        "E_V0": hull.e_v0,
        "P_V0_zero": hull.p_v0_zero,
        "P_V_eq_4": hull.p_v_eq_4,
    }
    summary = f"E(V)={hull.e_v.mean:.4g} E(V0)={hull.e_v0.mean:.4g} P(V=4)={hull.p_v_eq_4.mean:.4g}"
    return CellResult([row], summary, plot_records(n, statistics))


def _gamma_cell(config: RunConfig, spec: DistributionSpec, n: int) -> CellResult:
    plan = config.plan(spec, n)
    if n >= 3:
        events = gamma_experiment(plan, threads=config.threads)
        gamma, joint = events.gamma, events.joint
    else:
        gamma, joint = estimate_gamma_prob(plan, threads=config.threads), None
    mu = mu_from_gamma(n, gamma.mean)
    row = _base(config, spec, n) | {
        "P_gamma": gamma.mean,
        "stderr_gamma": gamma.stderr,
        "P_joint": joint.mean if joint is not None else None,
        "stderr_joint": joint.stderr if joint is not None else None,
        "mu_from_gamma": mu,
    }
    statistics = {"P_gamma": gamma} | ({"P_joint": joint} if joint is not None else {})
    return CellResult([row], f"P(gamma)={gamma.mean:.4g} mu={mu:.4g}", plot_records(n, statistics))


def _chenstein_cell(config: RunConfig, spec: DistributionSpec, n: int) -> CellResult:
    report = chen_stein_experiment(
        config.plan(spec, n), threads=config.threads, include_pure=config.include_pure
    )
    row = _base(config, spec, n) | {
        "lambda": report.lam,
        "b1": report.b1,
        "b2": report.b2,
        "bound": report.bound,
        "bound_stderr": report.bound_stderr,
        "empirical_l1": report.empirical_l1,
    }
    spread = Z_95 * report.bound_stderr
    plot = [
        PlotRecord(n, "bound", report.bound, report.bound - spread, report.bound + spread),
        PlotRecord(n, "empirical_l1", report.empirical_l1, report.empirical_l1,
                   report.empirical_l1),
    ]
    summary = f"lambda={report.lam:.4g} l1={report.empirical_l1:.4g} bound={report.bound:.4g}"
    return CellResult([row], summary, plot)


def _fu_cell(config: RunConfig, spec: DistributionSpec, n: int) -> CellResult:
    grid = np.linspace(0.0, 1.0, config.grid_points)
    curve = fu_curve(
        spec, config.pairs, grid, stream(config.seed), n=n, quad_points=config.quad_points
    )
    rows = [
        {
            "seed": config.seed,
            "dist": spec.label,
            "n": n,
            "pairs": config.pairs,
            "u": float(u),
            "F_U": float(value),
            "lemma5_check": curve.moment_check,
        }
        for u, value in zip(curve.grid, curve.cdf)
    ]
    plot = [
        PlotRecord(n, "F_U_below_one", curve.below_one, curve.below_one, curve.below_one),
        PlotRecord(n, "moment_check", curve.moment_check, curve.moment_check,
                   curve.moment_check),
    ]
    summary = f"F_U(1-)={curve.below_one:.4g} integral={curve.moment_check:.4g}"
    return CellResult(rows, summary, plot)


def _exist_cell(config: RunConfig, spec: DistributionSpec, n: int) -> CellResult:
    report = existence_experiment(config.plan(spec, n), threads=config.threads)
    row = _base(config, spec, n) | {
        "P_pure": report.p_pure.mean,
        "stderr_pure": report.p_pure.stderr,
        "P_two_point": report.p_two_point.mean,
        "stderr_two_point": report.p_two_point.stderr,
        "P_le2": report.p_le2.mean,
        "stderr_le2": report.p_le2.stderr,
    }
    statistics = {
        "P_pure": report.p_pure,
        "P_two_point": report.p_two_point,
        "P_le2": report.p_le2,
    }
    summary = (
        f"P(S1>0)={report.p_pure.mean:.4g} (exact {report.pure_oracle:.4g}) "
        f"P(S2>0)={report.p_two_point.mean:.4g} P(S1+S2>0)={report.p_le2.mean:.4g}"
    )
    return CellResult([row], summary, plot_records(n, statistics))


def _sweep_cell(config: RunConfig, spec: DistributionSpec, n: int) -> CellResult:
    estimate = MU_ESTIMATORS[MuEstimator(config.estimator)]
    mu = estimate(config.plan(spec, n), threads=config.threads)
    row = _base(config, spec, n) | {
        "mu": mu.mean,
        "stderr_mu": mu.stderr,
        "ci_lo": mu.ci_lo,
        "ci_hi": mu.ci_hi,
    }
    return CellResult([row], f"mu={mu.mean:.4g} +/- {mu.stderr:.2g}", plot_records(n, {"mu": mu}))


CELLS: dict[str, Callable[[RunConfig, DistributionSpec, int], CellResult]] = {
    "ess": _ess_cell,
    "hull": _hull_cell,
    "gamma": _gamma_cell,
    "chenstein": _chenstein_cell,
    "fu": _fu_cell,
    "exist": _exist_cell,
    "sweep": _sweep_cell,
}


def run(config: RunConfig) -> tuple[list[dict[str, Any]], list[PlotRecord]]:
    """Run every (dist, n) cell of ``config``, echoing one summary line per cell to stderr."""
    cell = CELLS[config.command]
    rows: list[dict[str, Any]] = []
    plot: list[PlotRecord] = []
    for spec in config.dists:
        for n in config.ns:
            result = cell(config, spec, n)
            rows.extend(result.rows)
            plot.extend(result.plot)
            click.echo(f"{config.command} dist={spec.label} n={n}: {result.summary}", err=True)
    return rows, plot


def execute(config: RunConfig):
    try:
        rows, plot = run(config)
        if config.out is None:
            click.echo(render(rows, config.columns, config.fmt), nl=False)
        else:
            write_results(rows, config.columns, config.fmt, config.out, config.as_meta())
        if config.plot_out is not None:
            with config.plot_out.open("w", encoding="utf-8", newline="") as handle:
                emit_plot_data(plot, handle)
    except click.ClickException:
        raise
    except EssLabError as exc:
        raise RuntimeFailure(str(exc)) from exc
    except Exception as exc:
        logger.debug("run failed", exc_info=True)
        raise RuntimeFailure(f"{type(exc).__name__}: {exc}") from exc


def _common_options(func):
    options = [
        click.option("--dist", "dists", type=DistributionParam(), multiple=True, required=True,
                     help="Payoff law, e.g. cauchy, weibull:0.5 or sym(exp). Repeatable."),
        click.option("--n", "ns", type=IntListParam(), required=True,
                     help="Number of strategies or points; comma-separated list allowed."),
        click.option("--trials", type=int, default=1000, show_default=True,
                     help="Monte Carlo trials per cell."),
        click.option("--seed", type=int, required=True, help="Master seed (64-bit unsigned)."),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
                     help="Results file; stdout when omitted."),
        click.option("--format", "fmt", type=click.Choice(FORMATS), default="csv",
                     show_default=True),
        click.option("--threads", type=int, default=1, envvar=THREADS_ENV, show_default=True,
                     help="Worker threads; results do not depend on it."),
        click.option("--plot-out", type=click.Path(dir_okay=False, path_type=Path), default=None,
                     help="Also write long-format plot data here."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _build_config(command: str, **kwargs) -> RunConfig:
    try:
        return RunConfig(command=command, **kwargs)
    except (EssLabError, TypeError) as exc:
        raise click.UsageError(str(exc)) from exc


@click.group()
@click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG logging.")
def main(verbose: int):
    """Monte Carlo laboratory for ESS counts of random games and random polygon hulls."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


@main.command()
@_common_options
@click.option("--max-support", type=int, default=2, show_default=True,
              help="Largest ESS support size to census (1..3).")
def ess(**kwargs):
    """Census of pure, two-point and (optionally) three-point ESS."""
    execute(_build_config("ess", **kwargs))


@main.command()
@_common_options
def hull(**kwargs):
    """Hull vertex counts V and V0."""
    execute(_build_config("hull", **kwargs))


@main.command()
@_common_options
def gamma(**kwargs):
    """P(Gamma) and P(Gamma and Gamma') from O(n) trials."""
    execute(_build_config("gamma", **kwargs))


@main.command()
@_common_options
@click.option("--include-pure", is_flag=True, default=False,
              help="Bound the law of S_1 + S_2 instead of S_2.")
def chenstein(**kwargs):
    """Chen-Stein bound against the empirical S_2 law."""
    execute(_build_config("chenstein", **kwargs))


@main.command()
@_common_options
@click.option("--pairs", type=int, default=100_000, show_default=True,
              help="Number of (P1, P2) pairs.")
@click.option("--grid-points", type=int, default=101, show_default=True,
              help="Evenly spaced u values on [0, 1].")
@click.option("--quad-points", type=int, default=DEFAULT_QUAD_POINTS, show_default=True)
def fu(**kwargs):
    """Empirical CDF of U with the integral check against P(Gamma)."""
    execute(_build_config("fu", **kwargs))


@main.command()
@_common_options
def exist(**kwargs):
    """Existence probabilities of pure and two-point ESS."""
    execute(_build_config("exist", **kwargs))


@main.command()
@_common_options
@click.option("--estimator", type=click.Choice([e.value for e in MuEstimator]),
              default=MuEstimator.CENSUS.value, show_default=True,
              help="Full ESS censuses, or E(V0) / 2 from hulls for large n.")
def sweep(**kwargs):
    """mu_n over a list of n."""
    execute(_build_config("sweep", **kwargs))
