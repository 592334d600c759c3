from .distributions import DistributionSpec, Family, TailClass
from .errors import (
    CensusInvariantError,
    DistributionError,
    EssLabError,
    GameError,
    GeometryError,
    GrammarError,
    PlanError,
)
from .game import EssCensus, EssKind, EssRecord, GameMatrix, MixedStrategy, census, generate_game
from .grammar import parse_distribution
from .hull import HullStats, PointSample, hull_stats, u_statistic
from .registry import FamilyRegistry, registry
from .runner import TrialPlan, run_trials, run_trials_async

__all__ = [
    "CensusInvariantError",
    "DistributionError",
    "DistributionSpec",
    "EssCensus",
    "EssKind",
    "EssLabError",
    "EssRecord",
    "Family",
    "FamilyRegistry",
    "GameError",
    "GameMatrix",
    "GeometryError",
    "GrammarError",
    "HullStats",
    "MixedStrategy",
    "PlanError",
    "PointSample",
    "TailClass",
    "TrialPlan",
    "census",
    "generate_game",
    "hull_stats",
    "parse_distribution",
    "registry",
    "run_trials",
    "run_trials_async",
    "u_statistic",
]
