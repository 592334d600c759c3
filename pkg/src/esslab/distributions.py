"""Continuous payoff laws with exact CDF, survival, quantile and cumulative hazard.

Location and scale are deliberately absent: the ESS census and hull counts are
invariant under common increasing affine maps, so the standard normalizations are
enough. All functions accept scalars or arrays and return the same kind.
"""

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from .errors import DistributionError
from .laws import Family, Law, TailClass
from .registry import registry

__all__ = [
    "DistributionSpec",
    "Family",
    "TailClass",
    "cdf",
    "cumulative_hazard",
    "quantile",
    "sample",
    "survival",
    "symmetrize",
    "tail_class",
]

_TWO_SIDED_SYMMETRIC = {Family.NORMAL, Family.CAUCHY, Family.LOGISTIC}
_GRAMMAR_NAMES = {Family.EXPONENTIAL: "exp"}
_SMALLEST_UNIFORM = 2.0**-54


@dataclass(frozen=True)
class DistributionSpec:
    family: Family
    shape: float | None = None
    symmetrized: bool = False

    def __post_init__(self):
        try:
            family = Family(self.family)
        except ValueError:
            raise DistributionError(f"`{self.family}` is not a known family") from None
        object.__setattr__(self, "family", family)

        law = self.law
        if law.has_shape:
            if self.shape is None:
                raise DistributionError(f"`{family}` requires a shape parameter")
            shape = float(self.shape)
            if not math.isfinite(shape) or shape <= 0.0:
                raise DistributionError(f"`{family}` shape must be positive, got {self.shape!r}")
            object.__setattr__(self, "shape", shape)
        elif self.shape is not None:
            raise DistributionError(f"`{family}` takes no shape parameter")

        if self.symmetrized and law.support[0] < 0.0:
            raise DistributionError(
                f"`{family}` is already two-sided and cannot be symmetrized"
            )

    @property
    def law(self) -> Law:
        return registry.get_law(self.family)

    @property
    def support_lo(self) -> float:
        lo, hi = self.law.support
        return -hi if self.symmetrized else lo

    @property
    def support_hi(self) -> float:
        return self.law.support[1]

    @property
    def tail_class(self) -> TailClass:
        return self.law.tail_class(self.shape)

    @property
    def is_symmetric(self) -> bool:
        return self.symmetrized or self.family in _TWO_SIDED_SYMMETRIC or (
            self.family == Family.UNIFORM
        )

    @property
    def label(self) -> str:
        name = _GRAMMAR_NAMES.get(self.family, self.family.value)
        if self.shape is not None:
            short = f"{self.shape:g}"
            name = f"{name}:{short if float(short) == self.shape else repr(self.shape)}"
        return f"sym({name})" if self.symmetrized else name

    def __str__(self):
        return self.label


def _evaluate(compute: Callable[[np.ndarray], np.ndarray], x: ArrayLike):
    arr = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", under="ignore"):
        out = compute(arr)
    if arr.ndim == 0:
        return float(out)
    return np.asarray(out, dtype=float)


def _survival(spec: DistributionSpec, x: np.ndarray) -> np.ndarray:
    law = spec.law
    if not spec.symmetrized:
        return law.survival(x, spec.shape)
    half = 0.5 * law.survival(np.abs(x), spec.shape)
    return np.where(x > 0.0, half, 1.0 - half)


def _quantile(spec: DistributionSpec, p: np.ndarray) -> np.ndarray:
    law = spec.law
    if not spec.symmetrized:
        return law.quantile(p, spec.shape)
    # mirrored branches; the unused side gets a harmless argument
    lower = -law.quantile(np.where(p < 0.5, 1.0 - 2.0 * p, 0.5), spec.shape)
    upper = law.quantile(np.where(p > 0.5, 2.0 * p - 1.0, 0.5), spec.shape)
    return np.where(p < 0.5, lower, np.where(p > 0.5, upper, 0.0))


def survival(spec: DistributionSpec, x: ArrayLike):
    return _evaluate(lambda arr: _survival(spec, arr), x)


def cdf(spec: DistributionSpec, x: ArrayLike):
    return _evaluate(lambda arr: 1.0 - _survival(spec, arr), x)


def quantile(spec: DistributionSpec, p: ArrayLike):
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DistributionError(f"quantile requires p in (0, 1), got {p!r}")
    return _evaluate(lambda a: _quantile(spec, a), arr)


def cumulative_hazard(spec: DistributionSpec, x: ArrayLike):
    arr = np.asarray(x, dtype=float)
    if np.any(arr >= spec.support_hi) or np.any(np.isnan(arr)):
        raise DistributionError(
            f"cumulative hazard is undefined where survival is 0 (x >= {spec.support_hi})"
        )
    law = spec.law

    def compute(a: np.ndarray) -> np.ndarray:
        if not spec.symmetrized:
            return law.hazard(a, spec.shape)
        positive = math.log(2.0) + law.hazard(np.abs(a), spec.shape)
        negative = -np.log1p(-0.5 * law.survival(np.abs(a), spec.shape))
        return np.where(a > 0.0, positive, negative)

    return _evaluate(compute, arr)


def sample(spec: DistributionSpec, rng: np.random.Generator, size: int | tuple | None = None):
    """Inverse-transform draws: one uniform variate per value, for every family."""
    u = rng.random(size)
    u = np.where(u == 0.0, _SMALLEST_UNIFORM, u)
    return _evaluate(lambda a: _quantile(spec, a), u)


def symmetrize(spec: DistributionSpec) -> DistributionSpec:
    if spec.symmetrized:
        raise DistributionError(f"`{spec.label}` is already symmetrized")
    return replace(spec, symmetrized=True)


def tail_class(spec: DistributionSpec) -> TailClass:
    return spec.tail_class
