"""Closed-form survival, quantile and cumulative hazard for each catalog family.

Every law works on float arrays and takes the shape parameter explicitly
(``None`` for families without one). ``survival`` clamps outside the support;
``quantile`` assumes ``p`` is strictly inside (0, 1); ``hazard`` assumes ``x`` is
below the upper support endpoint.
"""

from enum import StrEnum

import numpy as np
from scipy import special


class Family(StrEnum):
    EXPONENTIAL = "exponential"
    NORMAL = "normal"
    UNIFORM = "uniform"
    WEIBULL = "weibull"
    PARETO = "pareto"
    CAUCHY = "cauchy"
    LOGNORMAL = "lognormal"
    LOGISTIC = "logistic"
    EXPEXP = "expexp"


class TailClass(StrEnum):
    EF = "EF"
    SE = "SE"
    UNCLASSIFIED = "unclassified"


class Law:
    has_shape = False
    support = (-np.inf, np.inf)
    tail = TailClass.UNCLASSIFIED

    def tail_class(self, shape: float | None) -> TailClass:
        return self.tail

    def survival(self, x: np.ndarray, shape: float | None) -> np.ndarray:
        raise NotImplementedError

    def quantile(self, p: np.ndarray, shape: float | None) -> np.ndarray:
        raise NotImplementedError

    def hazard(self, x: np.ndarray, shape: float | None) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return -np.log(self.survival(x, shape))


class ExponentialLaw(Law):
    support = (0.0, np.inf)
    tail = TailClass.EF

    def survival(self, x, shape):
        return np.exp(-np.maximum(x, 0.0))

    def quantile(self, p, shape):
        return -np.log1p(-p)

    def hazard(self, x, shape):
        return np.maximum(x, 0.0)


class NormalLaw(Law):
    tail = TailClass.EF

    def survival(self, x, shape):
        return special.ndtr(-x)

    def quantile(self, p, shape):
        # ndtri loses accuracy near 1, so reflect the upper half
        return np.where(p < 0.5, special.ndtri(p), -special.ndtri(1.0 - p))

    def hazard(self, x, shape):
        return -special.log_ndtr(-x)


class UniformLaw(Law):
    support = (0.0, 1.0)
    tail = TailClass.EF

    def survival(self, x, shape):
        return np.clip(1.0 - x, 0.0, 1.0)

    def quantile(self, p, shape):
        return np.asarray(p, dtype=float).copy()

    def hazard(self, x, shape):
        return -np.log1p(-np.clip(x, 0.0, 1.0))


class WeibullLaw(Law):
    has_shape = True
    support = (0.0, np.inf)

    def tail_class(self, shape):
        return TailClass.EF if shape >= 1.0 else TailClass.SE

    def survival(self, x, shape):
        return np.exp(-(np.maximum(x, 0.0) ** shape))

    def quantile(self, p, shape):
        return (-np.log1p(-p)) ** (1.0 / shape)

    def hazard(self, x, shape):
        return np.maximum(x, 0.0) ** shape


class ParetoLaw(Law):
    has_shape = True
    support = (1.0, np.inf)
    tail = TailClass.SE

    def survival(self, x, shape):
        return np.maximum(x, 1.0) ** (-shape)

    def quantile(self, p, shape):
        return np.exp(-np.log1p(-p) / shape)

    def hazard(self, x, shape):
        return shape * np.log(np.maximum(x, 1.0))


class CauchyLaw(Law):
    tail = TailClass.SE

    def survival(self, x, shape):
        # arctan2(1, x) / pi == 1/2 - arctan(x) / pi, without cancellation for large x
        return np.arctan2(1.0, x) / np.pi

    def quantile(self, p, shape):
        with np.errstate(divide="ignore"):
            lower = -1.0 / np.tan(np.pi * p)
            upper = 1.0 / np.tan(np.pi * (1.0 - p))
        return np.where(p < 0.5, lower, np.where(p == 0.5, 0.0, upper))


class LognormalLaw(Law):
    support = (0.0, np.inf)
    tail = TailClass.SE

    def survival(self, x, shape):
        with np.errstate(divide="ignore"):
            log_x = np.log(np.where(x > 0.0, x, 0.0))
        return special.ndtr(-log_x)

    def quantile(self, p, shape):
        return np.exp(np.where(p < 0.5, special.ndtri(p), -special.ndtri(1.0 - p)))

    def hazard(self, x, shape):
        with np.errstate(divide="ignore"):
            log_x = np.log(np.where(x > 0.0, x, 0.0))
        return -special.log_ndtr(-log_x)


class LogisticLaw(Law):
    tail = TailClass.EF

    def survival(self, x, shape):
        return special.expit(-x)

    def quantile(self, p, shape):
        return np.log(p) - np.log1p(-p)

    def hazard(self, x, shape):
        return np.logaddexp(0.0, x)


class ExpExpLaw(Law):
    """Survival ``exp(-exp(x))`` on the whole line."""

    tail = TailClass.EF

    def survival(self, x, shape):
        return np.exp(-np.exp(x))

    def quantile(self, p, shape):
        return np.log(-np.log1p(-p))

    def hazard(self, x, shape):
        return np.exp(x)


DEFAULT_LAWS: dict[Family, Law] = {
    Family.EXPONENTIAL: ExponentialLaw(),
    Family.NORMAL: NormalLaw(),
    Family.UNIFORM: UniformLaw(),
    Family.WEIBULL: WeibullLaw(),
    Family.PARETO: ParetoLaw(),
    Family.CAUCHY: CauchyLaw(),
    Family.LOGNORMAL: LognormalLaw(),
    Family.LOGISTIC: LogisticLaw(),
    Family.EXPEXP: ExpExpLaw(),
}
