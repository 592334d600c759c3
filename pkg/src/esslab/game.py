"""Random symmetric games and exact ESS certification for small supports.

Indices are 0-based. Entry ``R[i, j]`` is the payoff of the replying strategy
``i`` against the context strategy ``j``. Every comparison is an exact
floating-point strict inequality: ties have probability zero for continuous
laws, and synthetic ties fail strictness.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cache
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import null_space

from .distributions import DistributionSpec, sample
from .errors import CensusInvariantError, GameError

logger = logging.getLogger(__name__)

DEFINITENESS_SCALE = 1e-10
WEIGHT_TOLERANCE = 1e-12
PAYOFF_TOLERANCE = 1e-9
MAX_CENSUS_SUPPORT = 3
TOP_ROWS = 16
FIRST_SCREEN = 2
_PAIR_CHUNK = 1 << 15
_SUPPORT_CHUNK = 1 << 14


class EssKind(StrEnum):
    PURE = "pure"
    TWO_POINT = "two_point"
    GENERAL = "general"


@dataclass(frozen=True)
class GameMatrix:
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.size == 0:
            raise GameError(f"payoff matrix must be square and nonempty, got {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise GameError("payoff matrix entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, key):
        return self.entries[key]


@dataclass(frozen=True)
class MixedStrategy:
    n: int
    support: tuple[int, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if not self.support:
            raise GameError("mixed strategy support must be nonempty")
        if len(self.support) != len(self.weights):
            raise GameError("support and weights must have the same length")
        if list(self.support) != sorted(set(self.support)):
            raise GameError(f"support must be sorted and distinct, got {self.support}")
        if self.support[0] < 0 or self.support[-1] >= self.n:
            raise GameError(f"support {self.support} out of range for n={self.n}")
        if any(not w > 0.0 for w in self.weights):
            raise GameError(f"weights must be positive, got {self.weights}")
        if abs(sum(self.weights) - 1.0) > WEIGHT_TOLERANCE:
            raise GameError(f"weights must sum to 1, got {sum(self.weights)!r}")

    @classmethod
    def pure(cls, n: int, i: int) -> "MixedStrategy":
        return cls(n, (i,), (1.0,))

    def vector(self) -> np.ndarray:
        out = np.zeros(self.n)
        out[list(self.support)] = self.weights
        return out


@dataclass(frozen=True)
class EssRecord:
    strategy: MixedStrategy
    payoff_v: float
    kind: EssKind

    def __post_init__(self):
        size = len(self.strategy.support)
        expected = {EssKind.PURE: 1, EssKind.TWO_POINT: 2}.get(self.kind)
        if expected is not None and size != expected:
            raise GameError(f"{self.kind} ESS must have support of size {expected}, got {size}")

    @property
    def support(self) -> tuple[int, ...]:
        return self.strategy.support

    def check_payoff(self, entries: np.ndarray):
        """Every support strategy earns payoff_v against the record's own strategy."""
        support = list(self.support)
        block = entries[np.ix_(support, support)]
        earned = block @ np.asarray(self.strategy.weights)
        scale = max(abs(self.payoff_v), float(np.abs(block).max()))
        if np.any(np.abs(earned - self.payoff_v) > PAYOFF_TOLERANCE * scale):
            raise CensusInvariantError(
                f"support {self.support} earns {earned.tolist()} against itself, "
                f"recorded v = {self.payoff_v!r}"
            )


@dataclass
class EssCensus:
    counts: dict[int, int]
    records: list[EssRecord] = field(default_factory=list)

    def __post_init__(self):
        self.check()

    def check(self):
        sizes = [len(record.support) for record in self.records]
        for size, count in self.counts.items():
            if sizes.count(size) != count:
                raise CensusInvariantError(
                    f"S_{size} = {count} but {sizes.count(size)} records have that support size"
                )
        supports = [frozenset(record.support) for record in self.records]
        if len(set(supports)) != len(supports):
            raise CensusInvariantError("two ESS share a support")
        for first, second in itertools.combinations(supports, 2):
            if first < second or second < first:
                raise CensusInvariantError(
                    f"ESS supports {sorted(first)} and {sorted(second)} are nested"
                )

    def count(self, size: int) -> int:
        return self.counts.get(size, 0)


def _entries(R: GameMatrix | ArrayLike) -> np.ndarray:
    return R.entries if isinstance(R, GameMatrix) else GameMatrix(R).entries


def generate_game(n: int, spec: DistributionSpec, rng: np.random.Generator) -> GameMatrix:
    """n*n independent draws, filled row-major from the stream."""
    if n < 2:
        raise GameError(f"a random game needs n >= 2, got {n}")
    return GameMatrix(sample(spec, rng, n * n).reshape(n, n))


def payoff(R: GameMatrix, p: MixedStrategy | ArrayLike, q: MixedStrategy | ArrayLike) -> float:
    entries = _entries(R)
    p_vec = p.vector() if isinstance(p, MixedStrategy) else np.asarray(p, dtype=float)
    q_vec = q.vector() if isinstance(q, MixedStrategy) else np.asarray(q, dtype=float)
    if p_vec.shape != (entries.shape[0],) or q_vec.shape != (entries.shape[0],):
        raise GameError(
            f"strategies of sizes {p_vec.shape} and {q_vec.shape} do not match n={entries.shape[0]}"
        )
    return float(p_vec @ entries @ q_vec)


def count_pure_ess(entries: ArrayLike) -> int:
    """S_1: diagonal entries strictly above every other entry of their column."""
    entries = np.asarray(entries, dtype=float)
    return int(np.count_nonzero(_pure_mask(entries)))


def _pure_mask(entries: np.ndarray) -> np.ndarray:
    n = entries.shape[0]
    off_diagonal = np.where(np.eye(n, dtype=bool), -np.inf, entries)
    return np.diagonal(entries) > off_diagonal.max(axis=0)


def _check_index(entries: np.ndarray, i: int):
    n = entries.shape[0]
    if not 0 <= i < n:
        raise GameError(f"strategy index {i} out of range for n={n}")


def is_pure_ess(R: GameMatrix, i: int) -> bool:
    entries = _entries(R)
    _check_index(entries, i)
    column = entries[:, i]
    others = np.delete(column, i)
    return bool(np.all(column[i] > others))


def _pair_weights(entries: np.ndarray, i: np.ndarray, j: np.ndarray):
    a = entries[j, i] - entries[i, i]
    b = entries[i, j] - entries[j, j]
    total = a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        p_i = b / total
        p_j = a / total
        v = p_i * entries[i, i] + p_j * entries[i, j]
    return a, b, p_i, p_j, v


def two_point_ess(R: GameMatrix, i: int, j: int) -> EssRecord | None:
    if i == j:
        raise GameError("a two-point support needs two distinct strategies")
    entries = _entries(R)
    _check_index(entries, i)
    _check_index(entries, j)
    a, b, p_i, p_j, v = _pair_weights(entries, np.asarray(i), np.asarray(j))
    if not (a > 0.0 and b > 0.0):
        return None
    against = p_i * entries[:, i] + p_j * entries[:, j]
    against[[i, j]] = -np.inf
    if not np.all(against < v):
        return None
    return _pair_record(entries.shape[0], i, j, float(p_i), float(p_j), float(v))


def _pair_record(n: int, i: int, j: int, p_i: float, p_j: float, v: float) -> EssRecord:
    if i > j:
        i, j, p_i, p_j = j, i, p_j, p_i
    return EssRecord(MixedStrategy(n, (i, j), (p_i, p_j)), v, EssKind.TWO_POINT)


def _top_rows(entries: np.ndarray, depth: int) -> np.ndarray:
    n = entries.shape[0]
    if depth >= n:
        return np.broadcast_to(np.arange(n), (n, n))
    return np.argpartition(-entries, depth - 1, axis=0)[:depth].T


def _screen(entries, top, i, j, p_i, p_j, v) -> np.ndarray:
    rows = np.concatenate([top[i], top[j]], axis=1)
    values = p_i[:, None] * entries[rows, i[:, None]] + p_j[:, None] * entries[rows, j[:, None]]
    values[(rows == i[:, None]) | (rows == j[:, None])] = -np.inf
    return np.all(values < v[:, None], axis=1)


def two_point_scan(entries: np.ndarray, top_rows: int = TOP_ROWS) -> list[EssRecord]:
    """All two-point ESS of one matrix.

    Candidate pairs are screened against the largest rows of each of their two
    columns, first the top ``FIRST_SCREEN`` and then the top ``top_rows``. Only
    survivors pay the full O(n) check.
    """
    if top_rows < 1:
        raise GameError(f"top_rows must be positive, got {top_rows}")
    n = entries.shape[0]
    diagonal = np.diagonal(entries)
    a = entries.T - diagonal[:, None]
    b = entries - diagonal[None, :]
    first, second = np.nonzero(np.triu((a > 0.0) & (b > 0.0), k=1))
    if first.size == 0:
        return []

    depth = min(top_rows, n)
    screens = [_top_rows(entries, d) for d in sorted({min(FIRST_SCREEN, depth), depth})]

    records = []
    for start in range(0, first.size, _PAIR_CHUNK):
        i = first[start : start + _PAIR_CHUNK]
        j = second[start : start + _PAIR_CHUNK]
        _, _, p_i, p_j, v = _pair_weights(entries, i, j)
        for top in screens:
            keep = _screen(entries, top, i, j, p_i, p_j, v)
            i, j, p_i, p_j, v = i[keep], j[keep], p_i[keep], p_j[keep], v[keep]
            if i.size == 0:
                break
        if i.size == 0:
            continue
        if depth < n:
            against = p_i * entries[:, i] + p_j * entries[:, j]
            columns = np.arange(i.size)
            against[i, columns] = -np.inf
            against[j, columns] = -np.inf
            keep = np.all(against < v, axis=0)
            i, j, p_i, p_j, v = i[keep], j[keep], p_i[keep], p_j[keep], v[keep]
        for pair in range(i.size):
            records.append(
                _pair_record(n, int(i[pair]), int(j[pair]), float(p_i[pair]), float(p_j[pair]),
                             float(v[pair]))
            )
    return records


@cache
def _sum_zero_basis(size: int) -> np.ndarray:
    return null_space(np.ones((1, size)))


def _solve_equalizers(bordered: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve [M p = v 1; sum p = 1] per row; singular systems come back as NaN."""
    try:
        return np.linalg.solve(bordered, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        logger.debug("singular equalizer system in batch of %d, solving one by one", len(rhs))
    solution = np.full(rhs.shape, np.nan)
    for row in range(rhs.shape[0]):
        try:
            solution[row] = np.linalg.solve(bordered[row], rhs[row])
        except np.linalg.LinAlgError:
            continue
    return solution


def _certify_supports(entries: np.ndarray, supports: np.ndarray):
    """Batched general-support certification.

    ``supports`` has shape (k, l). Returns the mask of certified rows, their
    weights (k, l) and values (k,). Pairs take the closed form of
    ``two_point_ess``, whose strict a > 0, b > 0 test replaces the definiteness
    margin.
    """
    count, size = supports.shape
    n = entries.shape[0]
    block = entries[supports[:, :, None], supports[:, None, :]]

    if size == 2:
        a, b, p_i, p_j, values = _pair_weights(entries, supports[:, 0], supports[:, 1])
        weights = np.column_stack([p_i, p_j])
        ok = (a > 0.0) & (b > 0.0)
    else:
        bordered = np.zeros((count, size + 1, size + 1))
        bordered[:, :size, :size] = block
        bordered[:, :size, size] = -1.0
        bordered[:, size, :size] = 1.0
        rhs = np.zeros((count, size + 1))
        rhs[:, size] = 1.0
        solution = _solve_equalizers(bordered, rhs)
        weights = solution[:, :size]
        values = solution[:, size]
        ok = np.all(np.isfinite(solution), axis=1) & np.all(weights > 0.0, axis=1)

    # off-support rows must earn strictly less than v
    rows = entries[:, supports].transpose(1, 0, 2)
    against = np.einsum("kri,ki->kr", rows, np.nan_to_num(weights))
    in_support = np.zeros((count, n), dtype=bool)
    np.put_along_axis(in_support, supports, True, axis=1)
    against[in_support] = -np.inf
    ok &= np.all(against < values[:, None], axis=1)
    if size == 2:
        return ok, weights, values

    # conditional negative definiteness on the sum-zero subspace
    scale = np.abs(block).max(axis=(1, 2))
    basis = _sum_zero_basis(size)
    symmetric = 0.5 * (block + block.transpose(0, 2, 1))
    reduced = basis.T @ symmetric @ basis
    largest = np.linalg.eigvalsh(reduced)[:, -1]
    ok &= largest < -DEFINITENESS_SCALE * scale
    return ok, weights, values


def support_ess(R: GameMatrix, T: Sequence[int]) -> EssRecord | None:
    entries = _entries(R)
    support = sorted(set(int(t) for t in T))
    n = entries.shape[0]
    if len(support) != len(T) or not 2 <= len(support) <= n:
        raise GameError(f"support must hold 2..{n} distinct indices, got {list(T)}")
    if support[0] < 0 or support[-1] >= n:
        raise GameError(f"support {support} out of range for n={n}")
    ok, weights, values = _certify_supports(entries, np.array([support]))
    if not ok[0]:
        return None
    kind = EssKind.TWO_POINT if len(support) == 2 else EssKind.GENERAL
    return _general_record(n, support, weights[0], float(values[0]), kind)


def _general_record(n, support, weights, value, kind) -> EssRecord:
    weights = np.asarray(weights, dtype=float)
    weights = weights / weights.sum()
    strategy = MixedStrategy(n, tuple(support), tuple(float(w) for w in weights))
    return EssRecord(strategy, value, kind)


def triple_scan(entries: np.ndarray) -> list[EssRecord]:
    n = entries.shape[0]
    records = []
    triples = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), 3)),
        dtype=np.intp,
    ).reshape(-1, 3)
    for start in range(0, triples.shape[0], _SUPPORT_CHUNK):
        chunk = triples[start : start + _SUPPORT_CHUNK]
        ok, weights, values = _certify_supports(entries, chunk)
        for row in np.flatnonzero(ok):
            records.append(
                _general_record(n, chunk[row].tolist(), weights[row], float(values[row]),
                                EssKind.GENERAL)
            )
    return records


def census(R: GameMatrix, max_support: int, *, top_rows: int = TOP_ROWS) -> EssCensus:
    if not 1 <= max_support <= MAX_CENSUS_SUPPORT:
        raise GameError(f"max_support must be in 1..{MAX_CENSUS_SUPPORT}, got {max_support}")
    entries = _entries(R)
    n = entries.shape[0]

    records = [
        EssRecord(MixedStrategy.pure(n, int(i)), float(entries[i, i]), EssKind.PURE)
        for i in np.flatnonzero(_pure_mask(entries))
    ]
    counts = {1: len(records)}
    if max_support >= 2:
        pairs = two_point_scan(entries, top_rows)
        counts[2] = len(pairs)
        records.extend(pairs)
    if max_support >= 3:
        triples = triple_scan(entries) if n >= 3 else []
        counts[3] = len(triples)
        records.extend(triples)
    for record in records:
        record.check_payoff(entries)
    return EssCensus(counts, records)
