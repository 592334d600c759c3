"""Counter-based random streams.

Trial ``t`` of a plan seeded with ``master_seed`` draws from a Philox generator
keyed by the seed, with the trial index placed in the second counter word. Each
trial therefore owns 2**64 blocks of its own and the stream never depends on
which worker runs the trial, or in what order.
"""

import numpy as np

from .errors import PlanError

SEED_LIMIT = 2**64


def check_seed(master_seed: int) -> int:
    if isinstance(master_seed, bool) or not isinstance(master_seed, (int, np.integer)):
        raise TypeError("master_seed must be an integer")
    if not 0 <= int(master_seed) < SEED_LIMIT:
        raise PlanError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
    return int(master_seed)


def substream(master_seed: int, trial: int) -> np.random.Generator:
    if trial < 0:
        raise PlanError(f"trial index must be nonnegative, got {trial}")
    bit_generator = np.random.Philox(
        key=check_seed(master_seed),
        counter=np.array([0, trial, 0, 0], dtype=np.uint64),
    )
    return np.random.Generator(bit_generator)


def stream(seed: int) -> np.random.Generator:
    """Single deterministic stream, the same as trial 0 of ``seed``."""
    return substream(seed, 0)
