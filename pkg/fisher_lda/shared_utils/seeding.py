"""
Seed derivation.

Every random draw of a run is keyed by the run seed, a purpose tag and the
position in the run (epoch, step, trial, ...), so results depend only on
those values and not on the order in which draws happen.
"""

import zlib
from typing import Union

import numpy as np


def _purpose_code(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def derive_seed(seed: int, purpose: str, *counters: int) -> int:
    """Deterministic 32-bit seed for one (purpose, counters) slot of a run."""
    sequence = np.random.SeedSequence([int(seed), _purpose_code(purpose), *[int(c) for c in counters]])
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def derive_rng(seed: int, purpose: str, *counters: Union[int, np.integer]) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, purpose, *counters))
