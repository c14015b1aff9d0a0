"""
sampler.py

Class-balanced batch sampling: every class drawn into a batch contributes
at least ``min_per_class`` images, so the per-class scatter divisors
N_c - 1 are always positive.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from ..exceptions import SamplingError

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Batch:
    """Positions into the sampled pool plus the image ids and labels they carry."""
    positions: np.ndarray
    image_ids: Tuple[str, ...]
    labels: np.ndarray

    def __len__(self) -> int:
        return self.positions.shape[0]


def group_by_label(pool: Sequence[Any]) -> Dict[int, List[int]]:
    groups: Dict[int, List[int]] = defaultdict(list)
    for position, item in enumerate(pool):
        groups[int(item.label)].append(position)
    return dict(groups)


def sample_batch(pool: Sequence[Any], batch_size: int, min_per_class: int, seed: int) -> Batch:
    """
    Draw a batch from ``pool`` (items with ``image_id`` and ``label``).

    As many classes as fit (batch_size // min_per_class) are chosen uniformly,
    each gets ``min_per_class`` images, and leftover slots are filled
    uniformly from the remaining images of the chosen classes.

    Raises:
        SamplingError: If fewer than two classes have ``min_per_class`` images
    """
    groups = group_by_label(pool)
    eligible = sorted(label for label, members in groups.items() if len(members) >= min_per_class)
    if len(eligible) < 2 or batch_size < 2 * min_per_class:
        short = sorted(label for label, members in groups.items() if len(members) < min_per_class)
        raise SamplingError(
            f"Cannot draw a batch of {batch_size} with >= {min_per_class} images per class: "
            f"{len(eligible)} eligible classes; classes with too few images: {short}"
        )

    rng = np.random.default_rng(seed)
    num_classes = min(batch_size // min_per_class, len(eligible))
    chosen = sorted(rng.choice(eligible, size=num_classes, replace=False).tolist())

    picked: Dict[int, List[int]] = {}
    leftovers: List[int] = []
    for label in chosen:
        members = np.asarray(groups[label])
        order = rng.permutation(members.shape[0])
        picked[label] = members[order[:min_per_class]].tolist()
        leftovers.extend(members[order[min_per_class:]].tolist())

    extra = min(batch_size - num_classes * min_per_class, len(leftovers))
    if extra > 0:
        for position in rng.choice(np.asarray(leftovers), size=extra, replace=False).tolist():
            picked[int(pool[position].label)].append(position)

    positions = np.array(sorted(p for label in chosen for p in picked[label]), dtype=np.int64)
    return Batch(
        positions=positions,
        image_ids=tuple(pool[p].image_id for p in positions),
        labels=np.array([int(pool[p].label) for p in positions], dtype=np.int64),
    )
