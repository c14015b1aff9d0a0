"""
synth.py

Deterministic synthetic descriptor datasets standing in for pedestrian image
collections. Every identity owns a mixture over shared "part" prototypes
with its own part offsets and part weights; each image is seen by one of two
cameras, and each camera applies its own affine perturbation to every
descriptor.
"""

import logging
from typing import List, Sequence

import numpy as np

from .descriptors import DEFAULT_CHANNEL, DescriptorSet

logger = logging.getLogger(__name__)

NUM_PARTS = 4
PART_SCALE = 3.0
IDENTITY_OFFSET_SCALE = 1.5
NOISE_SCALE = 0.25
CAMERA_LINEAR_SCALE = 0.05
CAMERA_SHIFT_SCALE = 0.2


def synth_image_id(label: int, index: int) -> str:
    return f"p{label:04d}_{index:02d}"


def synth_split(label: int, num_ids: int) -> str:
    """
    Identities split in two disjoint halves: labels below ``ceil(num_ids / 2)``
    are train, the rest test. Both cameras appear on each side.
    """
    return "train" if label < max(1, -(-num_ids // 2)) else "test"


def synth_generate(num_ids: int, per_id: int, d_raw: int, seed: int,
                   num_descriptors: int = 48,
                   channel_names: Sequence[str] = (DEFAULT_CHANNEL,)) -> List[DescriptorSet]:
    """
    Generate ``num_ids * per_id`` descriptor sets, identities in label order.

    Image ``j`` of an identity is taken by camera ``j % 2``.

    Raises:
        ValueError: num_ids < 2, per_id < 2, d_raw < 1 or num_descriptors < 1
    """
    if num_ids < 2:
        raise ValueError(f"num_ids must be >= 2, got {num_ids}")
    if per_id < 2:
        raise ValueError(f"per_id must be >= 2, got {per_id}")
    if d_raw < 1 or num_descriptors < 1:
        raise ValueError("d_raw and num_descriptors must be positive")

    rng = np.random.default_rng(seed)
    identity = np.eye(d_raw)

    generators = {}
    for name in channel_names:
        generators[name] = {
            "parts": rng.normal(0.0, PART_SCALE, size=(NUM_PARTS, d_raw)),
            "offsets": rng.normal(0.0, IDENTITY_OFFSET_SCALE, size=(num_ids, NUM_PARTS, d_raw)),
            "weights": rng.dirichlet(np.full(NUM_PARTS, 4.0), size=num_ids),
            "cameras": [
                (identity + CAMERA_LINEAR_SCALE * rng.normal(size=(d_raw, d_raw)),
                 CAMERA_SHIFT_SCALE * rng.normal(size=d_raw))
                for _ in range(2)
            ],
        }

    descriptor_sets = []
    for label in range(num_ids):
        for index in range(per_id):
            camera = index % 2
            channels = {}
            for name in channel_names:
                g = generators[name]
                parts = rng.choice(NUM_PARTS, size=num_descriptors, p=g["weights"][label])
                clean = g["parts"][parts] + g["offsets"][label, parts]
                noisy = clean + NOISE_SCALE * rng.normal(size=(num_descriptors, d_raw))
                linear, shift = g["cameras"][camera]
                channels[name] = noisy @ linear.T + shift
            descriptor_sets.append(DescriptorSet(synth_image_id(label, index), camera, label, channels))

    logger.info(f"Generated {len(descriptor_sets)} synthetic images for {num_ids} identities (seed={seed})")
    return descriptor_sets
