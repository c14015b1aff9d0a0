# fisher_lda/trainer/tests/test_sampler.py
from collections import Counter, namedtuple
from unittest import TestCase

import numpy as np

from fisher_lda.exceptions import SamplingError
from fisher_lda.trainer.sampler import group_by_label, sample_batch

Item = namedtuple("Item", ["image_id", "label"])


def pool_of(counts):
    return [Item(f"id{label}_{i}", label) for label, count in enumerate(counts) for i in range(count)]


class SampleBatchTestCase(TestCase):
    """Test cases for sample_batch."""

    def test_four_classes_two_each(self):
        batch = sample_batch(pool_of([4, 4, 4, 4]), batch_size=8, min_per_class=2, seed=0)
        self.assertEqual(len(batch), 8)
        self.assertEqual(Counter(batch.labels.tolist()), {0: 2, 1: 2, 2: 2, 3: 2})

    def test_same_seed_same_batch(self):
        pool = pool_of([5, 3, 6, 4, 2])
        first = sample_batch(pool, 6, 2, seed=11)
        second = sample_batch(pool, 6, 2, seed=11)
        self.assertEqual(first.image_ids, second.image_ids)

    def test_every_class_meets_minimum(self):
        pool = pool_of([5, 3, 6, 4, 2, 7])
        for seed in range(50):
            batch = sample_batch(pool, 9, 2, seed=seed)
            counts = Counter(batch.labels.tolist())
            self.assertTrue(all(count >= 2 for count in counts.values()))
            self.assertEqual(len(set(batch.positions.tolist())), len(batch))

    def test_leftover_slots_filled(self):
        batch = sample_batch(pool_of([5, 5]), batch_size=7, min_per_class=2, seed=2)
        self.assertEqual(len(batch), 7)

    def test_uniform_class_frequency(self):
        """1000 draws of 2 out of 5 classes: every frequency within 3 sigma of 2/5."""
        pool = pool_of([4] * 5)
        draws = 1000
        hits = Counter()
        for seed in range(draws):
            hits.update(set(sample_batch(pool, 4, 2, seed=seed).labels.tolist()))
        p = 2 / 5
        sigma = np.sqrt(draws * p * (1 - p))
        for label in range(5):
            self.assertLess(abs(hits[label] - draws * p), 3 * sigma)

    def test_infeasible_names_classes(self):
        with self.assertRaises(SamplingError) as ctx:
            sample_batch(pool_of([4, 1, 1]), 8, 2, seed=0)
        self.assertIn("[1, 2]", str(ctx.exception))

    def test_group_by_label(self):
        self.assertEqual(group_by_label(pool_of([2, 1])), {0: [0, 1], 1: [2]})
