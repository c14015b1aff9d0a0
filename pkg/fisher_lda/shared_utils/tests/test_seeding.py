# fisher_lda/shared_utils/tests/test_seeding.py
from unittest import TestCase

from numpy.testing import assert_array_equal

from fisher_lda.shared_utils.seeding import derive_rng, derive_seed


class SeedingTestCase(TestCase):

    def test_repeatable(self):
        self.assertEqual(derive_seed(3, "batch", 1, 2), derive_seed(3, "batch", 1, 2))
        assert_array_equal(derive_rng(3, "pca", 0).normal(size=4), derive_rng(3, "pca", 0).normal(size=4))

    def test_slots_differ(self):
        seeds = {
            derive_seed(3, "batch", 1, 2),
            derive_seed(3, "batch", 2, 1),
            derive_seed(3, "dropout", 1, 2),
            derive_seed(4, "batch", 1, 2),
            derive_seed(3, "batch", 1),
        }
        self.assertEqual(len(seeds), 5)

    def test_range(self):
        for counter in range(20):
            self.assertTrue(0 <= derive_seed(0, "trial", counter) < 2 ** 32)
