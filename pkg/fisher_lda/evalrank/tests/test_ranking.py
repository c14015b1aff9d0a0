# fisher_lda/evalrank/tests/test_ranking.py
from unittest import TestCase, mock

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from fisher_lda.evalrank.embed import l2_normalize_rows
from fisher_lda.evalrank.ranking import (
    average_precisions, cmc_evaluate, evaluate_protocol, map_evaluate, split_probe_gallery,
)
from fisher_lda.exceptions import ProtocolError


def oracle_distances(probes, gallery):
    probes, gallery = l2_normalize_rows(probes), l2_normalize_rows(gallery)
    return [[float(np.sqrt(np.sum((p - g) ** 2))) for g in gallery] for p in probes]


def oracle_order(row):
    return sorted(range(len(row)), key=lambda j: (row[j], j))


def oracle_cmc(probes, probe_labels, gallery, gallery_labels):
    """Every gallery identity appears once; rank counted by an all-pairs sort."""
    distances = oracle_distances(probes, gallery)
    ranks = []
    for row, label in zip(distances, probe_labels):
        order = oracle_order(row)
        ranks.append(1 + [gallery_labels[j] for j in order].index(label))
    return np.array([np.mean([rank <= k for rank in ranks]) for k in range(1, len(gallery) + 1)])


def oracle_ap(probes, probe_labels, gallery, gallery_labels):
    distances = oracle_distances(probes, gallery)
    values = []
    for row, label in zip(distances, probe_labels):
        order = oracle_order(row)
        relevant = [position for position, j in enumerate(order, start=1) if gallery_labels[j] == label]
        if not relevant:
            values.append(np.nan)
            continue
        values.append(np.mean([(count + 1) / position for count, position in enumerate(relevant)]))
    return np.array(values)


class CmcEvaluateTestCase(TestCase):
    """Test cases for cmc_evaluate."""

    def setUp(self):
        self.rng = np.random.default_rng(4)

    def test_second_nearest_match(self):
        result = cmc_evaluate(np.array([[0.0, 0.0]]), [0],
                              np.array([[0.1, 0.0], [0.2, 0.0], [0.3, 0.0]]), [1, 0, 2],
                              trials=1, metric="raw_euclidean")
        assert_array_equal(result.cmc, [0.0, 1.0, 1.0])
        self.assertEqual(result.rankings[0].match_rank, 2)
        self.assertEqual(result.rankings[0].gallery, ["0", "1", "2"])

    def test_self_match(self):
        embeddings = self.rng.normal(size=(6, 3))
        result = cmc_evaluate(embeddings, np.arange(6), embeddings, np.arange(6), trials=3)
        self.assertEqual(result.rank(1), 1.0)
        self.assertEqual(result.map_value, 1.0)

    def test_matches_all_pairs_oracle(self):
        for _ in range(100):
            num_ids = 5
            gallery = self.rng.normal(size=(num_ids, 4))
            gallery_labels = self.rng.permutation(num_ids)
            num_probes = int(self.rng.integers(1, 8))
            probes = self.rng.normal(size=(num_probes, 4))
            probe_labels = self.rng.integers(0, num_ids, size=num_probes)

            result = cmc_evaluate(probes, probe_labels, gallery, gallery_labels, trials=1)
            assert_array_equal(result.cmc, oracle_cmc(probes, probe_labels, gallery, gallery_labels))

    def test_ties_broken_by_gallery_order(self):
        gallery = np.array([[1.0, 0.0], [1.0, 0.0]])
        result = cmc_evaluate(np.array([[1.0, 0.0]]), [7], gallery, [3, 7], trials=1)
        assert_array_equal(result.cmc, [0.0, 1.0])

    def test_bounds_and_monotonicity(self):
        gallery = self.rng.normal(size=(30, 5))
        gallery_labels = np.repeat(np.arange(10), 3)
        probes = self.rng.normal(size=(20, 5))
        probe_labels = self.rng.integers(0, 10, size=20)
        result = cmc_evaluate(probes, probe_labels, gallery, gallery_labels, trials=10, seed=3)
        self.assertEqual(result.cmc.shape, (10,))
        self.assertTrue(np.all(np.diff(result.cmc) >= 0))
        self.assertTrue(np.all((result.cmc >= 0) & (result.cmc <= 1)))
        self.assertEqual(result.cmc[-1], 1.0)
        self.assertEqual(result.excluded_probes, 0)
        self.assertTrue(0.0 < result.map_value <= 1.0)

    def test_gallery_permutation_invariance(self):
        gallery = self.rng.normal(size=(6, 3))
        labels = np.arange(6)
        probes = self.rng.normal(size=(9, 3))
        probe_labels = self.rng.integers(0, 6, size=9)
        permutation = self.rng.permutation(6)
        first = cmc_evaluate(probes, probe_labels, gallery, labels, trials=1)
        second = cmc_evaluate(probes, probe_labels, gallery[permutation], labels[permutation], trials=1)
        assert_array_equal(first.cmc, second.cmc)

    def test_seeded_trials_repeat(self):
        gallery = self.rng.normal(size=(12, 3))
        labels = np.repeat(np.arange(4), 3)
        probes = self.rng.normal(size=(4, 3))
        first = cmc_evaluate(probes, np.arange(4), gallery, labels, trials=5, seed=8)
        second = cmc_evaluate(probes, np.arange(4), gallery, labels, trials=5, seed=8)
        assert_array_equal(first.cmc, second.cmc)

    def test_probe_identity_missing(self):
        with self.assertRaises(ProtocolError) as ctx:
            cmc_evaluate(np.ones((1, 2)), [9], np.eye(2), [0, 1])
        self.assertIn("9", str(ctx.exception))

    def test_rank_past_gallery_size(self):
        result = cmc_evaluate(np.array([[0.0, 0.0]]), [0], np.array([[0.1, 0.0], [0.2, 0.0]]), [1, 0],
                              trials=1, metric="raw_euclidean")
        self.assertEqual(result.rank(20), 1.0)


class AveragePrecisionTestCase(TestCase):
    """Test cases for average_precisions and map_evaluate."""

    def setUp(self):
        self.rng = np.random.default_rng(8)

    def test_single_match_first(self):
        value = map_evaluate(np.array([[0.0]]), [0], np.array([[0.1], [0.5]]), [0, 1], metric="raw_euclidean")
        self.assertEqual(value, 1.0)

    def test_hand_computed_ap(self):
        gallery = np.array([[1.0], [2.0], [3.0], [4.0]])
        value = map_evaluate(np.array([[0.0]]), [0], gallery, [0, 1, 0, 2], metric="raw_euclidean")
        self.assertAlmostEqual(value, 5 / 6, places=12)

    def test_matches_exhaustive_oracle(self):
        for _ in range(100):
            num_gallery = int(self.rng.integers(2, 10))
            gallery = self.rng.normal(size=(num_gallery, 3))
            gallery_labels = self.rng.integers(0, 4, size=num_gallery)
            probes = self.rng.normal(size=(5, 3))
            probe_labels = self.rng.integers(0, 4, size=5)

            values = average_precisions(probes, probe_labels, gallery, gallery_labels)
            expected = oracle_ap(probes, probe_labels, gallery, gallery_labels.tolist())
            assert_allclose(values, expected, rtol=0, atol=1e-12)

    def test_same_camera_matches_discarded(self):
        gallery = np.array([[0.1], [0.2], [0.3]])
        values = average_precisions(np.array([[0.0]]), [0], gallery, [0, 1, 0],
                                    probe_cameras=[0], gallery_cameras=[0, 1, 1], metric="raw_euclidean")
        assert_allclose(values, [0.5])

    @mock.patch("fisher_lda.evalrank.ranking.logger")
    def test_probe_without_relevant_items_excluded(self, mock_logger):
        gallery = np.array([[0.1], [0.2]])
        value = map_evaluate(np.array([[0.0], [0.0]]), [0, 9], gallery, [0, 1], metric="raw_euclidean")
        self.assertEqual(value, 1.0)
        mock_logger.warning.assert_called_once()

    def test_every_probe_excluded(self):
        with self.assertRaises(ProtocolError):
            map_evaluate(np.array([[0.0]]), [5], np.array([[1.0]]), [0])


class ProtocolTestCase(TestCase):
    """Test cases for split_probe_gallery and evaluate_protocol."""

    def setUp(self):
        self.rng = np.random.default_rng(15)

    def test_camera_split(self):
        probes, gallery = split_probe_gallery([0, 0, 1, 1], [1, 0, 1, 0], seed=0)
        assert_array_equal(probes, [1, 3])
        assert_array_equal(gallery, [0, 2])

    def test_single_camera_split(self):
        labels = [0, 0, 1, 1, 1, 2]
        probes, gallery = split_probe_gallery(labels, [0] * 6, seed=4)
        self.assertEqual(sorted(np.asarray(labels)[probes].tolist()), [0, 1])
        self.assertEqual(len(probes) + len(gallery), 6)
        self.assertIn(5, gallery)

    def test_separated_clusters_rank_one(self):
        centers = self.rng.normal(size=(5, 8)) * 10
        labels = np.repeat(np.arange(5), 4)
        cameras = np.tile([0, 1], 10)
        embeddings = centers[labels] + 0.01 * self.rng.normal(size=(20, 8))
        result = evaluate_protocol(embeddings, labels, cameras, trials=4, seed=2)
        self.assertEqual(result.rank(1), 1.0)
        self.assertAlmostEqual(result.map_value, 1.0)
        self.assertEqual(len(result.rankings), 10)

    def test_single_camera_trials(self):
        labels = np.repeat(np.arange(4), 3)
        embeddings = self.rng.normal(size=(12, 4))
        result = evaluate_protocol(embeddings, labels, np.zeros(12), trials=3, seed=1)
        self.assertEqual(result.num_trials, 3)
        self.assertEqual(result.cmc.shape, (4,))
        self.assertEqual(result.cmc[-1], 1.0)
        self.assertEqual(result.excluded_probes, 0)
        self.assertTrue(0.0 < result.map_value <= 1.0)

    def test_single_camera_map_keeps_same_camera_matches(self):
        labels = np.repeat(np.arange(3), 2)
        embeddings = np.repeat(np.eye(3) * 5.0, 2, axis=0)
        result = evaluate_protocol(embeddings, labels, [7] * 6, trials=2, seed=3)
        self.assertEqual(result.rank(1), 1.0)
        self.assertAlmostEqual(result.map_value, 1.0)

    def test_deterministic(self):
        labels = np.repeat(np.arange(4), 4)
        cameras = np.tile([0, 1], 8)
        embeddings = self.rng.normal(size=(16, 3))
        first = evaluate_protocol(embeddings, labels, cameras, trials=5, seed=6)
        second = evaluate_protocol(embeddings, labels, cameras, trials=5, seed=6)
        self.assertEqual(first.to_dict(), second.to_dict())
