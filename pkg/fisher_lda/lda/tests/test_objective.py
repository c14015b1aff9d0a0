# fisher_lda/lda/tests/test_objective.py
from unittest import TestCase

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from fisher_lda.exceptions import ConsistencyError
from fisher_lda.lda.eigen import lda_solve
from fisher_lda.lda.objective import lda_grad_hidden, lda_loss
from fisher_lda.lda.scatter import scatter

LAMBDA = 1e-3
EPSILON = 1.0
STEP = 1e-5


def loss_of(hidden, labels, mask):
    solution = lda_solve(scatter(hidden, labels), LAMBDA)
    return float(solution.eigenvalues[mask].mean())


def numeric_grad(hidden, labels, mask):
    grad = np.zeros_like(hidden)
    for index in np.ndindex(hidden.shape):
        plus, minus = hidden.copy(), hidden.copy()
        plus[index] += STEP
        minus[index] -= STEP
        grad[index] = (loss_of(plus, labels, mask) - loss_of(minus, labels, mask)) / (2 * STEP)
    return grad


class LdaLossTestCase(TestCase):
    """Test cases for lda_loss."""

    def test_only_minimum(self):
        loss, mask = lda_loss(np.array([1.0, 2.0, 3.0]), 1.0)
        self.assertEqual(loss, 1.0)
        assert_array_equal(mask, [True, False, False])

    def test_ties(self):
        loss, mask = lda_loss(np.array([5.0, 5.0, 5.0]), 1.0)
        self.assertEqual(loss, 5.0)
        self.assertTrue(np.all(mask))

    def test_two_active(self):
        loss, mask = lda_loss(np.array([0.5, 1.4, 1.6]), 1.0)
        self.assertAlmostEqual(loss, 0.95)
        assert_array_equal(mask, [True, True, False])

    def test_minimum_always_active(self):
        _, mask = lda_loss(np.array([2.0, 3.0]), 0.0)
        assert_array_equal(mask, [True, False])

    def test_all_objective(self):
        loss, mask = lda_loss(np.array([1.0, 2.0, 6.0]), 1.0, objective="all")
        self.assertEqual(loss, 3.0)
        self.assertTrue(np.all(mask))


class LdaGradHiddenTestCase(TestCase):
    """Test cases for lda_grad_hidden."""

    def setUp(self):
        self.rng = np.random.default_rng(53)

    def test_matches_finite_differences(self):
        """Random N=8, d=4, C=3 batches away from eigenvalue crossings."""
        checked = 0
        labels = np.array([0, 0, 0, 1, 1, 1, 2, 2])
        while checked < 20:
            hidden = self.rng.normal(size=(8, 4)) + np.eye(4)[labels] * 1.5
            solution = lda_solve(scatter(hidden, labels), LAMBDA)
            _, mask = lda_loss(solution.eigenvalues, EPSILON)
            values = solution.eigenvalues
            if abs(values[1] - values[0]) < 1e-3 or abs(values[0] + EPSILON - values[1]) < 1e-3:
                continue

            analytic = lda_grad_hidden(hidden, labels, solution, mask)
            numeric = numeric_grad(hidden, labels, mask)
            self.assertLess(np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric), 1e-4)
            checked += 1

    def test_equal_class_means(self):
        """Class means that coincide by symmetry give a non-positive spectrum and a checkable gradient."""
        hidden = np.array([
            [1.0, 0.0], [-1.0, 0.0], [0.0, 0.0],
            [0.0, 1.0], [0.0, -1.0],
            [0.9, 0.3], [-0.9, -0.3],
        ])
        labels = np.array([0, 0, 0, 1, 1, 2, 2])
        solution = lda_solve(scatter(hidden, labels), LAMBDA)
        mask = np.array([True, False])
        self.assertLess(np.max(solution.eigenvalues), 0.0)

        analytic = lda_grad_hidden(hidden, labels, solution, mask)
        numeric = numeric_grad(hidden, labels, mask)
        self.assertLess(np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-8), 1e-4)

    def test_translation_invariance(self):
        labels = np.repeat([0, 1, 2], 3)
        hidden = self.rng.normal(size=(9, 5))
        shift = self.rng.normal(size=5) * 10
        solution = lda_solve(scatter(hidden, labels), LAMBDA)
        shifted = lda_solve(scatter(hidden + shift, labels), LAMBDA)
        assert_allclose(shifted.eigenvalues, solution.eigenvalues, rtol=1e-8, atol=1e-8)

        _, mask = lda_loss(solution.eigenvalues, EPSILON)
        grad = lda_grad_hidden(hidden, labels, solution, mask)
        assert_allclose(grad.sum(axis=0), np.zeros(5), atol=1e-8)

    def test_mask_mismatch(self):
        labels = np.repeat([0, 1, 2], 3)
        hidden = self.rng.normal(size=(9, 4))
        solution = lda_solve(scatter(hidden, labels), LAMBDA)
        with self.assertRaises(ConsistencyError):
            lda_grad_hidden(hidden, labels, solution, np.array([True, False, True]))
