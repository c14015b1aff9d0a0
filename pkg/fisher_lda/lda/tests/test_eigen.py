# fisher_lda/lda/tests/test_eigen.py
from unittest import TestCase
from unittest.mock import patch

import numpy as np
import scipy.linalg
from numpy.testing import assert_allclose

from fisher_lda.exceptions import DimensionError, RegularizationError
from fisher_lda.lda.eigen import eigen_residuals, lda_projection, lda_solve
from fisher_lda.lda.scatter import ScatterSet, scatter

from .test_scatter import TOY_HIDDEN, TOY_LABELS


def scatter_from_matrices(s_w, s_b, num_classes):
    dim = s_w.shape[0]
    return ScatterSet(s_w=s_w, s_b=s_b, s_t=s_w + s_b, class_means=np.zeros((num_classes, dim)),
                      counts=np.full(num_classes, 2), classes=np.arange(num_classes))


class LdaSolveTestCase(TestCase):
    """Test cases for lda_solve."""

    def setUp(self):
        self.rng = np.random.default_rng(51)

    def test_zero_between_scatter(self):
        s_w = np.diag([1.0, 2.0, 3.0])
        solution = lda_solve(scatter_from_matrices(s_w, np.zeros((3, 3)), 3), 1e-3)
        assert_allclose(solution.eigenvalues, [0.0, 0.0], atol=1e-12)

    def test_toy_spectrum(self):
        solution = lda_solve(scatter(TOY_HIDDEN, TOY_LABELS), 1e-3, num_eigen=2)
        assert_allclose(solution.eigenvalues, [-(2 / 3) / (2 + 1e-3), (4 / 3) / 1e-3], rtol=1e-9)
        self.assertAlmostEqual(solution.eigenvalues[0], -0.33317, places=5)

    def test_toy_keeps_top_c_minus_one(self):
        solution = lda_solve(scatter(TOY_HIDDEN, TOY_LABELS), 1e-3)
        self.assertEqual(solution.eigenvalues.shape, (1,))
        self.assertAlmostEqual(solution.eigenvalues[0], 1333.3333333, places=4)

    def test_matches_dense_oracle(self):
        """Eigenvalues agree with scipy's dense generalized solver and satisfy the residual bound."""
        for _ in range(10):
            dim, num_classes = 5, 4
            a = self.rng.normal(size=(dim, dim))
            b = self.rng.normal(size=(dim, dim))
            s_w = a @ a.T
            s_b = 0.5 * (b + b.T)
            scatter_set = scatter_from_matrices(s_w, s_b, num_classes)
            solution = lda_solve(scatter_set, 1e-3)

            expected = scipy.linalg.eigh(s_b, s_w + 1e-3 * np.eye(dim), eigvals_only=True)[-3:]
            assert_allclose(solution.eigenvalues, expected, rtol=1e-8, atol=1e-10)
            self.assertTrue(np.all(np.diff(solution.eigenvalues) >= 0))

            bound = 1e-6 * (1 + np.abs(solution.eigenvalues)) * np.linalg.norm(solution.eigenvectors, axis=1)
            self.assertTrue(np.all(eigen_residuals(scatter_set, solution) <= bound))

            regularized = s_w + 1e-3 * np.eye(dim)
            norms = np.einsum('id,de,ie->i', solution.eigenvectors, regularized, solution.eigenvectors)
            assert_allclose(norms, np.ones(3), atol=1e-8)

    def test_not_positive_definite(self):
        s_w = -np.eye(2)
        with self.assertRaises(RegularizationError):
            lda_solve(scatter_from_matrices(s_w, np.eye(2), 2), 1e-3)

    def test_hidden_width_too_small(self):
        with self.assertRaises(DimensionError):
            lda_solve(scatter_from_matrices(np.eye(2), np.eye(2), 4), 1e-3)

    def test_residual_warning(self):
        scatter_set = scatter(TOY_HIDDEN, TOY_LABELS)
        with patch("fisher_lda.lda.eigen.eigen_residuals", return_value=np.array([1.0])), \
                patch("fisher_lda.lda.eigen.logger") as mock_logger:
            lda_solve(scatter_set, 1e-3)
        mock_logger.warning.assert_called_once()

    def test_monotone_separation(self):
        """Pulling two class means apart never lowers the largest eigenvalue."""
        base = self.rng.normal(size=(10, 3))
        labels = np.repeat([0, 1], 5)
        direction = np.array([1.0, 0.0, 0.0])
        previous = -np.inf
        for shift in np.linspace(0.0, 4.0, 9):
            hidden = base + np.where(labels[:, None] == 1, shift, 0.0) * direction
            top = lda_solve(scatter(hidden, labels), 1e-3).eigenvalues[-1]
            self.assertGreaterEqual(top, previous - 1e-9)
            previous = top


class LdaProjectionTestCase(TestCase):
    """Test cases for lda_projection."""

    def test_projection_separates_classes(self):
        rng = np.random.default_rng(52)
        labels = np.repeat([0, 1, 2], 10)
        hidden = rng.normal(size=(30, 4)) + np.eye(4)[labels] * 5
        solution = lda_projection(hidden, labels, 1e-3)
        self.assertEqual(solution.eigenvectors.shape, (2, 4))
        coords = solution.project(hidden)
        self.assertEqual(coords.shape, (30, 2))
