# fisher_lda/trainer/tests/test_line_search.py
from unittest import TestCase

from fisher_lda.exceptions import LineSearchError
from fisher_lda.trainer.line_search import grid_line_search


class GridLineSearchTestCase(TestCase):
    """Test cases for grid_line_search."""

    def test_quadratic_minimum(self):
        result = grid_line_search(lambda eta: (eta - 0.1) ** 2, [0.01, 0.1, 1.0])
        self.assertEqual(result.eta, 0.1)
        self.assertEqual(result.loss, 0.0)
        self.assertEqual([eta for eta, _ in result.evaluations], [0.0, 0.01, 0.1, 1.0])

    def test_zero_step_wins_when_nothing_improves(self):
        result = grid_line_search(lambda eta: eta, [0.5, 1.0])
        self.assertEqual(result.eta, 0.0)
        self.assertEqual(result.baseline_loss, 0.0)

    def test_ties_go_to_smaller_step(self):
        result = grid_line_search(lambda eta: 1.0 if eta == 0.0 else 0.5, [0.3, 0.1, 0.2])
        self.assertEqual(result.eta, 0.1)

    def test_non_finite_candidates_skipped(self):
        result = grid_line_search(lambda eta: float("nan") if eta > 0.5 else -eta, [0.1, 1.0])
        self.assertEqual(result.eta, 0.1)

    def test_all_non_finite(self):
        with self.assertRaises(LineSearchError):
            grid_line_search(lambda eta: float("inf"), [0.1])

    def test_threads_give_same_answer(self):
        loss = lambda eta: (eta - 0.01) ** 2  # noqa: E731
        grid = [1e-4, 1e-3, 1e-2, 1e-1, 1.0]
        self.assertEqual(grid_line_search(loss, grid, threads=3), grid_line_search(loss, grid))
