"""
line_search.py

Grid line search over a step size, always including the zero step.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import numpy as np

from ..exceptions import LineSearchError

logger = logging.getLogger(__name__)


@dataclass
class LineSearchResult:
    eta: float
    loss: float
    evaluations: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def baseline_loss(self) -> float:
        """Loss of the zero step."""
        return dict(self.evaluations)[0.0]


def grid_line_search(loss_fn: Callable[[float], float], grid: Sequence[float], threads: int = 1) -> LineSearchResult:
    """
    Minimize ``loss_fn`` over {0} and ``grid``.

    Non-finite losses are skipped; ties go to the smaller step.

    Raises:
        LineSearchError: If every candidate produced a non-finite loss
    """
    candidates = sorted({0.0, *(float(eta) for eta in grid)})
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            losses = list(executor.map(loss_fn, candidates))
    else:
        losses = [loss_fn(eta) for eta in candidates]

    evaluations = [(eta, float(loss)) for eta, loss in zip(candidates, losses)]
    best_eta, best_loss = None, np.inf
    for eta, loss in evaluations:
        logger.debug(f"Line search candidate eta={eta:g}: loss {loss:.6g}")
        if not np.isfinite(loss):
            continue
        if best_eta is None or loss < best_loss:
            best_eta, best_loss = eta, loss

    if best_eta is None:
        raise LineSearchError(f"Every line-search candidate was non-finite: {evaluations}")
    return LineSearchResult(eta=best_eta, loss=best_loss, evaluations=evaluations)
