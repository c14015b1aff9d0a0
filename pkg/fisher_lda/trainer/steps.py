"""
steps.py

The two alternating updates of joint training:

- a network step: Fisher vectors under the current mixtures, forward pass,
  eigenvalue objective (or cross-entropy), backward pass and one Nesterov step;
- a mixture step: the objective's gradient is carried through the network
  input into the Fisher-vector gradients of every image, and a grid line search
  over G - eta * delta picks the step, eta = 0 included.

All minimizers see the loss -objective.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..dataset.descriptors import DescriptorSet
from ..exceptions import DivergenceError, RegularizationError
from ..fisher.gradients import GmmGradient, fv_grad_gmm
from ..gmm.model import GmmModel
from ..lda.eigen import lda_solve
from ..lda.objective import lda_grad_hidden, lda_loss
from ..lda.scatter import scatter
from ..net.layers import backward, forward, head_backward, head_forward
from ..net.losses import cross_entropy_loss
from ..shared_utils.seeding import derive_seed
from .line_search import LineSearchResult, grid_line_search
from .optimizer import learning_rate
from .state import TrainState

logger = logging.getLogger(__name__)

LabelledBatch = Tuple[Sequence[DescriptorSet], np.ndarray]


@dataclass
class StepMetrics:
    objective: float
    eigenvalues: np.ndarray
    lr: float


@dataclass
class GmmStepResult:
    eta: float
    objective_at_zero: float
    objective: float
    evaluations: List[Tuple[float, float]] = field(default_factory=list)


def _objective(state: TrainState, hidden: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    config = state.config
    if config.loss_kind == "lda":
        solution = lda_solve(scatter(hidden, labels), config.lambda_reg)
        value, _ = lda_loss(solution.eigenvalues, config.epsilon_offset, config.lda_objective)
        return value, solution.eigenvalues
    loss, _ = cross_entropy_loss(head_forward(state.net, hidden), state.label_indices(labels))
    return -loss, np.zeros(0)


def _loss_gradients(state: TrainState, hidden: np.ndarray,
                    labels: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray, Dict[str, np.ndarray]]:
    """
    Objective value, eigenvalue spectrum, gradient of -objective w.r.t. the hidden
    batch, and gradients of -objective w.r.t. the head parameters.
    """
    config = state.config
    if config.loss_kind == "lda":
        solution = lda_solve(scatter(hidden, labels), config.lambda_reg)
        value, mask = lda_loss(solution.eigenvalues, config.epsilon_offset, config.lda_objective)
        d_hidden = -lda_grad_hidden(hidden, labels, solution, mask)
        return value, solution.eigenvalues, d_hidden, {}

    loss, d_logits = cross_entropy_loss(head_forward(state.net, hidden), state.label_indices(labels))
    head_grads, d_hidden = head_backward(state.net, hidden, d_logits)
    return -loss, np.zeros(0), d_hidden, head_grads


def _all_finite(arrays) -> bool:
    return all(np.all(np.isfinite(array)) for array in arrays)


def train_step_theta(state: TrainState, descriptor_sets: Sequence[DescriptorSet], labels: np.ndarray,
                     lr: Optional[float] = None) -> StepMetrics:
    """
    One network update on a batch.

    Raises:
        DivergenceError: If the objective, a gradient or an updated parameter is non-finite
    """
    state.require_initialized()
    config = state.config
    if lr is None:
        lr = learning_rate(config, state.epoch)
    labels = np.asarray(labels)

    fvs = state.encode_many(descriptor_sets, threads=config.threads)
    hidden, trace = forward(state.net, fvs, mode="train",
                            seed=derive_seed(state.seed, "dropout", state.epoch, state.step))
    if not np.all(np.isfinite(hidden)):
        raise DivergenceError(f"Non-finite network output at epoch {state.epoch}, step {state.step}", state)
    value, eigenvalues, d_hidden, head_grads = _loss_gradients(state, hidden, labels)
    grads, _ = backward(state.net, trace, d_hidden)
    grads.update(head_grads)

    if not np.isfinite(value) or not _all_finite(grads.values()):
        raise DivergenceError(f"Non-finite objective or gradient at epoch {state.epoch}, step {state.step}", state)

    state.optimizer.step(state.net.named_arrays(), grads, lr)
    if not state.net.is_finite():
        raise DivergenceError(f"Non-finite network parameters after epoch {state.epoch}, step {state.step}", state)

    state.step += 1
    logger.debug(f"Step {state.step}: objective {value:.6g}, lr {lr:g}")
    return StepMetrics(objective=value, eigenvalues=eigenvalues, lr=lr)


def batch_objective(state: TrainState, descriptor_sets: Sequence[DescriptorSet], labels: np.ndarray,
                    gmms: Optional[Sequence[GmmModel]] = None, seed: Optional[int] = None) -> float:
    """
    Objective of a batch with batch-norm batch statistics and seeded dropout,
    leaving the running statistics untouched.
    """
    state.require_initialized()
    if seed is None:
        seed = derive_seed(state.seed, "objective", state.epoch, state.step)
    fvs = state.encode_many(descriptor_sets, gmms=gmms)
    hidden, _ = forward(state.net, fvs, mode="train", seed=seed, update_running_stats=False)
    value, _ = _objective(state, hidden, np.asarray(labels))
    return value


def _channel_slices(state: TrainState) -> List[slice]:
    slices, offset = [], 0
    for gmm in state.gmms:
        slices.append(slice(offset, offset + gmm.fv_length))
        offset += gmm.fv_length
    return slices


def gmm_gradient(state: TrainState, batches: Sequence[LabelledBatch]) -> List[GmmGradient]:
    """Gradient of the batch-averaged -objective w.r.t. every channel's reparametrized mixture."""
    config = state.config
    slices = _channel_slices(state)
    totals = [GmmGradient.zeros_like(gmm) for gmm in state.gmms]

    for batch_index, (descriptor_sets, labels) in enumerate(batches):
        fvs = state.encode_many(descriptor_sets)
        seed = derive_seed(state.seed, "gmm_objective", state.epoch, batch_index)
        hidden, trace = forward(state.net, fvs, mode="train", seed=seed, update_running_stats=False)
        _, _, d_hidden, _ = _loss_gradients(state, hidden, np.asarray(labels))
        _, d_fvs = backward(state.net, trace, d_hidden)

        def image_gradients(row: int) -> List[GmmGradient]:
            projected = state.project_channels(descriptor_sets[row])
            return [
                fv_grad_gmm(gmm, projected[c], d_fvs[row, slices[c]], config.gamma_threshold,
                            config.subsample_fraction,
                            seed=derive_seed(state.seed, "subsample", state.epoch, batch_index, row, c))
                for c, gmm in enumerate(state.gmms)
            ]

        rows = range(len(descriptor_sets))
        if config.threads > 1:
            with ThreadPoolExecutor(max_workers=config.threads) as executor:
                per_image = list(executor.map(image_gradients, rows))
        else:
            per_image = [image_gradients(row) for row in rows]

        for grads in per_image:
            totals = [total + grad for total, grad in zip(totals, grads)]

    return [total.scaled(1.0 / len(batches)) for total in totals]


def step_gmms(gmms: Sequence[GmmModel], deltas: Sequence[GmmGradient], eta: float) -> List[GmmModel]:
    """Candidate mixtures G - eta * delta with the variance floor re-applied."""
    return [
        gmm.with_parameters(
            log_weights_unnorm=gmm.log_weights_unnorm - eta * delta.d_log_weights_unnorm,
            means=gmm.means - eta * delta.d_means,
            log_vars=gmm.log_vars - eta * delta.d_log_vars,
        )
        for gmm, delta in zip(gmms, deltas)
    ]


def train_step_gmm(state: TrainState, batches: Sequence[LabelledBatch]) -> GmmStepResult:
    """
    One line-searched mixture update on a fixed sample of batches.

    Raises:
        DivergenceError: If the mixture gradient is non-finite
        LineSearchError: If every candidate step gives a non-finite objective
    """
    state.require_initialized()
    config = state.config
    deltas = gmm_gradient(state, batches)
    if not all(delta.is_finite() for delta in deltas):
        raise DivergenceError(f"Non-finite mixture gradient at epoch {state.epoch}", state)

    seeds = [derive_seed(state.seed, "gmm_objective", state.epoch, i) for i in range(len(batches))]

    def sampled_loss(eta: float) -> float:
        candidate = step_gmms(state.gmms, deltas, eta)
        try:
            values = [batch_objective(state, sets, labels, gmms=candidate, seed=seed)
                      for (sets, labels), seed in zip(batches, seeds)]
        except RegularizationError as e:
            logger.debug(f"Line search candidate eta={eta:g} failed: {e}")
            return float("nan")
        return -float(np.mean(values))

    result: LineSearchResult = grid_line_search(sampled_loss, config.line_search_grid, threads=config.threads)
    if result.eta > 0.0:
        state.gmms = step_gmms(state.gmms, deltas, result.eta)
        state.invalidate_fv_cache()

    logger.info(
        f"Mixture update at epoch {state.epoch}: eta={result.eta:g}, "
        f"objective {-result.baseline_loss:.6g} -> {-result.loss:.6g}"
    )
    return GmmStepResult(
        eta=result.eta,
        objective_at_zero=-result.baseline_loss,
        objective=-result.loss,
        evaluations=[(eta, -loss) for eta, loss in result.evaluations],
    )
