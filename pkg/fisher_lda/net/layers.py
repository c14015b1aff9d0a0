"""
layers.py

Fully-connected stack: affine layer + ReLU, inverted dropout after the ReLU
of every layer but the last, and batch normalization after the last layer.
With batch normalization on, the last affine output feeds it without a ReLU.
An optional linear head maps the hidden output to class logits for the
cross-entropy baseline.
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import BatchSizeError, ConsistencyError, DimensionError

logger = logging.getLogger(__name__)

BN_EPS = 1e-5
MODES = ("train", "eval")


@dataclass(eq=False)
class DenseLayer:
    """Affine map x -> x W^T + b with W of shape out x in."""
    weight: np.ndarray
    bias: np.ndarray

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]

    def copy(self) -> "DenseLayer":
        return DenseLayer(self.weight.copy(), self.bias.copy())


@dataclass(eq=False)
class NetParams:
    """Parameters of the supervised layers, their batch normalization and the optional head."""
    layers: List[DenseLayer]
    bn_gamma: np.ndarray
    bn_beta: np.ndarray
    bn_running_mean: np.ndarray
    bn_running_var: np.ndarray
    dropout_rate: float = 0.0
    use_batch_norm: bool = True
    bn_momentum: float = 0.9
    head: Optional[DenseLayer] = None

    def __post_init__(self):
        if not self.layers:
            raise DimensionError("A network needs at least one layer")
        for index in range(1, len(self.layers)):
            if self.layers[index].in_dim != self.layers[index - 1].out_dim:
                raise DimensionError(
                    f"Layer {index} expects {self.layers[index].in_dim} inputs, "
                    f"layer {index - 1} produces {self.layers[index - 1].out_dim}"
                )
        width = self.output_dim
        for name in ("bn_gamma", "bn_beta", "bn_running_mean", "bn_running_var"):
            if getattr(self, name).shape != (width,):
                raise DimensionError(f"{name} must have shape ({width},), got {getattr(self, name).shape}")
        if np.any(self.bn_running_var <= 0):
            raise ValueError("Batch-norm running variances must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")
        if self.head is not None and self.head.in_dim != width:
            raise DimensionError(f"Head expects {self.head.in_dim} inputs, network produces {width}")

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def widths(self) -> List[int]:
        return [layer.out_dim for layer in self.layers]

    def named_arrays(self, include_running: bool = False) -> "OrderedDict[str, np.ndarray]":
        """
        Live references to the parameter arrays keyed by stable names.

        Learnable arrays come first (layer{i}.W, layer{i}.b, bn.gamma, bn.beta,
        head.W, head.b); running statistics are appended on request.
        """
        arrays = OrderedDict()
        for index, layer in enumerate(self.layers):
            arrays[f"layer{index}.W"] = layer.weight
            arrays[f"layer{index}.b"] = layer.bias
        if self.use_batch_norm:
            arrays["bn.gamma"] = self.bn_gamma
            arrays["bn.beta"] = self.bn_beta
        if self.head is not None:
            arrays["head.W"] = self.head.weight
            arrays["head.b"] = self.head.bias
        if include_running:
            arrays["bn.running_mean"] = self.bn_running_mean
            arrays["bn.running_var"] = self.bn_running_var
        return arrays

    def copy(self) -> "NetParams":
        return NetParams(
            layers=[layer.copy() for layer in self.layers],
            bn_gamma=self.bn_gamma.copy(),
            bn_beta=self.bn_beta.copy(),
            bn_running_mean=self.bn_running_mean.copy(),
            bn_running_var=self.bn_running_var.copy(),
            dropout_rate=self.dropout_rate,
            use_batch_norm=self.use_batch_norm,
            bn_momentum=self.bn_momentum,
            head=None if self.head is None else self.head.copy(),
        )

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(array)) for array in self.named_arrays(include_running=True).values())


@dataclass
class ForwardTrace:
    """Everything the backward pass needs from one forward evaluation."""
    mode: str
    inputs: List[np.ndarray] = field(default_factory=list)
    pre_activations: List[np.ndarray] = field(default_factory=list)
    dropout_masks: List[Optional[np.ndarray]] = field(default_factory=list)
    bn_input: Optional[np.ndarray] = None
    bn_mean: Optional[np.ndarray] = None
    bn_var: Optional[np.ndarray] = None
    bn_normalized: Optional[np.ndarray] = None
    output: Optional[np.ndarray] = None


def _he_uniform(rng: np.random.Generator, out_dim: int, in_dim: int) -> np.ndarray:
    limit = np.sqrt(6.0 / in_dim)
    return rng.uniform(-limit, limit, size=(out_dim, in_dim))


def init_net(input_dim: int, widths: Sequence[int], dropout_rate: float, seed: int,
             use_batch_norm: bool = True, num_classes: Optional[int] = None,
             bn_momentum: float = 0.9) -> NetParams:
    """
    He-uniform weights, zero biases, identity batch normalization.

    Args:
        input_dim: Width of the Fisher-vector input
        widths: Output width of every layer
        dropout_rate: Dropout rate in [0, 1)
        seed: Initialization seed
        use_batch_norm: Apply batch normalization after the last layer
        num_classes: Add a linear classification head with this many outputs
        bn_momentum: Weight of the old running statistics in each update
    """
    if input_dim < 1 or not widths or min(widths) < 1:
        raise DimensionError(f"Invalid network shape: input {input_dim}, widths {list(widths)}")
    rng = np.random.default_rng(seed)
    layers = []
    fan_in = input_dim
    for width in widths:
        layers.append(DenseLayer(_he_uniform(rng, width, fan_in), np.zeros(width)))
        fan_in = width

    head = None
    if num_classes is not None:
        head = DenseLayer(_he_uniform(rng, num_classes, fan_in), np.zeros(num_classes))

    logger.debug(f"Initialized network {input_dim} -> {'-'.join(str(w) for w in widths)} (seed={seed})")
    return NetParams(
        layers=layers,
        bn_gamma=np.ones(fan_in),
        bn_beta=np.zeros(fan_in),
        bn_running_mean=np.zeros(fan_in),
        bn_running_var=np.ones(fan_in),
        dropout_rate=dropout_rate,
        use_batch_norm=use_batch_norm,
        bn_momentum=bn_momentum,
        head=head,
    )


def _rectifies(params: NetParams, index: int) -> bool:
    return index < len(params.layers) - 1 or not params.use_batch_norm


def forward(params: NetParams, batch: np.ndarray, mode: str = "train", seed: int = 0,
            update_running_stats: bool = True) -> Tuple[np.ndarray, ForwardTrace]:
    """
    Evaluate the network on a batch.

    Train mode draws dropout masks from ``seed``, normalizes with batch
    statistics and, unless ``update_running_stats`` is off, moves the running
    statistics towards them. Eval mode uses the running statistics and no dropout.

    Raises:
        BatchSizeError: If fewer than two rows are given in train mode
        DimensionError: If the batch width does not match the first layer
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != params.input_dim:
        raise DimensionError(f"Batch has shape {batch.shape}, network expects {params.input_dim} columns")
    if mode == "train" and batch.shape[0] < 2:
        raise BatchSizeError(f"Train-mode forward needs at least 2 rows, got {batch.shape[0]}")

    rng = np.random.default_rng(seed)
    trace = ForwardTrace(mode=mode)
    activations = batch
    last = len(params.layers) - 1
    for index, layer in enumerate(params.layers):
        trace.inputs.append(activations)
        pre = activations @ layer.weight.T + layer.bias
        trace.pre_activations.append(pre)
        activations = np.maximum(pre, 0.0) if _rectifies(params, index) else pre

        mask = None
        if mode == "train" and index < last and params.dropout_rate > 0.0:
            keep = 1.0 - params.dropout_rate
            mask = (rng.random(activations.shape) < keep) / keep
            activations = activations * mask
        trace.dropout_masks.append(mask)

    if params.use_batch_norm:
        trace.bn_input = activations
        if mode == "train":
            mean = activations.mean(axis=0)
            var = activations.var(axis=0)
            if update_running_stats:
                momentum = params.bn_momentum
                params.bn_running_mean[:] = momentum * params.bn_running_mean + (1.0 - momentum) * mean
                params.bn_running_var[:] = momentum * params.bn_running_var + (1.0 - momentum) * var
        else:
            mean = params.bn_running_mean
            var = params.bn_running_var
        trace.bn_mean = mean
        trace.bn_var = var
        trace.bn_normalized = (activations - mean) / np.sqrt(var + BN_EPS)
        activations = params.bn_gamma * trace.bn_normalized + params.bn_beta

    trace.output = activations
    return activations, trace


def backward(params: NetParams, trace: ForwardTrace,
             upstream: np.ndarray) -> Tuple[Dict[str, np.ndarray], np.ndarray]:
    """
    Back-propagate ``upstream`` (gradient w.r.t. the forward output) through the traced pass.

    Returns:
        tuple: (gradients keyed like ``params.named_arrays()`` without the head, input gradients)

    Raises:
        ConsistencyError: If the trace was not produced with parameters of this shape
    """
    upstream = np.asarray(upstream, dtype=np.float64)
    if trace.output is None or upstream.shape != trace.output.shape:
        raise ConsistencyError(
            f"Upstream shape {upstream.shape} does not match forward output "
            f"{None if trace.output is None else trace.output.shape}"
        )
    if len(trace.pre_activations) != len(params.layers) or any(
            pre.shape[1] != layer.out_dim for pre, layer in zip(trace.pre_activations, params.layers)):
        raise ConsistencyError("Forward trace does not match the network parameters")
    if params.use_batch_norm != (trace.bn_normalized is not None):
        raise ConsistencyError("Forward trace and parameters disagree on batch normalization")

    grads: Dict[str, np.ndarray] = OrderedDict()
    grad = upstream

    if params.use_batch_norm:
        inv_std = 1.0 / np.sqrt(trace.bn_var + BN_EPS)
        grads["bn.gamma"] = np.sum(grad * trace.bn_normalized, axis=0)
        grads["bn.beta"] = np.sum(grad, axis=0)
        grad_normalized = grad * params.bn_gamma
        if trace.mode == "train":
            count = grad.shape[0]
            grad = (inv_std / count) * (
                count * grad_normalized
                - grad_normalized.sum(axis=0)
                - trace.bn_normalized * np.sum(grad_normalized * trace.bn_normalized, axis=0)
            )
        else:
            grad = grad_normalized * inv_std

    layer_grads = []
    for index in range(len(params.layers) - 1, -1, -1):
        layer = params.layers[index]
        mask = trace.dropout_masks[index]
        if mask is not None:
            grad = grad * mask
        if _rectifies(params, index):
            grad = grad * (trace.pre_activations[index] > 0.0)
        layer_grads.append((index, grad.T @ trace.inputs[index], grad.sum(axis=0)))
        grad = grad @ layer.weight

    ordered: Dict[str, np.ndarray] = OrderedDict()
    for index, d_weight, d_bias in sorted(layer_grads, key=lambda item: item[0]):
        ordered[f"layer{index}.W"] = d_weight
        ordered[f"layer{index}.b"] = d_bias
    ordered.update(grads)
    return ordered, grad


def head_forward(params: NetParams, hidden: np.ndarray) -> np.ndarray:
    """Class logits hidden W_c^T + b_c."""
    if params.head is None:
        raise ConsistencyError("Network has no classification head")
    return hidden @ params.head.weight.T + params.head.bias


def head_backward(params: NetParams, hidden: np.ndarray,
                  upstream: np.ndarray) -> Tuple[Dict[str, np.ndarray], np.ndarray]:
    if params.head is None:
        raise ConsistencyError("Network has no classification head")
    grads = OrderedDict([("head.W", upstream.T @ hidden), ("head.b", upstream.sum(axis=0))])
    return grads, upstream @ params.head.weight
