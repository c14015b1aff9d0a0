"""
Supervised fully-connected layers with batch normalization, dropout and a cross-entropy head.
"""

from .layers import (
    BN_EPS, DenseLayer, ForwardTrace, NetParams, backward, forward, head_backward, head_forward, init_net,
)
from .losses import cross_entropy_loss

__all__ = [
    "BN_EPS",
    "DenseLayer",
    "ForwardTrace",
    "NetParams",
    "backward",
    "cross_entropy_loss",
    "forward",
    "head_backward",
    "head_forward",
    "init_net",
]
