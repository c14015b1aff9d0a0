"""
Fisher-vector encoding and its gradients with respect to the mixture vocabulary.
"""

from .encode import FisherVector, fv_encode, fv_encode_image, fv_normalize, fv_normalize_backward
from .gradients import FvGmmGradient, GmmGradient, fv_grad_gmm, fv_jacobian_gmm

__all__ = [
    "FisherVector",
    "FvGmmGradient",
    "GmmGradient",
    "fv_encode",
    "fv_encode_image",
    "fv_grad_gmm",
    "fv_jacobian_gmm",
    "fv_normalize",
    "fv_normalize_backward",
]
