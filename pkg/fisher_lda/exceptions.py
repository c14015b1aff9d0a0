"""
Custom exceptions for the fisher_lda package.

Every exception carries the exit code the command-line runner maps it to.
"""

from typing import Any, Optional


class FisherLdaError(Exception):
    """Base class for all errors raised by this package."""
    exit_code = 1


class ConfigError(FisherLdaError):
    """Raised for unreadable, malformed or invalid run configurations."""
    exit_code = 2


class DescriptorFormatError(FisherLdaError):
    """Raised when a descriptor file has a wrong magic, is truncated or holds non-finite values."""
    exit_code = 2


class ManifestError(FisherLdaError):
    """Raised for malformed manifests or manifests pointing to missing files."""
    exit_code = 2


class CheckpointError(FisherLdaError):
    """Raised when a checkpoint file cannot be decoded."""
    exit_code = 2


class ImageLookupError(FisherLdaError):
    """Raised when an image id is not present in the manifest."""
    exit_code = 3


class ProtocolError(FisherLdaError):
    """Raised when probe/gallery composition violates the evaluation protocol."""
    exit_code = 4


class DimensionError(FisherLdaError, ValueError):
    """Raised when array shapes do not agree."""
    exit_code = 2


class RankError(FisherLdaError, ValueError):
    """Raised when data does not have enough rank for the requested projection."""
    exit_code = 2

    def __init__(self, message: str, achievable_rank: int):
        super().__init__(message)
        self.achievable_rank = achievable_rank


class InsufficientDataError(FisherLdaError, ValueError):
    """Raised when there are fewer samples than the model needs."""
    exit_code = 2


class BatchSizeError(FisherLdaError, ValueError):
    """Raised when a train-mode forward pass gets fewer than two rows."""
    exit_code = 2


class ConsistencyError(FisherLdaError, ValueError):
    """Raised when cached intermediate results do not match the parameters they are used with."""
    exit_code = 5


class LabelError(FisherLdaError, ValueError):
    """Raised for class labels outside the valid range."""
    exit_code = 2


class BatchCompositionError(FisherLdaError, ValueError):
    """Raised when a batch has a class with a single sample or fewer than two classes."""
    exit_code = 2


class SamplingError(FisherLdaError, ValueError):
    """Raised when no batch with the requested composition can be drawn."""
    exit_code = 2


class RegularizationError(FisherLdaError):
    """Raised when the regularized within-class scatter is not positive definite."""
    exit_code = 5


class LineSearchError(FisherLdaError):
    """Raised when every line-search candidate produced a non-finite objective."""
    exit_code = 5


class StateError(FisherLdaError):
    """Raised when a training state is used before it has been initialized."""
    exit_code = 2


class DivergenceError(FisherLdaError):
    """Raised when training produces a non-finite loss or gradient."""
    exit_code = 5

    def __init__(self, message: str, state: Optional[Any] = None):
        super().__init__(message)
        self.state = state
