"""
Descriptor ingestion, synthetic datasets and PCA reduction of local descriptors.
"""

from .descriptors import DescriptorSet, read_descriptor_file, write_descriptor_file
from .manifest import Manifest, ManifestEntry, read_manifest, write_manifest, load_descriptor_sets
from .pca import PcaModel, pca_fit, pca_project, pca_reconstruct
from .synth import synth_generate

__all__ = [
    "DescriptorSet",
    "read_descriptor_file",
    "write_descriptor_file",
    "Manifest",
    "ManifestEntry",
    "read_manifest",
    "write_manifest",
    "load_descriptor_sets",
    "PcaModel",
    "pca_fit",
    "pca_project",
    "pca_reconstruct",
    "synth_generate",
]
