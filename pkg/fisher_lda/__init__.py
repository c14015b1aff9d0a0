"""
fisher_lda

Fisher-vector encoding, fully connected layers and an eigenvalue-based LDA
objective trained end-to-end, with retrieval evaluation for cross-view
identity matching.
"""

__version__ = "0.3.0"
