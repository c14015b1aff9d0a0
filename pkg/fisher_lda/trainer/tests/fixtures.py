"""Desk-scale synthetic data and configs shared by the trainer tests."""

from fisher_lda.dataset.synth import synth_generate, synth_split
from fisher_lda.trainer.config import TrainConfig

DESK_CONFIG = {
    "batch_size": 16,
    "lr_init": 0.01,
    "weight_decay": 1e-4,
    "epochs": 30,
    "gmm_update_period_epochs": 5,
    "gmm_update_batches": 2,
    "subsample_fraction": 0.5,
    "channels": [{"name": "default", "pca_dim": 8, "num_components": 4}],
    "hidden_widths": [32, 16],
    "dropout_rate": 0.0,
    "em_max_iters": 30,
}


def desk_config(**overrides) -> TrainConfig:
    return TrainConfig.from_dict({**DESK_CONFIG, **overrides})


def desk_data(seed=0, num_ids=8, per_id=8, num_descriptors=32):
    """
    Train pool of ``num_ids`` identities and a test pool of as many unseen ones.

    Both cameras appear in each pool.
    """
    total_ids = 2 * num_ids
    descriptor_sets = synth_generate(total_ids, per_id, 16, seed, num_descriptors=num_descriptors)
    train, test = [], []
    for descriptor_set in descriptor_sets:
        target = train if synth_split(descriptor_set.label, total_ids) == "train" else test
        target.append(descriptor_set)
    return train, test
