"""Training loop for the adapter: loss, synthesis, optimizer, schedule."""

from .loop import (
    FULL_SCALE,
    TrainConfig,
    TrainSample,
    learning_rate_at,
    synthesize_sample,
    train,
    train_step,
)
from .loss import normalized_focal_loss
from .optim import Adam
from .synth import augment, synthetic_dataset, synthetic_scene

__all__ = [
    "Adam",
    "FULL_SCALE",
    "TrainConfig",
    "TrainSample",
    "augment",
    "learning_rate_at",
    "normalized_focal_loss",
    "synthesize_sample",
    "synthetic_dataset",
    "synthetic_scene",
    "train",
    "train_step",
]
