from .config import LossKind, TrainConfig
from .losses import bce_loss, mse_loss, pairwise_regression_loss
from .sweep import sweep_beta
from .trainer import TRAIN_LOG_FILE, EpochRecord, TrainLog, train

__all__ = [
    "TRAIN_LOG_FILE",
    "EpochRecord",
    "LossKind",
    "TrainConfig",
    "TrainLog",
    "bce_loss",
    "mse_loss",
    "pairwise_regression_loss",
    "sweep_beta",
    "train",
]
