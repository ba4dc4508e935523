"""Supervised learning for feedback-state classification, from scratch."""

from .dataset import Dataset, SplitSpec, load_dataset, split
from .models import (
    DEFAULT_TRAIN_CONFIG,
    FAMILY_ORDER,
    ClassifierModel,
    ModelFamily,
    TrainConfig,
    evaluate,
    load_model,
    predict,
    save_model,
    train,
)
from .selection import choose_attributes, train_select

__all__ = [
    "Dataset",
    "SplitSpec",
    "split",
    "load_dataset",
    "ModelFamily",
    "FAMILY_ORDER",
    "TrainConfig",
    "DEFAULT_TRAIN_CONFIG",
    "ClassifierModel",
    "train",
    "predict",
    "evaluate",
    "save_model",
    "load_model",
    "choose_attributes",
    "train_select",
]
