"""Feature selection and the model-selection loop.

For each candidate family: greedy forward feature selection against the
validation split, a final fit on the training split, and a validation-set
evaluation.  The model with the highest validation accuracy wins; ties keep
the earliest family in the fixed enumeration order.
"""

from __future__ import annotations

from typing import Sequence

from .dataset import Dataset, SplitSpec, split
from .models import (
    DEFAULT_TRAIN_CONFIG,
    FAMILY_ORDER,
    ClassifierModel,
    ModelFamily,
    TrainConfig,
    evaluate,
    train,
)

__all__ = ["choose_attributes", "train_select"]


def choose_attributes(
    data: Dataset,
    family: ModelFamily,
    validation: Dataset,
    *,
    seed: int = 0,
    config: TrainConfig = DEFAULT_TRAIN_CONFIG,
) -> tuple[int, ...]:
    """Greedy forward selection on validation accuracy.

    Starts empty and repeatedly adds the feature with the largest accuracy
    gain, stopping when no candidate improves.  The single best feature is
    always kept, so the result is never empty.  Deterministic: candidates
    are scanned in index order and only strict improvements are taken.
    """
    if len(data) == 0 or len(validation) == 0:
        raise ValueError("choose_attributes needs non-empty train and validation data")

    n_features = len(data.feature_names)
    chosen: list[int] = []
    best_acc = -1.0
    while len(chosen) < n_features:
        round_best: int | None = None
        round_acc = best_acc
        for j in range(n_features):
            if j in chosen:
                continue
            model = train(family, data, chosen + [j], seed=seed, config=config)
            acc = evaluate(model, validation)
            if acc > round_acc:
                round_acc = acc
                round_best = j
        if round_best is None:
            break
        chosen.append(round_best)
        best_acc = round_acc
    return tuple(sorted(chosen))


def train_select(
    data: Dataset,
    families: Sequence[ModelFamily] = FAMILY_ORDER,
    spec: SplitSpec = SplitSpec(train_fraction=0.8, seed=0),
    *,
    config: TrainConfig = DEFAULT_TRAIN_CONFIG,
) -> ClassifierModel:
    """Run the full selection loop and return the best classifier.

    Per family: choose a feature subset, fit on the training split, score on
    the validation split.  Families whose fit raises (for example a
    single-class training split hitting a gradient-trained family) are
    skipped; if every family fails, the last error propagates.
    """
    if len(data) < 2:
        raise ValueError("train_select needs at least 2 examples")
    ordered = [f for f in FAMILY_ORDER if f in set(families)]
    if not ordered:
        raise ValueError("families must name at least one known model family")

    train_part, valid_part = split(data, spec)
    best: ClassifierModel | None = None
    last_error: Exception | None = None
    for family in ordered:
        # Seeded by the family's fixed position so a family trains the same
        # model whether it runs alone or inside the full candidate set.
        family_seed = spec.seed * 1009 + FAMILY_ORDER.index(family)
        try:
            subset = choose_attributes(
                train_part, family, valid_part, seed=family_seed, config=config
            )
            model = train(family, train_part, subset, seed=family_seed, config=config)
        except ValueError as err:
            last_error = err
            continue
        accuracy = evaluate(model, valid_part)
        model = model.with_validation_accuracy(accuracy)
        if best is None or accuracy > best.validation_accuracy:
            best = model
    if best is None:
        raise ValueError(f"every candidate family failed to train: {last_error}")
    return best
