"""Datasets of labeled feedback examples and deterministic splitting."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..feedback import FEATURE_NAMES, LabeledExample, TrueState, read_examples_csv

__all__ = ["Dataset", "SplitSpec", "split", "load_dataset"]

# Indices of categorical columns in the canonical feature vector, with their
# fixed category sets (terrain 1..3, modulation bits-per-symbol 1/2/4).
CATEGORICAL_FEATURES: dict[int, tuple[float, ...]] = {
    2: (1.0, 2.0, 3.0),
    5: (1.0, 2.0, 4.0),
}

ACK_LABEL = 1
NAK_LABEL = 0


@dataclass
class Dataset:
    """An ordered collection of labeled feedback examples.

    Feature matrix columns follow the canonical order in ``FEATURE_NAMES``;
    labels are 1 for ACK, 0 for NAK.
    """

    examples: list[LabeledExample]
    feature_names: tuple[str, ...] = FEATURE_NAMES
    _matrix: np.ndarray | None = field(default=None, repr=False, compare=False)
    _labels: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.examples)

    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.array(
                [ex.features.vector() for ex in self.examples], dtype=float
            ).reshape(len(self.examples), len(self.feature_names))
        return self._matrix

    def labels(self) -> np.ndarray:
        if self._labels is None:
            self._labels = np.array(
                [ACK_LABEL if ex.label is TrueState.ACK else NAK_LABEL for ex in self.examples],
                dtype=int,
            )
        return self._labels

    def class_counts(self) -> tuple[int, int]:
        """(#NAK, #ACK)."""
        y = self.labels()
        return int(np.sum(y == NAK_LABEL)), int(np.sum(y == ACK_LABEL))

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset([self.examples[i] for i in indices], self.feature_names)


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic train/validation partition: a pure function of the
    dataset order and the seed."""

    train_fraction: float
    seed: int

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly in (0, 1)")


def split(data: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Disjoint, exhaustive, label-stratified split.

    Each class is shuffled and cut at round(fraction * class size), so the
    overall sizes land within one example of the requested fractions.  Both
    sides are guaranteed non-empty.
    """
    n = len(data)
    if n < 2:
        raise ValueError("need at least 2 examples to split")
    rng = np.random.default_rng(spec.seed)
    y = data.labels()

    train_idx: list[int] = []
    valid_idx: list[int] = []
    for label in (NAK_LABEL, ACK_LABEL):
        members = np.flatnonzero(y == label)
        if members.size == 0:
            continue
        order = members[rng.permutation(members.size)]
        cut = int(round(spec.train_fraction * members.size))
        train_idx.extend(int(i) for i in order[:cut])
        valid_idx.extend(int(i) for i in order[cut:])

    # Rebalance degenerate cuts so neither side is empty.
    if not train_idx:
        train_idx.append(valid_idx.pop())
    if not valid_idx:
        valid_idx.append(train_idx.pop())

    train_idx.sort()
    valid_idx.sort()
    return data.subset(train_idx), data.subset(valid_idx)


def load_dataset(path: str) -> Dataset:
    with open(path, "r", encoding="utf-8") as stream:
        return Dataset(read_examples_csv(stream))
