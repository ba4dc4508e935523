import numpy as np
import pytest

from ncml.learn.dataset import Dataset, SplitSpec, split

from conftest import dataset_from_arrays


def balanced_dataset(n):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(n, 2))
    y = np.array([i % 2 for i in range(n)])
    return dataset_from_arrays(X, y)


def test_split_sizes_match_fraction():
    data = balanced_dataset(100)
    train, valid = split(data, SplitSpec(0.8, 1))
    assert len(train) == 80 and len(valid) == 20
    assert len(train) + len(valid) == 100


def test_split_deterministic_per_seed():
    data = balanced_dataset(60)
    a1, b1 = split(data, SplitSpec(0.7, 9))
    a2, b2 = split(data, SplitSpec(0.7, 9))
    assert a1.examples == a2.examples and b1.examples == b2.examples
    a3, _ = split(data, SplitSpec(0.7, 10))
    assert a3.examples != a1.examples


def test_split_is_disjoint_and_exhaustive():
    data = balanced_dataset(37)
    train, valid = split(data, SplitSpec(0.8, 4))
    ids = lambda d: sorted(id(ex) for ex in d.examples)
    assert sorted(ids(train) + ids(valid)) == sorted(id(ex) for ex in data.examples)
    assert not set(ids(train)) & set(ids(valid))


def test_split_stratifies_balanced_labels():
    data = balanced_dataset(100)  # 50/50
    train, valid = split(data, SplitSpec(0.8, 2))
    for part, size in ((train, 80), (valid, 20)):
        nak, ack = part.class_counts()
        assert abs(nak - size // 2) <= 1 and abs(ack - size // 2) <= 1


def test_split_keeps_both_sides_non_empty():
    data = balanced_dataset(2)
    train, valid = split(data, SplitSpec(0.9, 0))
    assert len(train) == 1 and len(valid) == 1


def test_split_rejects_tiny_or_bad_spec():
    with pytest.raises(ValueError):
        split(balanced_dataset(1), SplitSpec(0.8, 0))
    with pytest.raises(ValueError):
        SplitSpec(0.0, 1)
    with pytest.raises(ValueError):
        SplitSpec(1.0, 1)


def test_dataset_matrix_and_labels():
    data = dataset_from_arrays([[1.0, 2.0], [3.0, 4.0]], [1, 0])
    X = data.matrix()
    assert X.shape == (2, 6)
    assert X[0, 0] == 1.0 and X[0, 1] == 2.0
    assert list(data.labels()) == [1, 0]
    assert data.class_counts() == (1, 1)
