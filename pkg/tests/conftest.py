import numpy as np
import pytest

from ncml.channel import Modulation, TerrainCategory
from ncml.feedback import FeedbackFeatures, LabeledExample, TrueState
from ncml.harness.config import ScenarioConfig
from ncml.harness.datagen import generate_training_data
from ncml.learn.dataset import Dataset, SplitSpec
from ncml.learn.models import ModelFamily
from ncml.learn.selection import train_select

# Continuous slots of the canonical feature vector (distance, noise, snr, rx);
# synthetic learner fixtures place their columns there in this order.
CONTINUOUS_SLOTS = (0, 1, 3, 4)


def make_features(
    distance=400.0, noise=-103.0, terrain=1, snr=10.0, rx=-93.0, mod=Modulation.BPSK
) -> FeedbackFeatures:
    return FeedbackFeatures(
        distance_m=distance,
        noise_dbm=noise,
        terrain=TerrainCategory(terrain),
        snr_db=snr,
        rx_dbm=rx,
        modulation=Modulation(mod),
    )


def dataset_from_arrays(X, y) -> Dataset:
    """A Dataset carrying up to four synthetic continuous columns in the
    CONTINUOUS_SLOTS positions; categorical features stay constant."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.shape[1] > len(CONTINUOUS_SLOTS):
        raise ValueError("at most four synthetic columns supported")
    examples = []
    for row, label in zip(X, y):
        vec = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0]  # terrain=1, mod=BPSK
        for value, slot in zip(row, CONTINUOUS_SLOTS):
            vec[slot] = float(value)
        features = FeedbackFeatures(
            distance_m=vec[0],
            noise_dbm=vec[1],
            terrain=TerrainCategory(1),
            snr_db=vec[3],
            rx_dbm=vec[4],
            modulation=Modulation.BPSK,
        )
        examples.append(
            LabeledExample(features, TrueState.ACK if label == 1 else TrueState.NAK)
        )
    return Dataset(examples)


@pytest.fixture(scope="session")
def abstract_scenario() -> ScenarioConfig:
    return ScenarioConfig(
        channel_mode="abstract",
        forward_error_p=0.15,
        reverse_error_p=0.15,
        flip_fraction=0.1,
        receivers_k=2,
        packets_m=8,
        training_size=1500,
    )


@pytest.fixture(scope="session")
def abstract_classifier(abstract_scenario):
    data = generate_training_data(abstract_scenario, 1500, 77)
    return train_select(data, [ModelFamily.GAUSSIAN_NB], SplitSpec(0.8, 3))


def mlp_gradcheck_relative_error(seed: int) -> float:
    """Analytic vs central finite-difference gradients on one random small
    network; returns the vector-norm relative error."""
    from ncml.learn.models import MlpWeights, mlp_loss, mlp_loss_and_gradients

    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 20))
    d = int(rng.integers(2, 6))
    h = int(rng.integers(2, 7))
    X = rng.normal(size=(n, d))
    y = rng.integers(0, 2, size=n)
    weights = MlpWeights(
        rng.normal(size=(d, h)) * 0.7,
        rng.normal(size=h) * 0.3,
        rng.normal(size=h) * 0.7,
        float(rng.normal()) * 0.3,
    )
    _, grads = mlp_loss_and_gradients(weights, X, y)
    analytic = np.concatenate(
        [grads.w1.ravel(), grads.b1, grads.w2, np.array([grads.b2])]
    )

    eps = 1e-5
    flat = np.concatenate(
        [weights.w1.ravel(), weights.b1, weights.w2, np.array([weights.b2])]
    )

    def unflatten(v):
        i = 0
        w1 = v[i : i + d * h].reshape(d, h); i += d * h
        b1 = v[i : i + h]; i += h
        w2 = v[i : i + h]; i += h
        return MlpWeights(w1, b1, w2, float(v[i]))

    numeric = np.empty_like(flat)
    for j in range(flat.size):
        plus = flat.copy(); plus[j] += eps
        minus = flat.copy(); minus[j] -= eps
        numeric[j] = (mlp_loss(unflatten(plus), X, y) - mlp_loss(unflatten(minus), X, y)) / (2 * eps)
    denom = np.linalg.norm(analytic) + np.linalg.norm(numeric) + 1e-12
    return float(np.linalg.norm(analytic - numeric) / denom)
