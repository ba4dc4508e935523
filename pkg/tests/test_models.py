import numpy as np
import pytest

from ncml.feedback import TrueState
from ncml.learn.dataset import ACK_LABEL, NAK_LABEL, Dataset
from ncml.learn.models import (
    ClassifierModel,
    FeatureEncoder,
    LogRegParams,
    ModelFamily,
    TrainConfig,
    evaluate,
    fit_mlp,
    load_model,
    predict,
    save_model,
    train,
)

from conftest import dataset_from_arrays, make_features, mlp_gradcheck_relative_error

# synthetic column 0 lands in canonical feature slot 0 (see conftest)
COL0 = 0


def two_gaussians(n_per_class, mu0, mu1, sigma, seed=0):
    rng = np.random.default_rng(seed)
    x0 = rng.normal(mu0, sigma, size=n_per_class)
    x1 = rng.normal(mu1, sigma, size=n_per_class)
    X = np.concatenate([x0, x1]).reshape(-1, 1)
    y = np.array([0] * n_per_class + [1] * n_per_class)
    return dataset_from_arrays(X, y)


def test_gnb_well_separated_boundary_is_midpoint():
    data = two_gaussians(500, 0.0, 10.0, 1.0)
    model = train(ModelFamily.GAUSSIAN_NB, data, [COL0])
    # equal priors and variances put the boundary at the midpoint 5.0
    assert model.predict_label(make_features(distance=4.5).vector()) == NAK_LABEL
    assert model.predict_label(make_features(distance=5.5).vector()) == ACK_LABEL
    assert evaluate(model, data) > 0.99


def test_gnb_predicts_class_at_its_mean():
    data = two_gaussians(300, -2.0, 6.0, 1.5, seed=3)
    model = train(ModelFamily.GAUSSIAN_NB, data, [COL0])
    assert model.predict_label(make_features(distance=-2.0).vector()) == NAK_LABEL
    assert model.predict_label(make_features(distance=6.0).vector()) == ACK_LABEL


def test_logreg_separable_reaches_full_training_accuracy():
    data = two_gaussians(200, -4.0, 4.0, 0.5, seed=1)
    model = train(ModelFamily.LOGISTIC_REGRESSION, data, [COL0])
    assert evaluate(model, data) == 1.0


def test_logreg_zero_weights_tie_goes_to_nak():
    data = two_gaussians(10, -1.0, 1.0, 1.0)
    encoder = FeatureEncoder.fit(data.matrix(), (COL0,))
    params = LogRegParams(encoder, (0.0,), 0.0)
    model = ClassifierModel(ModelFamily.LOGISTIC_REGRESSION, (COL0,), params)
    assert predict(model, make_features(distance=123.0)) is TrueState.NAK


def test_predict_is_deterministic():
    data = two_gaussians(100, 0.0, 3.0, 1.0, seed=9)
    features = make_features(distance=1.4)
    for family in ModelFamily:
        model = train(family, data, [COL0], seed=4)
        assert predict(model, features) is predict(model, features)


def test_tree_predictions_invariant_under_positive_feature_scaling():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(400, 2))
    y = ((X[:, 0] > 0.3) ^ (X[:, 1] < -0.2)).astype(int)
    scale = 37.5
    data = dataset_from_arrays(X, y)
    data_scaled = dataset_from_arrays(X * [scale, 1.0], y)
    model = train(ModelFamily.DECISION_TREE, data, [0, 1])
    model_scaled = train(ModelFamily.DECISION_TREE, data_scaled, [0, 1])
    probe = rng.normal(size=(200, 2))
    for row in probe:
        vec = make_features(distance=row[0], noise=row[1]).vector()
        vec_scaled = make_features(distance=row[0] * scale, noise=row[1]).vector()
        assert model.predict_label(vec) == model_scaled.predict_label(vec_scaled)


def test_mlp_gradient_check_small():
    for seed in range(5):
        assert mlp_gradcheck_relative_error(seed) < 1e-4


def test_mlp_full_batch_loss_is_non_increasing():
    data = two_gaussians(150, -1.0, 2.0, 1.0, seed=5)
    encoder = FeatureEncoder.fit(data.matrix(), (COL0,))
    X = encoder.transform(data.matrix())
    config = TrainConfig(mlp_epochs=150, mlp_learning_rate=0.05, mlp_batch_size=None)
    _, history = fit_mlp(X, data.labels(), config, seed=2, track_loss=True)
    assert len(history) == 150
    assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))


def test_evaluate_counts_known_mistakes():
    # Strongly separated training fit, then an evaluation set with exactly
    # three flipped labels among ten.
    data = two_gaussians(100, -5.0, 5.0, 0.5, seed=8)
    model = train(ModelFamily.DECISION_TREE, data, [COL0])
    xs = [-5.0, -4.5, -5.5, 5.0, 4.5, 5.5, -5.2, 5.2, -4.8, 4.8]
    true_labels = [0, 0, 0, 1, 1, 1, 0, 1, 0, 1]
    flipped = list(true_labels)
    for i in (0, 3, 8):
        flipped[i] = 1 - flipped[i]
    eval_data = dataset_from_arrays(np.array(xs).reshape(-1, 1), flipped)
    assert evaluate(model, eval_data) == pytest.approx(0.7)


def test_evaluate_rejects_empty():
    data = two_gaussians(20, -1.0, 1.0, 0.5)
    model = train(ModelFamily.GAUSSIAN_NB, data, [COL0])
    with pytest.raises(ValueError):
        evaluate(model, Dataset([]))


def test_constant_feature_variance_is_floored():
    X = np.column_stack([np.zeros(40), np.linspace(-3, 3, 40)])
    y = (X[:, 1] > 0).astype(int)
    data = dataset_from_arrays(X, y)
    model = train(ModelFamily.GAUSSIAN_NB, data, [0, 1])
    assert evaluate(model, data) > 0.95  # constant column neither helps nor crashes


def test_single_class_data_rejected_by_gradient_families():
    X = np.linspace(0, 1, 30).reshape(-1, 1)
    data = dataset_from_arrays(X, np.ones(30, dtype=int))
    for family in (ModelFamily.LOGISTIC_REGRESSION, ModelFamily.MLP):
        with pytest.raises(ValueError):
            train(family, data, [COL0])
    # generative/partition families degrade to a constant predictor
    for family in (ModelFamily.GAUSSIAN_NB, ModelFamily.DECISION_TREE):
        model = train(family, data, [COL0])
        assert evaluate(model, data) == 1.0


def test_every_family_beats_majority_baseline_on_training_data():
    rng = np.random.default_rng(12)
    n0, n1 = 120, 80
    X = np.concatenate([rng.normal(-1.0, 1.0, n0), rng.normal(1.5, 1.0, n1)]).reshape(-1, 1)
    y = np.array([0] * n0 + [1] * n1)
    data = dataset_from_arrays(X, y)
    majority = max(n0, n1) / (n0 + n1)
    for family in ModelFamily:
        model = train(family, data, [COL0], seed=3)
        assert evaluate(model, data) >= majority


def test_train_validates_inputs():
    data = two_gaussians(20, -1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        train(ModelFamily.GAUSSIAN_NB, Dataset([]), [COL0])
    with pytest.raises(ValueError):
        train(ModelFamily.GAUSSIAN_NB, data, [])
    with pytest.raises(ValueError):
        train(ModelFamily.GAUSSIAN_NB, data, [17])


def test_model_save_load_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(6)
    X = rng.normal(size=(200, 3))
    y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(int)
    data = dataset_from_arrays(X, y)
    probe = [make_features(distance=float(a), noise=float(b), snr=float(c))
             for a, b, c in rng.normal(size=(50, 3))]
    for family in ModelFamily:
        model = train(family, data, [0, 1, 3], seed=11).with_validation_accuracy(0.875)
        path = tmp_path / f"{family.value}.json"
        save_model(model, str(path))
        loaded = load_model(str(path))
        assert loaded.family is model.family
        assert loaded.selected_features == model.selected_features
        assert loaded.validation_accuracy == model.validation_accuracy
        for f in probe:
            assert predict(loaded, f) is predict(model, f)
        if family is ModelFamily.MLP:
            assert np.array_equal(loaded.params.weights.w1, model.params.weights.w1)
            assert np.array_equal(loaded.params.weights.b1, model.params.weights.b1)
            assert np.array_equal(loaded.params.weights.w2, model.params.weights.w2)
            assert loaded.params.weights.b2 == model.params.weights.b2
        if family is ModelFamily.LOGISTIC_REGRESSION:
            assert loaded.params.weights == model.params.weights
            assert loaded.params.bias == model.params.bias
        if family is ModelFamily.GAUSSIAN_NB:
            assert loaded.params == model.params


def test_load_model_rejects_foreign_files(tmp_path):
    path = tmp_path / "junk.json"
    path.write_text('{"format": "something-else"}')
    with pytest.raises(ValueError):
        load_model(str(path))
