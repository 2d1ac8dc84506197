import numpy as np
import pytest

from hinmhp.classify import (
    FeatureMatrix,
    calibrate_cutoff,
    fit_logreg,
    logreg_gradient,
    logreg_objective,
    nonnetwork_features,
    predict_proba,
    random_guess,
)
from hinmhp.synth import nethealth_fixture


def separable_data():
    X = np.array([[x] for x in (-3.0, -2.0, -1.0, 1.0, 2.0, 3.0)])
    y = np.array([0, 0, 0, 1, 1, 1], dtype=float)
    return X, y


def test_logreg_separable_sign_and_accuracy():
    X, y = separable_data()
    model = fit_logreg(X, y, l2=0.01)
    assert model.weights[0] > 0
    probs = predict_proba(model, X)
    assert np.array_equal(probs > 0.5, y.astype(bool))


def test_logreg_huge_l2_shrinks_weights():
    X, y = separable_data()
    model = fit_logreg(X, y, l2=1e6)
    assert np.abs(model.weights).max() < 1e-3


def test_logreg_single_class_errors():
    X, _ = separable_data()
    with pytest.raises(ValueError):
        fit_logreg(X, np.ones(6))


def test_logreg_nonfinite_errors():
    X, y = separable_data()
    X = X.copy()
    X[0, 0] = np.nan
    with pytest.raises(ValueError):
        fit_logreg(X, y)


def test_logreg_gradient_finite_difference():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(12, 4))
    y = (rng.random(12) < 0.5).astype(float)
    w = rng.normal(size=4) * 0.3
    b = 0.2
    l2 = 0.05
    gw, gb = logreg_gradient(X, y, w, b, l2)
    eps = 1e-6
    for j in range(4):
        wp, wm = w.copy(), w.copy()
        wp[j] += eps
        wm[j] -= eps
        fd = (logreg_objective(X, y, wp, b, l2) - logreg_objective(X, y, wm, b, l2)) / (
            2 * eps
        )
        assert abs(fd - gw[j]) < 1e-4
    fd_b = (
        logreg_objective(X, y, w, b + eps, l2)
        - logreg_objective(X, y, w, b - eps, l2)
    ) / (2 * eps)
    assert abs(fd_b - gb) < 1e-4


def test_logreg_objective_beats_zero_params():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 5))
    w_true = rng.normal(size=5)
    y = (X @ w_true > 0).astype(float)
    model = fit_logreg(X, y, l2=0.01)
    zero = logreg_objective(X, y, np.zeros(5), 0.0, 0.01)
    assert model.objective <= zero


def test_logreg_ignores_zero_variance_column_with_zero_signal():
    X, y = separable_data()
    X2 = np.column_stack([X, np.zeros(len(X))])
    m1 = fit_logreg(X, y, l2=0.01)
    m2 = fit_logreg(X2, y, l2=0.01)
    assert m2.weights[1] == pytest.approx(0.0, abs=1e-9)
    assert m2.weights[0] == pytest.approx(m1.weights[0], rel=1e-6)


def test_predict_proba_range_and_monotone():
    X, y = separable_data()
    model = fit_logreg(X, y)
    probs = predict_proba(model, X)
    assert np.all((probs > 0) & (probs < 1))
    assert np.all(np.diff(probs) > 0)  # weight > 0, x increasing


def test_predict_proba_zero_model_is_half():
    from hinmhp.classify import LogregModel

    model = LogregModel(np.zeros(3), 0.0, 0.0, 0, 0.0)
    probs = predict_proba(model, np.ones((4, 3)))
    assert np.allclose(probs, 0.5)


def test_predict_proba_dimension_mismatch():
    X, y = separable_data()
    model = fit_logreg(X, y)
    with pytest.raises(ValueError):
        predict_proba(model, np.ones((2, 3)))


def test_calibrate_cutoff_top_three():
    probs = [0.1, 0.9, 0.4, 0.8, 0.3, 0.7]
    pred = calibrate_cutoff(probs, 0.5)
    assert pred.sum() == 3
    assert list(np.flatnonzero(pred)) == [1, 3, 5]


def test_calibrate_cutoff_stable_ties():
    pred = calibrate_cutoff([0.5, 0.5, 0.5, 0.5], 0.5)
    assert list(np.flatnonzero(pred)) == [0, 1]


def test_calibrate_cutoff_rate_exact():
    probs = np.linspace(0, 1, 274)
    pred = calibrate_cutoff(probs, 67 / 274)
    assert pred.sum() == 67


def test_calibrate_cutoff_rounding_rule():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(3, 60))
        rate = float(rng.uniform(0.05, 0.95))
        pred = calibrate_cutoff(rng.random(n), rate)
        assert pred.sum() == int(np.floor(rate * n + 0.5))


def test_random_guess_count_and_determinism():
    a = random_guess(67 / 274, 274, seed=9)
    b = random_guess(67 / 274, 274, seed=9)
    assert a.sum() == 67
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        random_guess(0.0, 10)


def test_nonnetwork_default_columns():
    cohort, _ = nethealth_fixture()
    fm = nonnetwork_features(cohort)
    assert fm.values.shape == (274, 56)
    assert len(fm.names) == 56
    assert not any(n.startswith(("cesd_", "stai_")) for n in fm.names)


def test_nonnetwork_with_condition_scores():
    cohort, _ = nethealth_fixture()
    fm = nonnetwork_features(cohort, include_condition_scores=True)
    assert fm.values.shape == (274, 62)
    assert np.all(fm.values.sum(axis=1) == 20)
    assert "cesd_L" in fm.names and "stai_H" in fm.names


def test_nonnetwork_rows_one_hot_groups():
    cohort, _ = nethealth_fixture()
    fm = nonnetwork_features(cohort)
    assert np.all(fm.values.sum(axis=1) == 18)
    assert set(np.unique(fm.values)) == {0.0, 1.0}


def test_feature_matrix_shape_validation():
    with pytest.raises(ValueError):
        FeatureMatrix(["a", "b"], np.ones((3, 3)))
