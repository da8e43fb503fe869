import numpy as np
import pytest

from _synth import dense_ridge_oracle, random_regression
from lmoselect.regression import (
    RegressionError,
    RidgeModel,
    fit_ridge,
    mse,
    predict,
)
from lmoselect.sparse import CsrMatrix


def test_constant_target_gives_zero_weights():
    rng = np.random.default_rng(0)
    Xd = rng.normal(size=(30, 5))
    y = np.full(30, 0.42)
    for alpha in (0.01, 1.0, 1e6):
        model = fit_ridge(CsrMatrix.from_dense(Xd), y, alpha=alpha)
        assert model.intercept == pytest.approx(0.42)
        np.testing.assert_allclose(model.weights, 0.0, atol=1e-12)


def test_small_dense_toy_matches_closed_form():
    Xd = np.array([[1.0, 2.0], [0.5, -1.0], [2.0, 0.0]])
    y = np.array([1.0, 0.0, 0.5])
    model = fit_ridge(CsrMatrix.from_dense(Xd), y, alpha=1.0)
    w_oracle, b_oracle = dense_ridge_oracle(Xd, y, np.ones(2, bool), 1.0)
    assert model.intercept == pytest.approx(b_oracle)
    np.testing.assert_allclose(model.full_weights(), w_oracle, atol=1e-8)


def test_random_problems_match_closed_form():
    rng = np.random.default_rng(42)
    for trial in range(5):
        n_feat = int(rng.integers(3, 50))
        Xd, y = random_regression(trial + 100, n_samples=80, n_features=n_feat)
        active = rng.random(n_feat) < 0.8
        if not active.any():
            active[0] = True
        alpha = float(rng.uniform(0.1, 5.0))
        model = fit_ridge(CsrMatrix.from_dense(Xd), y, active, alpha)
        w_oracle, b_oracle = dense_ridge_oracle(Xd, y, active, alpha)
        assert model.intercept == pytest.approx(b_oracle)
        np.testing.assert_allclose(model.full_weights(), w_oracle, atol=1e-6)


def test_monotone_regularization():
    Xd, y = random_regression(7, n_samples=60, n_features=10)
    X = CsrMatrix.from_dense(Xd)
    residuals = []
    for alpha in (0.01, 0.1, 1.0, 10.0, 100.0, 1e4):
        model = fit_ridge(X, y, alpha=alpha)
        r = predict(model, X) - y
        residuals.append(float(np.linalg.norm(r)))
    assert all(a <= b + 1e-10 for a, b in zip(residuals, residuals[1:]))


def test_fit_is_bit_deterministic():
    Xd, y = random_regression(11, n_samples=50, n_features=20)
    X = CsrMatrix.from_dense(Xd)
    m1 = fit_ridge(X, y, alpha=0.7)
    m2 = fit_ridge(X, y, alpha=0.7)
    assert np.array_equal(m1.weights, m2.weights)
    assert m1.intercept == m2.intercept


def test_zero_column_does_not_perturb_others():
    Xd, y = random_regression(13, n_samples=40, n_features=6)
    Xd[:, 3] = 0.0
    X = CsrMatrix.from_dense(Xd)
    full = fit_ridge(X, y, alpha=1.0)
    without = np.ones(6, bool)
    without[3] = False
    reduced = fit_ridge(X, y, without, alpha=1.0)
    assert full.full_weights()[3] == 0.0
    np.testing.assert_allclose(
        np.delete(full.full_weights(), 3),
        np.delete(reduced.full_weights(), 3),
        atol=1e-8,
    )


def test_predict_constant_model():
    model = RidgeModel(1.0, 0.5, np.zeros(3), np.ones(3, bool))
    X = CsrMatrix.from_dict_rows([{0: 1.0}, {}, {2: -4.0}], 3)
    np.testing.assert_array_equal(predict(model, X), [0.5, 0.5, 0.5])


def test_predict_zero_row_gives_intercept():
    Xd, y = random_regression(17, n_samples=30, n_features=4)
    X = CsrMatrix.from_dense(Xd)
    model = fit_ridge(X, y, alpha=1.0)
    empty = CsrMatrix.from_dict_rows([{}], 4)
    assert predict(model, empty)[0] == model.intercept


def test_predict_matches_dense_oracle_residuals():
    Xd, y = random_regression(19, n_samples=50, n_features=8)
    X = CsrMatrix.from_dense(Xd)
    model = fit_ridge(X, y, alpha=2.0)
    w_oracle, b_oracle = dense_ridge_oracle(Xd, y, np.ones(8, bool), 2.0)
    np.testing.assert_allclose(predict(model, X), Xd @ w_oracle + b_oracle, atol=1e-7)


def test_predict_dimension_mismatch():
    model = RidgeModel(1.0, 0.0, np.zeros(3), np.ones(3, bool))
    with pytest.raises(RegressionError, match="columns"):
        predict(model, CsrMatrix.from_dict_rows([{}], 5))


def test_fit_rejects_bad_inputs():
    Xd, y = random_regression(23, n_samples=20, n_features=4)
    X = CsrMatrix.from_dense(Xd)
    with pytest.raises(RegressionError, match="empty"):
        fit_ridge(X, y, np.zeros(4, bool), 1.0)
    with pytest.raises(RegressionError, match="finite"):
        fit_ridge(X, np.full(20, np.nan), alpha=1.0)
    with pytest.raises(RegressionError, match="alpha"):
        fit_ridge(X, y, alpha=0.0)
    with pytest.raises(RegressionError, match="rows"):
        fit_ridge(X, y[:-1], alpha=1.0)


def test_mse_examples():
    assert mse(np.array([0.2, 0.8]), np.array([0.2, 0.8])) == 0.0
    assert mse(np.array([0.0, 1.0]), np.array([1.0, 0.0])) == 1.0


def test_mse_matches_naive_loop():
    rng = np.random.default_rng(3)
    a = rng.normal(size=100)
    b = rng.normal(size=100)
    naive = sum((x - t) ** 2 for x, t in zip(a, b)) / 100
    assert abs(mse(a, b) - naive) < 1e-12


def test_mse_rejects_mismatch_and_empty():
    with pytest.raises(RegressionError, match="mismatch"):
        mse(np.zeros(3), np.zeros(4))
    with pytest.raises(RegressionError, match="one element"):
        mse(np.zeros(0), np.zeros(0))


def test_model_round_trip(tmp_path):
    Xd, y = random_regression(29, n_samples=30, n_features=9)
    active = np.array([True, False, True, True, False, True, True, True, False])
    model = fit_ridge(CsrMatrix.from_dense(Xd), y, active, alpha=0.5)
    path = tmp_path / "model.json"
    model.save(path, "f" * 64)
    again, vhash = RidgeModel.load(path)
    assert vhash == "f" * 64
    assert again.alpha == model.alpha
    assert again.intercept == model.intercept
    assert np.array_equal(again.active, model.active)
    assert np.array_equal(again.weights, model.weights)
