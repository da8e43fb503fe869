"""Synthetic problem generators and independent dense oracles shared by tests."""

import numpy as np

from lmoselect.features.vocab import FeatureVocabulary
from lmoselect.sparse import CsrMatrix


def synthetic_vocab(n: int) -> FeatureVocabulary:
    names = [f"word:f{i:05d}" for i in range(n)]
    return FeatureVocabulary(names, ["word_ngram"] * n, [0] * n, 1)


def dense_ridge_oracle(Xd, y, active, alpha):
    """Closed-form (Xa^T Xa + alpha I)^-1 Xa^T (y - mean(y)) on dense arrays.

    Independent of the package's CG path: plain numpy solve.
    """
    Xd = np.asarray(Xd, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    cols = np.flatnonzero(active)
    Xa = Xd[:, cols]
    b = y.mean()
    w = np.linalg.solve(Xa.T @ Xa + alpha * np.eye(len(cols)), Xa.T @ (y - b))
    full = np.zeros(Xd.shape[1])
    full[cols] = w
    return full, b


def dense_mse(Xd, y, w_full, b):
    resid = Xd @ w_full + b - y
    return float(resid @ resid) / len(y)


def random_regression(seed, n_samples=100, n_features=12, noise=0.05, density=1.0):
    """Random dense-ish regression problem with a handful of true coefficients."""
    rng = np.random.default_rng(seed)
    Xd = rng.normal(size=(n_samples, n_features))
    if density < 1.0:
        Xd *= rng.random(Xd.shape) < density
    coef = rng.normal(size=n_features) * (rng.random(n_features) < 0.6)
    y = Xd @ coef + rng.normal(scale=noise, size=n_samples)
    return Xd, y


def make_planted_problem(
    seed,
    n_samples=400,
    n_signal=6,
    n_noise=30,
    n_dup=24,
    noise_sigma=0.05,
    dup_sigma=0.3,
):
    """Planted-signal regression: known-coefficient signal columns, pure-noise
    confusers, and noisy duplicates of the signal columns.

    Returns (X, y, signal_cols) with column positions shuffled.
    """
    rng = np.random.default_rng(seed)
    n = n_signal + n_noise + n_dup
    signal = rng.normal(size=(n_samples, n_signal))
    coef = rng.uniform(0.5, 1.0, size=n_signal) * rng.choice([-1.0, 1.0], size=n_signal)
    y = signal @ coef + rng.normal(scale=noise_sigma, size=n_samples)

    columns = [signal[:, j] for j in range(n_signal)]
    for j in range(n_dup):
        src = j % n_signal
        columns.append(signal[:, src] + rng.normal(scale=dup_sigma, size=n_samples))
    for _ in range(n_noise):
        columns.append(rng.normal(size=n_samples))

    order = rng.permutation(n)
    Xd = np.column_stack([columns[k] for k in order])
    signal_cols = np.array([int(np.where(order == j)[0][0]) for j in range(n_signal)])
    return CsrMatrix.from_dense(Xd), y, signal_cols
