"""Ridge regression on sparse features via conjugate gradient.

The model minimizes ||X_a w + b - y||^2 + alpha ||w||^2 over the active
columns, with an unpenalized intercept handled by target centering:
b is the training-label mean and w solves the normal equations

    (X_a^T X_a + alpha I) w = X_a^T (y - b)

by conjugate gradient with a fixed schedule (zero start, at most 1000
iterations, residual tolerance 1e-8 relative to the right-hand side), so
identical inputs give bit-identical weights.
"""

from __future__ import annotations

import base64
import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .sparse import CsrMatrix
from .util import atomic_write_text

MODEL_FORMAT_VERSION = 1
CG_MAX_ITERATIONS = 1000
CG_TOLERANCE = 1e-8


class RegressionError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class RidgeModel:
    """Fitted weights over the active columns of a feature universe."""

    alpha: float
    intercept: float
    weights: np.ndarray           # length = active.sum()
    active: np.ndarray            # bool mask over all columns

    def __post_init__(self):
        if self.alpha <= 0:
            raise RegressionError(f"alpha must be positive, got {self.alpha}")
        if len(self.weights) != int(self.active.sum()):
            raise RegressionError("weights length must equal the active column count")

    @property
    def n_columns(self) -> int:
        return len(self.active)

    def full_weights(self) -> np.ndarray:
        w = np.zeros(self.n_columns)
        w[self.active] = self.weights
        return w

    # -- persistence (versioned; arrays as base64 little-endian f8) -------

    def save(self, path: str | Path, vocab_hash: str) -> None:
        obj = {
            "format_version": MODEL_FORMAT_VERSION,
            "vocab_hash": vocab_hash,
            "alpha": self.alpha,
            "intercept": self.intercept,
            "n_columns": self.n_columns,
            "active_columns": [int(c) for c in np.flatnonzero(self.active)],
            "weights_b64": base64.b64encode(self.weights.astype("<f8").tobytes()).decode("ascii"),
        }
        atomic_write_text(path, json.dumps(obj, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> tuple["RidgeModel", str]:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        if obj.get("format_version") != MODEL_FORMAT_VERSION:
            raise RegressionError(f"{path}: unsupported model format")
        active = np.zeros(obj["n_columns"], dtype=bool)
        active[np.asarray(obj["active_columns"], dtype=np.int64)] = True
        weights = np.frombuffer(base64.b64decode(obj["weights_b64"]), dtype="<f8").copy()
        model = cls(obj["alpha"], obj["intercept"], weights, active)
        return model, obj["vocab_hash"]


def _cg_solve(X: CsrMatrix, mask: np.ndarray, alpha: float, rhs: np.ndarray) -> np.ndarray:
    """Conjugate gradient on the masked normal equations; fully deterministic."""
    w = np.zeros(X.ncols)
    r = rhs.copy()
    p = r.copy()
    rs = float(r @ r)
    if rs == 0.0:
        return w
    threshold = (CG_TOLERANCE * math.sqrt(rs)) ** 2
    for _ in range(CG_MAX_ITERATIONS):
        ap = X.gram_apply(mask, alpha, p)
        denom = float(p @ ap)
        if denom <= 0.0:
            break
        gamma = rs / denom
        w += gamma * p
        r -= gamma * ap
        rs_new = float(r @ r)
        if rs_new <= threshold:
            break
        p = r + (rs_new / rs) * p
        rs = rs_new
    return w


def fit_ridge(
    X: CsrMatrix, y: np.ndarray, active: np.ndarray | None = None, alpha: float = 1.0
) -> RidgeModel:
    """Fit on the active columns of X; see the module docstring for the
    exact objective and solver schedule."""
    y = np.asarray(y, dtype=np.float64)
    if X.nrows != len(y):
        raise RegressionError(f"X has {X.nrows} rows but y has {len(y)} labels")
    if not np.all(np.isfinite(y)):
        raise RegressionError("labels must be finite")
    if alpha <= 0:
        raise RegressionError(f"alpha must be positive, got {alpha}")
    if active is None:
        active = np.ones(X.ncols, dtype=bool)
    else:
        active = np.asarray(active, dtype=bool)
        if len(active) != X.ncols:
            raise RegressionError("active mask length must equal the column count")
    if not active.any():
        raise RegressionError("active column set is empty")

    intercept = float(y.mean())
    rhs = X.rmatvec(y - intercept)
    rhs[~active] = 0.0
    w = _cg_solve(X, active, float(alpha), rhs)
    return RidgeModel(float(alpha), intercept, w[active].copy(), active.copy())


def predict(model: RidgeModel, X: CsrMatrix) -> np.ndarray:
    """Raw predictions X_a w + b; clamping to [0, 1] is the caller's job
    at external interfaces only."""
    if X.ncols != model.n_columns:
        raise RegressionError(
            f"matrix has {X.ncols} columns but the model was fit over {model.n_columns}"
        )
    return X.matvec(model.full_weights()) + model.intercept


def mse(predicted: np.ndarray, truth: np.ndarray) -> float:
    """Mean squared error between two equal-length vectors."""
    predicted = np.asarray(predicted, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if predicted.shape != truth.shape or predicted.ndim != 1:
        raise RegressionError(
            f"length mismatch: {predicted.shape} vs {truth.shape}"
        )
    if len(predicted) == 0:
        raise RegressionError("mse needs at least one element")
    diff = predicted - truth
    return float(diff @ diff) / len(diff)
