"""Ranked-subset sweep: nested top-k subsets evaluated on one constant split.

Subset sizes use floor rounding by default (fraction * n, guarded
against float noise); "ceil" and "nearest" are available for callers
that need a different convention. Floor reproduces the reference
percentage tables this pipeline is checked against.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from pathlib import Path

import numpy as np

from .dataset import SplitSpec, split_indices
from .lmo import ScoreTable
from .regression import RidgeModel, fit_ridge, mse, predict
from .sparse import CsrMatrix
from .util import atomic_write_text, escape_field, format_float

ROUNDING_MODES = ("floor", "ceil", "nearest")
IMPACT_THRESHOLD = 1e-5


class SweepError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class SubsetEvaluation:
    """Validation MSE of one top-fraction subset on the sweep's fixed split."""

    retained_fraction: float
    subset_size: int
    validation_mse: float
    split_seed: int


def default_fraction_grid() -> tuple[float, ...]:
    """100% down to 2% in steps of 2, plus 1.5%, 1% and 0.5% (53 subsets)."""
    grid = [pct / 100 for pct in range(100, 0, -2)]
    grid += [0.015, 0.010, 0.005]
    return tuple(grid)


def rank_features(table: ScoreTable) -> np.ndarray:
    """Column ids by descending score; ties break by ascending name, and
    never-removed features go last (by name), after every scored one."""
    if table.size == 0:
        raise SweepError("cannot rank an empty score table")
    never = table.never_removed()
    if never.all():
        warnings.warn(
            "no feature was ever removed; ranking falls back to name order",
            stacklevel=2,
        )
    scored = [i for i in range(table.size) if not never[i]]
    unscored = [i for i in range(table.size) if never[i]]
    scored.sort(key=lambda i: (-table.scores[i], table.names[i]))
    unscored.sort(key=lambda i: table.names[i])
    return np.array(scored + unscored, dtype=np.int64)


def subset_size_for(fraction: float, n: int, rounding: str = "floor") -> int:
    if not 0 < fraction <= 1:
        raise SweepError(f"fraction must be in (0, 1], got {fraction}")
    raw = fraction * n
    if rounding == "floor":
        k = math.floor(raw + 1e-9)
    elif rounding == "ceil":
        k = math.ceil(raw - 1e-9)
    elif rounding == "nearest":
        k = math.floor(raw + 0.5)
    else:
        raise SweepError(f"rounding must be one of {ROUNDING_MODES}, got {rounding!r}")
    return min(k, n)


def build_percent_subsets(
    ranked: np.ndarray, fractions, rounding: str = "floor"
) -> list[np.ndarray]:
    """Boolean masks of the top ceil/floor(fraction * n) ranked features.

    Masks are nested: a smaller fraction's subset is contained in every
    larger one.
    """
    n = len(ranked)
    masks = []
    for fraction in fractions:
        k = subset_size_for(fraction, n, rounding)
        if k < 1:
            raise SweepError(f"fraction {fraction} keeps zero of {n} features")
        mask = np.zeros(n, dtype=bool)
        mask[ranked[:k]] = True
        masks.append(mask)
    return masks


def evaluate_subsets(
    subsets: list[np.ndarray],
    X: CsrMatrix,
    y: np.ndarray,
    split: SplitSpec,
    alpha: float = 1.0,
    fractions=None,
) -> list[SubsetEvaluation]:
    """Fit each subset on the shared split's train rows and score its
    validation MSE; results come back ordered by descending fraction."""
    y = np.asarray(y, dtype=np.float64)
    if fractions is None:
        fractions = [mask.sum() / X.ncols for mask in subsets]
    if len(fractions) != len(subsets):
        raise SweepError("fractions and subsets must pair up")
    train_idx, val_idx = split_indices(X.nrows, split.train_fraction, split.seed)
    X_train, X_val = X.take_rows(train_idx), X.take_rows(val_idx)
    y_train, y_val = y[train_idx], y[val_idx]

    evaluations = []
    for fraction, mask in zip(fractions, subsets):
        try:
            model = fit_ridge(X_train, y_train, mask, alpha)
        except Exception as exc:
            raise SweepError(f"fit failed for fraction {fraction}: {exc}") from exc
        evaluations.append(
            SubsetEvaluation(
                retained_fraction=float(fraction),
                subset_size=int(mask.sum()),
                validation_mse=mse(predict(model, X_val), y_val),
                split_seed=split.seed,
            )
        )
    evaluations.sort(key=lambda e: -e.retained_fraction)
    return evaluations


def select_best(evaluations: list[SubsetEvaluation]) -> SubsetEvaluation:
    """Minimum validation MSE; exact ties go to the larger subset."""
    if not evaluations:
        raise SweepError("no evaluations to select from")
    return min(evaluations, key=lambda e: (e.validation_mse, -e.subset_size))


def refit_selected(
    evaluation: SubsetEvaluation,
    ranked: np.ndarray,
    X: CsrMatrix,
    y: np.ndarray,
    split: SplitSpec,
    alpha: float = 1.0,
) -> RidgeModel:
    """Reproduce the selected evaluation's model (fits are deterministic)."""
    if split.seed != evaluation.split_seed:
        raise SweepError("refit split seed differs from the evaluation's")
    mask = np.zeros(X.ncols, dtype=bool)
    mask[ranked[: evaluation.subset_size]] = True
    train_idx, _ = split_indices(X.nrows, split.train_fraction, split.seed)
    y = np.asarray(y, dtype=np.float64)
    return fit_ridge(X.take_rows(train_idx), y[train_idx], mask, alpha)


def write_sweep_csv(path: str | Path, evaluations, header: dict | None = None) -> None:
    lines = [f"# {k}={v}" for k, v in (header or {}).items()]
    lines.append("fraction,subset_size,validation_mse")
    for ev in evaluations:
        lines.append(
            f"{format_float(ev.retained_fraction)},{ev.subset_size},"
            f"{format_float(ev.validation_mse)}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


# -- per-feature impact report ------------------------------------------------

@dataclasses.dataclass(frozen=True)
class ImpactReport:
    """High-impact features by category, plus the share of negative scores."""

    rows: tuple[tuple[int, str, str, float], ...]  # (column, name, category, score)
    threshold: float
    negative_fraction: float

    def by_category(self) -> dict[str, list[tuple[int, str, float]]]:
        grouped: dict[str, list[tuple[int, str, float]]] = {}
        for col, name, cat, score in self.rows:
            grouped.setdefault(cat, []).append((col, name, score))
        return grouped

    def write_tsv(self, path: str | Path, header: dict | None = None) -> None:
        lines = [f"# {k}={v}" for k, v in (header or {}).items()]
        lines.append(f"# threshold={format_float(self.threshold)}")
        lines.append(f"# negative_score_fraction={format_float(self.negative_fraction)}")
        lines.append("feature_id\tname\tcategory\tlmo_score")
        for col, name, cat, score in self.rows:
            lines.append(f"{col}\t{escape_field(name)}\t{cat}\t{format_float(score)}")
        atomic_write_text(path, "\n".join(lines) + "\n")

    def write_category_csv(self, path: str | Path) -> None:
        """Long-form plot data: category, rank within category, name, score."""
        lines = ["category,rank,name,lmo_score"]
        for cat, rows in sorted(self.by_category().items()):
            for rank, (_, name, score) in enumerate(rows, start=1):
                safe = name.replace('"', '""')
                lines.append(f'{cat},{rank},"{safe}",{format_float(score)}')
        atomic_write_text(path, "\n".join(lines) + "\n")


def impact_report(table: ScoreTable, threshold: float = IMPACT_THRESHOLD) -> ImpactReport:
    """Features whose |score| exceeds the threshold, grouped by category and
    sorted ascending by score within each group (confusers first)."""
    scored = ~table.never_removed()
    negatives = int(((table.scores < 0) & scored).sum())
    n_scored = int(scored.sum())
    rows = []
    for cat in sorted(set(table.categories)):
        picked = [
            i
            for i in range(table.size)
            if table.categories[i] == cat and scored[i] and abs(table.scores[i]) > threshold
        ]
        picked.sort(key=lambda i: (table.scores[i], table.names[i]))
        rows.extend((i, table.names[i], cat, float(table.scores[i])) for i in picked)
    return ImpactReport(
        rows=tuple(rows),
        threshold=threshold,
        negative_fraction=(negatives / n_scored) if n_scored else 0.0,
    )
