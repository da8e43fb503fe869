"""The leave-many-out engine.

Each run draws a random removal order over the full feature set, splits
the data once, fits the full model, then removes one feature at a time
down to the minimum subset size. Refitting after each removal yields a
chain of validation MSEs whose consecutive differences are the
leave-one-out errors: delta = MSE(without feature) - MSE(with feature),
so a positive delta marks a useful feature. Averaging every delta
recorded for a feature across runs gives its leave-many-out score.

Runs execute on a thread pool pulling from a shared queue; records are
re-ordered by (run id, step) before aggregation and spilling, so the
resulting table is byte-identical for any worker count.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from pathlib import Path

import numpy as np

from .dataset import split_indices
from .regression import fit_ridge, mse, predict
from .sparse import CsrMatrix
from .util import (
    MAX_SEED,
    atomic_write_text,
    derive_seed,
    escape_field,
    format_float,
    unescape_field,
)

DEFAULT_COVERAGE = 25.0
DEFAULT_SPLIT_FRACTION = 0.7
# runs remove at most this many features by default, mirroring the
# batch-of-bit-sets execution protocol at full scale
DEFAULT_MAX_REMOVALS_PER_RUN = 1000


class LmoError(ValueError):
    pass


class LmoRunError(RuntimeError):
    """A refit failed inside a run; carries run id and step for diagnosis."""

    def __init__(self, run_id: int, step: int, cause: Exception):
        super().__init__(f"run {run_id} failed at step {step}: {cause}")
        self.run_id = run_id
        self.step = step


@dataclasses.dataclass(frozen=True)
class LmoConfig:
    """Search geometry: n features, runs of n - m removals, r runs total.

    Exactly one of ``min_subset_size`` / ``num_runs`` may be omitted at
    construction through :meth:`derive`; it is then chosen so the expected
    removals per feature, r (n - m) / n, hit ``coverage``.
    """

    n_features: int
    min_subset_size: int
    num_runs: int
    coverage: float = DEFAULT_COVERAGE
    alpha: float = 1.0
    master_seed: int = 0
    split_fraction: float = DEFAULT_SPLIT_FRACTION
    workers: int = 1

    def __post_init__(self):
        if self.n_features < 2:
            raise LmoError(f"need at least 2 features, got {self.n_features}")
        if not 1 <= self.min_subset_size < self.n_features:
            raise LmoError(
                f"min_subset_size must be in [1, {self.n_features - 1}], "
                f"got {self.min_subset_size}"
            )
        if self.num_runs < 1:
            raise LmoError(f"num_runs must be positive, got {self.num_runs}")
        if self.coverage <= 0:
            raise LmoError(f"coverage must be positive, got {self.coverage}")
        if self.alpha <= 0:
            raise LmoError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.split_fraction < 1:
            raise LmoError(f"split_fraction must be in (0, 1), got {self.split_fraction}")
        if not 0 <= self.master_seed <= MAX_SEED:
            raise LmoError(f"master_seed out of range: {self.master_seed}")
        if self.workers < 1:
            raise LmoError(f"workers must be positive, got {self.workers}")

    @classmethod
    def derive(
        cls,
        n_features: int,
        min_subset_size: int | None = None,
        num_runs: int | None = None,
        coverage: float = DEFAULT_COVERAGE,
        **kwargs,
    ) -> "LmoConfig":
        """Fill the missing geometry parameter from the coverage target.

        With both omitted, removals per run default to
        min(1000, n // 2) and the run count follows from coverage.
        """
        if n_features < 2:
            raise LmoError(f"need at least 2 features, got {n_features}")
        if min_subset_size is None and num_runs is None:
            removals = min(DEFAULT_MAX_REMOVALS_PER_RUN, max(1, n_features // 2))
            min_subset_size = n_features - removals
        if min_subset_size is None:
            per_run = coverage * n_features / num_runs
            min_subset_size = n_features - max(1, min(n_features - 1, round(per_run)))
        elif num_runs is None:
            removals = n_features - min_subset_size
            num_runs = max(1, round(coverage * n_features / removals))
        return cls(
            n_features=n_features,
            min_subset_size=min_subset_size,
            num_runs=num_runs,
            coverage=coverage,
            **kwargs,
        )

    @property
    def removals_per_run(self) -> int:
        return self.n_features - self.min_subset_size

    @property
    def total_refits(self) -> int:
        """Remove-train-predict iterations the plan will cost."""
        return self.num_runs * self.removals_per_run

    @property
    def expected_coverage(self) -> float:
        return self.total_refits / self.n_features


@dataclasses.dataclass(frozen=True)
class RunSpec:
    """One planned run: which features leave, in which order, on which split."""

    run_id: int
    removal_sequence: tuple[int, ...]
    split_seed: int

    def validate(self, n_features: int) -> None:
        seq = self.removal_sequence
        if len(set(seq)) != len(seq):
            raise LmoError(f"run {self.run_id}: removal sequence repeats a feature")
        if seq and not all(0 <= f < n_features for f in seq):
            raise LmoError(f"run {self.run_id}: feature id out of range")


@dataclasses.dataclass(frozen=True)
class RemovalRecord:
    """Leave-one-out error of one feature within one run's current subset."""

    run_id: int
    feature: int
    position: int  # 1-based step within the run
    delta: float


class ScoreTable:
    """Aggregated leave-many-out scores, one row per vocabulary column.

    Features never removed by any run carry NaN scores and are flagged
    rather than imputed to zero, because a true zero score means
    "redundant" while absence means "no evidence".
    """

    __slots__ = ("names", "categories", "counts", "scores", "failed_runs")

    def __init__(self, names, categories, counts, scores, failed_runs=()):
        self.names = tuple(names)
        self.categories = tuple(categories)
        self.counts = np.ascontiguousarray(counts, dtype=np.int64)
        self.scores = np.ascontiguousarray(scores, dtype=np.float64)
        self.failed_runs = tuple(failed_runs)
        if not (len(self.names) == len(self.categories) == len(self.counts) == len(self.scores)):
            raise LmoError("score table arrays must have equal length")

    @property
    def size(self) -> int:
        return len(self.names)

    def __len__(self) -> int:
        return len(self.names)

    def never_removed(self) -> np.ndarray:
        return self.counts == 0

    def mean_removals(self) -> float:
        return float(self.counts.mean()) if len(self.counts) else 0.0

    # -- TSV round trip ----------------------------------------------------

    def to_tsv(self, header: dict | None = None) -> str:
        lines = [f"# {k}={v}" for k, v in (header or {}).items()]
        lines.append("feature_id\tname\tcategory\tremoval_count\tlmo_score")
        for i, (name, cat) in enumerate(zip(self.names, self.categories)):
            score = "" if self.counts[i] == 0 else format_float(self.scores[i])
            lines.append(f"{i}\t{escape_field(name)}\t{cat}\t{self.counts[i]}\t{score}")
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path, header: dict | None = None) -> None:
        atomic_write_text(path, self.to_tsv(header))

    @classmethod
    def load(cls, path: str | Path) -> "ScoreTable":
        names, categories, counts, scores = [], [], [], []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line or line.startswith("#") or line.startswith("feature_id\t"):
                    continue
                fid, name, cat, cnt, score = line.split("\t")
                if int(fid) != len(names):
                    raise LmoError(f"{path}: feature ids must be dense and ordered")
                names.append(unescape_field(name))
                categories.append(cat)
                counts.append(int(cnt))
                scores.append(float(score) if score else math.nan)
        return cls(names, categories, counts, scores)


def plan_runs(config: LmoConfig) -> list[RunSpec]:
    """Deterministic run plans: each removal sequence is a uniform random
    permutation prefix of length n - m, and per-run seeds derive from the
    master seed by a stable counter-based hash."""
    if config.removals_per_run < 1:
        raise LmoError("plan requires at least one removal per run")
    specs = []
    for run_id in range(config.num_runs):
        rng = np.random.Generator(
            np.random.PCG64(derive_seed(config.master_seed, "removal", run_id))
        )
        seq = rng.permutation(config.n_features)[: config.removals_per_run]
        specs.append(
            RunSpec(
                run_id=run_id,
                removal_sequence=tuple(int(f) for f in seq),
                split_seed=derive_seed(config.master_seed, "split", run_id),
            )
        )
    return specs


def execute_run(
    spec: RunSpec, X: CsrMatrix, y: np.ndarray, config: LmoConfig
) -> list[RemovalRecord]:
    """Run one removal chain: split once, fit once per step, difference
    consecutive validation MSEs (the step's "without" model becomes the
    next step's "with" model)."""
    spec.validate(X.ncols)
    y = np.asarray(y, dtype=np.float64)
    train_idx, val_idx = split_indices(X.nrows, config.split_fraction, spec.split_seed)
    X_train, X_val = X.take_rows(train_idx), X.take_rows(val_idx)
    y_train, y_val = y[train_idx], y[val_idx]

    active = np.ones(X.ncols, dtype=bool)
    try:
        model = fit_ridge(X_train, y_train, active, config.alpha)
    except Exception as exc:
        raise LmoRunError(spec.run_id, 0, exc) from exc
    previous = mse(predict(model, X_val), y_val)

    records = []
    for position, feature in enumerate(spec.removal_sequence, start=1):
        active[feature] = False
        try:
            model = fit_ridge(X_train, y_train, active, config.alpha)
        except Exception as exc:
            raise LmoRunError(spec.run_id, position, exc) from exc
        current = mse(predict(model, X_val), y_val)
        records.append(
            RemovalRecord(spec.run_id, feature, position, current - previous)
        )
        previous = current
    return records


def aggregate_scores(records, vocab) -> ScoreTable:
    """Per-feature mean delta and removal count.

    Records are sorted by (run id, step) before accumulating, so any
    permutation or partition of the same records produces the identical
    table.
    """
    counts = np.zeros(vocab.size, dtype=np.int64)
    sums = np.zeros(vocab.size)
    for rec in sorted(records, key=lambda r: (r.run_id, r.position)):
        if not math.isfinite(rec.delta):
            raise LmoError(f"non-finite delta for feature {rec.feature} in run {rec.run_id}")
        if not 0 <= rec.feature < vocab.size:
            raise LmoError(f"record feature id {rec.feature} outside the vocabulary")
        counts[rec.feature] += 1
        sums[rec.feature] += rec.delta
    scores = np.full(vocab.size, math.nan)
    removed = counts > 0
    scores[removed] = sums[removed] / counts[removed]
    return ScoreTable(vocab.names, vocab.categories, counts, scores)


def run_lmo(
    config: LmoConfig,
    X: CsrMatrix,
    y: np.ndarray,
    vocab,
    keep_going: bool = False,
    record_sink=None,
) -> ScoreTable:
    """Plan and execute every run on ``config.workers`` threads, then
    aggregate. The table is independent of worker count and completion
    order. A failed run aborts the whole job after in-flight runs drain,
    unless ``keep_going`` records the failure and excludes that run.

    ``record_sink(run_id, records)`` is invoked once per run, in ascending
    run order after all runs finish, so spill files come out byte-stable.
    """
    if vocab.size != X.ncols:
        raise LmoError(f"vocabulary size {vocab.size} != matrix columns {X.ncols}")
    if config.n_features != X.ncols:
        raise LmoError(f"config n_features {config.n_features} != matrix columns {X.ncols}")
    specs = plan_runs(config)
    results: list[list[RemovalRecord] | None] = [None] * len(specs)
    failures: list[tuple[int, str]] = []

    if config.workers == 1:
        for spec in specs:
            try:
                results[spec.run_id] = execute_run(spec, X, y, config)
            except LmoRunError as exc:
                if not keep_going:
                    raise
                failures.append((exc.run_id, str(exc)))
                results[exc.run_id] = []
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            pending = {
                pool.submit(execute_run, spec, X, y, config): spec.run_id
                for spec in specs
            }
            abort: BaseException | None = None
            while pending:
                done, _ = wait(list(pending), return_when=FIRST_COMPLETED)
                for fut in done:
                    run_id = pending.pop(fut)
                    if fut.cancelled():
                        continue
                    exc = fut.exception()
                    if exc is None:
                        results[run_id] = fut.result()
                    elif keep_going and isinstance(exc, LmoRunError):
                        failures.append((exc.run_id, str(exc)))
                        results[run_id] = []
                    else:
                        if abort is None:
                            abort = exc
                            for other in pending:
                                other.cancel()
            if abort is not None:
                raise abort

    emitted = []
    for run_id, records in enumerate(results):
        assert records is not None
        if record_sink is not None:
            record_sink(run_id, records)
        emitted.extend(records)

    if failures:
        warnings.warn(
            f"{len(failures)} of {len(specs)} runs failed and were excluded "
            f"(first: run {failures[0][0]})",
            stacklevel=2,
        )
    table = aggregate_scores(emitted, vocab)
    table.failed_runs = tuple(run_id for run_id, _ in failures)
    if table.never_removed().any():
        warnings.warn(
            f"{int(table.never_removed().sum())} features were never removed; "
            "their scores are reported as missing",
            stacklevel=2,
        )
    return table


# -- removal-record spill file ----------------------------------------------

def write_records(path: str | Path, records, header: dict | None = None) -> None:
    """Write the append-only audit spill: one record per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in (header or {}).items():
            fh.write(f"# {key}={value}\n")
        fh.write("run_id\tstep\tfeature_id\tdelta\n")
        for rec in records:
            fh.write(f"{rec.run_id}\t{rec.position}\t{rec.feature}\t{format_float(rec.delta)}\n")


def read_records(path: str | Path) -> list[RemovalRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#") or line.startswith("run_id\t"):
                continue
            run_id, step, feature, delta = line.split("\t")
            records.append(RemovalRecord(int(run_id), int(feature), int(step), float(delta)))
    return records
