"""Command-line pipeline: extract, score, sweep, predict, report.

Configuration precedence, lowest to highest: built-in defaults, then the
--config JSON file, then LMOSELECT_* environment variables, then flags.
Every command requires an explicit master seed (no wall-clock defaults)
and records it in its output headers, and commands take an advisory lock
on the output directory so they are not run concurrently against it.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .dataset import DatasetError, SplitSpec, load_dataset
from .features import (
    ResourceError,
    VocabularyError,
    build_vocabulary,
    extract_matrix,
    load_resources,
)
from .features.vocab import CATEGORIES, FeatureVocabulary
from .lmo import LmoConfig, LmoError, LmoRunError, ScoreTable, run_lmo, write_records
from .regression import RegressionError, RidgeModel, predict
from .sparse import CsrMatrix, MatrixFormatError
from .sweep import (
    SweepError,
    build_percent_subsets,
    default_fraction_grid,
    evaluate_subsets,
    impact_report,
    rank_features,
    refit_selected,
    select_best,
    subset_size_for,
    write_sweep_csv,
)
from .util import (
    LockError,
    atomic_write_bytes,
    atomic_write_text,
    derive_seed,
    format_float,
    output_lock,
    sha256_file,
)

VOCAB_FILE = "vocab.json"
MATRIX_FILE = "features.matrix"
LABELS_FILE = "labels.tsv"
RECORDS_FILE = "records.tsv"
SCORES_FILE = "scores.tsv"
SWEEP_FILE = "sweep.csv"
SUBSET_FILE = "selected_subset.txt"
MODEL_FILE = "model.json"
IMPACT_TSV = "impact.tsv"
IMPACT_CSV = "impact_by_category.csv"
RESULTS_FILE = "results.jsonl"

DEFAULT_BUDGET = 200_000
_CLUSTER_SCALE_NOTE = (
    "full-scale feature assessments are cluster workloads (on the order of "
    "10^6 remove-train-predict iterations); rerun with --budget-override to proceed"
)

_CONFIG_KEYS = {
    "instances": str,
    "truth": str,
    "schema": str,
    "resources_dir": str,
    "output_dir": str,
    "master_seed": int,
    "alpha": float,
    "lmo_split_fraction": float,
    "sweep_train_fraction": float,
    "workers": int,
    "coverage": float,
    "min_subset_size": int,
    "num_runs": int,
    "fractions": list,
    "rounding": str,
    "budget": int,
    "impact_threshold": float,
}

_ENV_KEYS = {
    "LMOSELECT_SEED": ("master_seed", int),
    "LMOSELECT_WORKERS": ("workers", int),
    "LMOSELECT_OUTPUT_DIR": ("output_dir", str),
    "LMOSELECT_RESOURCES_DIR": ("resources_dir", str),
    "LMOSELECT_BUDGET": ("budget", int),
}


class CliError(ValueError):
    pass


@dataclass
class PipelineConfig:
    instances: str | None = None
    truth: str | None = None
    schema: str = "simple_jsonl"
    resources_dir: str | None = None
    output_dir: str = "out"
    master_seed: int | None = None
    alpha: float = 1.0
    lmo_split_fraction: float = 0.7
    sweep_train_fraction: float = 2.0 / 3.0
    workers: int = 1
    coverage: float = 25.0
    min_subset_size: int | None = None
    num_runs: int | None = None
    fractions: tuple[float, ...] | None = None
    rounding: str = "floor"
    budget: int = DEFAULT_BUDGET
    impact_threshold: float = 1e-5

    @property
    def out(self) -> Path:
        return Path(self.output_dir)

    def require_seed(self) -> int:
        if self.master_seed is None:
            raise CliError(
                "a master seed is required; pass --seed, set LMOSELECT_SEED, "
                "or put master_seed in the config file"
            )
        return self.master_seed


def _load_config_file(path: str) -> dict:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise CliError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(obj) - set(_CONFIG_KEYS))
    if unknown:
        raise CliError(f"unknown config keys in {path}: {', '.join(unknown)}")
    return obj


def build_config(args: argparse.Namespace) -> PipelineConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(_load_config_file(args.config))
    for env, (key, conv) in _ENV_KEYS.items():
        raw = os.environ.get(env)
        if raw is not None:
            try:
                values[key] = conv(raw)
            except ValueError:
                raise CliError(f"cannot parse {env}={raw!r}") from None
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if "fractions" in values and values["fractions"] is not None:
        values["fractions"] = tuple(float(f) for f in values["fractions"])
    if "master_seed" in values:
        values["master_seed"] = int(values["master_seed"])
    try:
        return PipelineConfig(**values)
    except TypeError as exc:
        raise CliError(f"invalid configuration: {exc}") from None


# -- shared output helpers -----------------------------------------------------


def _write_if_changed(path: Path, payload: bytes) -> bool:
    """Atomic write that reports whether the file content changed."""
    if path.exists() and path.read_bytes() == payload:
        return False
    atomic_write_bytes(path, payload)
    return True


def _load_vocab_and_matrix(cfg: PipelineConfig) -> tuple[FeatureVocabulary, CsrMatrix]:
    vocab_path = cfg.out / VOCAB_FILE
    matrix_path = cfg.out / MATRIX_FILE
    for p in (vocab_path, matrix_path):
        if not p.exists():
            raise CliError(f"missing {p}; run `lmoselect extract` first")
    vocab = FeatureVocabulary.load(vocab_path)
    matrix, vhash = CsrMatrix.load(matrix_path)
    if vhash != vocab.content_hash():
        raise CliError(
            f"{matrix_path} was extracted against a different vocabulary "
            f"({vhash[:12]}... != {vocab.content_hash()[:12]}...); re-run extract"
        )
    return vocab, matrix


def _labels_payload(dataset) -> bytes:
    lines = ["id\tlabel"]
    for inst in dataset:
        label = "" if inst.label is None else format_float(inst.label)
        lines.append(f"{inst.id}\t{label}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _read_labels(path: Path) -> np.ndarray:
    if not path.exists():
        raise CliError(f"missing {path}; run `lmoselect extract` first")
    values = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#") or line == "id\tlabel":
            continue
        _, label = line.split("\t")
        values.append(float(label) if label else math.nan)
    return np.asarray(values, dtype=np.float64)


# -- commands -------------------------------------------------------------------


def cmd_extract(cfg: PipelineConfig) -> int:
    seed = cfg.require_seed()
    if not cfg.instances:
        raise CliError("extract needs an instances file (--instances or config)")
    with output_lock(cfg.out):
        resources = load_resources(cfg.resources_dir)
        dataset = load_dataset(cfg.instances, cfg.schema, cfg.truth)
        print(f"loaded {len(dataset)} instances from {cfg.instances}")

        vocab = build_vocabulary(dataset, resources.word_lists)
        counts = vocab.category_counts()
        for cat in CATEGORIES:
            print(f"  {cat:<12} {counts[cat]:>8}")
        print(f"  {'total':<12} {vocab.size:>8}")

        matrix = extract_matrix(dataset, vocab, resources)
        vocab_changed = _write_if_changed(
            cfg.out / VOCAB_FILE, (vocab.to_json() + "\n").encode("ascii")
        )
        matrix_changed = _write_if_changed(
            cfg.out / MATRIX_FILE, matrix.to_cache_bytes(vocab.content_hash())
        )
        _write_if_changed(cfg.out / LABELS_FILE, _labels_payload(dataset))
    note = "" if (vocab_changed or matrix_changed) else " (unchanged)"
    print(f"vocabulary hash {vocab.content_hash()}{note}")
    print(f"matrix cache sha256 {sha256_file(cfg.out / MATRIX_FILE)}")
    print(f"kernel backend: {kernels.BACKEND}; master_seed={seed}")
    return 0


def cmd_score(cfg: PipelineConfig, budget_override: bool = False, keep_going: bool = False) -> int:
    seed = cfg.require_seed()
    with output_lock(cfg.out):
        vocab, X = _load_vocab_and_matrix(cfg)
        y = _read_labels(cfg.out / LABELS_FILE)
        if len(y) != X.nrows:
            raise CliError("labels file does not match the cached matrix")
        if np.isnan(y).any():
            raise CliError(
                f"{int(np.isnan(y).sum())} instances lack labels; scoring needs ground truth"
            )
        lmo_config = LmoConfig.derive(
            n_features=X.ncols,
            min_subset_size=cfg.min_subset_size,
            num_runs=cfg.num_runs,
            coverage=cfg.coverage,
            alpha=cfg.alpha,
            master_seed=seed,
            split_fraction=cfg.lmo_split_fraction,
            workers=cfg.workers,
        )
        print(
            f"plan: {lmo_config.num_runs} runs x {lmo_config.removals_per_run} removals "
            f"({lmo_config.total_refits} refits, expected coverage "
            f"{lmo_config.expected_coverage:.1f})"
        )
        if lmo_config.total_refits > cfg.budget and not budget_override:
            raise CliError(
                f"plan costs {lmo_config.total_refits} refits, over the configured "
                f"budget of {cfg.budget}; {_CLUSTER_SCALE_NOTE}"
            )

        collected: list = []

        def sink(run_id, records):
            collected.extend(records)

        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            table = run_lmo(lmo_config, X, y, vocab, keep_going=keep_going, record_sink=sink)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)

        header = {
            "master_seed": seed,
            "alpha": format_float(cfg.alpha),
            "split_fraction": format_float(cfg.lmo_split_fraction),
            "n_features": lmo_config.n_features,
            "min_subset_size": lmo_config.min_subset_size,
            "num_runs": lmo_config.num_runs,
            "coverage_target": format_float(cfg.coverage),
            "vocab": vocab.content_hash(),
        }
        write_records(cfg.out / RECORDS_FILE, collected, header)
        table.save(cfg.out / SCORES_FILE, header)

    removed = table.counts[table.counts > 0]
    mean_removals = float(removed.mean()) if len(removed) else 0.0
    print(
        f"scored {int((table.counts > 0).sum())}/{table.size} features; "
        f"mean removals per feature {table.mean_removals():.2f} "
        f"(target {cfg.coverage:g}, mean over removed {mean_removals:.2f})"
    )
    if table.failed_runs:
        print(f"excluded failed runs: {list(table.failed_runs)}", file=sys.stderr)
    print(f"wrote {cfg.out / SCORES_FILE} and {cfg.out / RECORDS_FILE}")
    return 0


def cmd_sweep(cfg: PipelineConfig) -> int:
    seed = cfg.require_seed()
    with output_lock(cfg.out):
        vocab, X = _load_vocab_and_matrix(cfg)
        y = _read_labels(cfg.out / LABELS_FILE)
        if np.isnan(y).any():
            raise CliError("sweep needs fully labeled data")
        scores_path = cfg.out / SCORES_FILE
        if not scores_path.exists():
            raise CliError(f"missing {scores_path}; run `lmoselect score` first")
        table = ScoreTable.load(scores_path)
        if table.size != vocab.size:
            raise CliError("score table does not match the vocabulary")

        ranked = rank_features(table)
        fractions = list(cfg.fractions) if cfg.fractions else list(default_fraction_grid())
        usable = [f for f in fractions if subset_size_for(f, vocab.size, cfg.rounding) >= 1]
        dropped = sorted(set(fractions) - set(usable))
        if dropped:
            print(
                f"warning: dropping fractions keeping zero features: "
                f"{', '.join(format_float(f) for f in dropped)}",
                file=sys.stderr,
            )
        if not usable:
            raise CliError("no usable sweep fractions")

        masks = build_percent_subsets(ranked, usable, cfg.rounding)
        split = SplitSpec(cfg.sweep_train_fraction, derive_seed(seed, "sweep-split"))
        evaluations = evaluate_subsets(masks, X, y, split, cfg.alpha, usable)

        header = {
            "master_seed": seed,
            "split_seed": split.seed,
            "train_fraction": format_float(split.train_fraction),
            "alpha": format_float(cfg.alpha),
            "vocab": vocab.content_hash(),
        }
        write_sweep_csv(cfg.out / SWEEP_FILE, evaluations, header)

        best = select_best(evaluations)
        model = refit_selected(best, ranked, X, y, split, cfg.alpha)
        model.save(cfg.out / MODEL_FILE, vocab.content_hash())

        subset_lines = [
            f"# vocab={vocab.content_hash()}",
            f"# master_seed={seed}",
            f"# fraction={format_float(best.retained_fraction)}",
            f"# subset_size={best.subset_size}",
        ]
        subset_lines += [vocab.names[c] for c in ranked[: best.subset_size]]
        atomic_write_text(cfg.out / SUBSET_FILE, "\n".join(subset_lines) + "\n")

    print(
        f"best subset: {best.subset_size} features "
        f"({best.retained_fraction:.1%}) validation MSE {best.validation_mse:.6f}"
    )
    widest = max(evaluations, key=lambda e: e.retained_fraction)
    label = "full set" if widest.retained_fraction == 1.0 else (
        f"largest swept subset ({widest.retained_fraction:.1%})"
    )
    print(f"{label} ({widest.subset_size} features) validation MSE {widest.validation_mse:.6f}")
    print(f"wrote {cfg.out / SWEEP_FILE}, {cfg.out / MODEL_FILE}, {cfg.out / SUBSET_FILE}")
    return 0


def cmd_predict(cfg: PipelineConfig, instances: str, results_out: str | None) -> int:
    cfg.require_seed()
    with output_lock(cfg.out):
        vocab_path = cfg.out / VOCAB_FILE
        model_path = cfg.out / MODEL_FILE
        for p in (vocab_path, model_path):
            if not p.exists():
                raise CliError(f"missing {p}; run extract/score/sweep first")
        vocab = FeatureVocabulary.load(vocab_path)
        model, model_vhash = RidgeModel.load(model_path)
        if model_vhash != vocab.content_hash():
            raise CliError(
                f"model was trained against vocabulary {model_vhash[:12]}... but "
                f"{vocab_path} hashes to {vocab.content_hash()[:12]}..."
            )
        subset_path = cfg.out / SUBSET_FILE
        if subset_path.exists():
            subset_lines = subset_path.read_text(encoding="utf-8").splitlines()
            subset_hash = next(
                (l.split("=", 1)[1] for l in subset_lines if l.startswith("# vocab=")), None
            )
            if subset_hash is not None and subset_hash != vocab.content_hash():
                raise CliError(f"{subset_path} was selected against a different vocabulary")
            retained = [l for l in subset_lines if l and not l.startswith("#")]
            if len(retained) != int(model.active.sum()):
                raise CliError(
                    f"{subset_path} lists {len(retained)} features but the model "
                    f"keeps {int(model.active.sum())}"
                )
        resources = load_resources(cfg.resources_dir)
        dataset = load_dataset(instances, cfg.schema)
        X = extract_matrix(dataset, vocab, resources)
        scores = np.clip(predict(model, X), 0.0, 1.0)

        out_path = Path(results_out) if results_out else cfg.out / RESULTS_FILE
        lines = [
            json.dumps({"id": inst.id, "clickbaitScore": float(s)})
            for inst, s in zip(dataset, scores)
        ]
        atomic_write_text(out_path, "\n".join(lines) + ("\n" if lines else ""))
    print(f"wrote {len(lines)} predictions to {out_path}")
    return 0


def cmd_report(cfg: PipelineConfig) -> int:
    seed = cfg.require_seed()
    with output_lock(cfg.out):
        scores_path = cfg.out / SCORES_FILE
        if not scores_path.exists():
            raise CliError(f"missing {scores_path}; run `lmoselect score` first")
        table = ScoreTable.load(scores_path)
        report = impact_report(table, cfg.impact_threshold)
        report.write_tsv(cfg.out / IMPACT_TSV, {"master_seed": seed})
        report.write_category_csv(cfg.out / IMPACT_CSV)

    grouped = report.by_category()
    print(
        f"high-impact features (|score| > {cfg.impact_threshold:g}): "
        f"{len(report.rows)} across {len(grouped)} categories"
    )
    for cat in sorted(grouped):
        print(f"  {cat:<12} {len(grouped[cat]):>6}")
    print(f"fraction of scored features with negative score: {report.negative_fraction:.1%}")
    print(f"wrote {cfg.out / IMPACT_TSV} and {cfg.out / IMPACT_CSV}")
    return 0


# -- argument parsing -------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", dest="master_seed", type=int, help="master seed (required)")
    common.add_argument("--workers", type=int, help="parallel workers for scoring")
    common.add_argument("--output-dir", dest="output_dir", help="pipeline output directory")
    common.add_argument("--resources-dir", dest="resources_dir", help="lexical resources directory")
    common.add_argument("--alpha", type=float, help="ridge penalty (default 1.0)")

    parser = argparse.ArgumentParser(
        prog="lmoselect",
        description="Leave-many-out feature selection pipeline for short-text regression.",
        epilog=(
            "configuration precedence: defaults < --config file < LMOSELECT_* "
            "environment variables < flags"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="build the vocabulary and cache the matrix")
    p.add_argument("--instances", help="instances JSONL file")
    p.add_argument("--truth", help="truth JSONL file (challenge schema)")
    p.add_argument("--schema", choices=["simple_jsonl", "challenge_jsonl"])

    p = sub.add_parser("score", parents=[common], help="run the removal search and score features")
    p.add_argument("--coverage", type=float, help="target removals per feature (default 25)")
    p.add_argument("--min-subset-size", dest="min_subset_size", type=int)
    p.add_argument("--runs", dest="num_runs", type=int)
    p.add_argument("--budget", type=int, help=f"max refits without override (default {DEFAULT_BUDGET})")
    p.add_argument("--budget-override", action="store_true")
    p.add_argument("--keep-going", action="store_true", help="exclude failed runs instead of aborting")

    p = sub.add_parser("sweep", parents=[common], help="evaluate ranked subsets and pick the best")
    p.add_argument("--fractions", help="comma-separated retained fractions")
    p.add_argument("--rounding", choices=["floor", "ceil", "nearest"])

    p = sub.add_parser("predict", parents=[common], help="score new instances with the selected model")
    p.add_argument("instances", help="instances file to score")
    p.add_argument("--schema", choices=["simple_jsonl", "challenge_jsonl"])
    p.add_argument("--results-out", dest="results_out", help="output JSONL path")

    p = sub.add_parser("report", parents=[common], help="emit the per-category impact report")
    p.add_argument("--threshold", dest="impact_threshold", type=float)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if getattr(args, "fractions", None):
        try:
            args.fractions = [float(f) for f in str(args.fractions).split(",") if f.strip()]
        except ValueError:
            print(f"error: cannot parse --fractions {args.fractions!r}", file=sys.stderr)
            return 2
    try:
        cfg = build_config(args)
        if args.command == "extract":
            return cmd_extract(cfg)
        if args.command == "score":
            return cmd_score(cfg, args.budget_override, args.keep_going)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "predict":
            return cmd_predict(cfg, args.instances, args.results_out)
        if args.command == "report":
            return cmd_report(cfg)
        raise CliError(f"unknown command {args.command!r}")
    except (
        CliError,
        DatasetError,
        ResourceError,
        VocabularyError,
        RegressionError,
        LmoError,
        LmoRunError,
        SweepError,
        MatrixFormatError,
        LockError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
