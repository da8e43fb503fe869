"""Labeled short-text corpora: JSONL ingestion and seeded train/validation splits.

Two line-oriented schemas are understood:

* ``simple_jsonl``: one object per line with fields ``id``, ``text``,
  optional ``timestamp`` (ISO-8601), ``has_media`` and ``label``.
* ``challenge_jsonl``: an instances file (``id``, ``postText`` array,
  ``postTimestamp``, ``postMedia``) optionally joined on ``id`` with a
  truth file carrying ``truthMean``, as distributed with the Webis
  Clickbait Challenge 2017 corpus.
"""

from __future__ import annotations

import dataclasses
import datetime
import json
import math
from pathlib import Path

import numpy as np

from .util import MAX_SEED, atomic_write_text


class DatasetError(ValueError):
    """Raised for malformed corpus files or invalid split requests."""


# Twitter-style timestamps ("Sun Feb 14 20:30:37 +0000 2016") are parsed by
# hand: strptime's %a/%b depend on the process locale.
_MONTHS = {
    "jan": 1, "feb": 2, "mar": 3, "apr": 4, "may": 5, "jun": 6,
    "jul": 7, "aug": 8, "sep": 9, "oct": 10, "nov": 11, "dec": 12,
}


def _parse_twitter_timestamp(text: str) -> datetime.datetime:
    parts = text.split()
    if len(parts) != 6:
        raise ValueError("expected 6 space-separated fields")
    _, month, day, clock, offset, year = parts
    hh, mm, ss = (int(p) for p in clock.split(":"))
    if len(offset) != 5 or offset[0] not in "+-":
        raise ValueError(f"bad UTC offset {offset!r}")
    delta = datetime.timedelta(hours=int(offset[1:3]), minutes=int(offset[3:5]))
    tz = datetime.timezone(-delta if offset[0] == "-" else delta)
    return datetime.datetime(
        int(year), _MONTHS[month.lower()], int(day), hh, mm, ss, tzinfo=tz
    )


def _parse_timestamp(raw: str, where: str) -> datetime.datetime:
    text = raw.strip()
    try:
        return datetime.datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        pass
    try:
        return _parse_twitter_timestamp(text)
    except (ValueError, KeyError):
        raise DatasetError(f"{where}: unparseable timestamp {raw!r}") from None


@dataclasses.dataclass(frozen=True)
class Instance:
    """One annotated post; ``label`` is the mean clickbaitiness judgment."""

    id: str
    text: str
    timestamp: datetime.datetime | None = None
    has_media: bool = False
    label: float | None = None

    def __post_init__(self):
        if self.label is not None and not (0.0 <= self.label <= 1.0):
            raise DatasetError(f"instance {self.id!r}: label {self.label} outside [0, 1]")


@dataclasses.dataclass(frozen=True)
class SplitSpec:
    """Train fraction plus the seed that fixes the shuffle."""

    train_fraction: float
    seed: int

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise DatasetError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if not 0 <= self.seed <= MAX_SEED:
            raise DatasetError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


class Dataset:
    """Ordered, immutable collection of instances; order is file order."""

    __slots__ = ("instances", "provenance")

    def __init__(self, instances, provenance: str = ""):
        instances = tuple(instances)
        seen = set()
        for inst in instances:
            if inst.id in seen:
                raise DatasetError(f"duplicate instance id {inst.id!r}")
            seen.add(inst.id)
        self.instances = instances
        self.provenance = provenance

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    def __getitem__(self, i: int) -> Instance:
        return self.instances[i]

    def labels(self) -> np.ndarray:
        """Label vector aligned to instance order; missing labels are NaN."""
        return np.array(
            [math.nan if inst.label is None else inst.label for inst in self.instances]
        )

    def require_labels(self) -> np.ndarray:
        y = self.labels()
        missing = int(np.isnan(y).sum())
        if missing:
            raise DatasetError(f"{missing} of {len(y)} instances have no label")
        return y


def _iter_jsonl(path: Path):
    with open(path, encoding="utf-8-sig") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise DatasetError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def _require(obj: dict, key: str, where: str):
    if key not in obj or obj[key] is None:
        raise DatasetError(f"{where}: missing required field {key!r}")
    return obj[key]


def _to_label(value, where: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise DatasetError(f"{where}: non-numeric label {value!r}") from None


def _load_simple(path: Path) -> list[Instance]:
    out = []
    for lineno, obj in _iter_jsonl(path):
        where = f"{path}:{lineno}"
        ts = obj.get("timestamp")
        label = obj.get("label")
        out.append(
            Instance(
                id=str(_require(obj, "id", where)),
                text=str(_require(obj, "text", where)),
                timestamp=_parse_timestamp(ts, where) if ts is not None else None,
                has_media=bool(obj.get("has_media", False)),
                label=_to_label(label, where) if label is not None else None,
            )
        )
    return out


def _load_challenge(path: Path, truth_path: Path | None) -> list[Instance]:
    truth: dict[str, float] = {}
    if truth_path is not None:
        for lineno, obj in _iter_jsonl(truth_path):
            where = f"{truth_path}:{lineno}"
            tid = str(_require(obj, "id", where))
            if tid in truth:
                raise DatasetError(f"{where}: duplicate truth id {tid!r}")
            truth[tid] = _to_label(_require(obj, "truthMean", where), where)

    out = []
    seen = set()
    for lineno, obj in _iter_jsonl(path):
        where = f"{path}:{lineno}"
        iid = str(_require(obj, "id", where))
        seen.add(iid)
        post_text = _require(obj, "postText", where)
        if isinstance(post_text, list):
            text = " ".join(str(part) for part in post_text)
        else:
            text = str(post_text)
        ts = obj.get("postTimestamp")
        media = obj.get("postMedia") or []
        out.append(
            Instance(
                id=iid,
                text=text,
                timestamp=_parse_timestamp(ts, where) if ts else None,
                has_media=bool(media),
                label=truth.get(iid),
            )
        )

    orphans = sorted(set(truth) - seen)
    if orphans:
        raise DatasetError(
            f"{truth_path}: {len(orphans)} truth records without a matching "
            f"instance (first: {orphans[0]!r})"
        )
    return out


def load_dataset(
    path: str | Path,
    schema: str = "simple_jsonl",
    truth_path: str | Path | None = None,
) -> Dataset:
    """Read a corpus file into a Dataset, preserving line order."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"corpus file not found: {path}")
    if schema == "simple_jsonl":
        if truth_path is not None:
            raise DatasetError("simple_jsonl does not take a truth file")
        instances = _load_simple(path)
    elif schema == "challenge_jsonl":
        tp = Path(truth_path) if truth_path is not None else None
        if tp is not None and not tp.exists():
            raise DatasetError(f"truth file not found: {tp}")
        instances = _load_challenge(path, tp)
    else:
        raise DatasetError(f"unknown schema {schema!r}")
    return Dataset(instances, provenance=str(path))


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write a Dataset back out as simple_jsonl (absent fields omitted)."""
    lines = []
    for inst in dataset:
        obj: dict = {"id": inst.id, "text": inst.text}
        if inst.timestamp is not None:
            obj["timestamp"] = inst.timestamp.isoformat()
        if inst.has_media:
            obj["has_media"] = True
        if inst.label is not None:
            obj["label"] = inst.label
        lines.append(json.dumps(obj, ensure_ascii=False))
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def split_indices(n: int, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded uniform shuffle of 0..n-1; first ceil(fraction*n) go to train.

    Both halves are returned in ascending order so row slices keep the
    original relative ordering. The epsilon guards against float noise in
    products like 0.7 * 10.
    """
    if n < 1:
        raise DatasetError("cannot split an empty dataset")
    n_train = math.ceil(train_fraction * n - 1e-9)
    if n_train < 1 or n_train >= n:
        raise DatasetError(
            f"split of {n} rows at fraction {train_fraction} leaves an empty side"
        )
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Partition a dataset into train/validation using the given seeded shuffle."""
    train_idx, val_idx = split_indices(len(dataset), spec.train_fraction, spec.seed)
    train = Dataset([dataset[i] for i in train_idx], provenance=dataset.provenance)
    val = Dataset([dataset[i] for i in val_idx], provenance=dataset.provenance)
    return train, val
