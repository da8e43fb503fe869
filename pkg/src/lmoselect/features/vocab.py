"""Feature vocabulary construction, tf-idf weighting and matrix extraction.

Column names are made unique by a family prefix ("char:", "word:",
"feat:", "list:") and columns are ordered by category, then name. The
vocabulary stores the training-time document frequencies so matrices for
unseen data reuse the training idf.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from pathlib import Path

import numpy as np

from ..sparse import CsrMatrix
from ..util import atomic_write_text, sha256_bytes
from .engineered import ENGINEERED_NAMES, engineered_features
from .resources import ResourceBundle, count_occurrences
from .text import char_ngrams, tokenize, word_ngrams

VOCAB_FORMAT_VERSION = 1
MIN_NGRAM_COUNT = 3

CATEGORIES = ("char_ngram", "word_ngram", "engineered", "wordlist")
_PREFIX = {
    "char_ngram": "char:",
    "word_ngram": "word:",
    "engineered": "feat:",
    "wordlist": "list:",
}


class VocabularyError(ValueError):
    pass


class FeatureVocabulary:
    """Dense 0..n-1 column ids for every feature, plus training-corpus idf state."""

    __slots__ = ("names", "categories", "df", "n_train_docs", "index", "_ngram_mask")

    def __init__(self, names, categories, df, n_train_docs: int):
        self.names = tuple(names)
        self.categories = tuple(categories)
        self.df = np.ascontiguousarray(df, dtype=np.int64)
        self.n_train_docs = int(n_train_docs)
        if not (len(self.names) == len(self.categories) == len(self.df)):
            raise VocabularyError("entry arrays must have equal length")
        if len(set(self.names)) != len(self.names):
            raise VocabularyError("feature names must be unique")
        for cat in self.categories:
            if cat not in CATEGORIES:
                raise VocabularyError(f"unknown category {cat!r}")
        self.index = {name: i for i, name in enumerate(self.names)}
        self._ngram_mask = None

    @property
    def size(self) -> int:
        return len(self.names)

    def __len__(self) -> int:
        return len(self.names)

    def ngram_mask(self) -> np.ndarray:
        """Boolean mask over columns that carry tf-idf values."""
        if self._ngram_mask is None:
            self._ngram_mask = np.array(
                [c in ("char_ngram", "word_ngram") for c in self.categories], dtype=bool
            )
        return self._ngram_mask

    def columns_of(self, category: str) -> np.ndarray:
        return np.flatnonzero(np.array([c == category for c in self.categories]))

    def category_counts(self) -> dict[str, int]:
        counts = Counter(self.categories)
        return {cat: counts.get(cat, 0) for cat in CATEGORIES}

    def idf(self) -> np.ndarray:
        """Smoothed idf per column: ln((1+N)/(1+df)) + 1 (n-gram columns only)."""
        return np.log((1.0 + self.n_train_docs) / (1.0 + self.df)) + 1.0

    # -- persistence ------------------------------------------------------

    def to_json(self) -> str:
        """Canonical serialization; its SHA-256 is the vocabulary's identity."""
        entries = [
            [name, cat, int(df)]
            for name, cat, df in zip(self.names, self.categories, self.df)
        ]
        return json.dumps(
            {
                "format_version": VOCAB_FORMAT_VERSION,
                "n_train_docs": self.n_train_docs,
                "entries": entries,
            },
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=True,
        )

    def content_hash(self) -> str:
        return sha256_bytes(self.to_json().encode("ascii"))

    def save(self, path: str | Path) -> None:
        atomic_write_text(path, self.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "FeatureVocabulary":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        if obj.get("format_version") != VOCAB_FORMAT_VERSION:
            raise VocabularyError(f"{path}: unsupported vocabulary format")
        entries = obj["entries"]
        return cls(
            [e[0] for e in entries],
            [e[1] for e in entries],
            [e[2] for e in entries],
            obj["n_train_docs"],
        )


def build_vocabulary(
    train, word_lists, min_count: int = MIN_NGRAM_COUNT
) -> FeatureVocabulary:
    """All n-grams occurring at least ``min_count`` times over the training
    corpus, plus the 12 engineered columns and one column per word list."""
    if len(train) == 0:
        raise VocabularyError("cannot build a vocabulary from an empty corpus")
    totals: Counter = Counter()
    dfs: Counter = Counter()
    for inst in train:
        cg = char_ngrams(inst.text)
        wg = word_ngrams(tokenize(inst.text))
        for prefix, grams in (("char:", cg), ("word:", wg)):
            for gram, cnt in grams.items():
                key = prefix + gram
                totals[key] += cnt
                dfs[key] += 1

    names, categories, df = [], [], []
    for category, prefix in (("char_ngram", "char:"), ("word_ngram", "word:")):
        kept = sorted(
            key for key, total in totals.items()
            if key.startswith(prefix) and total >= min_count
        )
        names.extend(kept)
        categories.extend([category] * len(kept))
        df.extend(dfs[key] for key in kept)

    for feat in sorted(ENGINEERED_NAMES):
        names.append("feat:" + feat)
        categories.append("engineered")
        df.append(0)

    list_names = sorted(wl.name for wl in word_lists)
    if len(set(list_names)) != len(list_names):
        raise VocabularyError("word list names must be unique")
    for ln in list_names:
        names.append("list:" + ln)
        categories.append("wordlist")
        df.append(0)

    return FeatureVocabulary(names, categories, df, len(train))


def tfidf_transform(
    tf_rows: list[dict[int, float]], df: np.ndarray, n_docs: int
) -> list[dict[int, float]]:
    """Weight per-row raw n-gram counts by tf-idf and scale each row's
    n-gram block to unit Euclidean norm (all-zero blocks stay zero)."""
    idf = np.log((1.0 + n_docs) / (1.0 + np.asarray(df, dtype=np.float64))) + 1.0
    out = []
    for row in tf_rows:
        weighted = {col: cnt * idf[col] for col, cnt in row.items()}
        norm = math.sqrt(sum(v * v for v in weighted.values()))
        if norm > 0.0:
            weighted = {col: v / norm for col, v in weighted.items()}
        out.append(weighted)
    return out


def _check_alignment(vocab: FeatureVocabulary, resources: ResourceBundle) -> dict[str, object]:
    eng_cols = {}
    for feat in ENGINEERED_NAMES:
        col = vocab.index.get("feat:" + feat)
        if col is None:
            raise VocabularyError(f"vocabulary lacks engineered column {feat!r}")
        eng_cols[feat] = col
    if len(vocab.columns_of("engineered")) != len(ENGINEERED_NAMES):
        raise VocabularyError("vocabulary engineered column count mismatch")

    by_name = {wl.name: wl for wl in resources.word_lists}
    list_cols = []
    for col in vocab.columns_of("wordlist"):
        ln = vocab.names[col][len("list:"):]
        if ln not in by_name:
            raise VocabularyError(f"word list {ln!r} required by the vocabulary is not loaded")
    for wl in resources.word_lists:
        col = vocab.index.get("list:" + wl.name)
        if col is None:
            raise VocabularyError(f"loaded word list {wl.name!r} has no vocabulary column")
        list_cols.append((col, wl))
    return {"engineered": eng_cols, "wordlists": list_cols}


def extract_matrix(dataset, vocab: FeatureVocabulary, resources: ResourceBundle) -> CsrMatrix:
    """Feature matrix with rows aligned to dataset order.

    N-grams outside the vocabulary are dropped; tf-idf uses the
    document frequencies stored at vocabulary-build time.
    """
    cols = _check_alignment(vocab, resources)
    idf = vocab.idf()
    index = vocab.index
    rows = []
    for inst in dataset:
        tokens = tokenize(inst.text)

        tf: dict[int, float] = {}
        for prefix, grams in (("char:", char_ngrams(inst.text)), ("word:", word_ngrams(tokens))):
            for gram, cnt in grams.items():
                col = index.get(prefix + gram)
                if col is not None:
                    tf[col] = tf.get(col, 0.0) + cnt
        values = {col: cnt * idf[col] for col, cnt in tf.items()}
        norm = math.sqrt(sum(v * v for v in values.values()))
        if norm > 0.0:
            values = {col: v / norm for col, v in values.items()}

        for feat, value in zip(ENGINEERED_NAMES, engineered_features(inst, resources, tokens)):
            if value != 0.0:
                values[cols["engineered"][feat]] = float(value)

        for col, wl in cols["wordlists"]:
            cnt = count_occurrences(tokens, wl)
            if cnt:
                values[col] = float(cnt)

        rows.append(values)
    return CsrMatrix.from_dict_rows(rows, vocab.size)
