"""Lexical resources: word lists, the abbreviation list, the sentiment lexicon.

All files are UTF-8 with one entry per line; blank lines and lines
starting with '#' are ignored and entries are lowercased on load. A
resource directory looks like:

    resources/
      abbreviations.txt        one abbreviation per line
      sentiment_lexicon.txt    word <TAB> valence per line
      wordlists/*.txt          one word or phrase per line; each file
                               becomes one count feature named after it
"""

from __future__ import annotations

import dataclasses
from importlib import resources as importlib_resources
from pathlib import Path

from .text import tokenize


class ResourceError(ValueError):
    """Raised when a resource file is missing or malformed."""


@dataclasses.dataclass(frozen=True)
class WordList:
    """A named set of lowercase words and phrases, counted as one feature."""

    name: str
    words_or_phrases: frozenset[str]
    # derived at load time for matching
    words: frozenset[str] = dataclasses.field(repr=False, default=frozenset())
    phrases: tuple[tuple[str, ...], ...] = dataclasses.field(repr=False, default=())

    @classmethod
    def build(cls, name: str, entries) -> "WordList":
        entries = frozenset(e.lower() for e in entries)
        if not entries:
            raise ResourceError(f"word list {name!r} is empty")
        words, phrases = set(), []
        for entry in sorted(entries):
            toks = tuple(tokenize(entry))
            if len(toks) <= 1:
                words.add(entry)
            else:
                phrases.append(toks)
        return cls(name, entries, frozenset(words), tuple(phrases))


def count_occurrences(tokens: list[str], word_list: WordList) -> int:
    """How often any list entry occurs in the token stream.

    Single words count with multiset semantics; phrases match as
    contiguous token subsequences.
    """
    count = sum(1 for t in tokens if t in word_list.words)
    for phrase in word_list.phrases:
        k = len(phrase)
        count += sum(1 for i in range(len(tokens) - k + 1) if tuple(tokens[i : i + k]) == phrase)
    return count


def _read_lines(path: Path) -> list[str]:
    if not path.exists():
        raise ResourceError(f"resource file not found: {path}")
    out = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line.lower())
    return out


def load_word_list(path: str | Path, name: str | None = None) -> WordList:
    path = Path(path)
    return WordList.build(name or path.stem, _read_lines(path))


def load_word_lists(directory: str | Path) -> list[WordList]:
    """Load every .txt under a wordlists directory, sorted by list name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ResourceError(f"wordlists directory not found: {directory}")
    lists = [load_word_list(p) for p in sorted(directory.glob("*.txt"))]
    if not lists:
        raise ResourceError(f"no .txt word lists in {directory}")
    return lists


def load_sentiment_lexicon(path: str | Path) -> dict[str, float]:
    """Token -> signed valence, tab-separated."""
    path = Path(path)
    lexicon: dict[str, float] = {}
    for line in _read_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ResourceError(f"{path}: expected 'word<TAB>valence', got {line!r}")
        try:
            lexicon[parts[0].strip()] = float(parts[1])
        except ValueError:
            raise ResourceError(f"{path}: non-numeric valence in {line!r}") from None
    if not lexicon:
        raise ResourceError(f"sentiment lexicon {path} is empty")
    return lexicon


@dataclasses.dataclass(frozen=True)
class ResourceBundle:
    """Everything feature extraction needs from disk."""

    word_lists: tuple[WordList, ...]
    abbreviations: WordList
    sentiment_lexicon: dict[str, float]


def default_resources_dir() -> Path:
    """The small redistributable stand-in lists shipped with the package."""
    return Path(str(importlib_resources.files("lmoselect").joinpath("resources")))


def load_resources(directory: str | Path | None = None) -> ResourceBundle:
    directory = Path(directory) if directory is not None else default_resources_dir()
    expected = ["abbreviations.txt", "sentiment_lexicon.txt", "wordlists/"]
    if not directory.is_dir():
        raise ResourceError(
            f"resources directory not found: {directory} (expected files: {', '.join(expected)})"
        )
    missing = [e for e in expected if not (directory / e).exists()]
    if missing:
        raise ResourceError(
            f"resources directory {directory} is missing: {', '.join(missing)}"
        )
    word_lists = load_word_lists(directory / "wordlists")
    names = [wl.name for wl in word_lists]
    if len(set(names)) != len(names):
        raise ResourceError(f"duplicate word list names in {directory / 'wordlists'}")
    return ResourceBundle(
        word_lists=tuple(word_lists),
        abbreviations=load_word_list(directory / "abbreviations.txt"),
        sentiment_lexicon=load_sentiment_lexicon(directory / "sentiment_lexicon.txt"),
    )
