"""The twelve engineered per-post features.

Fixed semantic order (the matrix maps them into columns by name):

     1. mean_word_length      mean token length over word-like tokens
     2. max_word_length
     3. char_count            raw character count of the text
     4. mention_count         occurrences of '@'
     5. hashtag_count         occurrences of '#'
     6. dot_count             occurrences of '.'
     7. starts_with_number    1 iff the first non-space char is an ASCII digit
     8. abbreviation_count    hits against the abbreviation list
     9. has_media             media attachment indicator
    10. part_of_day           1..4 by six-hour block, 0 when no timestamp
    11. sentiment_polarity    lexicon score normalized into [-1, 1]
    12. readability_grade     Flesch-Kincaid grade level (may be negative)
"""

from __future__ import annotations

import math
import re

import numpy as np

from .resources import ResourceBundle, count_occurrences
from .text import tokenize

ENGINEERED_NAMES = (
    "mean_word_length",
    "max_word_length",
    "char_count",
    "mention_count",
    "hashtag_count",
    "dot_count",
    "starts_with_number",
    "abbreviation_count",
    "has_media",
    "part_of_day",
    "sentiment_polarity",
    "readability_grade",
)

_NEGATORS = {"not", "no", "never"}
_VOWELS = set("aeiouy")
_SENTENCE_RE = re.compile(r"[.!?]+")


def word_tokens(tokens: list[str]) -> list[str]:
    """Tokens that carry at least one letter or digit (drops bare punctuation)."""
    return [t for t in tokens if any(ch.isalnum() for ch in t)]


def count_syllables(word: str) -> int:
    """Vowel-group count with a silent-e adjustment, at least 1 per word.

    'y' counts as a vowel; a final 'e' after a consonant is dropped unless
    the word ends in consonant+'le'.
    """
    w = "".join(ch for ch in word.lower() if ch.isalpha())
    if not w:
        return 1
    groups = len(re.findall(r"[aeiouy]+", w))
    if (
        groups > 1
        and w.endswith("e")
        and w[-2] not in _VOWELS
        and not (len(w) > 2 and w.endswith("le") and w[-3] not in _VOWELS)
    ):
        groups -= 1
    return max(1, groups)


def sentence_count(text: str) -> int:
    """Number of runs of sentence-ending punctuation, at least 1."""
    return max(1, len(_SENTENCE_RE.findall(text)))


def readability_grade(text: str, tokens: list[str] | None = None) -> float:
    """Flesch-Kincaid grade level; 0.0 when the text has no words."""
    words = word_tokens(tokens if tokens is not None else tokenize(text))
    if not words:
        return 0.0
    syllables = sum(count_syllables(w) for w in words)
    sentences = sentence_count(text)
    return 0.39 * len(words) / sentences + 11.8 * syllables / len(words) - 15.59


def sentiment_polarity(tokens: list[str], lexicon: dict[str, float]) -> float:
    """Summed per-token valence squashed into [-1, 1].

    A token's valence flips sign when the preceding token is a negator
    ("not", "no", "never" or anything ending in "n't"). The running sum s
    is normalized as s / sqrt(s^2 + 15).
    """
    total = 0.0
    for i, tok in enumerate(tokens):
        valence = lexicon.get(tok)
        if valence is None:
            continue
        if i > 0 and (tokens[i - 1] in _NEGATORS or tokens[i - 1].endswith("n't")):
            valence = -valence
        total += valence
    return total / math.sqrt(total * total + 15.0)


def part_of_day(timestamp) -> int:
    """Quarter of the day (1..4) from the timestamp's own clock; 0 if absent."""
    if timestamp is None:
        return 0
    return timestamp.hour // 6 + 1


def starts_with_number(text: str) -> int:
    stripped = text.lstrip()
    return 1 if stripped and "0" <= stripped[0] <= "9" else 0


def engineered_features(
    instance, resources: ResourceBundle, tokens: list[str] | None = None
) -> np.ndarray:
    """The 12-value vector for one instance, in ENGINEERED_NAMES order."""
    text = instance.text
    if tokens is None:
        tokens = tokenize(text)
    words = word_tokens(tokens)
    lengths = [len(w) for w in words]
    return np.array(
        [
            sum(lengths) / len(lengths) if lengths else 0.0,
            float(max(lengths)) if lengths else 0.0,
            float(len(text)),
            float(text.count("@")),
            float(text.count("#")),
            float(text.count(".")),
            float(starts_with_number(text)),
            float(count_occurrences(tokens, resources.abbreviations)),
            1.0 if instance.has_media else 0.0,
            float(part_of_day(instance.timestamp)),
            sentiment_polarity(tokens, resources.sentiment_lexicon),
            readability_grade(text, tokens),
        ]
    )
