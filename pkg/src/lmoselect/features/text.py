"""Tweet-style tokenization and character/word n-gram counting."""

from __future__ import annotations

import re
from collections import Counter

NGRAM_SIZES = (1, 2, 3)

# Alternatives are tried in order; the input is lowercased first, so the
# emoticon class only needs lowercase mouths. The lookahead keeps ":d"
# from eating the first letter of ":dog".
_TOKEN_PATTERNS = (
    r"https?://\S+",
    r"www\.\S+",
    r"@\w+",
    r"#\w+",
    r"<3",
    r"[:;=8][-o*']?[)(\[\]dp/\\}{@|3](?!\w)",
    r"[☀-➿\U0001f000-\U0001faff][☀-➿\U0001f000-\U0001faff️]*",
    r"\w+(?:['’]\w+)*",
    r"[^\w\s]",
)
_TOKEN_RE = re.compile("|".join(f"(?:{p})" for p in _TOKEN_PATTERNS))


def tokenize(text: str) -> list[str]:
    """Lowercased tokens; URLs, @mentions, #hashtags, emoticons and
    punctuation marks each come out as one token, never containing
    whitespace."""
    return _TOKEN_RE.findall(text.lower())


def char_ngrams(text: str, n_values: tuple[int, ...] = NGRAM_SIZES) -> Counter:
    """Sliding-window n-grams over the lowercased raw text, spaces included."""
    s = text.lower()
    grams: Counter = Counter()
    for n in n_values:
        for i in range(len(s) - n + 1):
            grams[s[i : i + n]] += 1
    return grams


def word_ngrams(tokens: list[str], n_values: tuple[int, ...] = NGRAM_SIZES) -> Counter:
    """Token n-grams, named by joining tokens with single spaces."""
    grams: Counter = Counter()
    for n in n_values:
        for i in range(len(tokens) - n + 1):
            grams[" ".join(tokens[i : i + n])] += 1
    return grams
