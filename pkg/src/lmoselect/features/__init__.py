"""Sparse text feature extraction: n-grams, engineered values, word lists."""

from .engineered import ENGINEERED_NAMES, engineered_features, readability_grade, sentiment_polarity
from .resources import (
    ResourceBundle,
    ResourceError,
    WordList,
    count_occurrences,
    default_resources_dir,
    load_resources,
    load_sentiment_lexicon,
    load_word_list,
    load_word_lists,
)
from .text import char_ngrams, tokenize, word_ngrams
from .vocab import (
    CATEGORIES,
    MIN_NGRAM_COUNT,
    FeatureVocabulary,
    VocabularyError,
    build_vocabulary,
    extract_matrix,
    tfidf_transform,
)

__all__ = [
    "CATEGORIES",
    "ENGINEERED_NAMES",
    "MIN_NGRAM_COUNT",
    "FeatureVocabulary",
    "ResourceBundle",
    "ResourceError",
    "VocabularyError",
    "WordList",
    "build_vocabulary",
    "char_ngrams",
    "count_occurrences",
    "default_resources_dir",
    "engineered_features",
    "extract_matrix",
    "load_resources",
    "load_sentiment_lexicon",
    "load_word_list",
    "load_word_lists",
    "readability_grade",
    "sentiment_polarity",
    "tfidf_transform",
    "tokenize",
    "word_ngrams",
]
