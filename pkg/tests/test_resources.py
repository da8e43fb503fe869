import pytest

from lmoselect.features.resources import (
    ResourceError,
    WordList,
    count_occurrences,
    default_resources_dir,
    load_resources,
    load_sentiment_lexicon,
    load_word_list,
    load_word_lists,
)
from lmoselect.features.text import tokenize


def test_word_list_file_parsing(tmp_path):
    p = tmp_path / "things.txt"
    p.write_text("# comment\nAlpha\n\nbeta gamma\n", encoding="utf-8")
    wl = load_word_list(p)
    assert wl.name == "things"
    assert wl.words_or_phrases == frozenset({"alpha", "beta gamma"})
    assert "alpha" in wl.words
    assert ("beta", "gamma") in wl.phrases


def test_empty_word_list_rejected(tmp_path):
    p = tmp_path / "empty.txt"
    p.write_text("# only comments\n", encoding="utf-8")
    with pytest.raises(ResourceError, match="empty"):
        load_word_list(p)


def test_count_single_words_multiset():
    wl = WordList.build("x", ["you", "believe"])
    assert count_occurrences(["you", "will", "not", "believe"], wl) == 2


def test_count_repetition():
    wl = WordList.build("x", ["the"])
    assert count_occurrences(tokenize("the the the"), wl) == 3


def test_count_phrase_subsequence():
    wl = WordList.build("x", ["you won't believe"])
    tokens = tokenize("and you won't believe it")
    assert count_occurrences(tokens, wl) == 1
    assert count_occurrences(tokenize("you believe"), wl) == 0


def test_count_empty_tokens():
    wl = WordList.build("x", ["you"])
    assert count_occurrences([], wl) == 0


def test_load_word_lists_sorted_and_unique(tmp_path):
    d = tmp_path / "wordlists"
    d.mkdir()
    (d / "b.txt").write_text("x\n", encoding="utf-8")
    (d / "a.txt").write_text("y\n", encoding="utf-8")
    lists = load_word_lists(d)
    assert [wl.name for wl in lists] == ["a", "b"]


def test_load_word_lists_missing_dir(tmp_path):
    with pytest.raises(ResourceError, match="not found"):
        load_word_lists(tmp_path / "nope")


def test_sentiment_lexicon_parsing(tmp_path):
    p = tmp_path / "lex.txt"
    p.write_text("# c\ngood\t2.0\nBAD\t-2.5\n", encoding="utf-8")
    lex = load_sentiment_lexicon(p)
    assert lex == {"good": 2.0, "bad": -2.5}


def test_sentiment_lexicon_bad_line(tmp_path):
    p = tmp_path / "lex.txt"
    p.write_text("good 2.0\n", encoding="utf-8")
    with pytest.raises(ResourceError, match="TAB"):
        load_sentiment_lexicon(p)


def test_load_resources_missing_lists(tmp_path):
    (tmp_path / "abbreviations.txt").write_text("etc\n", encoding="utf-8")
    with pytest.raises(ResourceError, match="missing"):
        load_resources(tmp_path)


def test_load_resources_missing_dir_names_expected(tmp_path):
    with pytest.raises(ResourceError, match="abbreviations.txt"):
        load_resources(tmp_path / "missing")


def test_packaged_defaults_load():
    bundle = load_resources(default_resources_dir())
    assert len(bundle.word_lists) >= 4
    assert bundle.abbreviations.words
    assert bundle.sentiment_lexicon["love"] > 0 > bundle.sentiment_lexicon["hate"]
    names = [wl.name for wl in bundle.word_lists]
    assert names == sorted(names)
