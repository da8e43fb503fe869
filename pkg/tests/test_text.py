from hypothesis import given
from hypothesis import strategies as st

from lmoselect.features.text import char_ngrams, tokenize, word_ngrams


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_lowercases_and_splits_punctuation():
    assert tokenize("This is CLICKBAIT!") == ["this", "is", "clickbait", "!"]


def test_tokenize_leading_dot_mention():
    assert tokenize(".@user these 10 things") == [".", "@user", "these", "10", "things"]


def test_tokenize_url_hashtag_mention():
    assert tokenize("see https://t.co/Ab1 #Wow @You") == [
        "see",
        "https://t.co/ab1",
        "#wow",
        "@you",
    ]


def test_tokenize_emoticons_and_contractions():
    assert tokenize("don't worry :) <3") == ["don't", "worry", ":)", "<3"]
    assert tokenize(":dog") == [":", "dog"]


def test_tokenize_emoji_runs_stay_single():
    assert tokenize("wow \U0001f602\U0001f602 ok") == ["wow", "\U0001f602\U0001f602", "ok"]


def test_tokenize_punctuation_one_per_mark():
    assert tokenize("what?!") == ["what", "?", "!"]


@given(st.text(max_size=80))
def test_tokens_never_contain_whitespace(text):
    for tok in tokenize(text):
        assert tok == tok.lower()
        assert not any(ch.isspace() for ch in tok)


def test_char_ngrams_single_window():
    assert char_ngrams("ab", (2,)) == {"ab": 1}


def test_char_ngrams_overlap_counting():
    grams = char_ngrams("aaa", (1, 2))
    assert grams == {"a": 3, "aa": 2}


def test_char_ngrams_this():
    grams = char_ngrams("this", (3,))
    assert grams == {"thi": 1, "his": 1}


def test_char_ngrams_include_spaces_and_lowercase():
    grams = char_ngrams("A b", (2,))
    assert grams == {"a ": 1, " b": 1}


def test_char_ngrams_empty():
    assert char_ngrams("", (1, 2, 3)) == {}


def test_word_ngrams_join_with_spaces():
    grams = word_ngrams(["how", "to", "win"], (1, 2, 3))
    assert grams["how"] == 1
    assert grams["how to"] == 1
    assert grams["to win"] == 1
    assert grams["how to win"] == 1
    assert len(grams) == 6


def test_word_ngrams_counts_repeats():
    assert word_ngrams(["a", "a", "a"], (1, 2)) == {"a": 3, "a a": 2}
