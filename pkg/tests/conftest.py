import pytest
from hypothesis import HealthCheck, settings

from lmoselect.features.resources import ResourceBundle, WordList

settings.register_profile(
    "suite",
    max_examples=40,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def toy_resources():
    return ResourceBundle(
        word_lists=(
            WordList.build("greetings", ["hello", "hi"]),
            WordList.build("hooks", ["you won't believe", "things", "believe"]),
        ),
        abbreviations=WordList.build("abbreviations", ["etc", "dr"]),
        sentiment_lexicon={"good": 2.0, "bad": -2.0, "awful": -3.0, "love": 3.0},
    )
