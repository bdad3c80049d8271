"""Access to the packaged word-list data files."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def _data_path(name: str) -> Path:
    return Path(str(resources.files("fedcast").joinpath("data", name)))


def default_lexicon_path() -> Path:
    return _data_path("lm_lexicon.csv")


def default_negators_path() -> Path:
    return _data_path("negators.txt")


def default_stopwords_path() -> Path:
    return _data_path("stopwords.txt")
