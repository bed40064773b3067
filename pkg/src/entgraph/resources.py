"""Paths to data files shipped inside the package."""

from __future__ import annotations

from pathlib import Path

_DATA = Path(__file__).parent / "data"


def default_type_inventory_path() -> Path:
    return _DATA / "figer_types.txt"


def fixture_wordnet_dir() -> Path:
    return _DATA / "wordnet"


def sample_corpus_path() -> Path:
    return _DATA / "sample" / "propositions.jsonl"
