"""Shared corpus-building helpers for the test suite."""

from __future__ import annotations

import datetime as dt
from pathlib import Path

import pytest

from entgraph.model import Corpus, EntityId, Proposition, TypedPredicate

DATA = Path(__file__).parent / "data"


def ent(key: str, named: bool = True) -> EntityId:
    return EntityId(key, None, named)


def pred(name: str, *types: str) -> TypedPredicate:
    """Build a predicate from an untyped name like 'kill' or 'die.1'."""
    if len(types) == 1:
        case = name[-2:] if len(name) > 2 and name[-2] == "." and name[-1] in "12" else ".1"
        lemma = name[:-2] if name.endswith(case) else name
        return TypedPredicate(lemma, 1, tuple(types), case)
    return TypedPredicate(name, 2, tuple(types))


def prop(
    name: str,
    args: tuple[str, ...],
    types: tuple[str, ...] | None = None,
    date: str | None = None,
    article: str = "a1",
    idx: int = 0,
) -> Proposition:
    types = types or tuple("person" for _ in args)
    return Proposition(
        pred(name, *types),
        tuple(ent(a) for a in args),
        article,
        dt.date.fromisoformat(date) if date else None,
        idx,
    )


def corpus(*props: Proposition) -> Corpus:
    return Corpus(props)


@pytest.fixture
def conformance_file() -> Path:
    return DATA / "conformance_propositions.jsonl"
