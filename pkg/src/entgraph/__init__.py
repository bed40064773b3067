"""Typed entailment-graph learning over unary and binary predicates."""

__version__ = "0.1.0"

from .model import Corpus, EntityId, Proposition, TypeInventory, TypedPredicate

__all__ = [
    "Corpus",
    "EntityId",
    "Proposition",
    "TypeInventory",
    "TypedPredicate",
    "__version__",
]
