"""Sparse count statistics and PMI-weighted feature vectors.

Binary predicates get an argument-pair vector; every predicate slot
(the single unary slot, both binary slots) gets a per-slot entity vector.
Weights are positive PMI under maximum-likelihood probabilities; zero and
negative weights are dropped so feature support means genuine association.
"""

from __future__ import annotations

import math
import pickle
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .model import Corpus, TypedPredicate

PAIR = "pair"
SLOT = "slot"

VECTOR_CACHE_MAGIC = b"entgraph-vectors 1\n"


@dataclass
class CountStore:
    """Joint and marginal occurrence counts for one counting mode.

    pair mode:  key = binary predicate,     feature = ordered entity-key pair
    slot mode:  key = (predicate, slot),    feature = entity key
    """

    mode: str
    joint: Counter = field(default_factory=Counter)
    pred_marginal: Counter = field(default_factory=Counter)
    feat_marginal: Counter = field(default_factory=Counter)
    total: int = 0

    def add(self, pred_key, feat_key, n: int = 1) -> None:
        self.joint[(pred_key, feat_key)] += n
        self.pred_marginal[pred_key] += n
        self.feat_marginal[feat_key] += n
        self.total += n

    def consistent(self) -> bool:
        """Marginals and total must equal recomputation from the joint."""
        pred = Counter()
        feat = Counter()
        for (p, f), n in self.joint.items():
            pred[p] += n
            feat[f] += n
        return (
            pred == self.pred_marginal
            and feat == self.feat_marginal
            and self.total == sum(self.joint.values())
        )


def count(corpus: Corpus, mode: str) -> CountStore:
    """Accumulate occurrence counts over a corpus in pair or slot mode."""
    if mode not in (PAIR, SLOT):
        raise ValueError(f"mode must be {PAIR!r} or {SLOT!r}")
    store = CountStore(mode)
    for prop in corpus:
        if mode == PAIR:
            if prop.predicate.valency == 2:
                store.add(prop.predicate, (prop.args[0].key, prop.args[1].key))
        else:
            for slot, arg in enumerate(prop.args, start=1):
                store.add((prop.predicate, slot), arg.key)
    return store


def pmi(store: CountStore, pred_key, feat_key) -> float:
    """Positive pointwise mutual information of a (predicate, feature) event.

    max(0, ln( p(pred, feat) / (p(pred) p(feat)) )) with maximum-likelihood
    probabilities; unseen combinations score 0 by definition.
    """
    joint = store.joint.get((pred_key, feat_key), 0)
    if joint == 0:
        return 0.0
    value = math.log(
        joint * store.total
        / (store.pred_marginal[pred_key] * store.feat_marginal[feat_key])
    )
    return max(0.0, value)


@dataclass
class PairVector:
    """Argument-pair feature vector of one binary predicate."""

    predicate: TypedPredicate
    features: dict[tuple[str, str], float]


@dataclass
class SlotVector:
    """Per-slot entity feature vector; comparable across predicates only
    when the slot types match."""

    predicate: TypedPredicate
    slot: int
    slot_type: str
    features: dict[str, float]


@dataclass(frozen=True)
class FeatureConfig:
    # predicates seen fewer times than min_count get no vector
    min_count: int = 3


def build_vectors(store: CountStore, config: FeatureConfig = FeatureConfig()):
    """Build PMI vectors from a count store.

    Returns {predicate: PairVector} in pair mode and
    {(predicate, slot): SlotVector} in slot mode. Iteration is over sorted
    keys so float accumulation downstream is reproducible.
    """
    grouped: dict = {}
    for (pred_key, feat_key), _ in store.joint.items():
        grouped.setdefault(pred_key, []).append(feat_key)

    out: dict = {}
    for pred_key in sorted(grouped, key=_pred_sort_key):
        if store.pred_marginal[pred_key] < config.min_count:
            continue
        feats = {}
        for feat_key in sorted(grouped[pred_key]):
            w = pmi(store, pred_key, feat_key)
            if w > 0.0:
                feats[feat_key] = w
        if store.mode == PAIR:
            out[pred_key] = PairVector(pred_key, feats)
        else:
            pred, slot = pred_key
            out[pred_key] = SlotVector(pred, slot, pred.slot_types[slot - 1], feats)
    return out


def _pred_sort_key(pred_key):
    if isinstance(pred_key, tuple):
        pred, slot = pred_key
        return (pred.token(), slot)
    return (pred_key.token(), 0)


def save_vectors(path: str | Path, pair_vectors: dict, slot_vectors: dict) -> None:
    """Binary cache with a versioned header; payload keys are text tokens."""
    payload = {
        "pair": {
            pv.predicate.token(): sorted(pv.features.items())
            for pv in sorted(pair_vectors.values(), key=lambda v: v.predicate.token())
        },
        "slot": {
            f"{sv.predicate.token()}@{sv.slot}": sorted(sv.features.items())
            for sv in sorted(
                slot_vectors.values(), key=lambda v: (v.predicate.token(), v.slot)
            )
        },
    }
    with open(path, "wb") as fh:
        fh.write(VECTOR_CACHE_MAGIC)
        fh.write(pickle.dumps(payload, protocol=4))


def load_vectors(path: str | Path) -> tuple[dict, dict]:
    """Inverse of save_vectors; raises ValueError on a version mismatch."""
    with open(path, "rb") as fh:
        magic = fh.read(len(VECTOR_CACHE_MAGIC))
        if magic != VECTOR_CACHE_MAGIC:
            raise ValueError(f"unsupported vector cache header: {magic!r}")
        payload = pickle.loads(fh.read())
    pair_vectors = {}
    for token, feats in payload["pair"].items():
        pred = TypedPredicate.parse_token(token)
        pair_vectors[pred] = PairVector(pred, {tuple(k): v for k, v in feats})
    slot_vectors = {}
    for token, feats in payload["slot"].items():
        pred_token, slot_s = token.rsplit("@", 1)
        pred = TypedPredicate.parse_token(pred_token)
        slot = int(slot_s)
        slot_vectors[(pred, slot)] = SlotVector(
            pred, slot, pred.slot_types[slot - 1], dict(feats)
        )
    return pair_vectors, slot_vectors


def dump_vectors_tsv(path: str | Path, pair_vectors: dict, slot_vectors: dict) -> None:
    """Debug text dump: predicate, feature, weight."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("vector\tpredicate\tfeature\tweight\n")
        for pred in sorted(pair_vectors, key=lambda p: p.token()):
            for feat, w in sorted(pair_vectors[pred].features.items()):
                fh.write(f"pair\t{pred.token()}\t{feat[0]},{feat[1]}\t{w!r}\n")
        for pred, slot in sorted(slot_vectors, key=lambda k: (k[0].token(), k[1])):
            sv = slot_vectors[(pred, slot)]
            for feat, w in sorted(sv.features.items()):
                fh.write(f"slot{slot}\t{pred.token()}\t{feat}\t{w!r}\n")


COUNT_CACHE_MAGIC = b"entgraph-counts 1\n"


def _joint_rows(store: CountStore) -> list:
    rows = []
    for (pred_key, feat_key), n in store.joint.items():
        if store.mode == PAIR:
            rows.append([pred_key.token(), 0, list(feat_key), n])
        else:
            pred, slot = pred_key
            rows.append([pred.token(), slot, feat_key, n])
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return rows


def save_counts(path: str | Path, *stores: CountStore) -> None:
    """Binary cache of one or more count stores, versioned like vectors."""
    payload = {s.mode: _joint_rows(s) for s in stores}
    with open(path, "wb") as fh:
        fh.write(COUNT_CACHE_MAGIC)
        fh.write(pickle.dumps(payload, protocol=4))


def load_counts(path: str | Path) -> dict[str, CountStore]:
    with open(path, "rb") as fh:
        magic = fh.read(len(COUNT_CACHE_MAGIC))
        if magic != COUNT_CACHE_MAGIC:
            raise ValueError(f"unsupported count cache header: {magic!r}")
        payload = pickle.loads(fh.read())
    out = {}
    for mode, rows in payload.items():
        store = CountStore(mode)
        for token, slot, feat, n in rows:
            pred = TypedPredicate.parse_token(token)
            if mode == PAIR:
                store.add(pred, tuple(feat), n)
            else:
                store.add((pred, slot), feat, n)
        out[mode] = store
    return out


def dump_counts_tsv(path: str | Path, *stores: CountStore) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("mode\tpredicate\tslot\tfeature\tcount\n")
        for store in stores:
            for token, slot, feat, n in _joint_rows(store):
                feat_s = ",".join(feat) if isinstance(feat, list) else feat
                fh.write(f"{store.mode}\t{token}\t{slot}\t{feat_s}\t{n}\n")
