"""True/false question generation from a dated proposition corpus.

The corpus is cut into short date partitions; within each partition,
propositions about frequently mentioned entities and corpus-popular
predicates become positive questions and are withheld from the evidence.
Negatives replace each positive's predicate with a more specific word
(noun hyponym or verb troponym of its first dictionary sense), then are
screened: a candidate that occurs in its own partition is discarded as
actually true, and one that never occurs anywhere in the corpus is
discarded as too easy. The surviving pool is downsampled to equal-size
unary/binary and positive/negative quadrants with a seeded generator.
"""

from __future__ import annotations

import datetime as dt
import json
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .ingest import proposition_record, parse_record
from .lexicon import LexicalResource
from .model import Corpus, EntityId, IngestStats, Proposition, TypeInventory, TypedPredicate

QUESTION_FORMAT_VERSION = 1
EVIDENCE_FORMAT_VERSION = 1


@dataclass
class Partition:
    """Propositions of up to window_days consecutive days of articles."""

    id: int
    date_range: tuple[dt.date, dt.date]
    propositions: list[tuple[str, Proposition]]

    def without(self, prop_ids: set[str]) -> "Partition":
        return Partition(
            self.id,
            self.date_range,
            [(pid, p) for pid, p in self.propositions if pid not in prop_ids],
        )


@dataclass
class Question:
    id: str
    partition_id: int
    predicate: TypedPredicate
    args: tuple[EntityId, ...]
    polarity: str  # "positive" | "negative"
    provenance: dict
    surface: str = ""


def partition(corpus: Corpus, window_days: int = 3) -> tuple[list[Partition], int]:
    """Cut the corpus into disjoint consecutive date windows.

    Windows are anchored at the earliest article date; empty windows are
    dropped. Returns the partitions and the count of undated propositions
    excluded.
    """
    dated = [(pid, p) for pid, p in corpus.items() if p.date is not None]
    undated = len(corpus) - len(dated)
    if not dated:
        return [], undated
    start = min(p.date for _, p in dated)
    buckets: dict[int, list[tuple[str, Proposition]]] = {}
    for pid, p in dated:
        buckets.setdefault((p.date - start).days // window_days, []).append((pid, p))
    partitions = []
    for idx in sorted(buckets):
        lo = start + dt.timedelta(days=idx * window_days)
        hi = lo + dt.timedelta(days=window_days - 1)
        partitions.append(Partition(idx, (lo, hi), buckets[idx]))
    return partitions, undated


def _question_surface(pred: TypedPredicate, args: tuple[EntityId, ...]) -> str:
    """Rough human-readable rendering, for inspection only."""
    names = [a.surface for a in args]
    segments = pred.lemma.split(".")
    if segments[0] == "be" and len(segments) > 1:
        return f"Was {names[0]} a {' '.join(segments[1:])}?"
    verb = " ".join(segments)
    if pred.valency == 2:
        return f"Did {names[0]} {verb} {names[1]}?"
    if pred.case_marker == ".2":
        return f"Was {names[0]} {verb}-ed?"
    return f"Did {names[0]} {verb}?"


@dataclass
class PositiveSelection:
    questions: list[Question]
    evidence: Partition
    shortfall: bool


def select_positives(
    part: Partition,
    corpus: Corpus,
    entity_min: int = 6,
    predicate_min: int = 11,
    n: int = 8,
    rng: random.Random | None = None,
) -> PositiveSelection:
    """Pick up to n partition propositions as positives and withhold them.

    Eligible propositions feature a star binding (an entity pair for
    binaries, a single entity for unaries, mentioned at least entity_min
    times in the partition) and a predicate seen at least predicate_min
    times in the whole corpus. Chosen propositions leave the partition's
    evidence.
    """
    rng = rng or random.Random(0)
    pair_counts: Counter = Counter()
    entity_counts: Counter = Counter()
    for _, p in part.propositions:
        keys = p.arg_keys
        for k in keys:
            entity_counts[k] += 1
        if p.predicate.valency == 2:
            pair_counts[tuple(sorted(keys))] += 1

    candidates = []
    for pid, p in part.propositions:
        if corpus.untyped_index[p.predicate.untyped] < predicate_min:
            continue
        keys = p.arg_keys
        if p.predicate.valency == 2:
            starred = pair_counts[tuple(sorted(keys))] >= entity_min
        else:
            starred = entity_counts[keys[0]] >= entity_min
        if starred:
            candidates.append((pid, p))

    candidates.sort(key=lambda item: item[0])
    chosen = sorted(rng.sample(candidates, min(n, len(candidates))))
    questions = []
    for seq, (pid, p) in enumerate(chosen):
        questions.append(
            Question(
                id=f"q{part.id:03d}-pos{seq:04d}",
                partition_id=part.id,
                predicate=p.predicate,
                args=p.args,
                polarity="positive",
                provenance={"source_prop": pid},
                surface=_question_surface(p.predicate, p.args),
            )
        )
    return PositiveSelection(
        questions,
        part.without({pid for pid, _ in chosen}),
        shortfall=len(chosen) < n,
    )


@dataclass
class ScreeningStats:
    proposed: int = 0
    screened_in_partition: int = 0
    screened_zero_corpus: int = 0
    positives_without_substitutes: int = 0
    emitted: int = 0

    def rates(self) -> dict:
        denom = self.proposed or 1
        return {
            "in_partition_rate": self.screened_in_partition / denom,
            "zero_corpus_rate": self.screened_zero_corpus / denom,
        }


def generate_negatives(
    positives: list[Question],
    lex: LexicalResource,
    part: Partition,
    corpus: Corpus,
) -> tuple[list[Question], ScreeningStats]:
    """Mint hard negatives for a partition's positives.

    Every first-sense substitute is proposed; candidates appearing in the
    partition (actually true) or nowhere in the corpus (too easy to call
    false) are screened out.
    """
    stats = ScreeningStats()
    in_partition = {
        (p.predicate.name, p.predicate.valency, p.arg_keys)
        for _, p in part.propositions
    }
    negatives = []
    seq = 0
    for pos in positives:
        subs = lex.substitutes_for_predicate(pos.predicate)
        if not subs:
            stats.positives_without_substitutes += 1
            continue
        for lemma, relation in subs:
            stats.proposed += 1
            pred = TypedPredicate(
                lemma,
                pos.predicate.valency,
                pos.predicate.slot_types,
                pos.predicate.case_marker,
            )
            key = (pred.name, pred.valency, tuple(a.key for a in pos.args))
            if key in in_partition:
                stats.screened_in_partition += 1
                continue
            if corpus.untyped_index.get(pred.untyped, 0) == 0:
                stats.screened_zero_corpus += 1
                continue
            negatives.append(
                Question(
                    id=f"q{part.id:03d}-neg{seq:04d}",
                    partition_id=part.id,
                    predicate=pred,
                    args=pos.args,
                    polarity="negative",
                    provenance={"source_positive": pos.id, "relation": relation},
                    surface=_question_surface(pred, pos.args),
                )
            )
            seq += 1
            stats.emitted += 1
    return negatives, stats


def balance(
    positives: list[Question],
    negatives: list[Question],
    rng: random.Random,
) -> tuple[list[Question], bool]:
    """Downsample to equal unary/binary and positive/negative quadrants.

    Returns the balanced questions sorted by id, plus a warning flag set
    when some quadrant was empty (the largest balanced set is then empty).
    """
    quadrants = {(v, pol): [] for v in (1, 2) for pol in ("positive", "negative")}
    for q in positives + negatives:
        quadrants[(q.predicate.valency, q.polarity)].append(q)
    m = min(len(qs) for qs in quadrants.values())
    warned = m == 0
    out: list[Question] = []
    for key in sorted(quadrants):
        pool = sorted(quadrants[key], key=lambda q: q.id)
        out.extend(rng.sample(pool, m))
    return sorted(out, key=lambda q: q.id), warned


@dataclass
class QaGenConfig:
    window_days: int = 3
    entity_min: int = 6
    predicate_min: int = 11
    positives_per_partition: int = 8
    seed: int = 0


@dataclass
class QuestionSet:
    questions: list[Question]
    evidence: list[Partition]
    manifest: dict


def generate_questions(
    corpus: Corpus, lex: LexicalResource, config: QaGenConfig = QaGenConfig()
) -> QuestionSet:
    """Full generation pass: partition, select, derive negatives, balance."""
    rng = random.Random(config.seed)
    partitions, undated = partition(corpus, config.window_days)
    all_pos: list[Question] = []
    all_neg: list[Question] = []
    evidence: list[Partition] = []
    screening = ScreeningStats()
    shortfalls = 0
    for part in partitions:
        sel = select_positives(
            part, corpus, config.entity_min, config.predicate_min,
            config.positives_per_partition, rng,
        )
        shortfalls += int(sel.shortfall)
        negatives, stats = generate_negatives(sel.questions, lex, part, corpus)
        for f in (
            "proposed", "screened_in_partition", "screened_zero_corpus",
            "positives_without_substitutes", "emitted",
        ):
            setattr(screening, f, getattr(screening, f) + getattr(stats, f))
        all_pos.extend(sel.questions)
        all_neg.extend(negatives)
        evidence.append(sel.evidence)

    balanced, warned = balance(all_pos, all_neg, rng)
    kept_ids = {q.id for q in balanced}
    manifest = {
        "format": "entgraph-questions",
        "version": QUESTION_FORMAT_VERSION,
        "seed": config.seed,
        "window_days": config.window_days,
        "entity_min": config.entity_min,
        "predicate_min": config.predicate_min,
        "positives_per_partition": config.positives_per_partition,
        "partitions": len(partitions),
        "undated_excluded": undated,
        "partitions_with_shortfall": shortfalls,
        "candidates": {"positives": len(all_pos), "negatives": len(all_neg)},
        "screening": {**screening.__dict__, **screening.rates()},
        "questions": len(balanced),
        "balance_warning": warned,
    }
    return QuestionSet(balanced, evidence, manifest)


# -- file formats ----------------------------------------------------------


def question_record(q: Question) -> dict:
    return {
        "id": q.id,
        "partition_id": q.partition_id,
        "predicate": q.predicate.token(),
        "args": [
            {
                "surface": a.surface,
                **({"kb_id": a.kb_id} if a.kb_id is not None else {}),
                "is_named": a.is_named,
            }
            for a in q.args
        ],
        "polarity": q.polarity,
        "provenance": q.provenance,
        "surface": q.surface,
    }


def question_from_record(obj: dict) -> Question:
    pred = TypedPredicate.parse_token(obj["predicate"])
    args = tuple(
        EntityId(a["surface"], a.get("kb_id"), a.get("is_named", False))
        for a in obj["args"]
    )
    return Question(
        obj["id"], obj["partition_id"], pred, args, obj["polarity"],
        obj.get("provenance", {}), obj.get("surface", ""),
    )


def write_questions(qs: QuestionSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(qs.manifest, sort_keys=True) + "\n")
        for q in qs.questions:
            fh.write(json.dumps(question_record(q), sort_keys=True) + "\n")


def read_questions(path: str | Path) -> tuple[list[Question], dict]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty question file")
    manifest = json.loads(lines[0])
    if manifest.get("format") != "entgraph-questions":
        raise ValueError(f"{path}: not a question file")
    if manifest.get("version") != QUESTION_FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported question file version")
    return [question_from_record(json.loads(ln)) for ln in lines[1:]], manifest


def write_evidence(partitions: list[Partition], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "format": "entgraph-evidence",
            "version": EVIDENCE_FORMAT_VERSION,
            "partitions": [
                {
                    "id": p.id,
                    "date_range": [p.date_range[0].isoformat(), p.date_range[1].isoformat()],
                    "size": len(p.propositions),
                }
                for p in partitions
            ],
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for p in partitions:
            for pid, prop in p.propositions:
                rec = {
                    "partition_id": p.id,
                    "prop_id": pid,
                    **proposition_record(prop),
                }
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_evidence(
    path: str | Path, inventory: TypeInventory | None = None
) -> list[Partition]:
    inventory = inventory or TypeInventory.default()
    stats = IngestStats()
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    header = json.loads(lines[0])
    if header.get("format") != "entgraph-evidence":
        raise ValueError(f"{path}: not an evidence file")
    if header.get("version") != EVIDENCE_FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported evidence file version")
    meta = {p["id"]: p for p in header["partitions"]}
    by_id: dict[int, list[tuple[str, Proposition]]] = {p["id"]: [] for p in header["partitions"]}
    for ln in lines[1:]:
        obj = json.loads(ln)
        props = parse_record(obj, inventory, stats)
        for prop in props:
            by_id[obj["partition_id"]].append((obj["prop_id"], prop))
    out = []
    for pid in sorted(by_id):
        lo, hi = meta[pid]["date_range"]
        out.append(
            Partition(
                pid,
                (dt.date.fromisoformat(lo), dt.date.fromisoformat(hi)),
                by_id[pid],
            )
        )
    return out
