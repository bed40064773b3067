"""Question answering models and the evaluation harness.

Answer models score how strongly each question can be inferred from the
partition evidence and take the maximum over evidence propositions as the
confidence of "true"; no inference found means confidence 0, which never
counts as a positive prediction. The harness sweeps thresholds over the
confidences for precision/recall curves, supports filtering to questions
whose predicate is a graph vertex, and reports accuracy over the K most
confident predictions.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .localgraph import ALL_KINDS, BB, BU, UU
from .model import Proposition
from .qagen import Partition, Question, balance
from .store import GraphStore


@dataclass(frozen=True)
class AnswerRecord:
    question_id: str
    model_id: str
    confidence: float
    best_evidence: str | None = None
    backed_off: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence outside [0, 1]")
        if (self.best_evidence is not None) != (self.confidence > 0):
            raise ValueError("best_evidence present iff confidence > 0")


def _untyped_match(q: Question, prop: Proposition) -> bool:
    return (
        prop.predicate.untyped == q.predicate.untyped
        and prop.arg_keys == tuple(a.key for a in q.args)
    )


def answer_exact_match(question: Question, evidence: Partition) -> AnswerRecord:
    """Confidence 1 iff some evidence proposition repeats the question
    verbatim (same untyped predicate, same bound arguments)."""
    for pid, prop in evidence.propositions:
        if _untyped_match(question, prop):
            return AnswerRecord(question.id, "exact", 1.0, pid)
    return AnswerRecord(question.id, "exact", 0.0)


def _model_id(kinds: frozenset[str]) -> str:
    return "graph-" + "+".join(sorted(kinds)).lower()


def answer_graph(
    question: Question,
    evidence: Partition,
    store: GraphStore,
    kinds: frozenset[str] = ALL_KINDS,
) -> AnswerRecord:
    """Max entailment score from any evidence proposition to the question.

    Components answer one question valency each: BB binary questions from
    binary evidence, UU unary questions from unary evidence, BU unary
    questions from binary evidence. Identical untyped proposition and
    binding scores 1.0 outright; evidence whose predicate has no vertex in
    its typed subgraph falls back to the untyped average.
    """
    hyp_args = tuple(a.key for a in question.args)
    best = 0.0
    best_pid = None
    backed_off = False
    for pid, prop in evidence.propositions:
        if question.predicate.valency == 2:
            if prop.predicate.valency != 2 or BB not in kinds:
                continue
        else:
            allowed = (prop.predicate.valency == 1 and UU in kinds) or (
                prop.predicate.valency == 2 and BU in kinds
            )
            if not allowed:
                continue
        if prop.predicate.valency == question.predicate.valency and _untyped_match(
            question, prop
        ):
            score, pid_backoff = 1.0, False
        elif store.has_typed_vertex(prop.predicate):
            result = store.entailment_score(
                prop, question.predicate, hyp_args, kinds
            )
            score, pid_backoff = result.score, result.backed_off
        else:
            result = store.backoff_score(
                prop.predicate.name,
                prop.predicate.valency,
                prop.arg_keys,
                question.predicate.name,
                question.predicate.valency,
                hyp_args,
                kinds,
            )
            score, pid_backoff = result.score, result.backed_off
        if score > best:
            best, best_pid, backed_off = score, pid, pid_backoff
    return AnswerRecord(question.id, _model_id(kinds), best, best_pid, backed_off)


def combine_components(records: Sequence[AnswerRecord]) -> AnswerRecord:
    """Overall prediction: the max over component confidences, so the
    combined model predicts true whenever any component does."""
    if not records:
        raise ValueError("no component records")
    best = max(records, key=lambda r: r.confidence)
    return AnswerRecord(
        best.question_id, "combined", best.confidence,
        best.best_evidence, best.backed_off,
    )


# -- external scorer protocol ------------------------------------------------


def compatible_evidence(question: Question, evidence: Partition) -> list[str]:
    """Evidence ids sharing the question's bound arguments under some map."""
    from .localgraph import valid_maps

    hyp_args = tuple(a.key for a in question.args)
    out = []
    for pid, prop in evidence.propositions:
        if prop.predicate.valency < question.predicate.valency:
            continue
        keys = prop.arg_keys
        for amap in valid_maps(prop.predicate.valency, question.predicate.valency):
            if all(keys[p - 1] == hyp_args[h - 1] for p, h in amap.pairs):
                out.append(pid)
                break
    return out


def export_evidence(
    questions: Sequence[Question], evidence: Mapping[int, Partition], path: str | Path
) -> None:
    """Write the (question, evidence candidate) listing external scorers read."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("question_id\tprop_id\n")
        for q in questions:
            part = evidence.get(q.partition_id)
            if part is None:
                continue
            for pid in compatible_evidence(q, part):
                fh.write(f"{q.id}\t{pid}\n")


class ScoreFileError(ValueError):
    pass


def read_external_scores(path: str | Path) -> dict[tuple[str, str], float]:
    """Parse (question id, evidence id, score) lines; scores must be in
    [0, 1]. Duplicate pairs keep the max."""
    scores: dict[tuple[str, str], float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("question_id"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ScoreFileError(f"line {lineno}: expected 3 tab-separated fields")
            qid, pid, raw = parts
            try:
                value = float(raw)
            except ValueError as exc:
                raise ScoreFileError(f"line {lineno}: bad score {raw!r}") from exc
            if not 0.0 <= value <= 1.0:
                raise ScoreFileError(f"line {lineno}: score {value} outside [0, 1]")
            key = (qid, pid)
            if key in scores:
                scores[key] = max(scores[key], value)
            else:
                scores[key] = value
    return scores


def external_scores(
    questions: Sequence[Question],
    scores: Mapping[tuple[str, str], float],
    model_id: str = "external",
) -> list[AnswerRecord]:
    """Fold externally computed per-evidence scores into answer records."""
    by_question: dict[str, tuple[float, str | None]] = {}
    for (qid, pid), value in sorted(scores.items()):
        cur = by_question.get(qid, (0.0, None))
        if value > cur[0]:
            by_question[qid] = (value, pid)
    out = []
    for q in questions:
        conf, pid = by_question.get(q.id, (0.0, None))
        out.append(AnswerRecord(q.id, model_id, conf, pid if conf > 0 else None))
    return out


# -- metrics -----------------------------------------------------------------


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    precision: float
    recall: float


@dataclass
class PRCurve:
    points: list[PRPoint]
    max_recall: float


def pr_curve(records: Sequence[AnswerRecord], gold: Mapping[str, bool]) -> PRCurve:
    """Precision/recall at every distinct positive confidence threshold.

    A record predicts true at threshold t iff its confidence is >= t and
    > 0; abstentions never predict true. Gold must contain at least one
    positive.
    """
    n_pos = sum(1 for qid in gold if gold[qid])
    if n_pos == 0:
        raise ValueError("gold labels contain no positives")
    answered = [(r.confidence, bool(gold[r.question_id])) for r in records if r.confidence > 0]
    thresholds = sorted({c for c, _ in answered})
    points = []
    for t in thresholds:
        tp = sum(1 for c, g in answered if c >= t and g)
        fp = sum(1 for c, g in answered if c >= t and not g)
        precision = tp / (tp + fp) if tp + fp else 0.0
        points.append(PRPoint(t, precision, tp / n_pos))
    return PRCurve(points, points[0].recall if points else 0.0)


@dataclass(frozen=True)
class AccuracyAtK:
    accuracy: float
    k_requested: int
    k_used: int


def accuracy_at_k(
    records: Sequence[AnswerRecord], gold: Mapping[str, bool], k: int
) -> AccuracyAtK:
    """Accuracy of the k most confident predictions (ties broken by
    question id). With fewer than k answered, uses all and reports it."""
    answered = sorted(
        (r for r in records if r.confidence > 0),
        key=lambda r: (-r.confidence, r.question_id),
    )
    top = answered[:k]
    if not top:
        return AccuracyAtK(0.0, k, 0)
    correct = sum(1 for r in top if gold[r.question_id])
    return AccuracyAtK(correct / len(top), k, len(top))


def filter_questions(
    questions: Sequence[Question], store: GraphStore, seed: int = 0
) -> list[Question]:
    """Keep questions whose typed predicate is a vertex anywhere in the
    graph collection, then re-balance the quadrants."""
    kept = []
    for q in questions:
        vertices = store.untyped_index.get(q.predicate.untyped, ())
        if any(v == q.predicate for _, v in vertices):
            kept.append(q)
    rng = random.Random(seed)
    balanced, _ = balance(
        [q for q in kept if q.polarity == "positive"],
        [q for q in kept if q.polarity == "negative"],
        rng,
    )
    return balanced


# -- report files ------------------------------------------------------------


def write_answers(records: Sequence[AnswerRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["question_id", "model_id", "confidence", "best_evidence", "backed_off"])
        for r in records:
            writer.writerow(
                [r.question_id, r.model_id, repr(r.confidence),
                 r.best_evidence or "", int(r.backed_off)]
            )


def read_answers(path: str | Path) -> list[AnswerRecord]:
    out = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                AnswerRecord(
                    row["question_id"],
                    row["model_id"],
                    float(row["confidence"]),
                    row["best_evidence"] or None,
                    bool(int(row["backed_off"])),
                )
            )
    return out


def write_pr_csv(curve: PRCurve, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "precision", "recall"])
        for p in curve.points:
            writer.writerow([repr(p.threshold), repr(p.precision), repr(p.recall)])
