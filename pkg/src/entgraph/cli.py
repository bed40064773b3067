"""Command-line pipeline driver.

Each stage reads the previous stage's artifacts from the output directory
and writes its own, with a JSON manifest (stage version, config hash,
seed, input digests) so identical inputs reproduce identical bytes.

Exit codes: 0 success, 1 usage error, 2 data/dependency error, 3 file
format version mismatch.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import graphio, qaeval, qagen, resources
from .features import (
    PAIR,
    SLOT,
    FeatureConfig,
    build_vectors,
    count,
    dump_counts_tsv,
    dump_vectors_tsv,
    save_counts,
    save_vectors,
)
from .globalgraph import GlobalConfig, apply_to_all, write_provenance
from .ingest import ingest
from .lexicon import LexicalResource
from .localgraph import BB, BU, UU, LocalBuildConfig, build_local_graphs
from .model import TypeInventory, TypedPredicate
from .qagen import QaGenConfig, generate_questions, read_evidence, read_questions
from .store import GraphStore

STAGE_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERSION = 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir: Path, stage: str, config: dict, inputs: list[Path], seed=None) -> None:
    payload = {
        "stage": stage,
        "stage_version": STAGE_VERSION,
        "seed": seed,
        "config": config,
        "config_hash": hashlib.sha256(
            json.dumps(config, sort_keys=True).encode()
        ).hexdigest(),
        "inputs": {str(p): _sha256(p) for p in inputs if p.is_file()},
    }
    path = out_dir / f"{stage}.manifest.json"
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _require(path: Path, produced_by: str) -> Path:
    if not path.exists():
        raise DataError(
            f"missing artifact {path}; run the `{produced_by}` subcommand first"
        )
    return path


def _inventory(args) -> TypeInventory:
    if getattr(args, "types", None):
        return TypeInventory.from_file(args.types)
    return TypeInventory.default()


# -- subcommands -------------------------------------------------------------


def cmd_ingest(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus_path = Path(args.corpus)
    _require(corpus_path, "ingest (input corpus file is missing)")
    corpus = ingest(corpus_path, _inventory(args))
    corpus.save(out / "corpus.jsonl")
    config = {"corpus": str(corpus_path), "types": args.types, "stats": corpus.stats.as_dict()}
    _write_manifest(out, "ingest", config, [corpus_path])
    print(
        f"ingested {corpus.stats.propositions} propositions "
        f"({corpus.stats.skipped_malformed} malformed, "
        f"{corpus.stats.skipped_unnamed} without named entity)"
    )
    return EXIT_OK


def cmd_build_local(args) -> int:
    out = Path(args.out)
    corpus_path = _require(out / "corpus.jsonl", "ingest")
    corpus = ingest(corpus_path, _inventory(args))
    config = LocalBuildConfig(
        FeatureConfig(min_count=args.min_count), edge_threshold=args.edge_threshold
    )
    graphs = build_local_graphs(corpus, config)

    pair_store = count(corpus, PAIR)
    slot_store = count(corpus, SLOT)
    pair_vectors = build_vectors(pair_store, config.features)
    slot_vectors = build_vectors(slot_store, config.features)
    save_counts(out / "counts.bin", pair_store, slot_store)
    dump_counts_tsv(out / "counts.tsv", pair_store, slot_store)
    save_vectors(out / "vectors.bin", pair_vectors, slot_vectors)
    dump_vectors_tsv(out / "vectors.tsv", pair_vectors, slot_vectors)

    local_dir = out / "graphs" / "local"
    paths = graphio.write_graph_dir(graphs.all_subgraphs(), local_dir)
    n_edges = sum(len(g.edges) for g in graphs.all_subgraphs().values())
    _write_manifest(
        out, "build-local",
        {"min_count": args.min_count, "edge_threshold": args.edge_threshold},
        [corpus_path],
    )
    print(f"built {len(paths)} typed subgraphs with {n_edges} edges in {local_dir}")
    return EXIT_OK


def cmd_globalize(args) -> int:
    out = Path(args.out)
    local_dir = _require(out / "graphs" / "local", "build-local")
    bivalent, univalent = {}, {}
    for path in sorted(local_dir.glob("*.graph")):
        sub = graphio.read_subgraph(path)
        (bivalent if sub.kind == "bivalent" else univalent)[sub.signature] = sub
    config = GlobalConfig(
        lambda_para=args.lambda_para,
        lambda_cross=args.lambda_cross,
        paraphrase_tau=args.tau,
        iterations=args.iterations,
        convergence_eps=args.eps,
    )
    bi_graph, uni_graph = apply_to_all(bivalent, univalent, config)
    global_dir = out / "graphs" / "global"
    merged = {}
    merged.update(bi_graph.subgraphs)
    merged.update(uni_graph.subgraphs)
    graphio.write_graph_dir(merged, global_dir)
    write_provenance(bi_graph, global_dir / "bivalent.prov.tsv")
    write_provenance(uni_graph, global_dir / "univalent.prov.tsv")
    _write_manifest(
        out, "globalize",
        {
            "lambda_para": args.lambda_para, "lambda_cross": args.lambda_cross,
            "tau": args.tau, "iterations": args.iterations, "eps": args.eps,
        },
        sorted(local_dir.glob("*.graph")),
    )
    if not (bi_graph.converged and uni_graph.converged):
        print("warning: globalization did not converge within the iteration budget")
    print(f"globalized {len(merged)} subgraphs into {global_dir}")
    return EXIT_OK


def cmd_gen_questions(args) -> int:
    out = Path(args.out)
    corpus_path = _require(out / "corpus.jsonl", "ingest")
    corpus = ingest(corpus_path, _inventory(args))
    lex = (
        LexicalResource.from_wordnet_dir(args.wordnet)
        if args.wordnet
        else LexicalResource.fixture()
    )
    config = QaGenConfig(
        window_days=args.window,
        entity_min=args.entity_min,
        predicate_min=args.predicate_min,
        positives_per_partition=args.positives,
        seed=args.seed,
    )
    qs = generate_questions(corpus, lex, config)
    qagen.write_questions(qs, out / "questions.jsonl")
    qagen.write_evidence(qs.evidence, out / "evidence.jsonl")
    _write_manifest(
        out, "gen-questions",
        {k: v for k, v in qs.manifest.items() if k != "format"},
        [corpus_path], seed=args.seed,
    )
    print(
        f"generated {qs.manifest['questions']} balanced questions "
        f"over {qs.manifest['partitions']} partitions"
    )
    return EXIT_OK


def _graph_dir(out: Path, choice: str) -> Path:
    if choice == "global":
        return _require(out / "graphs" / "global", "globalize")
    if choice == "local":
        return _require(out / "graphs" / "local", "build-local")
    if choice == "auto":
        if (out / "graphs" / "global").exists():
            return out / "graphs" / "global"
        return _require(out / "graphs" / "local", "build-local")
    return _require(Path(choice), "build-local")


def _parse_components(text: str) -> frozenset[str]:
    names = {"bb": BB, "uu": UU, "bu": BU}
    out = set()
    for part in text.split(","):
        part = part.strip().lower()
        if part not in names:
            raise UsageError(f"unknown component {part!r} (expected bb, uu, bu)")
        out.add(names[part])
    return frozenset(out)


def cmd_answer(args) -> int:
    out = Path(args.out)
    questions, _ = read_questions(_require(out / "questions.jsonl", "gen-questions"))
    evidence = {
        p.id: p
        for p in read_evidence(_require(out / "evidence.jsonl", "gen-questions"),
                               _inventory(args))
    }
    records = []
    if args.model == "exact":
        tag = "exact"
        for q in questions:
            records.append(qaeval.answer_exact_match(q, evidence[q.partition_id]))
    elif args.model == "graph":
        kinds = _parse_components(args.components)
        tag = "graph-" + "+".join(sorted(k.lower() for k in kinds))
        store = GraphStore.open(_graph_dir(out, args.graphs),
                                enable_composition=not args.no_composition)
        for q in questions:
            records.append(qaeval.answer_graph(q, evidence[q.partition_id], store, kinds))
    else:  # external
        if args.export_evidence:
            qaeval.export_evidence(questions, evidence, Path(args.export_evidence))
            print(f"wrote evidence export to {args.export_evidence}")
            if not args.scores:
                return EXIT_OK
        if not args.scores:
            raise UsageError("--model external needs --scores (or --export-evidence)")
        tag = "external"
        scores = qaeval.read_external_scores(_require(Path(args.scores), "external scorer"))
        records = qaeval.external_scores(questions, scores)
    path = out / f"answers-{tag}.csv"
    qaeval.write_answers(records, path)
    _write_manifest(
        out, f"answer-{tag}",
        {"model": args.model, "components": getattr(args, "components", None),
         "graphs": getattr(args, "graphs", None)},
        [out / "questions.jsonl", out / "evidence.jsonl"],
    )
    answered = sum(1 for r in records if r.confidence > 0)
    print(f"answered {answered}/{len(records)} questions -> {path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    out = Path(args.out)
    questions, _ = read_questions(_require(out / "questions.jsonl", "gen-questions"))
    suffix = ""
    if args.filtered:
        store = GraphStore.open(_graph_dir(out, args.graphs))
        questions = qaeval.filter_questions(questions, store, args.seed)
        if not questions:
            raise DataError("no questions left after vertex filtering")
        suffix = "-filtered"
    gold = {q.id: q.polarity == "positive" for q in questions}
    answer_paths = sorted(out.glob("answers-*.csv"))
    if args.answers:
        answer_paths = [Path(p) for p in args.answers]
    if not answer_paths:
        raise DataError("no answer files found; run the `answer` subcommand first")
    report_dir = out / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    summary_lines = []
    if args.filtered:
        summary_lines.append(f"filtered question set: {len(questions)} questions")
    for path in answer_paths:
        records = qaeval.read_answers(_require(path, "answer"))
        records = [r for r in records if r.question_id in gold]
        model = records[0].model_id if records else path.stem
        curve = qaeval.pr_curve(records, gold)
        qaeval.write_pr_csv(curve, report_dir / f"pr-{model}{suffix}.csv")
        accs = []
        for k in args.k:
            acc = qaeval.accuracy_at_k(records, gold, k)
            accs.append(f"acc@{k}={acc.accuracy:.4f} (n={acc.k_used})")
        summary_lines.append(
            f"{model}: answered={sum(1 for r in records if r.confidence > 0)}"
            f"/{len(records)} max_recall={curve.max_recall:.4f} " + " ".join(accs)
        )
    summary = "\n".join(summary_lines) + "\n"
    (report_dir / f"summary{suffix}.txt").write_text(summary, encoding="utf-8")
    _write_manifest(
        out, f"evaluate{suffix}",
        {"k": args.k, "filtered": args.filtered},
        answer_paths, seed=args.seed if args.filtered else None,
    )
    print(summary, end="")
    return EXIT_OK


def cmd_query(args) -> int:
    from .localgraph import valid_maps
    from .model import EntityId, Proposition

    out = Path(args.out)
    store = GraphStore.open(_graph_dir(out, args.graphs))
    premise = _parse_query_predicate(args.premise, args.type)
    hypothesis = _parse_query_predicate(args.hypothesis, args.type)

    # bind fresh placeholder entities per candidate argument map and take
    # the best typed route, then fall back to the untyped average
    ents = tuple(
        EntityId(f"x{i}", None, True) for i in range(1, premise.valency + 1)
    )
    prop = Proposition(premise, ents)
    best = None
    for amap in valid_maps(premise.valency, hypothesis.valency):
        hyp_args = [""] * hypothesis.valency
        for p_slot, h_slot in amap.pairs:
            hyp_args[h_slot - 1] = ents[p_slot - 1].key
        result = store.entailment_score(prop, hypothesis, tuple(hyp_args))
        if result.score > 0 and (best is None or result.score > best.score):
            best = result
    if best is None:
        for amap in valid_maps(premise.valency, hypothesis.valency):
            hyp_args = [""] * hypothesis.valency
            for p_slot, h_slot in amap.pairs:
                hyp_args[h_slot - 1] = ents[p_slot - 1].key
            result = store.backoff_score(
                premise.name, premise.valency, tuple(e.key for e in ents),
                hypothesis.name, hypothesis.valency, tuple(hyp_args),
            )
            if result.score > 0 and (best is None or result.score > best.score):
                best = result
    if best is None:
        print(f"no entailment found: {premise.token()} -> {hypothesis.token()}")
        return EXIT_OK
    print(f"score={best.score:.6f} backed_off={best.backed_off}")
    for e in best.path:
        print(
            f"  {e.premise.token()} -> {e.hypothesis.token()} "
            f"[{e.kind} {e.arg_map.format()}] {e.score:.6f}"
        )
    return EXIT_OK


def _parse_query_predicate(text: str, default_type: str | None) -> TypedPredicate:
    if "#" in text:
        return TypedPredicate.parse_token(text)
    if not default_type:
        raise UsageError(f"predicate {text!r} carries no types; pass --type")
    name = text
    if len(name) > 2 and name[-2] == "." and name[-1] in "12":
        return TypedPredicate(name[:-2], 1, (default_type,), name[-2:])
    return TypedPredicate(name, 2, (default_type, default_type))


# -- parser ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entgraph", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="out", help="pipeline artifact directory")
        p.add_argument("--types", default=None, help="type inventory file")

    p = sub.add_parser("ingest", help="read a proposition file into a corpus artifact")
    common(p)
    p.add_argument("--corpus", default=str(resources.sample_corpus_path()),
                   help="proposition file (default: shipped sample)")

    p = sub.add_parser("build-local", help="build typed subgraphs from the corpus")
    common(p)
    p.add_argument("--min-count", type=int, default=3)
    p.add_argument("--edge-threshold", type=float, default=0.01)

    p = sub.add_parser("globalize", help="refine scores with soft constraints")
    common(p)
    p.add_argument("--lambda-para", type=float, default=1.0)
    p.add_argument("--lambda-cross", type=float, default=0.5)
    p.add_argument("--tau", type=float, default=0.9)
    p.add_argument("--iterations", type=int, default=20)
    p.add_argument("--eps", type=float, default=1e-4)

    p = sub.add_parser("gen-questions", help="generate the true/false question set")
    common(p)
    p.add_argument("--wordnet", default=None, help="WordNet database directory")
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--entity-min", type=int, default=6)
    p.add_argument("--predicate-min", type=int, default=11)
    p.add_argument("--positives", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("answer", help="answer questions with a model")
    common(p)
    p.add_argument("--model", choices=("exact", "graph", "external"), default="graph")
    p.add_argument("--components", default="bb,uu,bu")
    p.add_argument("--graphs", default="auto", help="local|global|auto|path")
    p.add_argument("--no-composition", action="store_true")
    p.add_argument("--scores", default=None, help="external score file")
    p.add_argument("--export-evidence", default=None,
                   help="write the evidence export for external scorers")

    p = sub.add_parser("evaluate", help="compute PR curves and accuracy@K")
    common(p)
    p.add_argument("--answers", nargs="*", default=None)
    p.add_argument("--k", type=int, nargs="*", default=[50, 200])
    p.add_argument("--filtered", action="store_true",
                   help="keep only questions with a graph vertex, re-balanced")
    p.add_argument("--graphs", default="auto")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("query", help="query one entailment")
    common(p)
    p.add_argument("premise")
    p.add_argument("hypothesis")
    p.add_argument("--type", default=None)
    p.add_argument("--graphs", default="auto")
    return parser


_COMMANDS = {
    "ingest": cmd_ingest,
    "build-local": cmd_build_local,
    "globalize": cmd_globalize,
    "gen-questions": cmd_gen_questions,
    "answer": cmd_answer,
    "evaluate": cmd_evaluate,
    "query": cmd_query,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except graphio.VersionMismatch as exc:
        print(f"version mismatch: {exc}", file=sys.stderr)
        return EXIT_VERSION
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
