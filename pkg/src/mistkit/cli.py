"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime/training
error. Subcommands validate inputs before writing anything, never mutate
their inputs, and produce byte-identical artifacts for identical
invocations (same flags, same inputs, same seed).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from . import __version__, agreement, analytics, detect, enrich as enrich_mod, harness, scheme
from .corpus import (
    SCHEMA_VERSION,
    Corpus,
    Document,
    Sentence,
    convert_release,
    fetch_dataset,
    load_corpus,
    save_corpus,
)
from .errors import DataError, TrainingError
from .features import SIDECAR_MAGIC, load_word_vectors, read_sidecar
from .models import TrainConfig, load_bundle, predict_many, save_bundle, train_model
from .models.train import examples_from_corpus


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _write_json(doc, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _load_features(args, kind):
    sidecar = None
    word_vectors = None
    if getattr(args, "sidecar", None):
        sidecar = read_sidecar(args.sidecar)
    if getattr(args, "vectors", None):
        word_vectors = load_word_vectors(args.vectors, args.vector_dim)
    if kind == "cnn" and word_vectors is None:
        raise DataError("model kind 'cnn' requires --vectors/--vector-dim")
    if kind in ("head_cls", "head_modal", "head_cls_modal") and sidecar is None:
        raise DataError(f"model kind {kind!r} requires --sidecar")
    return sidecar, word_vectors


def _read_train_config(args, kind) -> TrainConfig:
    base = TrainConfig.defaults_for(kind)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as handle:
            overrides = json.load(handle)
        base = TrainConfig(**{**asdict(base), **overrides})
    for flag in ("learning_rate", "batch_size", "max_epochs"):
        value = getattr(args, flag, None)
        if value is not None:
            base = TrainConfig(**{**asdict(base), flag: value})
    return base


def _cmd_fetch(args) -> int:
    path = fetch_dataset(args.url, args.dest, sha256=args.sha256)
    print(path)
    return 0


def _cmd_convert(args) -> int:
    corpus = convert_release(args.release_dir, dataset_id=args.dataset_id)
    save_corpus(corpus, args.out)
    print(f"converted {corpus.n_instances} instances in {len(corpus.documents)} documents")
    return 0


def _read_raw_documents(path) -> Corpus:
    docs = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {line_no}: invalid JSON ({exc.msg})") from None
            try:
                sentences = [
                    Sentence(sent_id=s["sent_id"], tokens=list(s["tokens"]))
                    for s in raw["sentences"]
                ]
                docs.append(
                    Document(
                        doc_id=raw["doc_id"],
                        domain=raw.get("domain", "OTHER"),
                        subset=raw.get("subset", "sampled"),
                        sentences=sentences,
                        meta=raw.get("meta", {}),
                    )
                )
            except (KeyError, TypeError) as exc:
                raise DataError(f"{path}: line {line_no}: malformed raw record ({exc})") from None
    return Corpus(documents=docs, dataset_id="mist")


def _cmd_detect(args) -> int:
    corpus = detect.detect_corpus(_read_raw_documents(args.infile))
    save_corpus(corpus, args.out)
    print(f"detected {corpus.n_instances} modal targets")
    return 0


def _cmd_map_labels(args) -> int:
    if args.scheme != "gme":
        raise DataError(f"unknown target scheme {args.scheme!r}")
    corpus = load_corpus(args.infile)
    mapped = scheme.map_corpus_to_gme(corpus, dataset_id=args.dataset_id)
    if mapped.n_instances != corpus.n_instances:
        raise DataError("instance count changed during mapping")
    save_corpus(mapped, args.out)
    print(f"mapped {mapped.n_instances} instances to scheme gme")
    return 0


def _cmd_train(args) -> int:
    config = _read_train_config(args, args.kind)
    sidecar, word_vectors = _load_features(args, args.kind)
    corpus = load_corpus(args.corpus)
    train_ex = examples_from_corpus(corpus)
    val_ex = []
    if args.val_corpus:
        val_ex = examples_from_corpus(load_corpus(args.val_corpus))
    bundle, trace = train_model(
        args.kind, train_ex, val_ex, sidecar=sidecar, word_vectors=word_vectors,
        config=config, seed=args.seed,
    )
    save_bundle(bundle, args.out)
    if args.trace:
        _write_json(trace.as_dict(), args.trace)
    print(f"trained {args.kind} model with {len(bundle.heads)} heads -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    bundle = load_bundle(args.model)
    sidecar, word_vectors = _load_features(args, bundle.kind)
    corpus = load_corpus(args.corpus)
    examples = examples_from_corpus(corpus)
    usable = [ex for ex in examples if bundle.heads.get(bundle.head_key(ex)) is not None]
    predictions = predict_many(bundle, usable, sidecar, word_vectors)
    scheme_name = scheme.scheme_for_dataset(corpus.dataset_id)
    label_order = {lab: i for i, lab in enumerate(scheme.scheme_labels(scheme_name))}
    if args.dump:
        with open(args.dump, "w", encoding="utf-8") as handle:
            for ex in usable:
                handle.write(
                    json.dumps(
                        {
                            "inst_id": ex.inst_id,
                            "pred": sorted(predictions[ex.inst_id], key=label_order.get),
                        },
                        ensure_ascii=False,
                        separators=(",", ":"),
                    )
                    + "\n"
                )
    per_modal, per_modal_domain, untrained = harness.evaluate_model(
        bundle, examples, sidecar, word_vectors, scheme_name
    )
    report = {
        "model": str(args.model),
        "dataset_id": corpus.dataset_id,
        "n_evaluated": len(usable),
        "per_modal": per_modal,
        "per_modal_domain_weighted_f1": per_modal_domain,
        "untrained_modals": untrained,
    }
    if args.report:
        _write_json(report, args.report)
    print(json.dumps(report["per_modal"], sort_keys=True))
    return 0


def _cmd_cv(args) -> int:
    with open(args.experiment, encoding="utf-8") as handle:
        experiment = harness.ExperimentConfig.from_dict(json.load(handle))
    experiment.seed = args.seed
    sidecar, word_vectors = _load_features(args, experiment.kind)
    corpus = load_corpus(args.corpus)
    split = harness.load_split(args.split, corpus) if args.split else None
    report = harness.run_cv(
        experiment, corpus, sidecar=sidecar, word_vectors=word_vectors,
        split=split, workers=args.workers,
    )
    _write_json(report, args.out)
    for modal, row in report["per_modal"].items():
        print(
            f"{modal}: mF1 {100 * row['macro_f1']['mean']:.1f} "
            f"+/- {100 * row['macro_f1']['std']:.1f}"
        )
    return 0


def _cmd_grid(args) -> int:
    base = _read_train_config(args, args.kind)
    if args.grid:
        with open(args.grid, encoding="utf-8") as handle:
            grid = json.load(handle)
    else:
        grid = harness.DEFAULT_GRIDS["cnn" if args.kind == "cnn" else "head"]
    configs = harness.expand_grid(base, grid)
    sidecar, word_vectors = _load_features(args, args.kind)
    corpus = load_corpus(args.corpus)
    best, results = harness.grid_search(
        args.kind, configs, corpus, sidecar=sidecar, word_vectors=word_vectors,
        seed=args.seed, k_folds=args.k_folds, tuning_epochs=args.epochs,
        workers=args.workers,
    )
    _write_json({"best": asdict(best), "results": results}, args.out)
    print(f"searched {len(configs)} configurations; best score "
          f"{max(r['score'] for r in results):.4f}")
    return 0


def _cmd_agree(args) -> int:
    corpus = load_corpus(args.corpus)
    report = agreement.build_report(corpus)
    _write_json(report, args.report)
    print(f"agreement report over {report['n_annotated_instances']} annotated instances")
    return 0


def _cmd_stats(args) -> int:
    corpus = load_corpus(args.corpus)
    analytics.write_stats(corpus, args.out_dir)
    print(f"wrote stats for {corpus.n_instances} instances to {args.out_dir}")
    return 0


def _cmd_enrich(args) -> int:
    triples, inline_modals = enrich_mod.read_triples(args.triples)
    predictions: dict[str, frozenset] = {}
    with open(args.predictions, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                predictions[raw["inst_id"]] = frozenset(raw["pred"])
            except (json.JSONDecodeError, KeyError, TypeError):
                raise DataError(
                    f"{args.predictions}: line {line_no}: malformed prediction record"
                ) from None
    modals = dict(inline_modals)
    if args.corpus:
        corpus = load_corpus(args.corpus)
        for _, _, inst in corpus.iter_instances():
            modals.setdefault(inst.inst_id, inst.modal)
    facts = enrich_mod.enrich_stream(triples, predictions, modals)
    with open(args.out, "w", encoding="utf-8") as handle:
        for fact in facts:
            handle.write(enrich_mod.fact_record(fact) + "\n")
    print(f"enriched {len(facts)} extractions")
    return 0


def _cmd_export_split(args) -> int:
    corpus = load_corpus(args.corpus)
    train_ids, test_ids, achieved = harness.split_train_test(
        corpus, args.target, args.seed
    )
    harness.save_split(train_ids, test_ids, args.out, achieved=achieved)
    fractions = ", ".join(f"{d}={f:.3f}" for d, f in sorted(achieved.items()))
    print(f"split written; achieved test fractions: {fractions}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mistkit", description=__doc__)
    parser.add_argument(
        "--version",
        action="version",
        version=(
            f"mistkit {__version__} (corpus schema {SCHEMA_VERSION}, "
            f"sidecar {SIDECAR_MAGIC.decode()})"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download and extract a dataset archive")
    p.add_argument("--url", required=True)
    p.add_argument("--dest", required=True)
    p.add_argument("--sha256", help="content digest to verify before extraction")
    p.set_defaults(func=_cmd_fetch)

    p = sub.add_parser("convert", help="convert a release directory to corpus JSONL")
    p.add_argument("--release-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dataset-id", default="mist")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("detect", help="detect modal targets in raw tokenized documents")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("map-labels", help="rewrite gold labels into another scheme")
    p.add_argument("--scheme", required=True, choices=["gme"])
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dataset-id", default=None)
    p.set_defaults(func=_cmd_map_labels)

    def add_feature_flags(p):
        p.add_argument("--sidecar", help="embedding sidecar (.bin)")
        p.add_argument("--vectors", help="word vector text file")
        p.add_argument("--vector-dim", type=int, default=300)

    p = sub.add_parser("train", help="train a model on a corpus")
    p.add_argument("--kind", required=True,
                   choices=["majority", "cnn", "head_cls", "head_modal", "head_cls_modal"])
    p.add_argument("--config", help="TrainConfig overrides as JSON")
    p.add_argument("--corpus", required=True)
    p.add_argument("--val-corpus", help="held-out corpus for early stopping")
    add_feature_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", help="write the training trace JSON here")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a model, dump predictions and metrics")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    add_feature_flags(p)
    p.add_argument("--dump", help="write per-instance predictions JSONL here")
    p.add_argument("--report", help="write the metric report JSON here")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("cv", help="run the cross-validation protocol")
    p.add_argument("--experiment", required=True, help="ExperimentConfig JSON")
    p.add_argument("--corpus", required=True)
    add_feature_flags(p)
    p.add_argument("--split", help="published split file (takes precedence)")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_cv)

    p = sub.add_parser("grid", help="hyperparameter grid search")
    p.add_argument("--kind", required=True,
                   choices=["majority", "cnn", "head_cls", "head_modal", "head_cls_modal"])
    p.add_argument("--corpus", required=True)
    p.add_argument("--config", help="base TrainConfig JSON")
    p.add_argument("--grid", help="grid JSON (field -> value list); default per family")
    add_feature_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--k-folds", type=int, default=5)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("agree", help="inter-annotator agreement report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=_cmd_agree)

    p = sub.add_parser("stats", help="corpus statistics tables")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("enrich", help="enrich Open-IE triples with modal functions")
    p.add_argument("--triples", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--corpus", help="corpus for resolving instance modals")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_enrich)

    p = sub.add_parser("export-split", help="write a train/test document split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--target", type=float, default=0.25)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_export_split)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(run())
