"""Experiment orchestration: document-level splits, balanced folds, the
k-fold CV training protocol (with an optional use-each-fold-as-test rotation
for the cross-domain study), grid search, and report assembly.

Reports are deterministic for a fixed seed and configuration, whether folds
train serially or concurrently: fold tasks are pure functions of their
inputs and results are reduced in fold order.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import metrics, scheme
from .corpus import Corpus
from .errors import DataError, TrainingError
from .models import TrainConfig, TrainExample, predict_many, train_model
from .models.train import derive_rng, examples_from_corpus

# Hyperparameter values searched for each model family.
DEFAULT_GRIDS = {
    "cnn": {
        "learning_rate": [1e-3, 5e-3, 1e-4, 5e-4, 3e-5, 5e-5],
        "batch_size": [8, 16, 32],
        "dropout_p": [0.1, 0.5],
    },
    "head": {
        "learning_rate": [5e-4, 3e-5, 5e-5],
        "batch_size": [8, 16, 32],
        "warmup_epochs": [1, 2],
    },
}


@dataclass
class ExperimentConfig:
    kind: str
    train: TrainConfig = field(default_factory=TrainConfig)
    k_folds: int = 5
    seed: int = 0
    domain_holdout: Optional[str] = None
    rotate_folds: bool = False
    test_fraction: float = 0.25

    def __post_init__(self):
        if self.k_folds < 2:
            raise ValueError("k_folds must be at least 2")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        train_raw = raw.pop("train", {})
        kind = raw.pop("kind")
        base = TrainConfig.defaults_for(kind)
        train = TrainConfig(**{**asdict(base), **train_raw})
        return cls(kind=kind, train=train, **raw)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["kind"] = self.kind
        return out


def _doc_instance_counts(corpus: Corpus) -> dict[str, int]:
    return {
        doc.doc_id: sum(len(sent.instances) for sent in doc.sentences)
        for doc in corpus.documents
    }


def make_folds(corpus: Corpus, k: int, seed: int) -> dict[str, int]:
    """Greedy balanced fold assignment over whole documents.

    Documents are sorted by instance count descending (seeded order breaks
    ties) and each goes to the currently lightest fold.
    """
    if len(corpus.documents) < k:
        raise DataError(
            f"cannot build {k} folds from {len(corpus.documents)} documents"
        )
    counts = _doc_instance_counts(corpus)
    doc_ids = sorted(counts)
    rng = derive_rng(seed, "folds")
    rng.shuffle(doc_ids)
    doc_ids.sort(key=lambda d: -counts[d])  # stable: seeded order breaks ties
    loads = [0] * k
    assignment: dict[str, int] = {}
    for doc_id in doc_ids:
        fold = min(range(k), key=lambda f: (loads[f], f))
        assignment[doc_id] = fold
        loads[fold] += counts[doc_id]
    return assignment


def split_train_test(
    corpus: Corpus, target_fraction: float, seed: int
) -> tuple[list[str], list[str], dict[str, float]]:
    """Whole-document test split aiming at the target fraction per domain.

    Per domain, documents are drawn in seeded order into the test set until
    its instance fraction first reaches the target. Returns train ids, test
    ids and the achieved per-domain fractions.
    """
    if not 0.0 < target_fraction < 1.0:
        raise DataError(f"target fraction must be in (0, 1), got {target_fraction}")
    counts = _doc_instance_counts(corpus)
    by_domain: dict[str, list[str]] = {}
    for doc in corpus.documents:
        by_domain.setdefault(doc.domain, []).append(doc.doc_id)
    test_ids: list[str] = []
    achieved: dict[str, float] = {}
    for domain in sorted(by_domain):
        docs = sorted(by_domain[domain])
        if len(docs) < 2:
            raise DataError(f"domain {domain!r} has fewer than 2 documents")
        total = sum(counts[d] for d in docs)
        if total == 0:
            raise DataError(f"domain {domain!r} has no instances")
        rng = derive_rng(seed, "split", domain)
        rng.shuffle(docs)
        picked = 0
        for doc_id in docs:
            if picked / total >= target_fraction:
                break
            test_ids.append(doc_id)
            picked += counts[doc_id]
        achieved[domain] = picked / total
    test_set = set(test_ids)
    train_ids = [doc.doc_id for doc in corpus.documents if doc.doc_id not in test_set]
    return train_ids, sorted(test_ids), achieved


def save_split(train_ids, test_ids, path, achieved=None) -> None:
    doc = {"train": sorted(train_ids), "test": sorted(test_ids)}
    if achieved is not None:
        doc["achieved_fractions"] = achieved
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_split(path, corpus: Corpus) -> tuple[list[str], list[str]]:
    """Published split file: {"train": [doc ids], "test": [doc ids]}."""
    with open(path, encoding="utf-8") as handle:
        doc = json.load(handle)
    try:
        train_ids, test_ids = list(doc["train"]), list(doc["test"])
    except (KeyError, TypeError):
        raise DataError(f"{path}: split file must carry 'train' and 'test' lists") from None
    known = {d.doc_id for d in corpus.documents}
    missing = (set(train_ids) | set(test_ids)) - known
    if missing:
        raise DataError(f"{path}: split names unknown documents {sorted(missing)[:5]}")
    overlap = set(train_ids) & set(test_ids)
    if overlap:
        raise DataError(f"{path}: documents in both sides: {sorted(overlap)[:5]}")
    return train_ids, test_ids


def _mean(values) -> float:
    return sum(values) / len(values)


def _std(values) -> float:
    mean = _mean(values)
    return math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))


def evaluate_model(bundle, test_examples, sidecar, word_vectors, scheme_name):
    by_modal: dict[str, list[TrainExample]] = {}
    untrained: set[str] = set()
    for ex in test_examples:
        if bundle.heads.get(bundle.head_key(ex)) is None:
            untrained.add(ex.modal)
            continue
        by_modal.setdefault(ex.modal, []).append(ex)
    per_modal = {}
    per_modal_domain = {}
    for modal in scheme.MODALS:
        members = by_modal.get(modal)
        if not members:
            continue
        predictions = predict_many(bundle, members, sidecar, word_vectors)
        preds = [predictions[ex.inst_id] for ex in members]
        golds = [ex.gold for ex in members]
        per_modal[modal] = {
            "macro_f1": metrics.macro_f1(preds, golds, modal, scheme_name),
            "accuracy": metrics.global_accuracy(preds, golds, modal, scheme_name),
        }
        domains = sorted({ex.domain for ex in members})
        per_modal_domain[modal] = {}
        for domain in domains:
            idx = [i for i, ex in enumerate(members) if ex.domain == domain]
            per_modal_domain[modal][domain] = metrics.weighted_f1(
                [preds[i] for i in idx], [golds[i] for i in idx], modal, scheme_name
            )
    return per_modal, per_modal_domain, sorted(untrained)


def _fold_membership(assignment: dict[str, int], fold: int) -> set[str]:
    return {doc_id for doc_id, f in assignment.items() if f == fold}


def _run_fold(args):
    (fold, experiment, examples, train_docs, val_docs, test_docs, sidecar,
     word_vectors, scheme_name) = args
    train_ex = [ex for ex in examples if ex.doc_id in train_docs]
    val_ex = [ex for ex in examples if ex.doc_id in val_docs]
    test_ex = [ex for ex in examples if ex.doc_id in test_docs]
    if experiment.domain_holdout is not None:
        train_ex = [ex for ex in train_ex if ex.domain != experiment.domain_holdout]
        val_ex = [ex for ex in val_ex if ex.domain != experiment.domain_holdout]
    try:
        bundle, trace = train_model(
            experiment.kind,
            train_ex,
            val_ex,
            sidecar=sidecar,
            word_vectors=word_vectors,
            config=experiment.train,
            seed=derive_seed(experiment.seed, fold),
        )
    except (TrainingError, DataError) as exc:
        raise type(exc)(f"fold {fold}: {exc}") from exc
    per_modal, per_modal_domain, untrained = evaluate_model(
        bundle, test_ex, sidecar, word_vectors, scheme_name
    )
    return {
        "fold": fold,
        "train_docs": sorted(train_docs),
        "val_docs": sorted(val_docs),
        "test_docs": sorted(test_docs),
        "n_train": len(train_ex),
        "n_val": len(val_ex),
        "n_test": len(test_ex),
        "best_epochs": trace.best_epochs,
        "per_modal": per_modal,
        "per_modal_domain_weighted_f1": per_modal_domain,
        "untrained_modals": untrained,
    }


def derive_seed(seed: int, fold: int) -> int:
    return int(derive_rng(seed, "fold", fold).integers(0, 2**63 - 1))


def run_cv(
    experiment: ExperimentConfig,
    corpus: Corpus,
    sidecar=None,
    word_vectors=None,
    split=None,
    workers: int = 1,
) -> dict:
    """The CV protocol: k models, each validated on its own fold, evaluated
    on the shared held-out test set (or, with rotate_folds, on its own test
    fold), aggregated as mean and standard deviation over the k models.
    """
    scheme_name = scheme.scheme_for_dataset(corpus.dataset_id)
    examples = examples_from_corpus(corpus)
    k = experiment.k_folds

    fold_tasks = []
    split_info: dict = {}
    if experiment.rotate_folds:
        assignment = make_folds(corpus, k, experiment.seed)
        split_info = {"source": "rotation"}
        for fold in range(k):
            test_docs = _fold_membership(assignment, fold)
            val_docs = _fold_membership(assignment, (fold + 1) % k)
            train_docs = {
                doc_id
                for doc_id, f in assignment.items()
                if f not in (fold, (fold + 1) % k)
            }
            fold_tasks.append(
                (fold, experiment, examples, train_docs, val_docs, test_docs,
                 sidecar, word_vectors, scheme_name)
            )
    else:
        if split is not None:
            train_ids, test_ids = split
            split_info = {"source": "published"}
        else:
            train_ids, test_ids, achieved = split_train_test(
                corpus, experiment.test_fraction, experiment.seed
            )
            split_info = {"source": "heuristic", "achieved_fractions": achieved}
        split_info["train_docs"] = sorted(train_ids)
        split_info["test_docs"] = sorted(test_ids)
        train_corpus = Corpus(
            documents=[d for d in corpus.documents if d.doc_id in set(train_ids)],
            dataset_id=corpus.dataset_id,
        )
        assignment = make_folds(train_corpus, k, experiment.seed)
        test_docs = set(test_ids)
        for fold in range(k):
            val_docs = _fold_membership(assignment, fold)
            train_docs = {doc_id for doc_id, f in assignment.items() if f != fold}
            fold_tasks.append(
                (fold, experiment, examples, train_docs, val_docs, test_docs,
                 sidecar, word_vectors, scheme_name)
            )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fold_results = list(pool.map(_run_fold, fold_tasks))
    else:
        fold_results = [_run_fold(task) for task in fold_tasks]
    fold_results.sort(key=lambda r: r["fold"])

    per_modal: dict[str, dict] = {}
    for modal in scheme.MODALS:
        macro = [
            r["per_modal"][modal]["macro_f1"] for r in fold_results if modal in r["per_modal"]
        ]
        acc = [
            r["per_modal"][modal]["accuracy"] for r in fold_results if modal in r["per_modal"]
        ]
        if not macro:
            continue
        per_modal[modal] = {
            "macro_f1": {"mean": _mean(macro), "std": _std(macro), "per_model": macro},
            "accuracy": {"mean": _mean(acc), "std": _std(acc), "per_model": acc},
            "n_models": len(macro),
        }

    per_modal_domain: dict[str, dict] = {}
    for modal in scheme.MODALS:
        domains = sorted(
            {
                dom
                for r in fold_results
                for dom in r["per_modal_domain_weighted_f1"].get(modal, {})
            }
        )
        if not domains:
            continue
        per_modal_domain[modal] = {}
        for dom in domains:
            values = [
                r["per_modal_domain_weighted_f1"][modal][dom]
                for r in fold_results
                if dom in r["per_modal_domain_weighted_f1"].get(modal, {})
            ]
            per_modal_domain[modal][dom] = {
                "mean": _mean(values),
                "std": _std(values),
                "per_model": values,
            }

    return {
        "experiment": experiment.to_dict(),
        "dataset_id": corpus.dataset_id,
        "split": split_info,
        "folds": fold_results,
        "per_modal": per_modal,
        "per_modal_domain_weighted_f1": per_modal_domain,
    }


def expand_grid(base: TrainConfig, grid: dict[str, list]) -> list[TrainConfig]:
    """All grid combinations over the base config, in deterministic order."""
    if not grid:
        raise ValueError("empty hyperparameter grid")
    names = list(grid)
    configs = []
    for combo in itertools.product(*(grid[name] for name in names)):
        fields = asdict(base)
        fields.update(dict(zip(names, combo)))
        configs.append(TrainConfig(**fields))
    return configs


def grid_search(
    kind: str,
    configs: list[TrainConfig],
    corpus: Corpus,
    sidecar=None,
    word_vectors=None,
    seed: int = 0,
    k_folds: int = 5,
    tuning_epochs: int = 10,
    workers: int = 1,
) -> tuple[TrainConfig, list[dict]]:
    """Score each configuration by short CV trainings on the given corpus.

    Per configuration, k models train for at most `tuning_epochs` epochs;
    a model's score is its validation weighted F1 averaged across modal
    verbs, and the configuration's score is the mean over the k models.
    Ties keep the earliest configuration in grid order.
    """
    if not configs:
        raise ValueError("empty hyperparameter grid")
    scheme_name = scheme.scheme_for_dataset(corpus.dataset_id)
    examples = examples_from_corpus(corpus)
    assignment = make_folds(corpus, k_folds, seed)

    def score_config(config_index: int, config: TrainConfig) -> dict:
        capped = TrainConfig(**{**asdict(config), "max_epochs": tuning_epochs})
        model_scores = []
        for fold in range(k_folds):
            val_docs = _fold_membership(assignment, fold)
            train_ex = [ex for ex in examples if ex.doc_id not in val_docs]
            val_ex = [ex for ex in examples if ex.doc_id in val_docs]
            bundle, _ = train_model(
                kind, train_ex, val_ex, sidecar=sidecar, word_vectors=word_vectors,
                config=capped, seed=derive_seed(seed, fold),
            )
            by_modal: dict[str, list] = {}
            for ex in val_ex:
                if bundle.heads.get(bundle.head_key(ex)) is not None:
                    by_modal.setdefault(ex.modal, []).append(ex)
            modal_scores = []
            for modal in sorted(by_modal):
                members = by_modal[modal]
                predictions = predict_many(bundle, members, sidecar, word_vectors)
                modal_scores.append(
                    metrics.weighted_f1(
                        [predictions[ex.inst_id] for ex in members],
                        [ex.gold for ex in members],
                        modal,
                        scheme_name,
                    )
                )
            model_scores.append(_mean(modal_scores) if modal_scores else 0.0)
        return {
            "index": config_index,
            "config": asdict(config),
            "score": _mean(model_scores),
            "per_model": model_scores,
        }

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda ic: score_config(*ic), enumerate(configs)))
    else:
        results = [score_config(i, c) for i, c in enumerate(configs)]
    results.sort(key=lambda r: r["index"])
    best = max(results, key=lambda r: r["score"])  # max keeps the first on ties
    return configs[best["index"]], results
