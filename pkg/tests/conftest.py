"""Shared fixtures: random corpus generators, stub sidecars, and synthetic
separable training sets. All generators are seeded and deterministic.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from mistkit import scheme
from mistkit.corpus import Corpus, Document, ModalInstance, Sentence
from mistkit.features import EmbeddingSidecar, WordVectorTable
from mistkit.models import TrainExample

VOCAB = (
    "the sensor device results model data method process material sample "
    "approach values films layers response temperature field analysis signal "
    "experiments structure surface region energy particles accuracy"
).split()

ANNOTATORS = ("a1", "a2", "a3")


def random_label_set(rng: np.random.Generator, labels, allow_empty=False) -> frozenset:
    labels = list(labels)
    size = int(rng.integers(0 if allow_empty else 1, min(3, len(labels)) + 1))
    if size == 0:
        return frozenset()
    picked = rng.choice(len(labels), size=size, replace=False)
    return frozenset(labels[i] for i in picked)


def random_corpus(
    rng: np.random.Generator,
    n_docs: int = 6,
    domains=("CL", "MS", "AGR", "CS", "ES"),
    with_annotations: bool = False,
    with_omitted: bool = False,
    dataset_id: str = "mist",
    min_sentences: int = 1,
    max_sentences: int = 4,
    round_robin_domains: bool = False,
) -> Corpus:
    docs = []
    for di in range(n_docs):
        if round_robin_domains:
            domain = domains[di % len(domains)]
        else:
            domain = domains[int(rng.integers(0, len(domains)))]
        subset = "fulltext" if rng.random() < 0.5 else "sampled"
        sentences = []
        for si in range(int(rng.integers(min_sentences, max_sentences + 1))):
            n_tokens = int(rng.integers(4, 13))
            tokens = [VOCAB[int(rng.integers(0, len(VOCAB)))] for _ in range(n_tokens)]
            n_inst = int(rng.integers(0, 3))
            positions = rng.choice(n_tokens, size=min(n_inst, n_tokens), replace=False)
            instances = []
            for ti in sorted(int(p) for p in positions):
                modal = scheme.MODALS[int(rng.integers(0, len(scheme.MODALS)))]
                tokens[ti] = modal
                pool = scheme.valid_labels(modal)
                if with_omitted and rng.random() < 0.3 and scheme.omitted_labels(modal):
                    pool = pool | scheme.omitted_labels(modal)
                gold = random_label_set(rng, sorted(pool))
                annotations = {}
                if with_annotations:
                    for ann in ANNOTATORS:
                        if rng.random() < 0.9:
                            annotations[ann] = random_label_set(rng, sorted(pool))
                instances.append(
                    ModalInstance(
                        inst_id=f"d{di}.s{si}.{ti}",
                        token_index=ti,
                        modal=modal,
                        surface=tokens[ti],
                        negated=bool(rng.random() < 0.1),
                        gold=gold,
                        annotations=annotations,
                    )
                )
            sentences.append(Sentence(sent_id=f"s{si}", tokens=tokens, instances=instances))
        docs.append(
            Document(doc_id=f"d{di}", domain=domain, subset=subset, sentences=sentences)
        )
    return Corpus(documents=docs, dataset_id=dataset_id)


def sidecar_for_examples(examples, dim: int, rng: np.random.Generator) -> EmbeddingSidecar:
    sidecar = EmbeddingSidecar(dim=dim)
    for ex in examples:
        sidecar.add(ex.inst_id, rng.normal(size=dim), rng.normal(size=dim))
    return sidecar


def separable_head_set(
    rng: np.random.Generator,
    n: int = 50,
    modal: str = "can",
    dim: int = 8,
    domain: str = "CL",
):
    """Linearly separable instances for the concatenated-embedding head.

    Each valid label gets an orthogonal prototype direction; an instance's
    sentence vector is the sum of its labels' prototypes plus small noise.
    """
    labels = scheme.ordered_valid_labels(modal)
    assert dim >= len(labels)
    sidecar = EmbeddingSidecar(dim=dim)
    examples = []
    for i in range(n):
        k = 1 if rng.random() < 0.7 else 2
        picked = rng.choice(len(labels), size=k, replace=False)
        gold = frozenset(labels[j] for j in picked)
        vec = np.zeros(dim)
        for j in picked:
            vec[j] = 4.0
        vec += rng.normal(scale=0.05, size=dim)
        modal_vec = rng.normal(scale=0.05, size=dim)
        inst_id = f"sep{i}"
        sidecar.add(inst_id, vec, modal_vec)
        examples.append(
            TrainExample(
                inst_id=inst_id,
                dataset_id="mist",
                modal=modal,
                domain=domain,
                gold=gold,
                tokens=["this", modal, "work"],
                token_index=1,
                doc_id=f"doc{i % 5}",
            )
        )
    return examples, sidecar


def keyword_separable_cnn_set(
    rng: np.random.Generator,
    n: int = 100,
    modal: str = "must",
    dim: int = 300,
    domain: str = "MS",
):
    """Sentences whose label is revealed by one keyword token."""
    labels = scheme.ordered_valid_labels(modal)
    keywords = {lab: f"kw_{lab}" for lab in labels}
    vectors = {}
    for j, lab in enumerate(labels):
        vec = np.zeros(dim)
        vec[j] = 1.0
        vectors[keywords[lab]] = vec
    filler = np.zeros(dim)
    filler[len(labels)] = 0.3
    vectors["filler"] = filler
    table = WordVectorTable(dim=dim, vectors=vectors)
    examples = []
    for i in range(n):
        lab = labels[int(rng.integers(0, len(labels)))]
        length = int(rng.integers(5, 9))
        tokens = ["filler"] * length
        tokens[int(rng.integers(0, length))] = keywords[lab]
        examples.append(
            TrainExample(
                inst_id=f"cnn{i}",
                dataset_id="mist",
                modal=modal,
                domain=domain,
                gold=frozenset([lab]),
                tokens=tokens,
                token_index=0,
                doc_id=f"doc{i % 5}",
            )
        )
    return examples, table


def release_corpus_path():
    """Converted release corpus for data-contingent tests, if available."""
    root = os.environ.get("MISTKIT_DATA")
    if not root:
        return None
    path = Path(root)
    if path.is_file():
        return path
    candidate = path / "corpus.jsonl"
    return candidate if candidate.is_file() else None


requires_release = pytest.mark.skipif(
    release_corpus_path() is None,
    reason="published dataset not available (set MISTKIT_DATA to the converted corpus)",
)


def split_file_path():
    root = os.environ.get("MISTKIT_DATA")
    if not root:
        return None
    candidate = Path(root) / "split.json"
    return candidate if candidate.is_file() else None


requires_split = pytest.mark.skipif(
    split_file_path() is None,
    reason="published train/test split not available (MISTKIT_DATA/split.json)",
)


# One status line per acceptance criterion at the end of the session.
_criterion_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call":
        _criterion_results[name] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and report.skipped:
        reason = ""
        if isinstance(report.longrepr, tuple):
            reason = f" ({report.longrepr[2].removeprefix('Skipped: ')})"
        _criterion_results[name] = "SKIP" + reason


def pytest_terminal_summary(terminalreporter):
    if not _criterion_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_criterion_results):
        number = name.split("_")[2]
        label = name.split("_", 3)[-1].replace("_", " ")
        terminalreporter.write_line(
            f"criterion {int(number):2d} [{label}]: {_criterion_results[name]}"
        )
