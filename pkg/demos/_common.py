"""Shared helper for the demo scripts: a small synthetic corpus with the
look of real annotated data, so every demo runs without downloads.
"""

from __future__ import annotations

import numpy as np

from mistkit import scheme
from mistkit.corpus import Corpus, Document, ModalInstance, Sentence
from mistkit.features import EmbeddingSidecar

SENTENCES = {
    "can": ["the", "sensor", "can", "respond", "to", "pressure"],
    "could": ["the", "films", "could", "be", "used", "as", "shields"],
    "may": ["the", "results", "may", "vary", "between", "runs"],
    "might": ["this", "might", "be", "related", "to", "noise"],
    "must": ["the", "sample", "must", "be", "older", "than", "expected"],
    "should": ["devices", "should", "endure", "high", "strains"],
}


def synthetic_corpus(
    n_docs: int = 12,
    seed: int = 0,
    domains=("CL", "MS"),
    with_annotations: bool = False,
) -> Corpus:
    rng = np.random.default_rng(seed)
    docs = []
    for di in range(n_docs):
        sentences = []
        for si, modal in enumerate(scheme.MODALS):
            tokens = list(SENTENCES[modal])
            index = tokens.index(modal)
            labels = sorted(scheme.valid_labels(modal))
            gold = frozenset([labels[int(rng.integers(0, len(labels)))]])
            annotations = {}
            if with_annotations:
                for ann in ("ann1", "ann2", "ann3"):
                    flip = rng.random() < 0.25
                    pick = labels[int(rng.integers(0, len(labels)))] if flip else next(iter(gold))
                    annotations[ann] = frozenset([pick])
            sentences.append(
                Sentence(
                    sent_id=f"s{si}",
                    tokens=tokens,
                    instances=[
                        ModalInstance(
                            inst_id=f"doc{di}.s{si}.{index}",
                            token_index=index,
                            modal=modal,
                            surface=modal,
                            gold=gold,
                            annotations=annotations,
                        )
                    ],
                )
            )
        docs.append(
            Document(
                doc_id=f"doc{di}",
                domain=domains[di % len(domains)],
                subset="fulltext" if di % 2 == 0 else "sampled",
                sentences=sentences,
                meta={"total_sentences": 60},
            )
        )
    return Corpus(documents=docs)


def random_sidecar(corpus: Corpus, dim: int = 16, seed: int = 1) -> EmbeddingSidecar:
    rng = np.random.default_rng(seed)
    sidecar = EmbeddingSidecar(dim=dim)
    for _, _, inst in corpus.iter_instances():
        sidecar.add(inst.inst_id, rng.normal(size=dim), rng.normal(size=dim))
    return sidecar


def labelled_sidecar(corpus: Corpus, dim: int = 16, seed: int = 1) -> EmbeddingSidecar:
    """Sidecar whose vectors leak the gold labels: heads become learnable."""
    rng = np.random.default_rng(seed)
    label_axis = {lab: i for i, lab in enumerate(scheme.LABELS)}
    sidecar = EmbeddingSidecar(dim=dim)
    for _, _, inst in corpus.iter_instances():
        sent_vec = rng.normal(scale=0.05, size=dim)
        for lab in inst.gold:
            sent_vec[label_axis[lab]] += 3.0
        sidecar.add(inst.inst_id, sent_vec, rng.normal(scale=0.05, size=dim))
    return sidecar
