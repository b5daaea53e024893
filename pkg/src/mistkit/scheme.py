"""Label schemes: the seven modal-function labels, per-modal applicability,
and the four-way mapped scheme used for transfer experiments.

The applicability tables are fixed constants. They are not recomputed from
data: recomputing them on corpus subsets would shift per-modal label sets
and make metric values incomparable across experiments.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

MODALS = ("can", "could", "may", "might", "must", "should")

# Canonical label order; metric tables, head layouts and CSV columns all use it.
LABELS = (
    "feasibility",
    "capability",
    "inference",
    "speculation",
    "options",
    "deontic",
    "rhetorical",
)

GME_LABELS = (
    "StateOfTheWorld",
    "StateOfTheAgent",
    "StateOfKnowledge",
    "Priority",
)

# Labels each modal carries in the adjudicated corpus, split into the sets
# kept for experiments and the extremely sparse ones excluded from them.
_VALID = {
    "can": ("feasibility", "capability", "options", "rhetorical"),
    "could": ("feasibility", "capability", "speculation", "options"),
    "may": ("feasibility", "capability", "speculation", "options", "deontic"),
    "might": ("feasibility", "capability", "speculation", "options"),
    "must": ("inference", "deontic", "rhetorical"),
    "should": ("inference", "deontic", "rhetorical"),
}

_OMITTED = {
    "can": ("deontic",),
    "could": (),
    "may": ("inference", "rhetorical"),
    "might": ("rhetorical",),
    "must": (),
    "should": (),
}

_TO_GME = {
    "feasibility": "StateOfTheWorld",
    "options": "StateOfTheWorld",
    "capability": "StateOfTheAgent",
    "rhetorical": "StateOfTheAgent",
    "speculation": "StateOfKnowledge",
    "inference": "StateOfKnowledge",
    "deontic": "Priority",
}

SCHEMES = ("mist", "gme")


def scheme_labels(scheme: str) -> tuple[str, ...]:
    """All labels of a scheme, in canonical order."""
    if scheme == "mist":
        return LABELS
    if scheme == "gme":
        return GME_LABELS
    raise ValueError(f"unknown scheme: {scheme!r}")


def scheme_for_dataset(dataset_id: str) -> str:
    """Datasets named 'gme*' carry mapped labels; everything else the 7-label set."""
    return "gme" if dataset_id.lower().startswith("gme") else "mist"


def valid_labels(modal: str, scheme: str = "mist") -> frozenset[str]:
    """Labels a classifier for `modal` is trained and evaluated on.

    For the mapped scheme this is the image of the 7-label valid set; the
    sparsity omissions act before mapping.
    """
    if modal not in _VALID:
        raise ValueError(f"unknown modal: {modal!r}")
    base = frozenset(_VALID[modal])
    if scheme == "mist":
        return base
    if scheme == "gme":
        return map_to_gme(base)
    raise ValueError(f"unknown scheme: {scheme!r}")


def omitted_labels(modal: str) -> frozenset[str]:
    """Labels of `modal` excluded from experiments for extreme sparsity."""
    if modal not in _OMITTED:
        raise ValueError(f"unknown modal: {modal!r}")
    return frozenset(_OMITTED[modal])


def ordered_valid_labels(modal: str, scheme: str = "mist") -> tuple[str, ...]:
    """valid_labels under the canonical total order (head/metric layout)."""
    valid = valid_labels(modal, scheme)
    return tuple(lab for lab in scheme_labels(scheme) if lab in valid)


def map_to_gme(labels) -> frozenset[str]:
    """Set-image of a 7-scheme label set under the 4-way mapping."""
    out = set()
    for lab in labels:
        if lab not in _TO_GME:
            raise ValueError(f"unknown label: {lab!r}")
        out.add(_TO_GME[lab])
    return frozenset(out)


def filter_instance(instance):
    """Drop experiment-omitted labels from an instance's gold set.

    Returns a copy with the reduced gold set, or None when nothing is left;
    such instances are excluded from experiments but stay in the corpus.
    Instances of mapped datasets pass through unchanged (no omissions there).
    """
    labels = set(instance.gold)
    if labels and not labels <= set(LABELS):
        return instance
    kept = frozenset(labels - set(omitted_labels(instance.modal)))
    if not kept:
        return None
    if kept == frozenset(instance.gold):
        return instance
    return replace(instance, gold=kept)


def map_instance_to_gme(instance):
    """Instance copy with its gold set (and annotator sets) mapped to GME."""
    return replace(
        instance,
        gold=map_to_gme(instance.gold),
        annotations={ann: map_to_gme(labs) for ann, labs in instance.annotations.items()},
    )


def map_corpus_to_gme(corpus, dataset_id: Optional[str] = None):
    """Rewrite every gold set through the 4-way mapping; keeps instance counts."""
    from . import corpus as corpus_mod

    docs = []
    for doc in corpus.documents:
        sents = []
        for sent in doc.sentences:
            insts = [map_instance_to_gme(inst) for inst in sent.instances]
            sents.append(replace(sent, instances=insts))
        docs.append(replace(doc, sentences=sents))
    new_id = dataset_id if dataset_id is not None else "gme-" + corpus.dataset_id
    return corpus_mod.Corpus(documents=docs, dataset_id=new_id)
