"""Inter-annotator agreement: binarized Cohen's kappa per (modal, label),
pairwise F1-agreement, and adjudication-versus-majority statistics.

Kappa is computed on the yes/no decision for a single label, all other
labels mapped to an implicit Other class. Pairs where both marginals are
degenerate (expected agreement 1) have no defined kappa; they are excluded
from averages rather than coerced, since coercion would bias sparse labels.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

from . import metrics
from .corpus import Corpus, ModalInstance

MIN_LABEL_ASSIGNMENTS = 6  # inclusion rule for averaged kappa


@dataclass
class KappaCell:
    modal: str
    label: str
    pair: tuple[str, str]
    table: tuple[int, int, int, int]  # both-yes, A-only, B-only, both-no
    kappa: Optional[float]


def _shared_instances(
    ann_a: str, ann_b: str, modal: str, instances: Iterable[ModalInstance]
) -> list[ModalInstance]:
    return [
        inst
        for inst in instances
        if inst.modal == modal and ann_a in inst.annotations and ann_b in inst.annotations
    ]


def kappa_from_table(a: int, b: int, c: int, d: int) -> Optional[float]:
    """Cohen's kappa from a 2x2 agreement table; None when p_e = 1.

    kappa = (p_o - p_e) / (1 - p_e) with p_o = (a+d)/n and
    p_e = ((a+b)(a+c) + (c+d)(b+d)) / n^2, evaluated in integer arithmetic
    with one final division so that exact tables give exact values.
    """
    n = a + b + c + d
    if n == 0:
        raise ValueError("kappa undefined on an empty table")
    chance = (a + b) * (a + c) + (c + d) * (b + d)
    denominator = n * n - chance
    if denominator == 0:
        return None
    return (n * (a + d) - chance) / denominator


def pair_table(
    ann_a: str, ann_b: str, modal: str, label: str, instances: Iterable[ModalInstance]
) -> tuple[int, int, int, int]:
    a = b = c = d = 0
    for inst in _shared_instances(ann_a, ann_b, modal, instances):
        yes_a = label in inst.annotations[ann_a]
        yes_b = label in inst.annotations[ann_b]
        if yes_a and yes_b:
            a += 1
        elif yes_a:
            b += 1
        elif yes_b:
            c += 1
        else:
            d += 1
    return a, b, c, d


def pair_kappa(
    ann_a: str, ann_b: str, modal: str, label: str, instances: Iterable[ModalInstance]
) -> Optional[float]:
    """Binarized kappa for one annotator pair; None when undefined."""
    return kappa_from_table(*pair_table(ann_a, ann_b, modal, label, list(instances)))


def _annotators(instances: Iterable[ModalInstance]) -> list[str]:
    seen = set()
    for inst in instances:
        seen.update(inst.annotations)
    return sorted(seen)


def average_kappa(corpus: Corpus, modal: str, label: str) -> Optional[float]:
    """Mean of defined pairwise kappas, or None.

    None either when the label fails the inclusion rule (assigned to fewer
    than MIN_LABEL_ASSIGNMENTS instances of the modal by every annotator)
    or when no pair has a defined kappa.
    """
    instances = [inst for _, _, inst in corpus.iter_instances() if inst.modal == modal]
    annotators = _annotators(instances)
    max_assigned = 0
    for ann in annotators:
        assigned = sum(1 for inst in instances if label in inst.annotations.get(ann, ()))
        max_assigned = max(max_assigned, assigned)
    if max_assigned < MIN_LABEL_ASSIGNMENTS:
        return None
    kappas = []
    for ann_a, ann_b in itertools.combinations(annotators, 2):
        if not _shared_instances(ann_a, ann_b, modal, instances):
            continue
        kappa = pair_kappa(ann_a, ann_b, modal, label, instances)
        if kappa is not None:
            kappas.append(kappa)
    if not kappas:
        return None
    return sum(kappas) / len(kappas)


def f1_agreement(
    ann_a: str, ann_b: str, label: str, instances: Iterable[ModalInstance]
) -> float:
    """Per-label F1 with one annotator as reference; symmetric in the pair."""
    shared = [
        inst for inst in instances if ann_a in inst.annotations and ann_b in inst.annotations
    ]
    if not shared:
        raise ValueError(f"annotators {ann_a!r} and {ann_b!r} share no instances")
    golds = [inst.annotations[ann_a] for inst in shared]
    preds = [inst.annotations[ann_b] for inst in shared]
    return metrics.per_label_f1(preds, golds, label)


def majority_vote(instance: ModalInstance) -> frozenset[str]:
    """Labels chosen by strictly more than half of the instance's annotators."""
    n = len(instance.annotations)
    if n == 0:
        raise ValueError(f"instance {instance.inst_id!r} has no annotators")
    counts: dict[str, int] = {}
    for labels in instance.annotations.values():
        for lab in labels:
            counts[lab] = counts.get(lab, 0) + 1
    return frozenset(lab for lab, c in counts.items() if c * 2 > n)


def adjudication_stats(instances: Iterable[ModalInstance]) -> tuple[float, float]:
    """(exact-match fraction, overlap fraction) of gold vs. majority vote."""
    instances = list(instances)
    if not instances:
        raise ValueError("no instances to compare")
    exact = overlap = 0
    for inst in instances:
        majority = majority_vote(inst)
        if inst.gold == majority:
            exact += 1
        if inst.gold & majority:
            overlap += 1
    return exact / len(instances), overlap / len(instances)


def build_report(corpus: Corpus) -> dict:
    """Full agreement report with every pairwise table, JSON-serializable."""
    from . import scheme

    labels = scheme.scheme_labels(scheme.scheme_for_dataset(corpus.dataset_id))
    all_instances = [inst for _, _, inst in corpus.iter_instances()]
    annotated = [inst for inst in all_instances if inst.annotations]
    report: dict = {"dataset_id": corpus.dataset_id, "n_annotated_instances": len(annotated)}

    cells = []
    averages: dict[str, dict] = {}
    for modal in scheme.MODALS:
        modal_insts = [inst for inst in annotated if inst.modal == modal]
        annotators = _annotators(modal_insts)
        averages[modal] = {}
        for label in labels:
            for ann_a, ann_b in itertools.combinations(annotators, 2):
                table = pair_table(ann_a, ann_b, modal, label, modal_insts)
                if sum(table) == 0:
                    continue
                cells.append(
                    KappaCell(modal, label, (ann_a, ann_b), table, kappa_from_table(*table))
                )
            avg = average_kappa(corpus, modal, label)
            averages[modal][label] = avg
    report["kappa_cells"] = [
        {
            "modal": cell.modal,
            "label": cell.label,
            "pair": list(cell.pair),
            "table": {"a": cell.table[0], "b": cell.table[1], "c": cell.table[2], "d": cell.table[3]},
            "kappa": cell.kappa,
        }
        for cell in cells
    ]
    report["average_kappa"] = averages

    f1_rows = []
    annotators = _annotators(annotated)
    for label in labels:
        for ann_a, ann_b in itertools.combinations(annotators, 2):
            shared = [
                inst
                for inst in annotated
                if ann_a in inst.annotations and ann_b in inst.annotations
            ]
            if not shared:
                continue
            f1_rows.append(
                {
                    "label": label,
                    "pair": [ann_a, ann_b],
                    "n": len(shared),
                    "f1": f1_agreement(ann_a, ann_b, label, shared),
                }
            )
    report["f1_agreement"] = f1_rows

    if annotated:
        exact, overlap = adjudication_stats(annotated)
        report["adjudication"] = {
            "exact_match": exact,
            "overlap": overlap,
            "n_instances": len(annotated),
        }
    else:
        report["adjudication"] = None
    return report
