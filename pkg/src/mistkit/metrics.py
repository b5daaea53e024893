"""Evaluation metrics over multi-label prediction/gold set pairs.

All functions take parallel lists of label sets and compute per-label
binary decisions. Per-label F1 uses the zero-division convention
F1 = 0 when 2*tp + fp + fn = 0; this is the conservative choice and is
flagged in the README since toolkits disagree on it.

Metrics are pure and operate on raw prediction dumps, so any external
script can audit the reported numbers from the dumped decisions alone.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from . import scheme

LabelSets = Sequence[frozenset]


def _check_lengths(preds: LabelSets, golds: LabelSets) -> None:
    if len(preds) != len(golds):
        raise ValueError(f"preds ({len(preds)}) and golds ({len(golds)}) differ in length")


def binary_counts(preds: LabelSets, golds: LabelSets, label: str) -> tuple[int, int, int, int]:
    """(tp, fp, fn, tn) for the yes/no decision on one label."""
    _check_lengths(preds, golds)
    tp = fp = fn = tn = 0
    for pred, gold in zip(preds, golds):
        in_pred = label in pred
        in_gold = label in gold
        if in_pred and in_gold:
            tp += 1
        elif in_pred:
            fp += 1
        elif in_gold:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def per_label_f1(preds: LabelSets, golds: LabelSets, label: str) -> float:
    tp, fp, fn, _ = binary_counts(preds, golds, label)
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 0.0
    return 2 * tp / denom


def macro_f1(preds: LabelSets, golds: LabelSets, modal: str, label_scheme: str = "mist") -> float:
    """Unweighted mean of per-label F1 over the modal's fixed valid label set."""
    labels = scheme.ordered_valid_labels(modal, label_scheme)
    return sum(per_label_f1(preds, golds, lab) for lab in labels) / len(labels)


def global_accuracy(
    preds: LabelSets, golds: LabelSets, modal: str, label_scheme: str = "mist"
) -> float:
    """Fraction of correct yes/no decisions across all instances and valid labels."""
    _check_lengths(preds, golds)
    labels = scheme.ordered_valid_labels(modal, label_scheme)
    correct = 0
    for lab in labels:
        tp, _, _, tn = binary_counts(preds, golds, lab)
        correct += tp + tn
    return correct / (len(preds) * len(labels))


def weighted_f1(
    preds: LabelSets, golds: LabelSets, modal: str, label_scheme: str = "mist"
) -> float:
    """Per-label F1 averaged with weights proportional to gold label support."""
    labels = scheme.ordered_valid_labels(modal, label_scheme)
    total = 0.0
    weight = 0
    for lab in labels:
        support = sum(1 for gold in golds if lab in gold)
        if support:
            total += support * per_label_f1(preds, golds, lab)
            weight += support
    if weight == 0:
        raise ValueError(f"no gold occurrences of any valid label for modal {modal!r}")
    return total / weight


def selection_score(
    cells: Mapping[tuple[str, str], tuple[LabelSets, LabelSets]],
    label_scheme: str = "mist",
) -> float:
    """Model-selection score: mean weighted F1 over (modal, domain) cells.

    Cells without instances are skipped; an entirely empty validation set
    is an error.
    """
    scores = []
    for (modal, _domain), (preds, golds) in cells.items():
        if not golds:
            continue
        scores.append(weighted_f1(preds, golds, modal, label_scheme))
    if not scores:
        raise ValueError("selection score undefined on an empty validation set")
    return sum(scores) / len(scores)


def group_by_modal_domain(
    examples: Iterable, predictions: Mapping[str, frozenset]
) -> dict[tuple[str, str], tuple[list, list]]:
    """Arrange per-instance predictions into selection-score cells.

    `examples` yields objects with inst_id/modal/domain/gold attributes.
    """
    cells: dict[tuple[str, str], tuple[list, list]] = {}
    for ex in examples:
        preds, golds = cells.setdefault((ex.modal, ex.domain), ([], []))
        preds.append(predictions[ex.inst_id])
        golds.append(ex.gold)
    return cells
