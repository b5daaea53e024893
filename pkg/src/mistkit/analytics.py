"""Corpus statistics as plot-ready tables: modal distributions by domain,
modal-by-label counts, and label co-occurrence.

Counting is multi-label: an instance with two gold labels increments both
label cells, and contributes its unordered label pairs to co-occurrence.
Output is CSV plus a JSON mirror; no plotting here.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

from . import scheme
from .corpus import DOMAINS, Corpus


def _domains_present(corpus: Corpus) -> list[str]:
    present = {doc.domain for doc in corpus.documents}
    return [d for d in DOMAINS if d in present]


def modal_distribution(corpus: Corpus, subset: Optional[str] = None) -> dict:
    """Counts and per-domain percentages of each modal.

    When documents carry `total_sentences` metadata, per-domain
    modal-sentence ratios are included; otherwise that block is omitted.
    """
    domains = _domains_present(corpus)
    counts = {dom: {modal: 0 for modal in scheme.MODALS} for dom in domains}
    sents_with_modals = {dom: 0 for dom in domains}
    total_sentences: dict[str, int] = {dom: 0 for dom in domains}
    n_counted = n_with_meta = 0
    for doc in corpus.documents:
        if subset is not None and doc.subset != subset:
            continue
        n_counted += 1
        meta_total = doc.meta.get("total_sentences")
        if isinstance(meta_total, int):
            total_sentences[doc.domain] += meta_total
            n_with_meta += 1
        for sent in doc.sentences:
            if sent.instances:
                sents_with_modals[doc.domain] += 1
            for inst in sent.instances:
                counts[doc.domain][inst.modal] += 1
    have_totals = n_counted > 0 and n_with_meta == n_counted
    rows = []
    for dom in domains:
        total = sum(counts[dom].values())
        for modal in scheme.MODALS:
            pct = 100.0 * counts[dom][modal] / total if total else 0.0
            rows.append({"domain": dom, "modal": modal, "count": counts[dom][modal], "pct": pct})
    result = {"subset": subset, "rows": rows}
    if have_totals:
        result["modal_sentence_ratio"] = {
            dom: (100.0 * sents_with_modals[dom] / total_sentences[dom])
            if total_sentences[dom]
            else 0.0
            for dom in domains
        }
    return result


def label_counts(corpus: Corpus) -> dict:
    """Modal-by-label gold counts; multi-label instances count in every cell."""
    labels = scheme.scheme_labels(scheme.scheme_for_dataset(corpus.dataset_id))
    table = {modal: {lab: 0 for lab in labels} for modal in scheme.MODALS}
    for _, _, inst in corpus.iter_instances():
        for lab in inst.gold:
            table[inst.modal][lab] += 1
    return {"labels": list(labels), "modals": list(scheme.MODALS), "counts": table}


def label_cooccurrence(corpus: Corpus) -> dict:
    """Symmetric co-occurrence counts of unordered gold label pairs."""
    labels = scheme.scheme_labels(scheme.scheme_for_dataset(corpus.dataset_id))
    index = {lab: i for i, lab in enumerate(labels)}
    counts = {lab: {other: 0 for other in labels} for lab in labels}
    multi = 0
    total = 0
    for _, _, inst in corpus.iter_instances():
        total += 1
        gold = sorted(inst.gold, key=index.get)
        if len(gold) > 1:
            multi += 1
        for i, lab_a in enumerate(gold):
            for lab_b in gold[i + 1 :]:
                counts[lab_a][lab_b] += 1
                counts[lab_b][lab_a] += 1
    return {
        "labels": list(labels),
        "counts": counts,
        "n_instances": total,
        "n_multilabel": multi,
        "multilabel_fraction": (multi / total) if total else 0.0,
    }


def summary(corpus: Corpus) -> dict:
    domains = _domains_present(corpus)
    per_domain = {dom: 0 for dom in domains}
    per_subset = {sub: 0 for sub in ("fulltext", "sampled")}
    per_modal = {modal: 0 for modal in scheme.MODALS}
    for doc in corpus.documents:
        for sent in doc.sentences:
            for inst in sent.instances:
                per_domain[doc.domain] += 1
                per_subset[doc.subset] += 1
                per_modal[inst.modal] += 1
    cooc = label_cooccurrence(corpus)
    return {
        "dataset_id": corpus.dataset_id,
        "n_documents": len(corpus.documents),
        "n_instances": corpus.n_instances,
        "instances_by_domain": per_domain,
        "instances_by_subset": per_subset,
        "instances_by_modal": per_modal,
        "multilabel_fraction": cooc["multilabel_fraction"],
    }


def write_stats(corpus: Corpus, out_dir) -> None:
    """Emit modal_dist.csv, label_counts.csv, cooccurrence.csv, summary.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    dist = modal_distribution(corpus)
    with open(out_dir / "modal_dist.csv", "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["domain", "modal", "count", "pct"])
        for row in dist["rows"]:
            writer.writerow([row["domain"], row["modal"], row["count"], f"{row['pct']:.4f}"])

    counts = label_counts(corpus)
    with open(out_dir / "label_counts.csv", "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["label", *counts["modals"]])
        for lab in counts["labels"]:
            writer.writerow([lab, *(counts["counts"][modal][lab] for modal in counts["modals"])])

    cooc = label_cooccurrence(corpus)
    labels = cooc["labels"]
    with open(out_dir / "cooccurrence.csv", "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["label", *labels[:-1]])
        for i, lab in enumerate(labels[1:], start=1):
            writer.writerow([lab, *(cooc["counts"][lab][other] for other in labels[:i])])

    full = summary(corpus)
    full["modal_distribution"] = dist
    full["cooccurrence"] = {
        "labels": labels,
        "counts": cooc["counts"],
        "n_multilabel": cooc["n_multilabel"],
    }
    with open(out_dir / "summary.json", "w", encoding="utf-8") as handle:
        json.dump(full, handle, indent=2, sort_keys=True)
        handle.write("\n")
