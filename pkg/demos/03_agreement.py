"""Inter-annotator agreement diagnostics.

For each (modal, label) pair, kappa is computed on the binary decision
"does this label apply", per annotator pair, then averaged. Labels a modal
almost never receives are excluded by the >= 6 assignments rule. Pairwise
F1-agreement and adjudication-versus-majority statistics complete the
picture.
"""

from mistkit import agreement, scheme

from _common import synthetic_corpus

corpus = synthetic_corpus(n_docs=14, seed=11, with_annotations=True)
instances = [inst for _, _, inst in corpus.iter_instances()]
print(f"{len(instances)} instances, 3 annotators\n")

print("average kappa per (modal, label); '-' = excluded or undefined:")
for modal in scheme.MODALS:
    cells = []
    for label in scheme.ordered_valid_labels(modal):
        value = agreement.average_kappa(corpus, modal, label)
        cells.append(f"{label[:4]}={value:.2f}" if value is not None else f"{label[:4]}=-")
    print(f"  {modal:7s} " + "  ".join(cells))

print("\npairwise F1-agreement on 'speculation':")
for pair in (("ann1", "ann2"), ("ann1", "ann3"), ("ann2", "ann3")):
    value = agreement.f1_agreement(pair[0], pair[1], "speculation", instances)
    assert value == agreement.f1_agreement(pair[1], pair[0], "speculation", instances)
    print(f"  {pair[0]}/{pair[1]}: {value:.3f}")

exact, overlap = agreement.adjudication_stats(instances)
print(f"\nadjudicated gold vs majority vote: exact match {100 * exact:.1f}%, "
      f"overlap {100 * overlap:.1f}%")

report = agreement.build_report(corpus)
print(f"full report carries {len(report['kappa_cells'])} auditable 2x2 tables")
