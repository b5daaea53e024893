"""Corpus round trip and analytics.

Builds a small annotated corpus, writes it in the line-delimited interchange
format, reads it back, and prints the statistics tables: modal distribution
by domain, modal-by-label counts, and label co-occurrence.
"""

import io

from mistkit import analytics
from mistkit.corpus import parse_corpus, serialize_corpus

from _common import synthetic_corpus

corpus = synthetic_corpus(n_docs=10, seed=3)
print(f"{len(corpus.documents)} documents, {corpus.n_instances} modal instances")

# One JSON object per line; parsing it back gives the identical corpus.
payload = "\n".join(serialize_corpus(corpus))
again = parse_corpus(io.StringIO(payload))
assert again == corpus
print("serialize -> parse round trip: identical")
print("first record:", payload.splitlines()[0][:120], "...")

dist = analytics.modal_distribution(corpus)
print("\nmodal distribution (count, % within domain):")
for row in dist["rows"]:
    if row["count"]:
        print(f"  {row['domain']:3s} {row['modal']:7s} {row['count']:3d}  {row['pct']:5.1f}%")
if "modal_sentence_ratio" in dist:
    print("modal-sentence ratio per domain (needs total_sentences metadata):")
    for domain, ratio in dist["modal_sentence_ratio"].items():
        print(f"  {domain}: {ratio:.1f}% of sentences contain a modal")

counts = analytics.label_counts(corpus)
print("\nlabel counts (modal x label, multi-label instances count twice):")
header = " ".join(f"{m:>7s}" for m in counts["modals"])
print(f"  {'':12s}{header}")
for lab in counts["labels"]:
    row = " ".join(f"{counts['counts'][m][lab]:7d}" for m in counts["modals"])
    print(f"  {lab:12s}{row}")

cooc = analytics.label_cooccurrence(corpus)
print(f"\nmulti-label fraction: {100 * cooc['multilabel_fraction']:.1f}%")
