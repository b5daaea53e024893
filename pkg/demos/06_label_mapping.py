"""Mapping the 7-label scheme onto the 4-way coarse scheme.

feasibility/options -> StateOfTheWorld, capability/rhetorical ->
StateOfTheAgent, speculation/inference -> StateOfKnowledge, deontic ->
Priority. The mapping is a set-image, so multi-label sets may collapse.
A mapped corpus keeps every instance and trains with the coarse label sets.
"""

from mistkit import scheme
from mistkit.models import predict, train_majority
from mistkit.models.train import examples_from_corpus

from _common import synthetic_corpus

for labels in ({"feasibility"}, {"speculation", "inference"}, {"capability", "speculation"}):
    print(f"{sorted(labels)} -> {sorted(scheme.map_to_gme(labels))}")

print("\nper-modal label sets after mapping:")
for modal in scheme.MODALS:
    fine = sorted(scheme.ordered_valid_labels(modal))
    coarse = sorted(scheme.valid_labels(modal, "gme"))
    print(f"  {modal:7s} {len(fine)} labels -> {coarse}")

corpus = synthetic_corpus(n_docs=8, seed=41)
mapped = scheme.map_corpus_to_gme(corpus)
assert mapped.n_instances == corpus.n_instances
print(f"\nmapped corpus: dataset_id={mapped.dataset_id!r}, "
      f"{mapped.n_instances} instances preserved")

examples = examples_from_corpus(mapped)
bundle = train_majority(examples)
sample = examples[0]
print(f"majority prediction for a mapped {sample.modal!r} instance: "
      f"{sorted(predict(bundle, sample))}")
