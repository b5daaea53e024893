"""Training linear heads over precomputed embeddings.

The classifier families read per-instance vectors from a binary sidecar
(sentence vector + modal-token vector); heads are trained per modal with
Adam, warm-up, early stopping on the validation selection score, and
multi-label sigmoid outputs thresholded at 0.5 with an argmax fallback.
Here the sidecar is synthetic and leaks the labels, so heads learn quickly.
"""

from mistkit import metrics, scheme
from mistkit.models import TrainConfig, predict_many, train_model
from mistkit.models.train import examples_from_corpus

from _common import labelled_sidecar, synthetic_corpus

corpus = synthetic_corpus(n_docs=18, seed=21)
sidecar = labelled_sidecar(corpus, dim=16, seed=22)
examples = examples_from_corpus(corpus)
held_out = {"doc14", "doc15", "doc16", "doc17"}
train_set = [ex for ex in examples if ex.doc_id not in held_out]
val_set = [ex for ex in examples if ex.doc_id in held_out]
print(f"{len(train_set)} training / {len(val_set)} validation instances")

config = TrainConfig(learning_rate=0.05, batch_size=8, warmup_epochs=2,
                     dropout_p=0.1, max_epochs=60, patience=10)
bundle, trace = train_model("head_cls", train_set, val_set,
                            sidecar=sidecar, config=config, seed=7)

print("\nearly stopping picked these epochs per head:")
for head, epoch in sorted(trace.best_epochs.items()):
    print(f"  {head}: epoch {epoch}")

majority, _ = train_model("majority", train_set, [], config=config, seed=7)

print("\nvalidation weighted F1 (the selection metric), head vs majority:")
for modal in scheme.MODALS:
    members = [ex for ex in val_set if ex.modal == modal]
    if not members:
        continue
    golds = [ex.gold for ex in members]
    head_preds = predict_many(bundle, members, sidecar=sidecar)
    maj_preds = predict_many(majority, members)
    head_f1 = metrics.weighted_f1([head_preds[ex.inst_id] for ex in members], golds, modal)
    maj_f1 = metrics.weighted_f1([maj_preds[ex.inst_id] for ex in members], golds, modal)
    print(f"  {modal:7s} head {100 * head_f1:5.1f}   majority {100 * maj_f1:5.1f}")
