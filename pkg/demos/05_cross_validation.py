"""The cross-validation protocol.

Documents are split whole into a held-out test set (about 25% of each
domain's instances), the remaining documents form k balanced folds, and k
models train on k-1 folds each with the remaining fold for early stopping.
Every model runs on the same test set; the report carries mean and standard
deviation over the k models. A rotation flag turns the same engine into the
cross-domain protocol (each fold serves once as the test set), and
domain_holdout removes a domain's documents from training and validation
while keeping them in the test data.
"""

import json

from mistkit.harness import ExperimentConfig, run_cv

from _common import labelled_sidecar, synthetic_corpus

corpus = synthetic_corpus(n_docs=14, seed=31)
sidecar = labelled_sidecar(corpus, dim=16, seed=32)

experiment = ExperimentConfig(kind="head_cls", k_folds=3, seed=5)
experiment.train.learning_rate = 0.05
experiment.train.max_epochs = 20
report = run_cv(experiment, corpus, sidecar=sidecar)

print("held-out test documents:", ", ".join(report["split"]["test_docs"]))
print("\nper-modal macro-F1 over the 3 CV models (mean +/- std):")
for modal, row in report["per_modal"].items():
    mf1 = row["macro_f1"]
    print(f"  {modal:7s} {100 * mf1['mean']:5.1f} +/- {100 * mf1['std']:4.1f}")

again = run_cv(experiment, corpus, sidecar=sidecar, workers=3)
identical = json.dumps(report, sort_keys=True) == json.dumps(again, sort_keys=True)
print(f"\nsame seed, concurrent folds -> identical report: {identical}")

holdout = ExperimentConfig(kind="majority", k_folds=3, seed=5, domain_holdout="MS")
holdout_report = run_cv(holdout, corpus)
print(f"domain holdout MS: folds trained on {holdout_report['folds'][0]['n_train']} "
      f"instances (none from MS)")

rotation = ExperimentConfig(kind="majority", k_folds=6, seed=5, rotate_folds=True)
rotation_report = run_cv(rotation, corpus)
print(f"rotation mode: {len(rotation_report['folds'])} folds, each used once as test set")
