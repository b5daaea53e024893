"""End-to-end pipeline through the command line, in a temp directory:

raw text records -> detect -> (hand labeling stands in for annotation) ->
stats -> exported split -> embedding sidecar (stub exporter layout) ->
train -> eval with prediction dump -> enrichment of Open-IE triples.
"""

import json
import subprocess
import tempfile
from pathlib import Path

from mistkit.corpus import load_corpus, save_corpus
from mistkit.features import write_sidecar
from mistkit.models.train import examples_from_corpus

from _common import labelled_sidecar, synthetic_corpus


def cli(*args):
    cmd = ["mistkit", *args]
    print("$", " ".join(cmd))
    result = subprocess.run(cmd, capture_output=True, text=True)
    if result.stdout:
        print(result.stdout.rstrip())
    if result.returncode != 0:
        print(result.stderr.rstrip())
        raise SystemExit(result.returncode)


work = Path(tempfile.mkdtemp(prefix="mistkit-demo-"))
print(f"working in {work}\n")

# 1. raw tokenized documents -> detected modal targets (empty gold sets)
raw = work / "raw.jsonl"
with open(raw, "w") as handle:
    handle.write(json.dumps({
        "doc_id": "raw1", "domain": "MS", "subset": "sampled",
        "sentences": [{"sent_id": "s1",
                       "tokens": ["This", "sensor", "can", "respond"]}],
    }) + "\n")
cli("detect", "--in", str(raw), "--out", str(work / "detected.jsonl"))

# 2. an annotated corpus (stands in for the fetched+converted release)
corpus = synthetic_corpus(n_docs=12, seed=51)
corpus_path = work / "corpus.jsonl"
save_corpus(corpus, corpus_path)

cli("stats", "--corpus", str(corpus_path), "--out-dir", str(work / "stats"))
cli("export-split", "--corpus", str(corpus_path), "--target", "0.25",
    "--seed", "9", "--out", str(work / "split.json"))

# 3. embedding sidecar (a real run would use mist-export with an encoder)
sidecar = labelled_sidecar(corpus, dim=16, seed=52)
write_sidecar(sidecar, work / "emb.bin")

# 4. train + evaluate
(work / "cfg.json").write_text(json.dumps({"learning_rate": 0.05, "max_epochs": 30}))
cli("train", "--kind", "head_cls", "--config", str(work / "cfg.json"),
    "--corpus", str(corpus_path), "--sidecar", str(work / "emb.bin"),
    "--out", str(work / "model.json"), "--seed", "7")
cli("eval", "--model", str(work / "model.json"), "--corpus", str(corpus_path),
    "--sidecar", str(work / "emb.bin"), "--dump", str(work / "preds.jsonl"),
    "--report", str(work / "metrics.json"))

# 5. enrich Open-IE triples with the predictions
examples = examples_from_corpus(load_corpus(corpus_path))[:4]
with open(work / "triples.jsonl", "w") as handle:
    for ex in examples:
        handle.write(json.dumps({
            "inst_id": ex.inst_id, "subject": "device", "relation": "influence",
            "relation_lemma": "influence", "object": "signal",
        }) + "\n")
cli("enrich", "--triples", str(work / "triples.jsonl"),
    "--predictions", str(work / "preds.jsonl"),
    "--corpus", str(corpus_path), "--out", str(work / "facts.jsonl"))

print("\nenriched facts:")
for line in (work / "facts.jsonl").read_text().splitlines():
    print("  " + line)
