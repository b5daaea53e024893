import json

import numpy as np
import pytest

from mistkit import scheme
from mistkit.cli import run
from mistkit.corpus import load_corpus, save_corpus
from mistkit.features import write_sidecar
from mistkit.models import load_bundle
from mistkit.models.train import examples_from_corpus

from conftest import random_corpus, sidecar_for_examples


@pytest.fixture
def corpus_file(tmp_path):
    rng = np.random.default_rng(91)
    corpus = random_corpus(
        rng, n_docs=8, domains=("CL", "MS"), round_robin_domains=True,
        with_annotations=True, min_sentences=3, max_sentences=5,
    )
    path = tmp_path / "corpus.jsonl"
    save_corpus(corpus, path)
    return path


def test_stats_subcommand(tmp_path, corpus_file, capsys):
    out_dir = tmp_path / "stats"
    assert run(["stats", "--corpus", str(corpus_file), "--out-dir", str(out_dir)]) == 0
    for name in ("modal_dist.csv", "label_counts.csv", "cooccurrence.csv", "summary.json"):
        assert (out_dir / name).exists()


def test_unknown_subcommand_exits_1(capsys):
    assert run(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_missing_corpus_is_data_error(tmp_path, capsys):
    code = run(["stats", "--corpus", str(tmp_path / "nope.jsonl"), "--out-dir", str(tmp_path)])
    assert code == 2


def test_malformed_corpus_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"doc_id": "d", "domain": "XX", "subset": "sampled", "sentences": []}\n')
    assert run(["stats", "--corpus", str(bad), "--out-dir", str(tmp_path / "s")]) == 2
    assert "line 1" in capsys.readouterr().err


def test_detect_subcommand(tmp_path):
    raw = tmp_path / "raw.jsonl"
    raw.write_text(
        json.dumps(
            {
                "doc_id": "d1",
                "sentences": [
                    {"sent_id": "s1", "tokens": ["We", "cannot", "stop"]},
                    {"sent_id": "s2", "tokens": ["a", "can", "of", "paint"]},
                ],
            }
        )
        + "\n"
    )
    out = tmp_path / "detected.jsonl"
    assert run(["detect", "--in", str(raw), "--out", str(out)]) == 0
    corpus = load_corpus(out)
    instances = [inst for _, _, inst in corpus.iter_instances()]
    assert len(instances) == 1
    assert instances[0].modal == "can"
    assert instances[0].negated is True
    assert instances[0].gold == frozenset()


def test_map_labels_subcommand(tmp_path, corpus_file):
    out = tmp_path / "gme.jsonl"
    assert run(["map-labels", "--scheme", "gme", "--in", str(corpus_file), "--out", str(out)]) == 0
    mapped = load_corpus(out)
    original = load_corpus(corpus_file)
    assert mapped.n_instances == original.n_instances
    assert mapped.dataset_id == "gme-mist"
    for _, _, inst in mapped.iter_instances():
        assert inst.gold <= set(scheme.GME_LABELS)


def test_train_eval_round_trip(tmp_path, corpus_file):
    corpus = load_corpus(corpus_file)
    examples = examples_from_corpus(corpus)
    sidecar = sidecar_for_examples(examples, 5, np.random.default_rng(17))
    sidecar_path = tmp_path / "emb.bin"
    write_sidecar(sidecar, sidecar_path)
    model_path = tmp_path / "model.json"
    config_path = tmp_path / "cfg.json"
    config_path.write_text(json.dumps({"learning_rate": 5e-3, "max_epochs": 2}))
    code = run(
        [
            "train", "--kind", "head_cls_modal", "--config", str(config_path),
            "--corpus", str(corpus_file), "--sidecar", str(sidecar_path),
            "--out", str(model_path), "--seed", "7",
        ]
    )
    assert code == 0
    bundle = load_bundle(model_path)
    assert bundle.kind == "head_cls_modal"

    dump_path = tmp_path / "preds.jsonl"
    report_path = tmp_path / "metrics.json"
    code = run(
        [
            "eval", "--model", str(model_path), "--corpus", str(corpus_file),
            "--sidecar", str(sidecar_path), "--dump", str(dump_path),
            "--report", str(report_path),
        ]
    )
    assert code == 0
    dumped = [json.loads(line) for line in dump_path.read_text().splitlines()]
    assert {d["inst_id"] for d in dumped} == {ex.inst_id for ex in examples}
    report = json.loads(report_path.read_text())
    assert set(report["per_modal"]) <= set(scheme.MODALS)


def test_train_missing_sidecar_entry_exits_2(tmp_path, corpus_file, capsys):
    corpus = load_corpus(corpus_file)
    examples = examples_from_corpus(corpus)
    sidecar = sidecar_for_examples(examples[:-1], 5, np.random.default_rng(3))
    sidecar_path = tmp_path / "emb.bin"
    write_sidecar(sidecar, sidecar_path)
    code = run(
        [
            "train", "--kind", "head_cls", "--corpus", str(corpus_file),
            "--sidecar", str(sidecar_path), "--out", str(tmp_path / "m.json"),
            "--seed", "1",
        ]
    )
    assert code == 2
    assert examples[-1].inst_id in capsys.readouterr().err


def test_cv_determinism_byte_identical(tmp_path, corpus_file):
    corpus = load_corpus(corpus_file)
    examples = examples_from_corpus(corpus)
    sidecar = sidecar_for_examples(examples, 4, np.random.default_rng(19))
    sidecar_path = tmp_path / "emb.bin"
    write_sidecar(sidecar, sidecar_path)
    exp_path = tmp_path / "exp.json"
    exp_path.write_text(
        json.dumps(
            {
                "kind": "head_cls_modal",
                "k_folds": 2,
                "train": {"learning_rate": 5e-3, "max_epochs": 2},
            }
        )
    )
    outputs = []
    for name in ("r1.json", "r2.json"):
        out = tmp_path / name
        code = run(
            [
                "cv", "--experiment", str(exp_path), "--corpus", str(corpus_file),
                "--sidecar", str(sidecar_path), "--out", str(out), "--seed", "13",
            ]
        )
        assert code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_export_split_and_cv_with_split(tmp_path, corpus_file):
    split_path = tmp_path / "split.json"
    assert run(
        ["export-split", "--corpus", str(corpus_file), "--target", "0.3",
         "--out", str(split_path), "--seed", "5"]
    ) == 0
    split = json.loads(split_path.read_text())
    assert set(split) >= {"train", "test"}
    exp_path = tmp_path / "exp.json"
    exp_path.write_text(json.dumps({"kind": "majority", "k_folds": 2}))
    out = tmp_path / "report.json"
    code = run(
        ["cv", "--experiment", str(exp_path), "--corpus", str(corpus_file),
         "--split", str(split_path), "--out", str(out), "--seed", "3"]
    )
    assert code == 0
    report = json.loads(out.read_text())
    assert report["split"]["source"] == "published"
    assert sorted(report["split"]["test_docs"]) == sorted(split["test"])


def test_agree_subcommand(tmp_path, corpus_file):
    report_path = tmp_path / "agreement.json"
    assert run(["agree", "--corpus", str(corpus_file), "--report", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert "kappa_cells" in report and "adjudication" in report


def test_enrich_subcommand(tmp_path, corpus_file):
    corpus = load_corpus(corpus_file)
    examples = examples_from_corpus(corpus)[:3]
    triples_path = tmp_path / "triples.jsonl"
    with open(triples_path, "w") as handle:
        for ex in examples:
            handle.write(
                json.dumps(
                    {
                        "inst_id": ex.inst_id,
                        "subject": "s",
                        "relation": "influence",
                        "relation_lemma": "influence",
                        "object": "o",
                    }
                )
                + "\n"
            )
    preds_path = tmp_path / "preds.jsonl"
    with open(preds_path, "w") as handle:
        for ex in examples:
            handle.write(json.dumps({"inst_id": ex.inst_id, "pred": ["capability"]}) + "\n")
    out = tmp_path / "facts.jsonl"
    code = run(
        ["enrich", "--triples", str(triples_path), "--predictions", str(preds_path),
         "--corpus", str(corpus_file), "--out", str(out)]
    )
    assert code == 0
    facts = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(facts) == 3
    for fact in facts:
        assert fact["relation"] == "hasCapabilityTo_influence"
        assert fact["factuality"] == "true"


def test_version_flag(capsys):
    assert run(["--version"]) == 0
    out = capsys.readouterr().out
    assert "mistkit" in out and "MISTEMB1" in out


def test_grid_subcommand_single_point(tmp_path, corpus_file):
    grid_path = tmp_path / "grid.json"
    grid_path.write_text(json.dumps({"learning_rate": [0.01]}))
    out = tmp_path / "best.json"
    code = run(
        ["grid", "--kind", "majority", "--corpus", str(corpus_file),
         "--grid", str(grid_path), "--out", str(out), "--seed", "2", "--k-folds", "2"]
    )
    assert code == 0
    best = json.loads(out.read_text())
    assert best["best"]["learning_rate"] == 0.01
