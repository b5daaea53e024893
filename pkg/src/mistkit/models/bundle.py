"""Trained-model container: head routing, prediction and JSON serialization.

A bundle holds one head per (dataset_id, modal) pair -- or per dataset when
a single shared head is configured -- plus the convolutional encoder for the
cnn kind. Serialization is canonical (sorted keys, shortest-repr floats), so
identical bundles produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np

from .. import scheme
from ..errors import DataError, TrainingError
from . import cnn as cnn_mod
from .cnn import CnnEncoder
from .heads import HeadConfig, LinearHead, head_scores

KINDS = ("majority", "cnn", "head_cls", "head_modal", "head_cls_modal")

MODEL_FORMAT = "mistkit-model-1"


@dataclass
class TrainConfig:
    learning_rate: float = 3e-5
    batch_size: int = 8
    warmup_epochs: int = 2
    weight_decay: float = 0.0
    dropout_p: float = 0.1
    max_epochs: int = 100
    patience: int = 10
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    activation: str = "sigmoid"
    shared_head: bool = False
    train_word_vectors: bool = False
    max_sentence_length: int = 128

    @classmethod
    def head_defaults(cls) -> "TrainConfig":
        return cls()

    @classmethod
    def cnn_defaults(cls) -> "TrainConfig":
        return cls(
            learning_rate=5e-3,
            batch_size=32,
            warmup_epochs=0,
            weight_decay=1e-3,
            dropout_p=0.1,
        )

    @classmethod
    def defaults_for(cls, kind: str) -> "TrainConfig":
        return cls.cnn_defaults() if kind == "cnn" else cls.head_defaults()


@dataclass
class TrainExample:
    """One classifiable instance, decoupled from the corpus tree."""

    inst_id: str
    dataset_id: str
    modal: str
    domain: str
    gold: frozenset[str]
    tokens: list[str]
    token_index: int
    doc_id: str = ""


@dataclass
class MajorityHead:
    config: HeadConfig
    label: str


Head = Union[MajorityHead, LinearHead]
HeadKey = tuple[str, Optional[str]]


@dataclass
class ModelBundle:
    kind: str
    config: TrainConfig
    seed: int
    heads: dict[HeadKey, Head] = field(default_factory=dict)
    encoder: Optional[CnnEncoder] = None
    trained_vectors: Optional[dict[str, np.ndarray]] = None

    def head_key(self, example: TrainExample) -> HeadKey:
        return (example.dataset_id, None if self.config.shared_head else example.modal)

    def head_for(self, example: TrainExample) -> Head:
        key = self.head_key(example)
        head = self.heads.get(key)
        if head is None:
            raise TrainingError(
                f"untrained head for dataset {key[0]!r}, modal {key[1]!r}"
            )
        return head


def label_order_for(
    dataset_id: str, modal: Optional[str], shared: bool
) -> tuple[str, ...]:
    scheme_name = scheme.scheme_for_dataset(dataset_id)
    if shared or modal is None:
        return scheme.scheme_labels(scheme_name)
    return scheme.ordered_valid_labels(modal, scheme_name)


def input_dim_for(kind: str, sidecar_dim: Optional[int]) -> int:
    if kind == "cnn":
        return cnn_mod.OUTPUT_DIM
    if sidecar_dim is None:
        raise DataError(f"model kind {kind!r} requires an embedding sidecar")
    return 2 * sidecar_dim if kind == "head_cls_modal" else sidecar_dim


def sidecar_input(kind: str, sidecar, inst_id: str) -> np.ndarray:
    sent_vec, modal_vec = sidecar.get(inst_id)
    if kind == "head_cls":
        vec = sent_vec
    elif kind == "head_modal":
        vec = modal_vec
    elif kind == "head_cls_modal":
        vec = np.concatenate([sent_vec, modal_vec])
    else:
        raise ValueError(f"kind {kind!r} does not read the sidecar")
    return np.asarray(vec, dtype=np.float64)


def embed_tokens(
    bundle: ModelBundle, tokens: list[str], word_vectors
) -> np.ndarray:
    """Token embeddings for the cnn kind, overlaying any trained vectors."""
    tokens = tokens[: bundle.config.max_sentence_length]
    if bundle.trained_vectors is None:
        return word_vectors.embed(tokens)
    rows = []
    for tok in tokens:
        trained = bundle.trained_vectors.get(tok)
        rows.append(trained if trained is not None else word_vectors.lookup(tok))
    return np.stack(rows)


def forward_head(
    bundle: ModelBundle,
    example: TrainExample,
    sidecar=None,
    word_vectors=None,
) -> tuple[np.ndarray, tuple[str, ...]]:
    """Per-label activation scores and the label order they follow."""
    head = bundle.head_for(example)
    if isinstance(head, MajorityHead):
        scores = np.array(
            [1.0 if lab == head.label else 0.0 for lab in head.config.label_order]
        )
        return scores, head.config.label_order
    if bundle.kind == "cnn":
        if word_vectors is None and bundle.trained_vectors is None:
            raise DataError("cnn prediction requires word vectors")
        X = embed_tokens(bundle, example.tokens, word_vectors)
        x = cnn_mod.encode(bundle.encoder, X)
    else:
        if sidecar is None:
            raise DataError(f"model kind {bundle.kind!r} requires an embedding sidecar")
        x = sidecar_input(bundle.kind, sidecar, example.inst_id)
    return head_scores(head, x), head.config.label_order


def decide(scores: np.ndarray, label_order: tuple[str, ...], activation: str) -> frozenset[str]:
    """Threshold sigmoid scores at 0.5 with argmax fallback; argmax for softmax."""
    if activation == "softmax":
        return frozenset([label_order[int(np.argmax(scores))]])
    chosen = [lab for lab, s in zip(label_order, scores) if s >= 0.5]
    if not chosen:
        chosen = [label_order[int(np.argmax(scores))]]
    return frozenset(chosen)


def predict(
    bundle: ModelBundle,
    example: TrainExample,
    sidecar=None,
    word_vectors=None,
) -> frozenset[str]:
    head = bundle.head_for(example)
    if isinstance(head, MajorityHead):
        return frozenset([head.label])
    scores, order = forward_head(bundle, example, sidecar, word_vectors)
    return decide(scores, order, head.config.activation)


def predict_many(
    bundle: ModelBundle, examples, sidecar=None, word_vectors=None
) -> dict[str, frozenset[str]]:
    return {
        ex.inst_id: predict(bundle, ex, sidecar, word_vectors) for ex in examples
    }


def _head_record(key: HeadKey, head: Head) -> dict:
    record = {
        "dataset_id": key[0],
        "modal": key[1],
        "label_order": list(head.config.label_order),
        "activation": head.config.activation,
    }
    if isinstance(head, MajorityHead):
        record["type"] = "majority"
        record["label"] = head.label
    else:
        record["type"] = "linear"
        record["weights"] = head.weights.tolist()
        record["bias"] = head.bias.tolist()
    return record


def to_json(bundle: ModelBundle) -> str:
    encoder = None
    if bundle.encoder is not None:
        encoder = {
            "embed_dim": bundle.encoder.embed_dim,
            "dropout_p": bundle.encoder.dropout_p,
            "filters": {str(s): bundle.encoder.filters[s].tolist() for s in cnn_mod.REGION_SIZES},
            "biases": {str(s): bundle.encoder.biases[s].tolist() for s in cnn_mod.REGION_SIZES},
        }
    trained = None
    if bundle.trained_vectors is not None:
        tokens = sorted(bundle.trained_vectors)
        trained = {
            "tokens": tokens,
            "matrix": [bundle.trained_vectors[t].tolist() for t in tokens],
        }
    doc = {
        "format": MODEL_FORMAT,
        "kind": bundle.kind,
        "seed": bundle.seed,
        "config": asdict(bundle.config),
        "encoder": encoder,
        "trained_vectors": trained,
        "heads": [
            _head_record(key, bundle.heads[key])
            for key in sorted(bundle.heads, key=lambda k: (k[0], k[1] or ""))
        ],
    }
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def from_json(text: str) -> ModelBundle:
    doc = json.loads(text)
    if doc.get("format") != MODEL_FORMAT:
        raise DataError(f"unsupported model format {doc.get('format')!r}")
    config = TrainConfig(**doc["config"])
    bundle = ModelBundle(kind=doc["kind"], config=config, seed=doc["seed"])
    if doc.get("encoder"):
        enc_doc = doc["encoder"]
        encoder = CnnEncoder(embed_dim=enc_doc["embed_dim"], dropout_p=enc_doc["dropout_p"])
        for s in cnn_mod.REGION_SIZES:
            encoder.filters[s] = np.array(enc_doc["filters"][str(s)], dtype=np.float64)
            encoder.biases[s] = np.array(enc_doc["biases"][str(s)], dtype=np.float64)
        bundle.encoder = encoder
    if doc.get("trained_vectors"):
        tv = doc["trained_vectors"]
        bundle.trained_vectors = {
            tok: np.array(row, dtype=np.float64)
            for tok, row in zip(tv["tokens"], tv["matrix"])
        }
    for record in doc["heads"]:
        key = (record["dataset_id"], record["modal"])
        head_config = HeadConfig(
            dataset_id=record["dataset_id"],
            modal=record["modal"],
            label_order=tuple(record["label_order"]),
            activation=record["activation"],
        )
        if record["type"] == "majority":
            bundle.heads[key] = MajorityHead(config=head_config, label=record["label"])
        else:
            bundle.heads[key] = LinearHead(
                config=head_config,
                weights=np.array(record["weights"], dtype=np.float64),
                bias=np.array(record["bias"], dtype=np.float64),
            )
    return bundle


def save_bundle(bundle: ModelBundle, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(to_json(bundle))
        handle.write("\n")


def load_bundle(path) -> ModelBundle:
    with open(path, encoding="utf-8") as handle:
        return from_json(handle.read())
