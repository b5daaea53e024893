"""From-scratch training: majority baselines, per-head Adam training over
sidecar embeddings, and joint training of the convolutional model.

Every random draw (init, shuffling, dropout) comes from a stream derived
from (seed, head key, purpose), so training is reproducible bit-for-bit and
heads of different modals never consume each other's randomness: permuting
one modal's training instances cannot change another modal's trained head
for the sidecar-backed kinds. The convolutional kind shares its encoder
across modals by design, so that independence holds only for the heads'
own initialization there.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import metrics, scheme
from ..corpus import Corpus
from ..errors import DataError, TrainingError
from . import cnn as cnn_mod
from .adam import Adam
from .bundle import (
    KINDS,
    MajorityHead,
    ModelBundle,
    TrainConfig,
    TrainExample,
    decide,
    input_dim_for,
    label_order_for,
    sidecar_input,
)
from .heads import HeadConfig, head_loss_and_grads, init_head, sigmoid, softmax


def derive_rng(*parts) -> np.random.Generator:
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest, "little"))


def examples_from_corpus(corpus: Corpus, doc_ids: Optional[set[str]] = None) -> list[TrainExample]:
    """Experiment-ready examples: omitted labels dropped, empty gold excluded."""
    out = []
    for doc in corpus.documents:
        if doc_ids is not None and doc.doc_id not in doc_ids:
            continue
        for sent in doc.sentences:
            for inst in sent.instances:
                filtered = scheme.filter_instance(inst)
                if filtered is None or not filtered.gold:
                    continue
                out.append(
                    TrainExample(
                        inst_id=filtered.inst_id,
                        dataset_id=corpus.dataset_id,
                        modal=filtered.modal,
                        domain=doc.domain,
                        gold=filtered.gold,
                        tokens=sent.tokens,
                        token_index=filtered.token_index,
                        doc_id=doc.doc_id,
                    )
                )
    return out


@dataclass
class TrainingTrace:
    per_head: dict[str, list[dict]] = field(default_factory=dict)
    best_epochs: dict[str, Optional[int]] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"per_head": self.per_head, "best_epochs": self.best_epochs}


def _head_keys(examples, config: TrainConfig) -> list[tuple[str, Optional[str]]]:
    keys = {
        (ex.dataset_id, None if config.shared_head else ex.modal) for ex in examples
    }
    return sorted(keys, key=lambda k: (k[0], k[1] or ""))


def _key_name(key) -> str:
    return f"{key[0]}/{key[1] or '_shared'}"


def _target_matrix(examples, label_order, activation: str) -> np.ndarray:
    Y = np.zeros((len(examples), len(label_order)))
    index = {lab: i for i, lab in enumerate(label_order)}
    for row, ex in enumerate(examples):
        marked = [lab for lab in ex.gold if lab in index]
        if activation == "softmax" and len(marked) != 1:
            raise TrainingError(
                f"softmax head requires single-label gold, instance {ex.inst_id!r} "
                f"has {len(marked)} labels"
            )
        for lab in marked:
            Y[row, index[lab]] = 1.0
    return Y


def _selection(examples, predictions) -> Optional[float]:
    """Mean weighted F1 over (dataset, modal, domain) cells with instances."""
    cells: dict[tuple[str, str, str], tuple[list, list]] = {}
    for ex in examples:
        preds, golds = cells.setdefault((ex.dataset_id, ex.modal, ex.domain), ([], []))
        preds.append(predictions[ex.inst_id])
        golds.append(ex.gold)
    scores = []
    for (dataset_id, modal, _domain), (preds, golds) in cells.items():
        scores.append(
            metrics.weighted_f1(preds, golds, modal, scheme.scheme_for_dataset(dataset_id))
        )
    if not scores:
        return None
    return sum(scores) / len(scores)


def train_majority(train_set, config: Optional[TrainConfig] = None, seed: int = 0) -> ModelBundle:
    """Per head, the most frequent gold label; ties break lexicographically."""
    config = config or TrainConfig.head_defaults()
    bundle = ModelBundle(kind="majority", config=config, seed=seed)
    for key in _head_keys(train_set, config):
        counts: dict[str, int] = {}
        for ex in train_set:
            if (ex.dataset_id, None if config.shared_head else ex.modal) != key:
                continue
            for lab in ex.gold:
                counts[lab] = counts.get(lab, 0) + 1
        if not counts:
            continue  # untrained head
        best = min(counts, key=lambda lab: (-counts[lab], lab))
        head_config = HeadConfig(
            dataset_id=key[0],
            modal=key[1],
            label_order=label_order_for(key[0], key[1], config.shared_head),
            activation=config.activation,
        )
        bundle.heads[key] = MajorityHead(config=head_config, label=best)
    if not bundle.heads:
        raise TrainingError("no head has any training instance")
    return bundle


def _lr_at(config: TrainConfig, global_step: int, warmup_steps: int) -> float:
    if warmup_steps <= 0:
        return config.learning_rate
    return config.learning_rate * min(1.0, global_step / warmup_steps)


def _check_finite(loss: float, epoch: int, batch: int) -> None:
    if not math.isfinite(loss):
        raise TrainingError(f"non-finite loss at epoch {epoch}, batch {batch}")


def _predict_rows(W, b, X, label_order, activation) -> list[frozenset]:
    Z = X @ W.T + b
    S = sigmoid(Z) if activation == "sigmoid" else softmax(Z)
    return [decide(S[i], label_order, activation) for i in range(X.shape[0])]


def _train_linear_head(key, kind, train_ex, val_ex, sidecar, config, seed):
    label_order = label_order_for(key[0], key[1], config.shared_head)
    head_config = HeadConfig(
        dataset_id=key[0], modal=key[1], label_order=label_order, activation=config.activation
    )
    dim = input_dim_for(kind, sidecar.dim)
    init_rng = derive_rng(seed, key[0], key[1], "init")
    shuffle_rng = derive_rng(seed, key[0], key[1], "shuffle")
    dropout_rng = derive_rng(seed, key[0], key[1], "dropout")
    head = init_head(head_config, dim, init_rng)

    X = np.stack([sidecar_input(kind, sidecar, ex.inst_id) for ex in train_ex])
    Y = _target_matrix(train_ex, label_order, config.activation)
    X_val = (
        np.stack([sidecar_input(kind, sidecar, ex.inst_id) for ex in val_ex])
        if val_ex
        else None
    )

    adam = Adam(
        {"w": head.weights, "b": head.bias},
        beta1=config.beta1,
        beta2=config.beta2,
        eps=config.eps,
        weight_decay=config.weight_decay,
    )
    n = len(train_ex)
    steps_per_epoch = math.ceil(n / config.batch_size)
    warmup_steps = config.warmup_epochs * steps_per_epoch
    global_step = 0
    best_score = -math.inf
    best_params = None
    best_epoch: Optional[int] = None
    since_best = 0
    trace = []
    for epoch in range(1, config.max_epochs + 1):
        order = shuffle_rng.permutation(n)
        epoch_loss = 0.0
        for batch_no, start in enumerate(range(0, n, config.batch_size)):
            rows = order[start : start + config.batch_size]
            Xb = X[rows]
            if config.dropout_p > 0:
                keep = dropout_rng.random(Xb.shape) >= config.dropout_p
                Xb = Xb * keep / (1.0 - config.dropout_p)
            loss, dW, db, _ = head_loss_and_grads(
                head.weights, head.bias, Xb, Y[rows], config.activation
            )
            _check_finite(loss, epoch, batch_no)
            global_step += 1
            adam.step({"w": dW, "b": db}, _lr_at(config, global_step, warmup_steps))
            epoch_loss += loss
        entry = {"epoch": epoch, "train_loss": epoch_loss / steps_per_epoch}
        if val_ex:
            rows = _predict_rows(head.weights, head.bias, X_val, label_order, config.activation)
            predictions = {ex.inst_id: pred for ex, pred in zip(val_ex, rows)}
            score = _selection(val_ex, predictions)
            entry["val_score"] = score
            if score is not None and score > best_score:
                best_score = score
                best_params = (head.weights.copy(), head.bias.copy())
                best_epoch = epoch
                since_best = 0
            else:
                since_best += 1
        trace.append(entry)
        if val_ex and since_best >= config.patience:
            break
    if best_params is not None:
        head.weights, head.bias = best_params
    return head, trace, best_epoch


def _embed_rows(tokens, vocab_index, emb_matrix, word_vectors, max_len):
    tokens = tokens[:max_len]
    rows = np.empty((len(tokens), emb_matrix.shape[1] if emb_matrix is not None else word_vectors.dim))
    ids = np.full(len(tokens), -1, dtype=np.int64)
    for i, tok in enumerate(tokens):
        if emb_matrix is not None and tok in vocab_index:
            ids[i] = vocab_index[tok]
            rows[i] = emb_matrix[ids[i]]
        else:
            rows[i] = word_vectors.lookup(tok)
    return rows, ids


def _train_cnn(train_ex, val_ex, word_vectors, config, seed):
    encoder = init_encoder_seeded(word_vectors.dim, config, seed)
    keys = _head_keys(train_ex, config)
    heads: dict = {}
    for key in keys:
        label_order = label_order_for(key[0], key[1], config.shared_head)
        head_config = HeadConfig(
            dataset_id=key[0], modal=key[1], label_order=label_order,
            activation=config.activation,
        )
        heads[key] = init_head(head_config, cnn_mod.OUTPUT_DIM, derive_rng(seed, key[0], key[1], "init"))

    vocab_index: dict[str, int] = {}
    emb_matrix = None
    if config.train_word_vectors:
        vocab = sorted({tok for ex in train_ex for tok in ex.tokens[: config.max_sentence_length]})
        vocab_index = {tok: i for i, tok in enumerate(vocab)}
        emb_matrix = np.stack([word_vectors.lookup(tok) for tok in vocab]).astype(np.float64)

    params: dict[str, np.ndarray] = dict(encoder.params())
    for key in keys:
        params[f"head:{_key_name(key)}:w"] = heads[key].weights
        params[f"head:{_key_name(key)}:b"] = heads[key].bias
    if emb_matrix is not None:
        params["emb"] = emb_matrix
    adam = Adam(
        params, beta1=config.beta1, beta2=config.beta2, eps=config.eps,
        weight_decay=config.weight_decay,
    )

    shuffle_rng = derive_rng(seed, "cnn", "shuffle")
    dropout_rng = derive_rng(seed, "cnn", "dropout")
    key_of = {
        ex.inst_id: (ex.dataset_id, None if config.shared_head else ex.modal) for ex in train_ex
    }
    targets = {}
    for key in keys:
        members = [ex for ex in train_ex if key_of[ex.inst_id] == key]
        Y = _target_matrix(members, heads[key].config.label_order, config.activation)
        for row, ex in enumerate(members):
            targets[ex.inst_id] = Y[row]

    n = len(train_ex)
    steps_per_epoch = math.ceil(n / config.batch_size)
    warmup_steps = config.warmup_epochs * steps_per_epoch
    global_step = 0
    best_score = -math.inf
    best_params = None
    best_epoch: Optional[int] = None
    since_best = 0
    trace = []

    def forward_example(ex, train_mode: bool):
        X, ids = _embed_rows(ex.tokens, vocab_index, emb_matrix, word_vectors,
                             config.max_sentence_length)
        enc, cache = cnn_mod.encode(encoder, X, want_cache=True)
        mask = None
        if train_mode and config.dropout_p > 0:
            mask = (dropout_rng.random(enc.shape) >= config.dropout_p) / (1.0 - config.dropout_p)
            enc = enc * mask
        return X, ids, enc, cache, mask

    for epoch in range(1, config.max_epochs + 1):
        order = shuffle_rng.permutation(n)
        epoch_loss = 0.0
        for batch_no, start in enumerate(range(0, n, config.batch_size)):
            batch = [train_ex[i] for i in order[start : start + config.batch_size]]
            B = len(batch)
            grads: dict[str, np.ndarray] = {}
            batch_loss = 0.0
            for ex in batch:
                key = key_of[ex.inst_id]
                head = heads[key]
                X, ids, enc, cache, mask = forward_example(ex, train_mode=True)
                y = targets[ex.inst_id]
                loss, dW, db, dh = head_loss_and_grads(
                    head.weights, head.bias, enc[None, :], y[None, :], config.activation
                )
                batch_loss += loss / B
                cnn_mod.accumulate(grads, {f"head:{_key_name(key)}:w": dW / B,
                                           f"head:{_key_name(key)}:b": db / B})
                d_enc = dh[0] / B
                if mask is not None:
                    d_enc = d_enc * mask
                enc_grads, dX = cnn_mod.backward(
                    encoder, cache, d_enc, want_dx=emb_matrix is not None
                )
                cnn_mod.accumulate(grads, enc_grads)
                if emb_matrix is not None:
                    d_emb = np.zeros_like(emb_matrix)
                    used = ids >= 0
                    np.add.at(d_emb, ids[used], dX[: len(ids)][used])
                    cnn_mod.accumulate(grads, {"emb": d_emb})
            _check_finite(batch_loss, epoch, batch_no)
            global_step += 1
            adam.step(grads, _lr_at(config, global_step, warmup_steps))
            epoch_loss += batch_loss
        entry = {"epoch": epoch, "train_loss": epoch_loss / steps_per_epoch}
        if val_ex:
            predictions = {}
            for ex in val_ex:
                key = (ex.dataset_id, None if config.shared_head else ex.modal)
                head = heads.get(key)
                if head is None:
                    continue
                _, _, enc, _, _ = forward_example(ex, train_mode=False)
                Z = head.weights @ enc + head.bias
                S = sigmoid(Z) if config.activation == "sigmoid" else softmax(Z)
                predictions[ex.inst_id] = decide(S, head.config.label_order, config.activation)
            scored = [ex for ex in val_ex if ex.inst_id in predictions]
            score = _selection(scored, predictions) if scored else None
            entry["val_score"] = score
            if score is not None and score > best_score:
                best_score = score
                best_params = (
                    {s: encoder.filters[s].copy() for s in cnn_mod.REGION_SIZES},
                    {s: encoder.biases[s].copy() for s in cnn_mod.REGION_SIZES},
                    {key: (heads[key].weights.copy(), heads[key].bias.copy()) for key in keys},
                    emb_matrix.copy() if emb_matrix is not None else None,
                )
                best_epoch = epoch
                since_best = 0
            else:
                since_best += 1
        trace.append(entry)
        if val_ex and since_best >= config.patience:
            break

    if best_params is not None:
        filters, biases, head_params, best_emb = best_params
        for s in cnn_mod.REGION_SIZES:
            encoder.filters[s][...] = filters[s]
            encoder.biases[s][...] = biases[s]
        for key in keys:
            heads[key].weights[...] = head_params[key][0]
            heads[key].bias[...] = head_params[key][1]
        if best_emb is not None:
            emb_matrix[...] = best_emb

    trained_vectors = None
    if emb_matrix is not None:
        trained_vectors = {tok: emb_matrix[i].copy() for tok, i in vocab_index.items()}
    return encoder, heads, trained_vectors, trace, best_epoch


def init_encoder_seeded(embed_dim: int, config: TrainConfig, seed: int):
    return cnn_mod.init_encoder(embed_dim, config.dropout_p, derive_rng(seed, "encoder", "init"))


def train_model(
    kind: str,
    train_set: list[TrainExample],
    val_set: list[TrainExample],
    sidecar=None,
    word_vectors=None,
    config: Optional[TrainConfig] = None,
    seed: int = 0,
) -> tuple[ModelBundle, TrainingTrace]:
    """Train one model of the given kind; deterministic for a fixed seed."""
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    if not train_set:
        raise TrainingError("empty training set")
    config = config or TrainConfig.defaults_for(kind)
    trace = TrainingTrace()

    if kind == "majority":
        bundle = train_majority(train_set, config, seed)
        for key in bundle.heads:
            trace.best_epochs[_key_name(key)] = None
        return bundle, trace

    if kind == "cnn":
        if word_vectors is None:
            raise DataError("cnn training requires word vectors")
        encoder, heads, trained_vectors, joint_trace, best_epoch = _train_cnn(
            train_set, val_set, word_vectors, config, seed
        )
        bundle = ModelBundle(
            kind=kind, config=config, seed=seed, heads=dict(heads), encoder=encoder,
            trained_vectors=trained_vectors,
        )
        trace.per_head["joint"] = joint_trace
        trace.best_epochs["joint"] = best_epoch
        return bundle, trace

    if sidecar is None:
        raise DataError(f"model kind {kind!r} requires an embedding sidecar")
    bundle = ModelBundle(kind=kind, config=config, seed=seed)
    val_by_key: dict = {}
    for ex in val_set:
        val_by_key.setdefault((ex.dataset_id, None if config.shared_head else ex.modal), []).append(ex)
    for key in _head_keys(train_set, config):
        members = [
            ex
            for ex in train_set
            if (ex.dataset_id, None if config.shared_head else ex.modal) == key
        ]
        head, head_trace, best_epoch = _train_linear_head(
            key, kind, members, val_by_key.get(key, []), sidecar, config, seed
        )
        bundle.heads[key] = head
        trace.per_head[_key_name(key)] = head_trace
        trace.best_epochs[_key_name(key)] = best_epoch
    return bundle, trace
