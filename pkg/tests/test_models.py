import json

import numpy as np
import pytest

from mistkit import scheme
from mistkit.errors import MissingEmbeddingError, TrainingError
from mistkit.features import EmbeddingSidecar, WordVectorTable
from mistkit.models import (
    TrainConfig,
    TrainExample,
    forward_head,
    from_json,
    predict,
    to_json,
    train_majority,
    train_model,
)
from mistkit.models import cnn as cnn_mod
from mistkit.models.bundle import decide, sidecar_input
from mistkit.models.heads import (
    HeadConfig,
    LinearHead,
    head_loss_and_grads,
    head_scores,
    init_head,
    sigmoid,
)
from mistkit.models.train import _lr_at, derive_rng

from conftest import sidecar_for_examples


def _example(i, modal="must", gold=("deontic",), dataset_id="mist", domain="CL"):
    return TrainExample(
        inst_id=f"e{i}",
        dataset_id=dataset_id,
        modal=modal,
        domain=domain,
        gold=frozenset(gold),
        tokens=["it", modal, "hold"],
        token_index=1,
        doc_id=f"doc{i % 3}",
    )


def _head(modal="must", weights=None, bias=None, activation="sigmoid"):
    config = HeadConfig(
        dataset_id="mist",
        modal=modal,
        label_order=scheme.ordered_valid_labels(modal),
        activation=activation,
    )
    n = len(config.label_order)
    weights = np.zeros((n, 4)) if weights is None else np.asarray(weights, dtype=float)
    bias = np.zeros(n) if bias is None else np.asarray(bias, dtype=float)
    return LinearHead(config=config, weights=weights, bias=bias)


def test_zero_head_scores_half():
    head = _head()
    scores = head_scores(head, np.array([1.0, -2.0, 3.0, 0.5]))
    np.testing.assert_array_equal(scores, np.full(3, 0.5))


def test_single_label_head_hand_value():
    config = HeadConfig(dataset_id="mist", modal="must", label_order=("deontic",))
    head = LinearHead(config=config, weights=np.array([[1.0, 0.0]]), bias=np.array([0.0]))
    scores = head_scores(head, np.array([2.0, -7.0]))
    assert scores[0] == pytest.approx(0.880797, abs=1e-6)


def test_dimension_mismatch_is_error():
    head = _head()
    with pytest.raises(ValueError, match="input"):
        head_scores(head, np.zeros(8))


def test_decide_threshold_and_fallback():
    order = ("feasibility", "capability", "options", "rhetorical")
    assert decide(np.array([0.7, 0.6, 0.2, 0.1]), order, "sigmoid") == {
        "feasibility", "capability",
    }
    assert decide(np.array([0.2, 0.1, 0.4, 0.3]), order, "sigmoid") == {"options"}
    assert decide(np.array([0.2, 0.1, 0.4, 0.3]), order, "softmax") == {"options"}


def test_sigmoid_scores_open_interval_and_nonempty_predictions():
    rng = np.random.default_rng(77)
    for _ in range(100):
        config = HeadConfig(
            dataset_id="mist", modal="can", label_order=scheme.ordered_valid_labels("can")
        )
        head = init_head(config, 6, rng)
        x = rng.normal(scale=3.0, size=6)
        scores = head_scores(head, x)
        assert np.all(scores > 0.0) and np.all(scores < 1.0)
        assert decide(scores, config.label_order, "sigmoid")


def test_sidecar_input_variants():
    sidecar = EmbeddingSidecar(dim=3)
    sidecar.add("x", [1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
    np.testing.assert_allclose(sidecar_input("head_cls", sidecar, "x"), [1, 2, 3])
    np.testing.assert_allclose(sidecar_input("head_modal", sidecar, "x"), [4, 5, 6])
    np.testing.assert_allclose(
        sidecar_input("head_cls_modal", sidecar, "x"), [1, 2, 3, 4, 5, 6]
    )


def test_forward_head_missing_embedding_names_id():
    examples = [_example(0)]
    bundle, _ = train_model(
        "head_modal",
        examples,
        [],
        sidecar=sidecar_for_examples(examples, 4, np.random.default_rng(0)),
        config=TrainConfig(max_epochs=1),
        seed=1,
    )
    ghost = _example(99)
    with pytest.raises(MissingEmbeddingError, match="e99"):
        predict(bundle, ghost, sidecar=EmbeddingSidecar(dim=4))


def test_untrained_head_is_error():
    examples = [_example(i, "must", ("deontic",)) for i in range(4)]
    bundle = train_majority(examples)
    with pytest.raises(TrainingError, match="untrained"):
        predict(bundle, _example(50, "can", ("options",)))


# --- majority -----------------------------------------------------------


def test_majority_counts():
    examples = (
        [_example(i, "must", ("deontic",)) for i in range(300)]
        + [_example(300 + i, "must", ("inference",)) for i in range(50)]
        + [_example(350 + i, "must", ("rhetorical",)) for i in range(20)]
    )
    bundle = train_majority(examples)
    assert predict(bundle, examples[0]) == {"deontic"}


def test_majority_tie_lexicographic():
    examples = [_example(i, "could", ("feasibility",)) for i in range(5)] + [
        _example(5 + i, "could", ("capability",)) for i in range(5)
    ]
    bundle = train_majority(examples)
    assert predict(bundle, examples[0]) == {"capability"}


def test_majority_instance_order_invariant():
    rng = np.random.default_rng(15)
    examples = [
        _example(i, "must", (("deontic",), ("inference",))[int(rng.integers(0, 2))])
        for i in range(40)
    ]
    b1 = train_majority(examples)
    shuffled = list(examples)
    rng.shuffle(shuffled)
    b2 = train_majority(shuffled)
    assert to_json(b1) == to_json(b2)


# --- gradient checks ------------------------------------------------------


def _rel_err(a, n):
    return abs(a - n) / max(abs(a), abs(n), 1e-10)


def _fd_check(loss_fn, param, analytic, rng, n_checks=12, h=1e-5, tol=1e-4):
    flat = param.reshape(-1)
    grad = analytic.reshape(-1)
    idx = rng.choice(flat.size, size=min(n_checks, flat.size), replace=False)
    for i in idx:
        orig = flat[i]
        flat[i] = orig + h
        up = loss_fn()
        flat[i] = orig - h
        down = loss_fn()
        flat[i] = orig
        numeric = (up - down) / (2 * h)
        if abs(numeric) < 1e-8 and abs(grad[i]) < 1e-8:
            continue  # below finite-difference resolution
        assert _rel_err(grad[i], numeric) < tol, (grad[i], numeric)


@pytest.mark.parametrize("activation", ["sigmoid", "softmax"])
def test_linear_head_gradients_match_finite_differences(activation):
    rng = np.random.default_rng(123)
    for _ in range(10):
        B, D, L = int(rng.integers(1, 5)), int(rng.integers(2, 7)), int(rng.integers(2, 5))
        W = rng.normal(size=(L, D))
        b = rng.normal(size=L)
        X = rng.normal(size=(B, D))
        if activation == "sigmoid":
            Y = (rng.random((B, L)) < 0.5).astype(float)
        else:
            Y = np.zeros((B, L))
            Y[np.arange(B), rng.integers(0, L, size=B)] = 1.0
        _, dW, db, dX = head_loss_and_grads(W, b, X, Y, activation)
        loss_fn = lambda: head_loss_and_grads(W, b, X, Y, activation)[0]
        _fd_check(loss_fn, W, dW, rng)
        _fd_check(loss_fn, b, db, rng)
        _fd_check(loss_fn, X, dX, rng)


def _cnn_instance_loss(encoder, head, X, y):
    enc = cnn_mod.encode(encoder, X)
    loss, _, _, _ = head_loss_and_grads(
        head.weights, head.bias, enc[None, :], y[None, :], "sigmoid"
    )
    return loss


def test_cnn_gradients_match_finite_differences():
    rng = np.random.default_rng(321)
    for _ in range(5):
        dim = int(rng.integers(3, 6))
        encoder = cnn_mod.init_encoder(dim, 0.0, rng)
        # keep activations away from the ReLU kink at exactly 0, where central
        # differences straddle the nondifferentiable point (zero-padded windows
        # with zero biases land there exactly)
        for size in cnn_mod.REGION_SIZES:
            encoder.biases[size] = rng.normal(scale=0.3, size=cnn_mod.N_FILTERS)
        config = HeadConfig(dataset_id="mist", modal="must",
                            label_order=("inference", "deontic", "rhetorical"))
        head = init_head(config, cnn_mod.OUTPUT_DIM, rng)
        head.bias = rng.normal(scale=0.3, size=3)
        T = int(rng.integers(1, 9))
        X = rng.normal(size=(T, dim))
        y = (rng.random(3) < 0.5).astype(float)

        enc, cache = cnn_mod.encode(encoder, X, want_cache=True)
        loss, dW, db, dh = head_loss_and_grads(
            head.weights, head.bias, enc[None, :], y[None, :], "sigmoid"
        )
        grads, dX = cnn_mod.backward(encoder, cache, dh[0], want_dx=True)

        loss_fn = lambda: _cnn_instance_loss(encoder, head, X, y)
        for size in cnn_mod.REGION_SIZES:
            _fd_check(loss_fn, encoder.filters[size], grads[f"conv{size}_w"], rng)
            _fd_check(loss_fn, encoder.biases[size], grads[f"conv{size}_b"], rng)
        _fd_check(loss_fn, head.weights, dW, rng)
        _fd_check(loss_fn, head.bias, db, rng)
        padded_rows = min(T, X.shape[0])
        _fd_check(loss_fn, X, dX[:padded_rows], rng)


def test_cnn_zero_embeddings_give_pooled_relu_bias():
    rng = np.random.default_rng(9)
    encoder = cnn_mod.init_encoder(4, 0.0, rng)
    for size in cnn_mod.REGION_SIZES:
        encoder.biases[size] = rng.normal(size=cnn_mod.N_FILTERS)
    out = cnn_mod.encode(encoder, np.zeros((6, 4)))
    expected = np.concatenate(
        [np.maximum(encoder.biases[s], 0.0) for s in cnn_mod.REGION_SIZES]
    )
    np.testing.assert_allclose(out, expected)


def test_cnn_single_token_padded():
    rng = np.random.default_rng(10)
    encoder = cnn_mod.init_encoder(4, 0.0, rng)
    out = cnn_mod.encode(encoder, rng.normal(size=(1, 4)))
    assert out.shape == (cnn_mod.OUTPUT_DIM,)
    assert np.all(np.isfinite(out))


# --- training -------------------------------------------------------------


def _training_setup(rng, modals=("must", "can"), n_per=12, dim=4):
    examples = []
    i = 0
    for modal in modals:
        labels = sorted(scheme.valid_labels(modal))
        for _ in range(n_per):
            gold = frozenset([labels[int(rng.integers(0, len(labels)))]])
            examples.append(_example(i, modal, tuple(gold)))
            i += 1
    sidecar = sidecar_for_examples(examples, dim, rng)
    return examples, sidecar


def test_training_deterministic_bit_identical():
    rng = np.random.default_rng(55)
    examples, sidecar = _training_setup(rng)
    config = TrainConfig(learning_rate=1e-2, max_epochs=5, dropout_p=0.2)
    out = []
    for _ in range(2):
        bundle, _ = train_model(
            "head_cls_modal", examples, examples[:8], sidecar=sidecar,
            config=config, seed=42,
        )
        out.append(to_json(bundle))
    assert out[0] == out[1]


def test_per_modal_heads_independent_under_permutation():
    rng = np.random.default_rng(56)
    examples, sidecar = _training_setup(rng)
    config = TrainConfig(learning_rate=1e-2, max_epochs=4, dropout_p=0.1)
    bundle_a, _ = train_model("head_modal", examples, [], sidecar=sidecar,
                              config=config, seed=7)
    must = [ex for ex in examples if ex.modal == "must"]
    rest = [ex for ex in examples if ex.modal != "must"]
    permuted = must[::-1] + rest
    bundle_b, _ = train_model("head_modal", permuted, [], sidecar=sidecar,
                              config=config, seed=7)
    key = ("mist", "can")
    np.testing.assert_array_equal(
        bundle_a.heads[key].weights, bundle_b.heads[key].weights
    )
    np.testing.assert_array_equal(bundle_a.heads[key].bias, bundle_b.heads[key].bias)


def test_warmup_schedule_midpoint():
    config = TrainConfig(learning_rate=1e-3, warmup_epochs=2, batch_size=4)
    steps_per_epoch = 10
    warmup_steps = config.warmup_epochs * steps_per_epoch
    assert _lr_at(config, steps_per_epoch, warmup_steps) == pytest.approx(0.5e-3)
    assert _lr_at(config, 2 * steps_per_epoch, warmup_steps) == pytest.approx(1e-3)
    assert _lr_at(config, 5 * steps_per_epoch, warmup_steps) == pytest.approx(1e-3)
    assert _lr_at(config, 3, 0) == pytest.approx(1e-3)


def test_nan_loss_reports_epoch_and_batch():
    examples = [_example(i, "must", ("deontic",)) for i in range(4)]
    sidecar = EmbeddingSidecar(dim=2)
    for ex in examples:
        sidecar.add(ex.inst_id, [np.inf, 0.0], [0.0, 0.0])
    with np.errstate(invalid="ignore"), pytest.raises(TrainingError, match="epoch 1"):
        train_model(
            "head_cls", examples, [], sidecar=sidecar,
            config=TrainConfig(max_epochs=2, dropout_p=0.0), seed=3,
        )


def test_empty_training_set_rejected():
    with pytest.raises(TrainingError, match="empty"):
        train_model("majority", [], [], config=TrainConfig(), seed=0)


def test_bundle_json_round_trip():
    rng = np.random.default_rng(57)
    examples, sidecar = _training_setup(rng)
    bundle, _ = train_model(
        "head_cls_modal", examples, [], sidecar=sidecar,
        config=TrainConfig(learning_rate=1e-2, max_epochs=3), seed=5,
    )
    text = to_json(bundle)
    again = from_json(text)
    assert to_json(again) == text
    for ex in examples[:5]:
        assert predict(again, ex, sidecar=sidecar) == predict(bundle, ex, sidecar=sidecar)
    doc = json.loads(text)
    assert doc["kind"] == "head_cls_modal"
    assert {h["modal"] for h in doc["heads"]} == {"must", "can"}


def test_cnn_training_deterministic_and_serializable():
    rng = np.random.default_rng(58)
    vocab = {f"w{i}": rng.normal(size=6) for i in range(30)}
    table = WordVectorTable(dim=6, vectors=vocab)
    examples = []
    for i in range(16):
        modal = ("must", "can")[i % 2]
        labels = sorted(scheme.valid_labels(modal))
        tokens = [f"w{int(rng.integers(0, 30))}" for _ in range(int(rng.integers(3, 9)))]
        examples.append(
            TrainExample(
                inst_id=f"c{i}", dataset_id="mist", modal=modal, domain="CL",
                gold=frozenset([labels[i % len(labels)]]), tokens=tokens,
                token_index=0, doc_id=f"d{i % 4}",
            )
        )
    config = TrainConfig.cnn_defaults()
    config.max_epochs = 2
    texts = []
    for _ in range(2):
        bundle, _ = train_model(
            "cnn", examples, examples[:6], word_vectors=table, config=config, seed=11
        )
        texts.append(to_json(bundle))
    assert texts[0] == texts[1]
    again = from_json(texts[0])
    for ex in examples[:4]:
        assert predict(again, ex, word_vectors=table) == predict(
            from_json(texts[1]), ex, word_vectors=table
        )


def test_shared_head_covers_all_modals():
    rng = np.random.default_rng(59)
    examples, sidecar = _training_setup(rng)
    config = TrainConfig(learning_rate=1e-2, max_epochs=3, shared_head=True)
    bundle, _ = train_model("head_cls", examples, [], sidecar=sidecar, config=config, seed=2)
    assert set(bundle.heads) == {("mist", None)}
    assert bundle.heads[("mist", None)].config.label_order == scheme.LABELS
    for ex in examples[:4]:
        assert predict(bundle, ex, sidecar=sidecar)


def test_softmax_rejects_multilabel_gold():
    examples = [_example(0, "could", ("feasibility", "capability"))]
    sidecar = sidecar_for_examples(examples, 3, np.random.default_rng(1))
    with pytest.raises(TrainingError, match="single-label"):
        train_model(
            "head_cls", examples, [], sidecar=sidecar,
            config=TrainConfig(activation="softmax", max_epochs=1), seed=0,
        )


def test_derive_rng_stable():
    a = derive_rng(1, "x").integers(0, 2**32)
    b = derive_rng(1, "x").integers(0, 2**32)
    c = derive_rng(1, "y").integers(0, 2**32)
    assert a == b
    assert a != c
