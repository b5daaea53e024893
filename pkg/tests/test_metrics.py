import numpy as np
import pytest

from mistkit import metrics, scheme

from oracles import (
    ORACLE_VALID,
    accuracy_oracle,
    f1_oracle,
    macro_f1_oracle,
    selection_oracle,
    weighted_f1_oracle,
)


def random_sets(rng, n, labels, allow_empty_gold=False):
    def one(allow_empty):
        size = int(rng.integers(0 if allow_empty else 1, len(labels) + 1))
        if size == 0:
            return frozenset()
        picked = rng.choice(len(labels), size=size, replace=False)
        return frozenset(labels[i] for i in picked)

    preds = [one(True) for _ in range(n)]
    golds = [one(allow_empty_gold) for _ in range(n)]
    return preds, golds


def test_per_label_f1_perfect():
    golds = [frozenset({"feasibility"})] * 4 + [frozenset({"options"})] * 6
    assert metrics.per_label_f1(golds, golds, "feasibility") == 1.0


def test_per_label_f1_hand_value():
    # tp=2, fp=1, fn=1
    preds = [{"a"}, {"a"}, {"a"}, set()]
    golds = [{"a"}, {"a"}, set(), {"a"}]
    assert metrics.per_label_f1(preds, golds, "a") == pytest.approx(2 * 2 / 6)


def test_per_label_f1_zero_division_convention():
    preds = [frozenset(), frozenset()]
    golds = [frozenset({"x"}), frozenset()]
    assert metrics.per_label_f1(preds, golds, "absent") == 0.0


def test_per_label_f1_symmetric_in_arguments():
    rng = np.random.default_rng(2)
    labels = ["a", "b", "c"]
    for _ in range(100):
        preds, golds = random_sets(rng, int(rng.integers(1, 9)), labels)
        for lab in labels:
            assert metrics.per_label_f1(preds, golds, lab) == pytest.approx(
                metrics.per_label_f1(golds, preds, lab)
            )


def test_length_mismatch_rejected():
    with pytest.raises(ValueError, match="length"):
        metrics.per_label_f1([frozenset()], [], "a")


MUST_FIXTURE_GOLDS = (
    [frozenset({"deontic"})] * 8 + [frozenset({"inference"})] + [frozenset({"rhetorical"})]
)
MUST_FIXTURE_PREDS = [frozenset({"deontic"})] * 10


def test_macro_f1_must_fixture():
    value = metrics.macro_f1(MUST_FIXTURE_PREDS, MUST_FIXTURE_GOLDS, "must")
    assert value == pytest.approx((2 * 8 / (10 + 8)) / 3)
    assert value == pytest.approx(0.2963, abs=5e-5)


def test_macro_f1_perfect_is_one():
    golds = [frozenset({lab}) for lab in scheme.ordered_valid_labels("must")]
    assert metrics.macro_f1(golds, golds, "must") == 1.0


def test_global_accuracy_must_fixture():
    value = metrics.global_accuracy(MUST_FIXTURE_PREDS, MUST_FIXTURE_GOLDS, "must")
    assert value == pytest.approx(26 / 30)


def test_global_accuracy_of_empty_predictor_counts_gold_absent_cells():
    rng = np.random.default_rng(8)
    labels = list(scheme.ordered_valid_labels("may"))
    _, golds = random_sets(rng, 20, labels)
    preds = [frozenset()] * 20
    absent = sum(1 for g in golds for lab in labels if lab not in g)
    assert metrics.global_accuracy(preds, golds, "may") == pytest.approx(
        absent / (20 * len(labels))
    )


def test_weighted_f1_single_support():
    preds = [{"deontic"}] * 3 + [{"inference"}]
    golds = [{"deontic"}] * 4
    # all gold mass on deontic: weighted F1 equals that label's F1 (tp=3, fn=1)
    assert metrics.weighted_f1(preds, golds, "must") == pytest.approx(6 / 7)


def test_weighted_f1_hand_weighting():
    # supports 4 and 1, F1s 1.0 and 0.0 -> 0.8
    preds = [{"deontic"}] * 4 + [{"deontic"}]
    golds = [{"deontic"}] * 4 + [{"inference"}]
    f1_deo = metrics.per_label_f1(preds, golds, "deontic")
    f1_inf = metrics.per_label_f1(preds, golds, "inference")
    assert f1_deo == pytest.approx(8 / 9)
    assert f1_inf == 0.0
    expected = (4 * f1_deo + 1 * f1_inf) / 5
    assert metrics.weighted_f1(preds, golds, "must") == pytest.approx(expected)


def test_weighted_f1_zero_support_is_error():
    with pytest.raises(ValueError, match="no gold"):
        metrics.weighted_f1([frozenset()], [frozenset()], "must")


def test_selection_score_reductions():
    preds_a = [{"deontic"}] * 4
    golds_a = [{"deontic"}] * 4
    cells = {("must", "CL"): (preds_a, golds_a)}
    assert metrics.selection_score(cells) == pytest.approx(1.0)
    preds_b = [{"deontic"}, {"inference"}]
    golds_b = [{"inference"}, {"inference"}]
    cells[("must", "MS")] = (preds_b, golds_b)
    wf = metrics.weighted_f1(preds_b, golds_b, "must")
    assert metrics.selection_score(cells) == pytest.approx((1.0 + wf) / 2)


def test_selection_score_skips_empty_cells_errors_on_all_empty():
    cells = {("must", "CL"): ([], [])}
    with pytest.raises(ValueError, match="empty"):
        metrics.selection_score(cells)


def test_permutation_invariance():
    rng = np.random.default_rng(12)
    labels = list(scheme.ordered_valid_labels("could"))
    preds, golds = random_sets(rng, 12, labels)
    perm = rng.permutation(12)
    p2 = [preds[i] for i in perm]
    g2 = [golds[i] for i in perm]
    assert metrics.macro_f1(preds, golds, "could") == pytest.approx(
        metrics.macro_f1(p2, g2, "could")
    )
    assert metrics.weighted_f1(preds, golds, "could") == pytest.approx(
        metrics.weighted_f1(p2, g2, "could")
    )


def test_macro_f1_bounded_by_best_label():
    rng = np.random.default_rng(4)
    labels = list(scheme.ordered_valid_labels("can"))
    for _ in range(50):
        preds, golds = random_sets(rng, int(rng.integers(1, 9)), labels)
        macro = metrics.macro_f1(preds, golds, "can")
        best = max(metrics.per_label_f1(preds, golds, lab) for lab in labels)
        assert 0.0 <= macro <= best + 1e-12


def test_oracle_equivalence_property():
    """Large randomized equivalence sweep against the brute-force oracle."""
    rng = np.random.default_rng(99)
    modals = list(scheme.MODALS)
    for _ in range(1000):
        modal = modals[int(rng.integers(0, len(modals)))]
        labels = list(ORACLE_VALID[modal])
        n = int(rng.integers(1, 9))
        preds, golds = random_sets(rng, n, labels)
        got = metrics.macro_f1(preds, golds, modal)
        assert abs(got - macro_f1_oracle(preds, golds, modal)) < 1e-12
        got = metrics.global_accuracy(preds, golds, modal)
        assert abs(got - accuracy_oracle(preds, golds, modal)) < 1e-12
        if any(set(g) & set(labels) for g in golds):
            got = metrics.weighted_f1(preds, golds, modal)
            assert abs(got - weighted_f1_oracle(preds, golds, modal)) < 1e-12
        for lab in labels:
            assert (
                abs(metrics.per_label_f1(preds, golds, lab) - f1_oracle(preds, golds, lab))
                < 1e-12
            )


def test_selection_oracle_equivalence():
    rng = np.random.default_rng(101)
    for _ in range(200):
        cells = {}
        for modal in ("must", "can"):
            for domain in ("CL", "MS"):
                if rng.random() < 0.2:
                    continue
                labels = list(ORACLE_VALID[modal])
                preds, golds = random_sets(rng, int(rng.integers(1, 6)), labels)
                cells[(modal, domain)] = (preds, golds)
        if not cells:
            continue
        assert abs(metrics.selection_score(cells) - selection_oracle(cells)) < 1e-12
