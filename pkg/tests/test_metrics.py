"""Metric arithmetic against the published table values and an
independent one-vs-rest recount oracle."""
import numpy as np
import pytest

from fallgcn.metrics import ConfusionMatrix, format_report, metrics


def test_ur_fall_table_reproduced():
    # 15 falls (13 caught), 220 non-falls (all caught): reproduces the
    # published per-class row set exactly
    cm = ConfusionMatrix(counts=np.array([[13, 2], [0, 220]]),
                         class_names=["fall", "nonfall"])
    rep = metrics(cm)
    fall, nonfall = rep.per_class
    assert fall.precision == pytest.approx(100.0, abs=0.005)
    assert fall.sensitivity == pytest.approx(86.67, abs=0.005)
    assert fall.f1 == pytest.approx(92.86, abs=0.005)
    assert nonfall.precision == pytest.approx(99.10, abs=0.005)
    assert nonfall.sensitivity == pytest.approx(100.0, abs=0.005)
    assert nonfall.f1 == pytest.approx(99.55, abs=0.005)
    assert rep.accuracy == pytest.approx(99.15, abs=0.005)
    assert rep.macro_precision == pytest.approx(99.55, abs=0.005)
    assert rep.macro_sensitivity == pytest.approx(93.33, abs=0.005)
    assert rep.macro_f1 == pytest.approx(96.20, abs=0.05)


def test_imvia_style_per_class_cells():
    cm = ConfusionMatrix(counts=np.array([[158, 9], [4, 3496]]),
                         class_names=["fall", "nonfall"])
    rep = metrics(cm)
    fall, nonfall = rep.per_class
    assert fall.precision == pytest.approx(97.53, abs=0.005)
    assert fall.sensitivity == pytest.approx(94.61, abs=0.005)
    assert fall.f1 == pytest.approx(96.05, abs=0.005)
    assert nonfall.precision == pytest.approx(99.74, abs=0.005)
    assert nonfall.sensitivity == pytest.approx(99.89, abs=0.005)
    assert nonfall.f1 == pytest.approx(99.81, abs=0.005)
    assert rep.macro_f1 == pytest.approx(97.93, abs=0.005)


def test_basic_accuracy_formula():
    # TP=3, TN=5, FP=1, FN=1 -> 80%
    cm = ConfusionMatrix(counts=np.array([[3, 1], [1, 5]]))
    assert metrics(cm).accuracy == pytest.approx(80.0)


def test_formulas_match_independent_recount():
    rng = np.random.default_rng(0)
    for _ in range(100):
        k = int(rng.integers(2, 6))
        counts = rng.integers(0, 40, size=(k, k))
        if counts.sum() == 0:
            counts[0, 0] = 1
        rep = metrics(ConfusionMatrix(counts=counts))
        total = counts.sum()
        assert rep.accuracy == pytest.approx(100.0 * np.trace(counts) / total)
        for c_idx, cls in enumerate(rep.per_class):
            tp = counts[c_idx, c_idx]
            fp = sum(counts[r, c_idx] for r in range(k) if r != c_idx)
            fn = sum(counts[c_idx, c] for c in range(k) if c != c_idx)
            tn = total - tp - fp - fn
            assert tp + tn + fp + fn == total
            if tp + fp:
                assert cls.precision == pytest.approx(100.0 * tp / (tp + fp))
            else:
                assert cls.precision is None
            if tp + fn:
                assert cls.sensitivity == pytest.approx(100.0 * tp / (tp + fn))
            else:
                assert cls.sensitivity is None
            if tp + fp + fn:
                assert cls.f1 == pytest.approx(100.0 * tp / (tp + (fp + fn) / 2))
            else:
                assert cls.f1 is None


def test_undefined_classes_excluded_from_macro_with_warning():
    # class 1 never occurs and is never predicted
    counts = np.array([[5, 0, 1], [0, 0, 0], [2, 0, 7]])
    with pytest.warns(UserWarning, match="undefined"):
        rep = metrics(ConfusionMatrix(counts=counts))
    assert rep.per_class[1].sensitivity is None
    assert rep.per_class[1].precision is None
    defined_prec = [c.precision for c in rep.per_class if c.precision is not None]
    assert rep.macro_precision == pytest.approx(sum(defined_prec) / len(defined_prec))


def test_f1_between_precision_and_sensitivity():
    rng = np.random.default_rng(1)
    for _ in range(50):
        counts = rng.integers(1, 30, size=(3, 3))
        rep = metrics(ConfusionMatrix(counts=counts))
        for cls in rep.per_class:
            if cls.precision is not None and cls.sensitivity is not None:
                lo = min(cls.precision, cls.sensitivity)
                hi = max(cls.precision, cls.sensitivity)
                assert lo - 1e-9 <= cls.f1 <= hi + 1e-9


def test_balanced_two_class_accuracy_equals_mean_ovr_accuracy():
    # balanced binary case: one-vs-rest accuracy is identical per class
    counts = np.array([[40, 10], [5, 45]])
    rep = metrics(ConfusionMatrix(counts=counts))
    total = counts.sum()
    ovr = []
    for k in range(2):
        tp = counts[k, k]
        fp = counts[1 - k, k]
        fn = counts[k, 1 - k]
        tn = total - tp - fp - fn
        ovr.append(100.0 * (tp + tn) / total)
    assert rep.accuracy == pytest.approx(sum(ovr) / 2)
    # and a 3-class counterexample where the equality fails
    counts3 = np.array([[10, 5, 0], [0, 20, 0], [0, 0, 30]])
    rep3 = metrics(ConfusionMatrix(counts=counts3))
    ovr3 = []
    for k in range(3):
        tp = counts3[k, k]
        fp = counts3[:, k].sum() - tp
        fn = counts3[k, :].sum() - tp
        tn = counts3.sum() - tp - fp - fn
        ovr3.append(100.0 * (tp + tn) / counts3.sum())
    assert rep3.accuracy != pytest.approx(sum(ovr3) / 3)


def test_empty_matrix_errors():
    with pytest.raises(ValueError, match="empty"):
        metrics(ConfusionMatrix(counts=np.zeros((2, 2), dtype=int)))


def test_text_report_columns_and_rounding():
    cm = ConfusionMatrix(counts=np.array([[13, 2], [0, 220]]),
                         class_names=["fall", "nonfall"])
    text = format_report(metrics(cm), "text")
    lines = text.splitlines()
    assert "Accuracy [%]" in lines[0] and "F1-Score [%]" in lines[0]
    assert "100.00" in text and "86.67" in text and "92.86" in text
    assert lines[-1].startswith("Average")
    assert "99.15" in lines[-1]


def test_machine_report_is_json():
    import json

    cm = ConfusionMatrix(counts=np.array([[3, 1], [1, 5]]))
    payload = json.loads(format_report(metrics(cm), "machine"))
    assert payload["accuracy"] == pytest.approx(80.0)
    assert len(payload["classes"]) == 2
