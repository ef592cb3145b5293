"""Confusion matrices and the derived accuracy/precision/sensitivity/F1
report, with macro (unweighted) class averages, all in percent.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass
class ConfusionMatrix:
    """counts[i, j] = clips of true class i predicted as class j."""

    counts: np.ndarray
    class_names: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise ValueError(f"confusion matrix must be square, got {self.counts.shape}")
        if (self.counts < 0).any():
            raise ValueError("confusion matrix counts must be non-negative")
        if not self.class_names:
            self.class_names = [f"class{i}" for i in range(self.counts.shape[0])]
        if len(self.class_names) != self.counts.shape[0]:
            raise ValueError("class name count does not match matrix size")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class ClassMetrics:
    name: str
    precision: float | None
    sensitivity: float | None
    f1: float | None
    support: int


@dataclass
class MetricsReport:
    per_class: list[ClassMetrics]
    accuracy: float
    macro_precision: float | None
    macro_sensitivity: float | None
    macro_f1: float | None


def _percent(num: float, den: float) -> float | None:
    return None if den == 0 else 100.0 * num / den


def _macro(values: list[float | None], what: str) -> float | None:
    defined = [v for v in values if v is not None]
    if len(defined) < len(values):
        warnings.warn(
            f"{what}: {len(values) - len(defined)} class(es) undefined "
            f"(zero denominator); excluded from the macro average",
            stacklevel=3,
        )
    return sum(defined) / len(defined) if defined else None


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    """One-vs-rest metrics per class plus overall accuracy.

    accuracy    = (TP + TN) / (TP + TN + FP + FN)  over all clips
    precision   = TP / (TP + FP)
    sensitivity = TP / (TP + FN)
    F1          = TP / (TP + (FP + FN) / 2)

    Zero-denominator cases are reported as undefined (None) and left
    out of the macro averages with a warning.
    """
    if cm.total == 0:
        raise ValueError("metrics: empty confusion matrix")
    counts = cm.counts
    per_class = []
    for k, name in enumerate(cm.class_names):
        tp = float(counts[k, k])
        fp = float(counts[:, k].sum() - counts[k, k])
        fn = float(counts[k, :].sum() - counts[k, k])
        per_class.append(
            ClassMetrics(
                name=name,
                precision=_percent(tp, tp + fp),
                sensitivity=_percent(tp, tp + fn),
                f1=_percent(tp, tp + (fp + fn) / 2.0),
                support=int(counts[k, :].sum()),
            )
        )
    return MetricsReport(
        per_class=per_class,
        accuracy=100.0 * float(np.trace(counts)) / cm.total,
        macro_precision=_macro([c.precision for c in per_class], "precision"),
        macro_sensitivity=_macro([c.sensitivity for c in per_class], "sensitivity"),
        macro_f1=_macro([c.f1 for c in per_class], "F1"),
    )


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def format_report(report: MetricsReport, fmt: str = "text") -> str:
    """Render the report; 'text' is the standard benchmark-table layout
    (Accuracy / Precision / Sensitivity / F1, percent, 2 decimals),
    'machine' emits JSON."""
    if fmt == "machine":
        payload = {
            "accuracy": report.accuracy,
            "macro": {
                "precision": report.macro_precision,
                "sensitivity": report.macro_sensitivity,
                "f1": report.macro_f1,
            },
            "classes": [
                {
                    "label": c.name,
                    "precision": c.precision,
                    "sensitivity": c.sensitivity,
                    "f1": c.f1,
                    "support": c.support,
                }
                for c in report.per_class
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)
    if fmt != "text":
        raise ValueError(f"format_report: unknown format {fmt!r}")
    width = max([len("Average")] + [len(c.name) for c in report.per_class]) + 2
    header = (
        f"{'Label':<{width}}{'Accuracy [%]':>14}{'Precision [%]':>15}"
        f"{'Sensitivity [%]':>17}{'F1-Score [%]':>14}"
    )
    lines = [header, "-" * len(header)]
    for c in report.per_class:
        lines.append(
            f"{c.name:<{width}}{'n/a':>14}{_fmt(c.precision):>15}"
            f"{_fmt(c.sensitivity):>17}{_fmt(c.f1):>14}"
        )
    lines.append(
        f"{'Average':<{width}}{_fmt(report.accuracy):>14}"
        f"{_fmt(report.macro_precision):>15}{_fmt(report.macro_sensitivity):>17}"
        f"{_fmt(report.macro_f1):>14}"
    )
    return "\n".join(lines)
