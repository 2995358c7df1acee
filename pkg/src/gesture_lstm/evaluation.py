"""Confusion matrices, hit rates and report tables.

Sessions are scored slot by slot: the j-th true gesture is compared with
the j-th recognised one. When decoding yields fewer than k gestures (the
label path holds too few distinct classes) the leftover slots are counted
as misses; they stay in the row totals but fall in no class column.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import SENSOR_MASKS, apply_mask
from .decoder import DecodeError, Recognition, map_decode
from .pipeline import label_path

MASK_TITLES = {"accel": "accelerometer", "gyro": "gyroscope", "both": "both"}


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # (Q, Q) int, row = true class, column = predicted
    missed: np.ndarray  # (Q,) int, slots of class i left without a prediction

    @classmethod
    def empty(cls, Q):
        return cls(np.zeros((Q, Q), dtype=np.int64), np.zeros(Q, dtype=np.int64))

    @property
    def num_classes(self):
        return self.counts.shape[0]

    @property
    def row_totals(self):
        return self.counts.sum(axis=1) + self.missed

    @property
    def percentages(self):
        totals = self.row_totals[:, None]
        return np.where(totals > 0, 100.0 * self.counts / np.maximum(totals, 1), 0.0)

    @property
    def hit_rates(self):
        return np.diag(self.percentages).copy()

    @property
    def correct(self):
        return int(np.trace(self.counts))

    @property
    def total(self):
        return int(self.row_totals.sum())

    @property
    def accuracy(self):
        return self.correct / self.total if self.total else 0.0


@dataclass
class EvalReport:
    confusion: ConfusionMatrix
    session_exact_match: float
    n_sessions: int
    ablation: dict = field(default_factory=dict)  # mask -> EvalReport

    @property
    def hit_rate(self):
        return self.confusion.hit_rates

    @property
    def accuracy(self):
        return self.confusion.accuracy

    def to_dict(self):
        cm = self.confusion
        d = {
            "confusion_counts": cm.counts.tolist(),
            "missed": cm.missed.tolist(),
            "confusion_pct": [[round(v, 2) for v in row] for row in cm.percentages.tolist()],
            "hit_rate": [round(v, 2) for v in cm.hit_rates.tolist()],
            "accuracy": self.accuracy,
            "session_exact_match": self.session_exact_match,
            "n_gestures": cm.total,
            "n_sessions": self.n_sessions,
        }
        if self.ablation:
            d["ablation"] = {m: r.to_dict() for m, r in self.ablation.items()}
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


def score_sessions(predictions, truths, num_classes=6):
    """Score recognised gesture lists against ground truth, position by position.

    ``predictions`` holds Recognition objects or plain class sequences, which
    may be shorter than their truth (missing slots count as misses) but
    never longer.
    """
    if len(predictions) != len(truths):
        raise ValueError(
            f"{len(predictions)} predictions for {len(truths)} ground-truth sessions"
        )
    cm = ConfusionMatrix.empty(num_classes)
    exact = 0
    for n, (pred, truth) in enumerate(zip(predictions, truths)):
        pred = tuple(pred.R if isinstance(pred, Recognition) else pred)
        truth = tuple(truth)
        if len(pred) > len(truth):
            raise ValueError(
                f"session {n}: {len(pred)} recognised gestures for k={len(truth)}"
            )
        for j, true_cls in enumerate(truth):
            if j < len(pred):
                cm.counts[true_cls - 1, pred[j] - 1] += 1
            else:
                cm.missed[true_cls - 1] += 1
        exact += pred == truth
    rate = exact / len(truths) if truths else 0.0
    return EvalReport(cm, rate, len(truths))


def decode_best_effort(A, k):
    """map_decode, falling back to as many gestures as the path supports."""
    try:
        return map_decode(A, k)
    except DecodeError:
        return map_decode(A, min(k, A.distinct))


def evaluate(params, output, sequences, truths, mask="both"):
    preds = []
    for seq, truth in zip(sequences, truths, strict=True):
        x = apply_mask(getattr(seq, "x", seq), mask)
        preds.append(decode_best_effort(label_path(params, output, x), len(truth)))
    return score_sessions(preds, truths, output.num_classes)


def ablation_report(params, output, sequences, truths, masks=SENSOR_MASKS):
    """Evaluate one model on the test set with each sensor mask applied."""
    reports = {m: evaluate(params, output, sequences, truths, m) for m in masks}
    base = reports.get("both") or next(iter(reports.values()))
    return EvalReport(base.confusion, base.session_exact_match, base.n_sessions, reports)


def _row(label, values, width):
    return f"{label:<{width}}" + "".join(f"{v:>10}" for v in values)


def render_confusion(report):
    cm = report.confusion
    Q = cm.num_classes
    heads = [f"Gest. {i}" for i in range(1, Q + 1)]
    show_miss = bool(cm.missed.any())
    if show_miss:
        heads.append("miss")
    lines = ["Confusion matrix (% of true-class row)", _row("", heads, 10)]
    pct = cm.percentages
    totals = cm.row_totals
    for i in range(Q):
        vals = [f"{v:.2f}" for v in pct[i]]
        if show_miss:
            miss = 100.0 * cm.missed[i] / totals[i] if totals[i] else 0.0
            vals.append(f"{miss:.2f}")
        lines.append(_row(f"Gest. {i + 1}", vals, 10))
    return "\n".join(lines)


def render_hit_rates(rows, Q):
    """Table of H_i per row; ``rows`` is a list of (title, hit-rate array)."""
    width = max([10] + [len(t) + 2 for t, _ in rows])
    lines = [_row("", [f"H_{i}" for i in range(1, Q + 1)], width)]
    for title, rates in rows:
        lines.append(_row(title, [f"{v:.2f}" for v in rates], width))
    return "\n".join(lines)


def render_report(report):
    cm = report.confusion
    parts = [
        render_confusion(report),
        "",
        "Hit rate (%)",
        render_hit_rates([("", cm.hit_rates)], cm.num_classes),
        "",
        f"accuracy            {100.0 * report.accuracy:.2f}%  ({cm.correct}/{cm.total})",
        f"session exact match {100.0 * report.session_exact_match:.2f}%  "
        f"({report.n_sessions} sessions)",
    ]
    if report.ablation:
        parts += ["", render_ablation(report)]
    return "\n".join(parts) + "\n"


def render_ablation(report):
    rows = [(MASK_TITLES[m], r.hit_rate) for m, r in report.ablation.items()]
    Q = report.confusion.num_classes
    return "Hit rate (%) by sensor set\n" + render_hit_rates(rows, Q)


def render_sweep(results):
    """Accuracy per hidden dimension; ``results`` is a list of (H, EvalReport)."""
    lines = [
        "Accuracy by hidden dimension",
        f"{'hidden':<8}{'accuracy':>10}{'session exact':>16}",
    ]
    for H, rep in results:
        lines.append(
            f"{H:<8}{100.0 * rep.accuracy:>9.2f}%{100.0 * rep.session_exact_match:>15.2f}%"
        )
    return "\n".join(lines) + "\n"
