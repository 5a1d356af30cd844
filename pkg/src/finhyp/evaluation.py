"""Task metrics and stratified k-fold splitting.

Predictions are ranked top-3 lists of label indices. Accuracy reads the
rank-1 entry; mean rank uses the 1-based position of the gold label in the
list, or 4 when absent; macro F1 averages per-class F1 over every configured
class, counting classes the split never saw as 0.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


def accuracy(pred_lists, gold) -> float:
    """Fraction of rows whose rank-1 prediction equals the gold label."""
    if len(pred_lists) != len(gold):
        raise ValueError("predictions and gold must align")
    if len(gold) == 0:
        raise ValueError("empty input")
    correct = sum(1 for p, g in zip(pred_lists, gold) if p[0] == g)
    return correct / len(gold)


def _rank(pred, gold_label) -> int:
    for i, p in enumerate(pred[:3]):
        if p == gold_label:
            return i + 1
    return 4


def mean_rank(pred_lists, gold) -> float:
    """Average 1-based rank of the gold label in the top-3 list, 4 if absent."""
    if len(pred_lists) != len(gold):
        raise ValueError("predictions and gold must align")
    if len(gold) == 0:
        raise ValueError("empty input")
    total = sum(_rank(p, g) for p, g in zip(pred_lists, gold))
    return total / len(gold)


def macro_f1(pred_lists, gold, n_classes: int):
    """Unweighted mean of per-class F1 over all n_classes.

    Per class, precision and recall come from rank-1 predictions; a class
    with zero precision+recall denominator contributes F1 = 0. Returns
    (macro, per-class array).
    """
    if len(pred_lists) != len(gold):
        raise ValueError("predictions and gold must align")
    tp = np.zeros(n_classes, dtype=np.int64)
    fp = np.zeros(n_classes, dtype=np.int64)
    fn = np.zeros(n_classes, dtype=np.int64)
    for p, g in zip(pred_lists, gold):
        top = p[0]
        if top == g:
            tp[g] += 1
        else:
            fp[top] += 1
            fn[g] += 1
    per_class = np.zeros(n_classes)
    for k in range(n_classes):
        denom = 2 * tp[k] + fp[k] + fn[k]
        if denom > 0:
            per_class[k] = 2 * tp[k] / denom
    return float(per_class.mean()), per_class


def confusion_matrix(pred_lists, gold, n_classes: int) -> np.ndarray:
    """Counts indexed [gold, rank-1 prediction]."""
    m = np.zeros((n_classes, n_classes), dtype=np.int64)
    for p, g in zip(pred_lists, gold):
        m[g, p[0]] += 1
    return m


def stratified_kfold(labels, k: int, seed: int) -> list[np.ndarray]:
    """k disjoint index folds with per-class counts differing by at most 1.

    Within each class the assignment order is a seeded shuffle; classes are
    processed in sorted label order and the fold offset rotates between
    classes so overall fold sizes stay balanced. Deterministic under a
    fixed seed. Classes with fewer than k members land in only some folds.
    """
    n = len(labels)
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise ValueError(f"k = {k} exceeds sample count {n}")
    groups: dict = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for lab in sorted(groups):
        idx = np.array(groups[lab])
        rng.shuffle(idx)
        for j, i in enumerate(idx):
            folds[(j + offset) % k].append(int(i))
        offset = (offset + len(idx)) % k
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


@dataclass(frozen=True)
class EvalReport:
    """Metrics of one evaluation split, serializable as text and JSON."""

    labels: tuple[str, ...]
    n: int
    accuracy: float
    mean_rank: float
    macro_f1: float
    per_class_f1: tuple[float, ...]
    confusion: tuple[tuple[int, ...], ...]

    def to_text(self) -> str:
        lines = [
            f"n: {self.n}",
            f"accuracy: {self.accuracy:.6f}",
            f"mean_rank: {self.mean_rank:.6f}",
            f"macro_f1: {self.macro_f1:.6f}",
        ]
        for lab, f1 in zip(self.labels, self.per_class_f1):
            lines.append(f"f1[{lab}]: {f1:.6f}")
        for lab, row in zip(self.labels, self.confusion):
            lines.append(f"confusion[{lab}]: " + " ".join(str(v) for v in row))
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "accuracy": self.accuracy,
            "mean_rank": self.mean_rank,
            "macro_f1": self.macro_f1,
            "labels": list(self.labels),
            "per_class_f1": list(self.per_class_f1),
            "confusion": [list(row) for row in self.confusion],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


def evaluate(pred_lists, gold, labels) -> EvalReport:
    """Full report over top-3 predictions and gold label indices."""
    labels = tuple(labels)
    k = len(labels)
    macro, per_class = macro_f1(pred_lists, gold, k)
    conf = confusion_matrix(pred_lists, gold, k)
    return EvalReport(
        labels=labels,
        n=len(gold),
        accuracy=accuracy(pred_lists, gold),
        mean_rank=mean_rank(pred_lists, gold),
        macro_f1=macro,
        per_class_f1=tuple(float(v) for v in per_class),
        confusion=tuple(tuple(int(v) for v in row) for row in conf),
    )
