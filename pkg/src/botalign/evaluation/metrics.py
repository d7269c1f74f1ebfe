from __future__ import annotations

from typing import Hashable, Sequence

from ..corpus import Label


def _default_classes(values: Sequence[Hashable]) -> tuple:
    if any(isinstance(v, str) for v in values):
        return (Label.HUMAN_HUMAN, Label.HUMAN_BOT)
    return (0, 1)


def confusion(gold: Sequence, pred: Sequence, classes: Sequence | None = None) -> dict:
    """Counts as ``{gold_class: {pred_class: n}}``."""
    if len(gold) != len(pred):
        raise ValueError(f"gold has {len(gold)} items, pred has {len(pred)}")
    classes = tuple(classes) if classes is not None else _default_classes(list(gold) + list(pred))
    if isinstance(classes[0], Label):
        gold, pred = [Label(g) for g in gold], [Label(p) for p in pred]
    table = {g: {p: 0 for p in classes} for g in classes}
    for g, p in zip(gold, pred):
        table[g][p] += 1
    return table


def per_class_f1(gold: Sequence, pred: Sequence, classes: Sequence | None = None) -> dict:
    table = confusion(gold, pred, classes)
    out = {}
    for c in table:
        tp = table[c][c]
        n_pred = sum(table[g][c] for g in table)
        n_gold = sum(table[c].values())
        precision = tp / n_pred if n_pred else 0.0
        recall = tp / n_gold if n_gold else 0.0
        out[c] = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return out


def macro_f1(gold: Sequence, pred: Sequence, classes: Sequence | None = None) -> float:
    """Unweighted mean of per-class F1 over both classes.

    A class with no gold and no predicted items scores 0.

    >>> round(macro_f1([0, 0, 1, 1], [0, 1, 1, 1]), 4)
    0.7333
    """
    if len(gold) == 0:
        raise ValueError("macro F1 needs at least one item")
    scores = per_class_f1(gold, pred, classes)
    return sum(scores.values()) / len(scores)
