"""JSON, CSV and Markdown renderings of evaluation results."""

from __future__ import annotations

import csv
import io
import json
from typing import Sequence

from .experiment import CrossResult, EvalReport


def _fmt(x: float | None) -> str:
    if x is None or x != x:
        return "-"
    return f"{x:.3f}".lstrip("0") if 0 <= x < 1 else f"{x:.3f}"


def reports_json(cells: Sequence[EvalReport], averages: dict | None = None) -> str:
    obj = {"cells": [c.to_dict() for c in cells]}
    if averages is not None:
        obj["averages"] = averages
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def reports_csv(cells: Sequence[EvalReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pipeline", "source", "target", "macro_f1", "f1_human_human", "f1_human_bot", "n_test"])
    for c in cells:
        w.writerow([c.pipeline, c.source, c.target, repr(c.macro_f1),
                    repr(c.per_class_f1["human-human"]), repr(c.per_class_f1["human-bot"]), c.n_test])
    return buf.getvalue()


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |",
             "|" + "|".join(["---"] + ["---:"] * (len(header) - 1)) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def in_domain_markdown(cells: Sequence[EvalReport]) -> str:
    """Pipelines as rows, ``D -> D`` columns."""
    datasets: list[str] = []
    pipelines: list[str] = []
    for c in cells:
        if c.source not in datasets:
            datasets.append(c.source)
        if c.pipeline not in pipelines:
            pipelines.append(c.pipeline)
    index = {(c.pipeline, c.source): c.macro_f1 for c in cells if c.source == c.target}
    rows = [[p] + [_fmt(index.get((p, d))) for d in datasets] for p in pipelines]
    return _table(["Pipeline"] + [f"{d} → {d}" for d in datasets], rows)


def cross_markdown(result: CrossResult) -> str:
    """Pipelines as rows, one column per ``source -> target`` pair plus AVG
    over the transfer (off-diagonal) pairs."""
    index = {(c.pipeline, c.source, c.target): c.macro_f1 for c in result.cells}
    rows = []
    for p in result.pipelines:
        rows.append([p] + [_fmt(index.get((p, s, t))) for s, t in result.pairs]
                    + [_fmt(result.averages.get(p))])
    return _table(["Pipeline"] + [f"{s} → {t}" for s, t in result.pairs] + ["AVG"], rows)
