"""Arc serialization: CSV (one row per sample) and JSON (with domain)."""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .core import ArcInterval, HybridArc, Termination


def fmt(v) -> str:
    """Format a float with 17 significant digits."""
    return f"{float(v):.17g}"


def arc_rows(arc: HybridArc):
    for t, j, x in arc.samples():
        yield [fmt(t), str(j)] + [fmt(v) for v in x]


def arc_to_csv(arc: HybridArc, path=None, columns=None) -> str:
    """Write ``t,j,x0,...`` rows. A jump shows as two rows with equal t."""
    columns = list(columns) if columns is not None else [f"x{i}" for i in range(arc.dim)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "j"] + columns)
    w.writerows(arc_rows(arc))
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def arc_from_csv(text: str, termination=Termination.HORIZON_T) -> HybridArc:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    dim = len(header) - 2
    intervals: list[ArcInterval] = []
    cur_j, ts, xs = None, [], []
    for r in body:
        t, j = float(r[0]), int(r[1])
        if cur_j is not None and j != cur_j:
            intervals.append(ArcInterval(cur_j, np.array(ts), np.array(xs).reshape(-1, dim)))
            ts, xs = [], []
        cur_j = j
        ts.append(t)
        xs.append([float(v) for v in r[2:]])
    if cur_j is not None:
        intervals.append(ArcInterval(cur_j, np.array(ts), np.array(xs).reshape(-1, dim)))
    return HybridArc(intervals, Termination(termination), dim)


def arc_to_json(arc: HybridArc) -> str:
    doc = {
        "dim": arc.dim,
        "termination": arc.termination.value,
        "domain": [[a, b, j] for (a, b, j) in arc.domain.intervals],
        "intervals": [
            {"j": iv.j, "t": iv.t.tolist(), "x": iv.x.tolist()} for iv in arc.intervals
        ],
    }
    return json.dumps(doc)


def arc_from_json(text: str) -> HybridArc:
    doc = json.loads(text)
    dim = doc["dim"]
    intervals = [
        ArcInterval(iv["j"], np.array(iv["t"], dtype=float), np.array(iv["x"], dtype=float).reshape(-1, dim))
        for iv in doc["intervals"]
    ]
    return HybridArc(intervals, Termination(doc["termination"]), dim)
