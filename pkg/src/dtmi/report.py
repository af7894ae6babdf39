"""Correlation, CSV ingestion, canonical JSON reports and SVG line plots."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from html import escape
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .core import LabeledDataset, PairedSamples
from .errors import (
    ConstantSeries,
    EmptySeries,
    IoError,
    LengthMismatch,
    MissingLabelColumn,
    NonNumericCell,
    RaggedRow,
    RowCountMismatch,
    ValidationError,
)

LABEL_COLUMN = "label"


# -- correlation -----------------------------------------------------------

@dataclass(frozen=True)
class CorrelationReport:
    r: float
    n_points: int
    names: tuple = ("a", "b")

    def to_dict(self):
        return {"r": self.r, "n_points": self.n_points, "names": list(self.names)}


def pearson(a, b, names=("a", "b")) -> CorrelationReport:
    """Sample Pearson correlation, computed on centred data."""
    x = np.asarray(a, dtype=float).ravel()
    y = np.asarray(b, dtype=float).ravel()
    if x.size != y.size:
        raise LengthMismatch(f"series lengths differ: {x.size} vs {y.size}")
    if x.size < 3:
        raise LengthMismatch(f"need at least 3 points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("series contain non-finite values")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise ConstantSeries("a constant series has no correlation")
    r = float(dx @ dy) / (sx * sy)
    return CorrelationReport(max(-1.0, min(1.0, r)), int(x.size), tuple(names))


# -- CSV ---------------------------------------------------------------------

def _read_rows(path):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ValidationError(f"{path} is empty")
    return rows


def _parse_cell(text, row, column):
    try:
        v = float(text)
    except ValueError:
        raise NonNumericCell(row, column, text) from None
    return v


def _looks_numeric(row):
    try:
        [float(c) for c in row]
    except ValueError:
        return False
    return True


def _numeric_block(rows, header, first_row):
    """Parse data rows; ``first_row`` is the 1-based number of rows[0]."""
    width = len(header)
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        number = first_row + i
        if len(row) != width:
            raise RaggedRow(f"row {number} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            out[i, j] = _parse_cell(cell.strip(), number, header[j])
    return out


def load_labeled_csv(path) -> LabeledDataset:
    """Dataset with a ``label`` column; all other columns are real features.

    Rows are numbered from 1 at the first data row (the header is not
    counted) in error locations.
    """
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    if LABEL_COLUMN not in header:
        raise MissingLabelColumn(f"{path} has no {LABEL_COLUMN!r} column")
    li = header.index(LABEL_COLUMN)
    feat_cols = [h for j, h in enumerate(header) if j != li]
    if not feat_cols:
        raise ValidationError("no feature columns")
    labels, body = [], []
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise RaggedRow(f"row {i + 1} has {len(row)} cells, expected {len(header)}")
        labels.append(row[li].strip())
        body.append([c for j, c in enumerate(row) if j != li])
    feats = _numeric_block(body, feat_cols, 1) if body else np.empty((0, len(feat_cols)))
    return LabeledDataset(tuple(labels), feats)


def load_matrix_csv(path) -> np.ndarray:
    """Plain real matrix; a non-numeric first row is taken as a header."""
    rows = _read_rows(path)
    if _looks_numeric(rows[0]):
        header = [f"c{j}" for j in range(len(rows[0]))]
        return _numeric_block(rows, header, 1)
    header = [h.strip() for h in rows[0]]
    if len(rows) < 2:
        raise ValidationError(f"{path} has a header but no data")
    return _numeric_block(rows[1:], header, 1)


def load_paired_csv(path_x, path_y) -> PairedSamples:
    x = load_matrix_csv(path_x)
    y = load_matrix_csv(path_y)
    if x.shape[0] != y.shape[0]:
        raise RowCountMismatch(f"{path_x} has {x.shape[0]} rows, {path_y} has {y.shape[0]}")
    return PairedSamples(x, y)


def load_series_csv(path) -> np.ndarray:
    """A single real series: one column, or one row."""
    m = load_matrix_csv(path)
    if m.shape[1] == 1 or m.shape[0] == 1:
        return m.ravel()
    raise ValidationError(f"{path} holds a {m.shape[0]}x{m.shape[1]} matrix, not a series")


# -- canonical JSON ----------------------------------------------------------

def _plain(obj):
    """Reduce numpy and dataclass values to JSON-native types."""
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise ValidationError(f"cannot serialise {type(obj).__name__}")


def _float_text(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return format(v, ".17g")


def _emit(v, indent, out):
    pad = "  " * indent
    if isinstance(v, dict):
        if not v:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(v)
        for i, k in enumerate(keys):
            out.append(f"{pad}  {json.dumps(k)}: ")
            _emit(v[k], indent + 1, out)
            out.append(",\n" if i < len(keys) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(v, list):
        if not v:
            out.append("[]")
        elif all(not isinstance(x, (dict, list)) for x in v):
            parts = []
            for x in v:
                sub = []
                _emit(x, 0, sub)
                parts.append("".join(sub))
            out.append("[" + ", ".join(parts) + "]")
        else:
            out.append("[\n")
            for i, x in enumerate(v):
                out.append(pad + "  ")
                _emit(x, indent + 1, out)
                out.append(",\n" if i < len(v) - 1 else "\n")
            out.append(pad + "]")
    elif isinstance(v, bool):
        out.append("true" if v else "false")
    elif v is None:
        out.append("null")
    elif isinstance(v, int):
        out.append(str(v))
    elif isinstance(v, float):
        out.append(_float_text(v))
    else:
        out.append(json.dumps(v))


def canonical_json(obj) -> str:
    """Sorted keys, 17 significant digits, two-space indent, trailing newline."""
    out = []
    _emit(_plain(obj), 0, out)
    return "".join(out) + "\n"


@dataclass
class RunReport:
    """One command invocation: what was asked and what came out.

    ``wall_time_s`` is kept in memory only; the serialised form leaves it
    out so that reruns produce identical files.
    """

    command: str
    config: dict
    seed: int
    results: Any
    wall_time_s: Optional[float] = field(default=None, compare=False)

    def to_dict(self):
        return {"command": self.command, "config": self.config, "seed": self.seed, "results": self.results}


def _write_text(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def emit_report(report, path) -> None:
    _write_text(path, canonical_json(report))


# -- SVG ---------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_W, _H = 640, 400
_L, _R, _T, _B = 70, 150, 30, 50


def _fmt(v):
    return format(v, ".6g")


def _ticks(lo, hi, count=5):
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def render_line_plot(series: Mapping[str, tuple], title="", x_label="", y_label="") -> str:
    """SVG text for named ``(xs, ys)`` series on shared linear axes.

    Non-finite x values (e.g. an infinite SNR point) are dropped from the
    drawing; each series needs at least two drawable points.
    """
    if not series:
        raise EmptySeries("nothing to plot")
    clean = {}
    for name, (xs, ys) in series.items():
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.shape != ys.shape:
            raise LengthMismatch(f"series {name!r}: {xs.size} x values, {ys.size} y values")
        keep = np.isfinite(xs) & np.isfinite(ys)
        if keep.sum() < 2:
            raise EmptySeries(f"series {name!r} has fewer than two finite points")
        clean[str(name)] = (xs[keep], ys[keep])
    allx = np.concatenate([v[0] for v in clean.values()])
    ally = np.concatenate([v[1] for v in clean.values()])
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = _W - _L - _R, _H - _T - _B
    sx = lambda v: _L + (v - x0) / (x1 - x0) * pw
    sy = lambda v: _T + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_L}" y1="{_T + ph}" x2="{_L + pw}" y2="{_T + ph}" stroke="black"/>',
        f'<line x1="{_L}" y1="{_T}" x2="{_L}" y2="{_T + ph}" stroke="black"/>',
    ]
    for v in _ticks(x0, x1):
        px = _fmt(sx(v))
        out.append(f'<line x1="{px}" y1="{_T + ph}" x2="{px}" y2="{_T + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px}" y="{_T + ph + 18}" font-size="11" text-anchor="middle">{_fmt(v)}</text>')
    for v in _ticks(y0, y1):
        py = _fmt(sy(v))
        out.append(f'<line x1="{_L - 5}" y1="{py}" x2="{_L}" y2="{py}" stroke="black"/>')
        out.append(f'<text x="{_L - 8}" y="{py}" font-size="11" text-anchor="end" dy="4">{_fmt(v)}</text>')
    if title:
        out.append(f'<text x="{_L + pw / 2:g}" y="18" font-size="14" text-anchor="middle">{escape(title)}</text>')
    if x_label:
        out.append(f'<text x="{_L + pw / 2:g}" y="{_H - 10}" font-size="12" text-anchor="middle">{escape(x_label)}</text>')
    if y_label:
        out.append(f'<text x="16" y="{_T + ph / 2:g}" font-size="12" text-anchor="middle" '
                   f'transform="rotate(-90 16 {_T + ph / 2:g})">{escape(y_label)}</text>')
    for i, (name, (xs, ys)) in enumerate(clean.items()):
        colour = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="2" points="{pts}"/>')
        ly = _T + 14 + 18 * i
        out.append(f'<line x1="{_W - _R + 10}" y1="{ly}" x2="{_W - _R + 30}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{_W - _R + 35}" y="{ly + 4}" font-size="11">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_line_plot(series: Mapping[str, tuple], path, title="", x_label="", y_label="") -> None:
    _write_text(path, render_line_plot(series, title, x_label, y_label))
