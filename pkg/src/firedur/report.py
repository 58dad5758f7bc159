"""Evaluation report assembly and file emission (CSV tables + SVG figures).

SVG was chosen over bitmaps deliberately: diffable, dependency-free, and
sufficient for scatter/bar figures. Metric values are always written with
four decimals.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from typing import Optional
from xml.sax.saxutils import escape

from .artifacts import write_text_atomic
from .errors import EmptyDataset
from .evaluate import MetricSet

MODEL_LABELS = {"rf": "Random Forest", "gbt": "Boosted Trees", "lstm": "LSTM"}


@dataclass
class EvalReport:
    metrics: dict                 # model -> MetricSet
    residual_bins: dict           # model -> bin rows
    importances: dict             # model -> [(feature, value)]
    acres_days_points: list       # (log_acres, containment_days)
    error_points: dict            # model -> [(true_days, signed_error)]
    test_size: int

    def to_json(self) -> str:
        payload = {
            "metrics": {m: vars(s) for m, s in self.metrics.items()},
            "residual_bins": self.residual_bins,
            "importances": {m: [[f, v] for f, v in pairs]
                            for m, pairs in self.importances.items()},
            "acres_days_points": [[a, d] for a, d in self.acres_days_points],
            "error_points": {m: [[t, e] for t, e in pts]
                             for m, pts in self.error_points.items()},
            "test_size": self.test_size,
        }
        return json.dumps(payload, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        payload = json.loads(text)
        return cls(
            metrics={m: MetricSet(**v) for m, v in payload["metrics"].items()},
            residual_bins=payload["residual_bins"],
            importances={m: [(f, v) for f, v in pairs]
                         for m, pairs in payload["importances"].items()},
            acres_days_points=[(a, d) for a, d in payload["acres_days_points"]],
            error_points={m: [(t, e) for t, e in pts]
                          for m, pts in payload["error_points"].items()},
            test_size=payload["test_size"],
        )


def _csv_text(header, rows) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()


def _fmt4(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.4f}"


# --- SVG --------------------------------------------------------------------

_W, _H = 640, 420
_MARGIN = 56


def _scale(values, lo_pixel, hi_pixel):
    vmin = min(values)
    vmax = max(values)
    if vmax == vmin:
        vmax = vmin + 1.0
    span = vmax - vmin

    def to_pixel(v):
        return lo_pixel + (v - vmin) / span * (hi_pixel - lo_pixel)

    return to_pixel, vmin, vmax


def _axes(title, xlabel, ylabel, xmin, xmax, ymin, ymax, x_of, y_of):
    parts = [
        f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{_MARGIN}" y1="{_H - _MARGIN}" x2="{_W - _MARGIN}" y2="{_H - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" y2="{_H - _MARGIN}" stroke="black"/>',
        f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="16" y="{_H / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {_H / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for i in range(5):
        xv = xmin + (xmax - xmin) * i / 4
        yv = ymin + (ymax - ymin) * i / 4
        parts.append(f'<text x="{x_of(xv):.2f}" y="{_H - _MARGIN + 16}" '
                     f'text-anchor="middle" font-size="10">{xv:.2f}</text>')
        parts.append(f'<text x="{_MARGIN - 6}" y="{y_of(yv):.2f}" '
                     f'text-anchor="end" font-size="10">{yv:.2f}</text>')
    return parts


def svg_scatter(points, title, xlabel, ylabel, color="#1f6fb2") -> str:
    """One <circle> per data point inside a minimal framed plot."""
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_of, xmin, xmax = _scale(xs, _MARGIN, _W - _MARGIN)
    y_of, ymin, ymax = _scale(ys, _H - _MARGIN, _MARGIN)
    parts = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}">']
    parts += _axes(title, xlabel, ylabel, xmin, xmax, ymin, ymax, x_of, y_of)
    for x, y in points:
        parts.append(f'<circle cx="{x_of(x):.2f}" cy="{y_of(y):.2f}" r="2" '
                     f'fill="{color}" fill-opacity="0.55"/>')
    parts.append("</svg>")
    return "\n".join(parts)


def svg_bars(pairs, title, xlabel) -> str:
    """Horizontal bars, one <rect> per (label, value) pair."""
    values = [v for _, v in pairs] or [0.0]
    vmax = max(max(values), 1e-12)
    top, bottom = _MARGIN, _H - _MARGIN
    slot = (bottom - top) / max(len(pairs), 1)
    parts = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}">',
             f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
             f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>']
    left = _MARGIN + 120
    for row, (label, value) in enumerate(pairs):
        y = top + row * slot
        width = (value / vmax) * (_W - _MARGIN - left)
        parts.append(f'<text x="{left - 6}" y="{y + slot * 0.62:.2f}" text-anchor="end" '
                     f'font-size="11">{escape(str(label))}</text>')
        parts.append(f'<rect x="{left}" y="{y + slot * 0.18:.2f}" width="{max(width, 0):.2f}" '
                     f'height="{slot * 0.64:.2f}" fill="#c2542e"/>')
        parts.append(f'<text x="{left + max(width, 0) + 4:.2f}" y="{y + slot * 0.62:.2f}" '
                     f'font-size="10">{value:.4f}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


# --- emission ----------------------------------------------------------------


def emit_report(report: EvalReport, out_dir) -> list:
    """Write every report file; refuses an empty test set up front so no
    partial output can appear. Returns the written paths."""
    if report.test_size == 0:
        raise EmptyDataset("refusing to emit a report for an empty test set")
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def emit(name: str, text: str):
        path = os.path.join(out_dir, name)
        write_text_atomic(path, text)
        written.append(path)

    models = sorted(report.metrics)
    emit("metrics.csv", _csv_text(
        ["model", "mae_days", "rmse_days", "r2_days"],
        [[m, _fmt4(report.metrics[m].mae_days), _fmt4(report.metrics[m].rmse_days),
          _fmt4(report.metrics[m].r2_days)] for m in models]))

    bin_rows = []
    for model in sorted(report.residual_bins):
        for b in report.residual_bins[model]:
            hi = "inf" if math.isinf(b["hi"]) else _fmt4(b["hi"])
            bin_rows.append([model, _fmt4(b["lo"]), hi, b["count"],
                             _fmt4(b["mae"]), _fmt4(b["mean_signed_error"])])
    emit("residual_bins.csv", _csv_text(
        ["model", "lo_days", "hi_days", "count", "mae_days", "mean_signed_error_days"],
        bin_rows))

    importance_rows = []
    for model in sorted(report.importances):
        for feature, value in report.importances[model]:
            importance_rows.append([model, feature, _fmt4(value)])
    emit("importances.csv", _csv_text(["model", "feature", "importance"], importance_rows))

    emit("points_acres_days.csv", _csv_text(
        ["log_acres", "containment_days"],
        [[repr(a), repr(d)] for a, d in report.acres_days_points]))
    if report.acres_days_points:
        emit("scatter_acres_days.svg", svg_scatter(
            report.acres_days_points,
            "Containment duration vs log-transformed fire size",
            "log(1 + acres)", "containment days"))

    for model in sorted(report.error_points):
        points = report.error_points[model]
        emit(f"points_error_vs_true_{model}.csv", _csv_text(
            ["true_days", "signed_error_days"],
            [[repr(t), repr(e)] for t, e in points]))
        emit(f"error_vs_true_{model}.svg", svg_scatter(
            points,
            f"Prediction error vs true duration ({MODEL_LABELS.get(model, model)})",
            "true containment days", "predicted - true (days)"))

    for model in sorted(report.importances):
        pairs = sorted(report.importances[model], key=lambda kv: kv[1], reverse=True)
        emit(f"importance_{model}.svg", svg_bars(
            pairs, f"Feature importance ({MODEL_LABELS.get(model, model)})", "importance"))

    return written


def _pick_variance_note(report: EvalReport) -> Optional[str]:
    """Observed (not asserted) spread comparison between model predictions."""
    spreads = {}
    for model, points in report.error_points.items():
        preds = [t + e for t, e in points]
        if len(preds) >= 2:
            mean = sum(preds) / len(preds)
            spreads[model] = math.sqrt(sum((p - mean) ** 2 for p in preds) / len(preds))
    if "lstm" in spreads and "gbt" in spreads:
        relation = "<=" if spreads["lstm"] <= spreads["gbt"] else ">"
        return (f"prediction stddev: lstm {spreads['lstm']:.4f} {relation} "
                f"gbt {spreads['gbt']:.4f}")
    return None


def emit_variance_note(report: EvalReport, out_dir) -> Optional[str]:
    note = _pick_variance_note(report)
    if note is not None:
        write_text_atomic(os.path.join(out_dir, "prediction_spread.txt"), note + "\n")
    return note
