"""Minimal static SVG charts built from rects, paths and text.

Coordinates are printed with two decimals so identical inputs give identical bytes.
"""
from __future__ import annotations

import math
from html import escape
from pathlib import Path
from typing import Sequence

import numpy as np

WIDTH = 640
HEIGHT = 420
MARGIN = (60, 30, 40, 60)  # top, right, bottom, left
PALETTE = ("#1b6ca8", "#d1495b", "#66a182", "#edae49", "#8d6a9f", "#2e4057", "#00798c", "#a05195", "#6c757d")


def _n(x: float) -> str:
    return f"{x:.2f}"


def _text(x: float, y: float, s: str, size: int = 12, anchor: str = "middle", rotate: float | None = None) -> str:
    tr = f' transform="rotate({_n(rotate)} {_n(x)} {_n(y)})"' if rotate is not None else ""
    return (f'<text x="{_n(x)}" y="{_n(y)}" font-size="{size}" font-family="sans-serif" '
            f'text-anchor="{anchor}"{tr}>{escape(s)}</text>')


def _rect(x: float, y: float, w: float, h: float, fill: str, stroke: str = "none") -> str:
    return f'<rect x="{_n(x)}" y="{_n(y)}" width="{_n(w)}" height="{_n(h)}" fill="{fill}" stroke="{stroke}"/>'


def _line(x1: float, y1: float, x2: float, y2: float, stroke: str = "#333", width: float = 1.0) -> str:
    return (f'<path d="M{_n(x1)} {_n(y1)} L{_n(x2)} {_n(y2)}" stroke="{stroke}" '
            f'stroke-width="{_n(width)}" fill="none"/>')


def _document(body: list[str], title: str) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">')
    parts = [head, _rect(0, 0, WIDTH, HEIGHT, "white"), _text(WIDTH / 2, 24, title, 15)]
    return "\n".join(parts + body + ["</svg>"]) + "\n"


def _tick(v: float) -> str:
    return format(v, ".3g")


class _Frame:
    """Plot area with linear axes."""

    def __init__(self, x_range: tuple[float, float], y_range: tuple[float, float]):
        top, right, bottom, left = MARGIN
        self.x0, self.x1 = left, WIDTH - right
        self.y0, self.y1 = HEIGHT - bottom, top
        self.xr = _padded(x_range)
        self.yr = _padded(y_range)

    def x(self, v: float) -> float:
        lo, hi = self.xr
        return self.x0 + (v - lo) / (hi - lo) * (self.x1 - self.x0)

    def y(self, v: float) -> float:
        lo, hi = self.yr
        return self.y0 + (v - lo) / (hi - lo) * (self.y1 - self.y0)

    def axes(self, xlabel: str, ylabel: str, x_ticks: bool = True) -> list[str]:
        out = [_line(self.x0, self.y0, self.x1, self.y0), _line(self.x0, self.y0, self.x0, self.y1)]
        for v in np.linspace(*self.yr, 5):
            out.append(_line(self.x0 - 4, self.y(v), self.x0, self.y(v)))
            out.append(_text(self.x0 - 6, self.y(v) + 4, _tick(v), 10, "end"))
        if x_ticks:
            for v in np.linspace(*self.xr, 5):
                out.append(_line(self.x(v), self.y0, self.x(v), self.y0 + 4))
                out.append(_text(self.x(v), self.y0 + 16, _tick(v), 10))
        out.append(_text((self.x0 + self.x1) / 2, HEIGHT - 8, xlabel, 12))
        out.append(_text(16, (self.y0 + self.y1) / 2, ylabel, 12, rotate=-90))
        return out


def _padded(r: tuple[float, float]) -> tuple[float, float]:
    lo, hi = float(r[0]), float(r[1])
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return 0.0, 1.0
    if hi <= lo:
        return lo - 0.5, lo + 0.5
    return lo, hi


def _finite(values: Sequence[float]) -> np.ndarray:
    a = np.asarray(values, dtype=np.float64)
    return a[np.isfinite(a)]


def heatmap(matrix: np.ndarray, labels: Sequence[str], title: str, vmax: float | None = None) -> str:
    """Square matrix shaded from white (0) to dark blue (``vmax``)."""
    m = np.asarray(matrix, dtype=np.float64)
    k = m.shape[0]
    top, right, bottom, left = MARGIN
    side = min(WIDTH - left - right - 60, HEIGHT - top - bottom)
    cell = side / max(k, 1)
    vmax = float(np.nanmax(m)) if vmax is None and m.size else (vmax or 1.0)
    vmax = vmax if vmax > 0 else 1.0
    body = []
    for i in range(k):
        for j in range(k):
            t = 0.0 if not math.isfinite(m[i, j]) else min(max(m[i, j] / vmax, 0.0), 1.0)
            shade = int(round(255 * (1 - t)))
            fill = f"#{shade:02x}{min(255, shade + 40):02x}ff" if t < 1 else "#00288c"
            body.append(_rect(left + j * cell, top + i * cell, cell, cell, fill, "#ffffff"))
            body.append(_text(left + (j + 0.5) * cell, top + (i + 0.5) * cell + 4, format(m[i, j], ".2f"),
                              max(7, min(11, int(cell / 4))), "middle"))
        body.append(_text(left - 6, top + (i + 0.5) * cell + 4, str(labels[i]), 10, "end"))
        body.append(_text(left + (i + 0.5) * cell, top + k * cell + 14, str(labels[i]), 10))
    body.append(_text(left + k * cell + 30, top + 12, f"max {format(vmax, '.3g')}", 10))
    return _document(body, title)


def histogram(groups: Sequence[tuple[str, Sequence[float]]], title: str, xlabel: str, bins: int = 20) -> str:
    """Overlaid step histograms (density scale), one colour per group."""
    arrays = [(label, _finite(v)) for label, v in groups]
    pooled = np.concatenate([a for _, a in arrays]) if arrays else np.empty(0)
    if pooled.size == 0:
        return _document([_text(WIDTH / 2, HEIGHT / 2, "no defined values")], title)
    edges = np.histogram_bin_edges(pooled, bins=bins)
    if edges[0] == edges[-1]:
        edges = np.linspace(edges[0] - 0.5, edges[0] + 0.5, bins + 1)
    dens = [np.histogram(a, bins=edges, density=a.size > 0)[0] if a.size else np.zeros(bins) for _, a in arrays]
    frame = _Frame((edges[0], edges[-1]), (0.0, max(float(np.max(d)) for d in dens) or 1.0))
    body = frame.axes(xlabel, "density")
    for idx, ((label, _), d) in enumerate(zip(arrays, dens)):
        colour = PALETTE[idx % len(PALETTE)]
        pts = [f"M{_n(frame.x(edges[0]))} {_n(frame.y(0))}"]
        for b in range(len(d)):
            pts.append(f"L{_n(frame.x(edges[b]))} {_n(frame.y(d[b]))}")
            pts.append(f"L{_n(frame.x(edges[b + 1]))} {_n(frame.y(d[b]))}")
        pts.append(f"L{_n(frame.x(edges[-1]))} {_n(frame.y(0))}")
        body.append(f'<path d="{" ".join(pts)}" stroke="{colour}" stroke-width="1.5" fill="none"/>')
        body.append(_rect(frame.x1 - 70, MARGIN[0] + 14 * idx, 10, 10, colour))
        body.append(_text(frame.x1 - 56, MARGIN[0] + 14 * idx + 9, label, 10, "start"))
    return _document(body, title)


def bar_chart(labels: Sequence[str], values: Sequence[float], title: str, ylabel: str,
              cap: float | None = None) -> str:
    """Vertical bars; values above ``cap`` are drawn at the cap and marked."""
    vals = np.asarray(values, dtype=np.float64)
    shown = np.where(np.isfinite(vals), vals, 0.0)
    if cap is not None:
        shown = np.minimum(shown, cap)
    frame = _Frame((0.0, float(len(vals))), (min(0.0, float(shown.min(initial=0.0))), float(shown.max(initial=1.0))))
    body = frame.axes("", ylabel, x_ticks=False)
    width = (frame.x1 - frame.x0) / max(len(vals), 1)
    for i, (label, v) in enumerate(zip(labels, shown)):
        x = frame.x0 + i * width
        y_top, y_base = frame.y(max(v, 0.0)), frame.y(min(v, 0.0))
        body.append(_rect(x + 0.1 * width, y_top, 0.8 * width, y_base - y_top, PALETTE[i % len(PALETTE)]))
        if cap is not None and math.isfinite(vals[i]) and vals[i] > cap:
            body.append(_text(x + width / 2, y_top - 4, "^", 10))
        body.append(_text(x + width / 2, frame.y0 + 14, str(label), 9, rotate=None))
    return _document(body, title)


def grouped_bar_chart(categories: Sequence[str], series: Sequence[tuple[str, Sequence[float]]], title: str,
                      ylabel: str, cap: float | None = None) -> str:
    """One cluster of bars per category, one colour per series."""
    vals = np.asarray([list(v) for _, v in series], dtype=np.float64)
    shown = np.where(np.isfinite(vals), vals, 0.0)
    if cap is not None:
        shown = np.minimum(shown, cap)
    frame = _Frame((0.0, float(len(categories))), (min(0.0, float(shown.min(initial=0.0))),
                                                   float(shown.max(initial=1.0))))
    body = frame.axes("", ylabel, x_ticks=False)
    group = (frame.x1 - frame.x0) / max(len(categories), 1)
    bar = 0.8 * group / max(len(series), 1)
    for c, label in enumerate(categories):
        x = frame.x0 + c * group + 0.1 * group
        for s in range(len(series)):
            v = shown[s, c]
            y_top, y_base = frame.y(max(v, 0.0)), frame.y(min(v, 0.0))
            body.append(_rect(x + s * bar, y_top, bar, y_base - y_top, PALETTE[s % len(PALETTE)]))
            if cap is not None and math.isfinite(vals[s, c]) and vals[s, c] > cap:
                body.append(_text(x + (s + 0.5) * bar, y_top - 3, "^", 9))
        body.append(_text(frame.x0 + (c + 0.5) * group, frame.y0 + 14, label, 9))
    for s, (name, _) in enumerate(series):
        body.append(_rect(frame.x1 - 110, MARGIN[0] + 14 * s, 10, 10, PALETTE[s % len(PALETTE)]))
        body.append(_text(frame.x1 - 96, MARGIN[0] + 14 * s + 9, name, 10, "start"))
    return _document(body, title)


def boxplot(groups: Sequence[tuple[str, Sequence[float]]], title: str, ylabel: str) -> str:
    """Quartile boxes with whiskers at the extremes."""
    arrays = [(label, _finite(v)) for label, v in groups]
    pooled = np.concatenate([a for _, a in arrays]) if arrays else np.empty(0)
    if pooled.size == 0:
        return _document([_text(WIDTH / 2, HEIGHT / 2, "no defined values")], title)
    frame = _Frame((0.0, float(len(arrays))), (float(pooled.min()), float(pooled.max())))
    body = frame.axes("", ylabel, x_ticks=False)
    width = (frame.x1 - frame.x0) / len(arrays)
    for i, (label, a) in enumerate(arrays):
        cx = frame.x0 + (i + 0.5) * width
        body.append(_text(cx, frame.y0 + 14, label, 9))
        if a.size == 0:
            continue
        lo, q1, med, q3, hi = np.quantile(a, [0.0, 0.25, 0.5, 0.75, 1.0])
        colour = PALETTE[i % len(PALETTE)]
        half = 0.3 * width
        body.append(_line(cx, frame.y(lo), cx, frame.y(q1), colour))
        body.append(_line(cx, frame.y(q3), cx, frame.y(hi), colour))
        body.append(_rect(cx - half, frame.y(q3), 2 * half, max(frame.y(q1) - frame.y(q3), 0.5), "white", colour))
        body.append(_line(cx - half, frame.y(med), cx + half, frame.y(med), colour, 2.0))
    return _document(body, title)


def scatter(points: Sequence[tuple[float, float]], title: str, xlabel: str, ylabel: str,
            line: tuple[float, float] | None = None) -> str:
    """Point cloud with an optional ``(intercept, slope)`` line."""
    arr = np.asarray([p for p in points if math.isfinite(p[0]) and math.isfinite(p[1])], dtype=np.float64)
    if arr.size == 0:
        return _document([_text(WIDTH / 2, HEIGHT / 2, "no defined values")], title)
    frame = _Frame((arr[:, 0].min(), arr[:, 0].max()), (arr[:, 1].min(), arr[:, 1].max()))
    body = frame.axes(xlabel, ylabel)
    for x, y in arr:
        body.append(f'<circle cx="{_n(frame.x(x))}" cy="{_n(frame.y(y))}" r="2.5" fill="{PALETTE[0]}"/>')
    if line is not None:
        b0, b1 = line
        xa, xb = frame.xr
        body.append(_line(frame.x(xa), frame.y(b0 + b1 * xa), frame.x(xb), frame.y(b0 + b1 * xb), PALETTE[1], 1.5))
    return _document(body, title)


def save(path: str | Path, svg: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg)
    return path
