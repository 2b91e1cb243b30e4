"""Dependency-free SVG plots.

Output is a pure function of the input: coordinates are printed with fixed
precision and nothing time- or environment-dependent is embedded, so equal
inputs give byte-identical files.
"""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .geometry import ArenaSpec, PathSpec, path_point
from .metrics import FrequencyHistogram
from .trial import TrialRecord

__all__ = ["trajectory_svg", "histogram_svg"]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
            "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _polyline(xs, ys, color: str, width: float, opacity: float = 1.0) -> str:
    pts = " ".join(f"{_f(a)},{_f(b)}" for a, b in zip(xs, ys))
    return (f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{_f(width)}" stroke-opacity="{_f(opacity)}"/>')


def trajectory_svg(records: Sequence[TrialRecord], path: PathSpec | None = None,
                   arena: ArenaSpec | None = None, title: str = "", scale: float = 0.5,
                   max_points: int = 600) -> str:
    """Overlay of trial trajectories on the reference path inside the arena.

    Trajectories are decimated to at most ``max_points`` vertices; successful
    trials are drawn solid, failures dashed grey.
    """
    path = path or PathSpec()
    arena = arena or ArenaSpec()
    xmin, xmax, ymin, ymax = arena.bounds(path)
    pad = 20.0
    w = (xmax - xmin) * scale + 2 * pad
    h = (ymax - ymin) * scale + 2 * pad + (20 if title else 0)
    top = pad + (20 if title else 0)

    def sx(x):
        return pad + (np.asarray(x) - xmin) * scale

    def sy(y):
        return top + (ymax - np.asarray(y)) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(w)}" height="{_f(h)}" '
           f'viewBox="0 0 {_f(w)} {_f(h)}">']
    if title:
        out.append(f'<text x="{_f(pad)}" y="16" font-family="sans-serif" font-size="13">'
                   f'{escape(title)}</text>')
    out.append(f'<rect x="{_f(pad)}" y="{_f(top)}" width="{_f((xmax - xmin) * scale)}" '
               f'height="{_f((ymax - ymin) * scale)}" fill="none" stroke="#000000"/>')
    xs = np.linspace(path.x_start, path.x_end, 200)
    ys = path.y(xs)
    out.append(_polyline(sx(xs), sy(ys), "#000000", 2.0))
    for end in (path.x_start, path.x_end):
        cx, cy = path_point(path, end)
        out.append(f'<circle cx="{_f(float(sx(cx)))}" cy="{_f(float(sy(cy)))}" '
                   f'r="{_f(path.endpoint_radius * scale)}" fill="none" stroke="#000000" '
                   f'stroke-dasharray="3,3"/>')
    for i, rec in enumerate(records):
        step = max(1, int(np.ceil(rec.n_frames / max_points)))
        idx = np.arange(0, rec.n_frames, step)
        if idx[-1] != rec.n_frames - 1:
            idx = np.append(idx, rec.n_frames - 1)
        if rec.success:
            out.append(_polyline(sx(rec.x[idx]), sy(rec.y[idx]), _PALETTE[i % len(_PALETTE)], 1.0, 0.8))
        else:
            line = _polyline(sx(rec.x[idx]), sy(rec.y[idx]), "#999999", 1.0, 0.8)
            out.append(line.replace("/>", ' stroke-dasharray="4,2"/>'))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def histogram_svg(hists: Sequence[FrequencyHistogram], title: str = "Stimulation frequency",
                  width: float = 240.0, height: float = 160.0) -> str:
    """One bar panel per gain, side by side, with the median marked."""
    pad = 30.0
    n = max(1, len(hists))
    total_w = n * (width + pad) + pad
    total_h = height + 2 * pad + 20
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(total_w)}" height="{_f(total_h)}" '
           f'viewBox="0 0 {_f(total_w)} {_f(total_h)}">',
           f'<text x="{_f(pad)}" y="16" font-family="sans-serif" font-size="13">{escape(title)}</text>']
    for k, hist in enumerate(hists):
        x0 = pad + k * (width + pad)
        y0 = 20 + pad
        counts = np.asarray(hist.counts, dtype=float)
        frac = counts / counts.sum() if counts.sum() > 0 else counts
        peak = frac.max() if frac.size and frac.max() > 0 else 1.0
        edges = np.asarray(hist.edges, dtype=float)
        span = edges[-1] - edges[0]
        out.append(f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(width)}" height="{_f(height)}" '
                   f'fill="none" stroke="#000000"/>')
        for j, fr in enumerate(frac):
            bx = x0 + (edges[j] - edges[0]) / span * width
            bw = (edges[j + 1] - edges[j]) / span * width
            bh = fr / peak * (height - 10)
            out.append(f'<rect x="{_f(bx)}" y="{_f(y0 + height - bh)}" width="{_f(bw)}" '
                       f'height="{_f(bh)}" fill="{_PALETTE[k % len(_PALETTE)]}" stroke="#ffffff"/>')
        mx = x0 + (hist.median - edges[0]) / span * width
        out.append(f'<line x1="{_f(mx)}" y1="{_f(y0)}" x2="{_f(mx)}" y2="{_f(y0 + height)}" '
                   f'stroke="#000000" stroke-dasharray="4,2"/>')
        out.append(f'<text x="{_f(x0)}" y="{_f(y0 + height + 16)}" font-family="sans-serif" '
                   f'font-size="11">Kp {hist.k_p:.2f}, median {hist.median:.1f} Hz, '
                   f'n={int(counts.sum())}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
