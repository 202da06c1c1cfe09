"""Minimal standalone SVG line plots (no plotting library)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["emit_svg"]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22")
_W, _H = 640, 420
_L, _R, _T, _B = 60, 150, 30, 50


def _ticks(lo, hi, k=5):
    if hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / k))
    for mult in (1, 2, 5, 10):
        if (hi - lo) / (step * mult) <= k:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def emit_svg(curves, path, title="", xlabel="", ylabel=""):
    """Write ``curves`` as a line plot to ``path``.

    Each curve is a mapping with keys ``x``, ``y``, ``label`` and an optional
    ``style``: ``"solid"`` (empirical, default), ``"dashed"`` (asymptotic
    reference) or ``"step"`` (histogram outline). Curves sharing a ``color``
    index are drawn in the same color.
    """
    curves = list(curves)
    if not curves:
        raise ValueError("emit_svg needs at least one curve")
    xs = np.concatenate([np.asarray(c["x"], dtype=float).ravel() for c in curves])
    ys = np.concatenate([np.asarray(c["y"], dtype=float).ravel() for c in curves])
    xs, ys = xs[np.isfinite(xs)], ys[np.isfinite(ys)]
    if xs.size == 0 or ys.size == 0:
        raise ValueError("curves contain no finite points")
    xlo, xhi = float(xs.min()), float(xs.max())
    ylo, yhi = min(0.0, float(ys.min())), float(ys.max())
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        yhi = ylo + 1.0
    pw, ph = _W - _L - _R, _H - _T - _B

    def sx(v):
        return _L + (v - xlo) / (xhi - xlo) * pw

    def sy(v):
        return _T + ph - (v - ylo) / (yhi - ylo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
           f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
           f'<rect x="{_L}" y="{_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(xlo, xhi):
        out.append(f'<line x1="{sx(t):.2f}" y1="{_T + ph}" x2="{sx(t):.2f}" y2="{_T + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{_T + ph + 16}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(ylo, yhi):
        out.append(f'<line x1="{_L - 4}" y1="{sy(t):.2f}" x2="{_L}" y2="{sy(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{_L - 6}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    if title:
        out.append(f'<text x="{_L + pw / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{_L + pw / 2}" y="{_H - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="14" y="{_T + ph / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 14 {_T + ph / 2})">{escape(ylabel)}</text>')

    for k, c in enumerate(curves):
        color = _PALETTE[c.get("color", k) % len(_PALETTE)]
        x = np.asarray(c["x"], dtype=float)
        y = np.asarray(c["y"], dtype=float)
        style = c.get("style", "solid")
        if style == "step":
            # x holds bin edges, y the bin heights
            pts = []
            for i in range(y.size):
                pts += [(x[i], y[i]), (x[i + 1], y[i])]
            x, y = np.array(pts).T
        d = " ".join(f"{'M' if i == 0 else 'L'}{sx(a):.2f},{sy(b):.2f}"
                     for i, (a, b) in enumerate(zip(x, y)) if np.isfinite(a) and np.isfinite(b))
        dash = ' stroke-dasharray="6,4"' if style == "dashed" else ""
        width = 1.0 if style == "step" else 1.6
        out.append(f'<path d="{d}" fill="none" stroke="{color}" stroke-width="{width}"{dash}/>')
        ly = _T + 14 + 16 * k
        out.append(f'<line x1="{_W - _R + 10}" y1="{ly}" x2="{_W - _R + 34}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="1.6"{dash}/>')
        out.append(f'<text x="{_W - _R + 40}" y="{ly + 4}">{escape(str(c.get("label", "")))}</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
    return path
