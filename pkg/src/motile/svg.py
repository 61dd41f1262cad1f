"""Dependency-free SVG overlays of closed curves."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .geometry import DiscreteCurve

DEFAULT_STYLES = [
    {"stroke": "#1f4e9c", "dash": None, "label": None},
    {"stroke": "#2e8b57", "dash": "6,4", "label": None},
    {"stroke": "#b22222", "dash": "2,3", "label": None},
    {"stroke": "#6a3d9a", "dash": "8,3,2,3", "label": None},
]

SIZE = 480
MARGIN = 24
LEGEND_ROW = 16


def _num(v: float) -> str:
    return format(float(v), ".6g")


def emit_svg(curves: Sequence[DiscreteCurve], styles: Sequence[dict] | None = None,
             path: str | Path | None = None) -> str:
    """Render ``curves`` as closed paths with equal-aspect axes.

    ``styles`` entries may set ``stroke``, ``dash``, ``width`` and
    ``label``; missing entries cycle through a default palette with distinct
    strokes.  The document is returned and, when ``path`` is given, written
    there.
    """
    if not curves:
        raise ValueError("emit_svg needs at least one curve")
    styles = list(styles or [])
    pts = np.vstack([c.points for c in curves])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    scale = (SIZE - 2 * MARGIN) / span
    width = MARGIN * 2 + (hi[0] - lo[0]) * scale
    height = MARGIN * 2 + (hi[1] - lo[1]) * scale
    labels = []
    body = []
    for k, curve in enumerate(curves):
        style = dict(DEFAULT_STYLES[k % len(DEFAULT_STYLES)])
        if k < len(styles):
            style.update(styles[k])
        if k >= len(DEFAULT_STYLES) and k >= len(styles):
            style["stroke"] = f"hsl({(k * 67) % 360},60%,40%)"
        sx = MARGIN + (curve.x - lo[0]) * scale
        sy = height - MARGIN - (curve.y - lo[1]) * scale
        d = "M " + " L ".join(f"{_num(a)} {_num(b)}" for a, b in zip(sx, sy)) + " Z"
        attrs = f'fill="none" stroke="{style["stroke"]}" stroke-width="{style.get("width", 1.5)}"'
        if style.get("dash"):
            attrs += f' stroke-dasharray="{style["dash"]}"'
        body.append(f'  <path d="{d}" {attrs}/>')
        if style.get("label"):
            labels.append((style["label"], style["stroke"], style.get("dash")))
    legend = []
    for i, (text, stroke, dash) in enumerate(labels):
        y = MARGIN + i * LEGEND_ROW
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        legend.append(f'  <line x1="{MARGIN}" y1="{y}" x2="{MARGIN + 24}" y2="{y}" '
                      f'stroke="{stroke}" stroke-width="2"{dash_attr}/>')
        legend.append(f'  <text x="{MARGIN + 30}" y="{y + 4}" font-size="11" '
                      f'font-family="sans-serif">{_escape(text)}</text>')
    doc = "\n".join([
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">',
        f'  <rect width="100%" height="100%" fill="white"/>',
        *body,
        *legend,
        "</svg>",
        "",
    ])
    if path is not None:
        Path(path).write_text(doc)
    return doc


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
