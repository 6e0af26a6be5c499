"""Trajectory figures as standalone SVG 1.1 documents.

One group per eigenvalue path, one short line segment per grid interval,
colored by the time parameter in shades of red (bright toward t = 0,
darkening as |t| sqrt(N) grows). The viewport covers [-1.5, 1.5]^2 with
the unit circle stroked for reference and the t = 1 anchors as dots.
"""

from __future__ import annotations

import numpy as np

_DEFAULT_STYLE = {
    "size": 720,
    "stroke_width": 0.006,
    "circle_color": "#888888",
    "circle_width": 0.004,
    "anchor_radius": 0.012,
    "anchor_color": "#000000",
    "background": "#ffffff",
}


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _segment_color(t_mid: float, n: int) -> str:
    scale = abs(t_mid) * np.sqrt(n)
    red = 1.0 / (1.0 + scale / 5.0)
    green = 1.0 / (3.0 + 10.0 * scale)
    return f"rgb({round(255 * red)},{round(255 * green)},0)"


def emit_trajectory_svg(bundle, style: dict | None = None) -> str:
    """Render a trajectory bundle to an SVG document string."""
    if bundle.paths.size == 0:
        raise ValueError("empty bundle")
    opts = dict(_DEFAULT_STYLE)
    if style:
        unknown = set(style) - set(opts)
        if unknown:
            raise ValueError(f"unknown style keys {sorted(unknown)}")
        opts.update(style)
    size = opts["size"]
    t_grid = bundle.t_grid
    n = bundle.n
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{size}" height="{size}" viewBox="-1.5 -1.5 3 3">',
        f'<rect x="-1.5" y="-1.5" width="3" height="3" fill="{opts["background"]}"/>',
        f'<circle cx="0" cy="0" r="1" fill="none" stroke="{opts["circle_color"]}" '
        f'stroke-width="{opts["circle_width"]}"/>',
    ]
    for j in range(n):
        segs = []
        for k in range(t_grid.size - 1):
            a = bundle.paths[j, k]
            b = bundle.paths[j, k + 1]
            color = _segment_color(0.5 * (t_grid[k] + t_grid[k + 1]), n)
            segs.append(
                f'<line x1="{_fmt(a.real)}" y1="{_fmt(-a.imag)}" '
                f'x2="{_fmt(b.real)}" y2="{_fmt(-b.imag)}" stroke="{color}" '
                f'stroke-width="{opts["stroke_width"]}" stroke-linecap="round"/>')
        parts.append(f'<g class="traj" id="traj-{j}">' + "".join(segs) + "</g>")
    anchor_col = int(np.argmax(t_grid))
    for j in range(n):
        z = bundle.paths[j, anchor_col]
        parts.append(
            f'<circle cx="{_fmt(z.real)}" cy="{_fmt(-z.imag)}" '
            f'r="{opts["anchor_radius"]}" fill="{opts["anchor_color"]}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
