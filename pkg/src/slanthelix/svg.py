"""Orthographic SVG views of curves on the unit sphere."""

from __future__ import annotations

from typing import Dict, Sequence

import numpy as np

SIZE = 800
RADIUS = 380.0
VIEWS = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}
COLORS = {"curve": "#1f4e9c", "T": "#c0392b", "N": "#27ae60", "B": "#8e44ad", "Y": "#d68910"}


def to_pixels(points: np.ndarray, view: str) -> np.ndarray:
    i, j = VIEWS[view]
    pts = np.asarray(points, dtype=float)
    return np.column_stack([SIZE / 2 + RADIUS * pts[:, i], SIZE / 2 - RADIUS * pts[:, j]])


def _path(px: np.ndarray, max_jump: float = 200.0) -> str:
    # break the polyline at non-finite samples and at jumps across the view
    parts, pen_down, prev = [], False, None
    for x, y in px:
        if not (np.isfinite(x) and np.isfinite(y)):
            pen_down = False
            continue
        if pen_down and prev is not None and np.hypot(x - prev[0], y - prev[1]) > max_jump:
            pen_down = False
        parts.append(f"{'L' if pen_down else 'M'}{x:.3f},{y:.3f}")
        pen_down, prev = True, (x, y)
    return " ".join(parts)


def render(objects: Dict[str, np.ndarray], view: str, title: str = "") -> str:
    """One SVG document drawing every named sample array in ``objects``."""
    if view not in VIEWS:
        raise ValueError(f"unknown view {view!r}; choose from {sorted(VIEWS)}")
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SIZE} {SIZE}" '
        f'width="{SIZE}" height="{SIZE}">',
        f"<title>{title} ({view})</title>" if title else f"<title>{view}</title>",
        f'<circle cx="{SIZE / 2:.3f}" cy="{SIZE / 2:.3f}" r="{RADIUS:.3f}" '
        'fill="none" stroke="#999999" stroke-width="1"/>',
    ]
    for name, pts in objects.items():
        color = COLORS.get(name, "#000000")
        lines.append(f'<path id="{name}" d="{_path(to_pixels(pts, view))}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def path_points(svg: str, name: str) -> np.ndarray:
    """Pixel coordinates of the path with id ``name`` (for checks and tests)."""
    import re

    m = re.search(rf'<path id="{name}" d="([^"]*)"', svg)
    if m is None:
        raise KeyError(name)
    return np.array([[float(v) for v in tok[1:].split(",")] for tok in m.group(1).split()])
