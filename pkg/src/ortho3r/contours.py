"""Marching-squares contour extraction and minimal SVG plotting."""

from __future__ import annotations

import numpy as np

# case -> crossed edge pairs; edges: 0 bottom, 1 right, 2 top, 3 left
_CASES = {
    1: [(3, 0)],
    2: [(0, 1)],
    3: [(3, 1)],
    4: [(1, 2)],
    6: [(0, 2)],
    7: [(3, 2)],
    8: [(2, 3)],
    9: [(2, 0)],
    11: [(2, 1)],
    12: [(1, 3)],
    13: [(1, 0)],
    14: [(0, 3)],
}


def _interp(va, vb, pa, pb, level):
    t = (level - va) / (vb - va)
    return (pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]))


def marching_squares(
    x: np.ndarray, y: np.ndarray, values: np.ndarray, level: float
) -> list[np.ndarray]:
    """Iso-level polylines of values sampled at the grid (x_j, y_i).

    values has shape (len(y), len(x)).  Saddle cells (cases 5 and 10) are
    split by the cell-center average.  Segments are chained into polylines
    by matching endpoints.
    """
    values = np.asarray(values, float)
    ny, nx = values.shape
    if (len(y), len(x)) != (ny, nx):
        raise ValueError("axis lengths must match values shape")
    segs = []
    above = values >= level
    for i in range(ny - 1):
        for j in range(nx - 1):
            v = (
                values[i, j],
                values[i, j + 1],
                values[i + 1, j + 1],
                values[i + 1, j],
            )
            idx = (
                (1 if above[i, j] else 0)
                | (2 if above[i, j + 1] else 0)
                | (4 if above[i + 1, j + 1] else 0)
                | (8 if above[i + 1, j] else 0)
            )
            if idx in (0, 15):
                continue
            corners = (
                (x[j], y[i]),
                (x[j + 1], y[i]),
                (x[j + 1], y[i + 1]),
                (x[j], y[i + 1]),
            )
            edges = {}
            for e, (a, b) in enumerate(((0, 1), (1, 2), (2, 3), (3, 0))):
                if (v[a] >= level) != (v[b] >= level):
                    edges[e] = _interp(v[a], v[b], corners[a], corners[b], level)
            if idx in (5, 10):
                center_above = 0.25 * sum(v) >= level
                if idx == 5:
                    pairs = [(3, 0), (1, 2)] if center_above else [(3, 2), (1, 0)]
                else:
                    pairs = [(0, 1), (2, 3)] if center_above else [(0, 3), (2, 1)]
            else:
                pairs = _CASES[idx]
            for ea, eb in pairs:
                segs.append((edges[ea], edges[eb]))
    return _chain(segs)


def _chain(segs) -> list[np.ndarray]:
    """Join segments into polylines by endpoint matching."""

    def key(pt):
        return (round(pt[0], 9), round(pt[1], 9))

    ends: dict = {}
    alive: dict[int, list] = {}
    next_id = 0
    for a, b in segs:
        ka, kb = key(a), key(b)
        ia = ends.pop(ka, None)
        ib = ends.pop(kb, None)
        if ia is not None and ib is not None:
            if ia == ib:  # segment closes the loop
                alive[ia].append(alive[ia][0])
                continue
            pa, pb = alive.pop(ia), alive.pop(ib)
            if key(pa[-1]) != ka:
                pa.reverse()
            if key(pb[0]) != kb:
                pb.reverse()
            merged = pa + pb
            alive[next_id] = merged
            ends[key(merged[0])] = next_id
            ends[key(merged[-1])] = next_id
            next_id += 1
        elif ia is not None:
            path = alive[ia]
            if key(path[-1]) == ka:
                path.append(b)
            else:
                path.insert(0, b)
            ends[kb] = ia
        elif ib is not None:
            path = alive[ib]
            if key(path[-1]) == kb:
                path.append(a)
            else:
                path.insert(0, a)
            ends[ka] = ib
        else:
            alive[next_id] = [a, b]
            ends[ka] = next_id
            ends[kb] = next_id
            next_id += 1
    return [np.asarray(p) for p in alive.values()]


def svg_document(
    paths: list[tuple[np.ndarray, str]],
    points: list[tuple[float, float, str]] | None = None,
    bounds: tuple[float, float, float, float] | None = None,
    size: int = 640,
    title: str = "",
) -> str:
    """A standalone SVG 1.1 document from data-space polylines.

    paths: (polyline array (n, 2), stroke color); points: (x, y, fill).
    Data y grows upward; the viewBox flips it for screen coordinates.
    """
    if bounds is None:
        allpts = np.vstack([p for p, _ in paths]) if paths else np.zeros((1, 2))
        xmin, ymin = allpts.min(axis=0)
        xmax, ymax = allpts.max(axis=0)
    else:
        xmin, xmax, ymin, ymax = bounds
    w = max(xmax - xmin, 1e-9)
    h = max(ymax - ymin, 1e-9)
    pad = 0.04 * max(w, h)
    xmin, xmax = xmin - pad, xmax + pad
    ymin, ymax = ymin - pad, ymax + pad
    w, h = xmax - xmin, ymax - ymin
    scale = size / max(w, h)
    width, height = w * scale, h * scale

    def tx(x):
        return (x - xmin) * scale

    def ty(y):
        return (ymax - y) * scale

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width:.1f}" height="{height:.1f}" '
        f'viewBox="0 0 {width:.1f} {height:.1f}">',
    ]
    if title:
        parts.append(f"<title>{title}</title>")
    parts.append(f'<rect width="{width:.1f}" height="{height:.1f}" fill="white"/>')
    for poly, color in paths:
        if len(poly) < 2:
            continue
        d = "M " + " L ".join(f"{tx(px):.2f} {ty(py):.2f}" for px, py in poly)
        parts.append(
            f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1.2"/>'
        )
    for x, y, color in points or []:
        parts.append(
            f'<circle cx="{tx(x):.2f}" cy="{ty(y):.2f}" r="3.5" fill="{color}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
