"""Marching-squares iso-lines with linear interpolation."""
from __future__ import annotations

import numpy as np


def _crossing(p0, p1, z0, z1, level):
    t = (level - z0) / (z1 - z0)
    return (p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]))


def marching_squares(x, y, z, level: float) -> list[np.ndarray]:
    """Iso-lines of ``z`` at ``level``.

    Args:
        x: axis of length nx (first index of ``z``).
        y: axis of length ny (second index of ``z``).
        z: array of shape (nx, ny); must be finite.
        level: iso-value. Corners with ``z >= level`` count as inside.

    Returns:
        A list of (k, 2) arrays of (x, y) vertices. Open lines run from one
        boundary edge to another; closed loops repeat their first vertex.
        Saddle cells are resolved with the cell-centre average.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.shape != (x.size, y.size):
        raise ValueError(f"z has shape {z.shape}, expected {(x.size, y.size)}")
    if not np.all(np.isfinite(z)):
        bad = np.argwhere(~np.isfinite(z))
        raise ValueError(f"non-finite values at indices {bad.tolist()}")
    if z.size == 0 or level < z.min() or level > z.max():
        return []

    inside = z >= level
    points: dict[tuple, tuple[float, float]] = {}

    def edge_point(key):
        if key not in points:
            kind, i, j = key
            i2, j2 = (i + 1, j) if kind == "h" else (i, j + 1)
            points[key] = _crossing((x[i], y[j]), (x[i2], y[j2]), z[i, j], z[i2, j2], level)
        return key

    segments: list[tuple[tuple, tuple]] = []
    for i in range(x.size - 1):
        for j in range(y.size - 1):
            c = (inside[i, j], inside[i + 1, j], inside[i + 1, j + 1], inside[i, j + 1])
            if all(c) or not any(c):
                continue
            e = (("h", i, j), ("v", i + 1, j), ("h", i, j + 1), ("v", i, j))
            # edge k joins corners k and k+1
            crossed = [e[k] for k in range(4) if c[k] != c[(k + 1) % 4]]
            if len(crossed) == 2:
                segments.append((edge_point(crossed[0]), edge_point(crossed[1])))
                continue
            centre = 0.25 * (z[i, j] + z[i + 1, j] + z[i + 1, j + 1] + z[i, j + 1]) >= level
            if centre == c[0]:
                pairs = ((e[0], e[1]), (e[2], e[3]))
            else:
                pairs = ((e[3], e[0]), (e[1], e[2]))
            for a, b in pairs:
                segments.append((edge_point(a), edge_point(b)))

    return [np.array([points[k] for k in chain]) for chain in _join(segments)]


def _join(segments):
    links: dict[tuple, list[int]] = {}
    for idx, (a, b) in enumerate(segments):
        links.setdefault(a, []).append(idx)
        links.setdefault(b, []).append(idx)
    used = [False] * len(segments)

    def walk(start_seg, start_key):
        chain = [start_key]
        seg, key = start_seg, start_key
        while True:
            used[seg] = True
            a, b = segments[seg]
            key = b if key == a else a
            chain.append(key)
            nxt = [s for s in links[key] if not used[s]]
            if not nxt:
                return chain
            seg = nxt[0]

    chains = []
    # open lines start at edges used by a single segment
    for idx, (a, b) in enumerate(segments):
        if used[idx]:
            continue
        for key in (a, b):
            if len(links[key]) == 1:
                chains.append(walk(idx, key))
                break
    for idx, (a, _) in enumerate(segments):
        if not used[idx]:
            chains.append(walk(idx, a))
    return chains
