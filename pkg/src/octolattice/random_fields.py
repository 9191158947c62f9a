"""Reproducible pseudorandom test fields.

The counter-based Philox bit generator fixes the stream across platforms;
components are uniform in [-amplitude, amplitude], drawn in row-major point
order, component index fastest.
"""

from __future__ import annotations

import numpy as np

from .fields import OctField, Window

__all__ = ["random_field", "field_on_points"]


def random_field(seed: int, lo, shape, amplitude: float = 1.0) -> OctField:
    """Uniform random octonion field on the window (lo, shape)."""
    win = Window(tuple(lo), tuple(shape))
    rng = np.random.Generator(np.random.Philox(seed))
    data = rng.uniform(-amplitude, amplitude, size=win.shape + (8,))
    return OctField(win, data)


def field_on_points(seed: int, points, amplitude: float = 1.0) -> OctField:
    """Random octonion values on the listed points, zero elsewhere."""
    pts = np.array(sorted(tuple(p) for p in points))
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    win = Window(tuple(lo), tuple(hi - lo + 1))
    rng = np.random.Generator(np.random.Philox(seed))
    f = OctField(win)
    vals = rng.uniform(-amplitude, amplitude, size=(len(pts), 8))
    for row, p in zip(vals, pts):
        f.data[tuple(p - lo)] = row
    return OctField(win, f.data)
