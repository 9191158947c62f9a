"""Window-backed lattice fields, dense or sparse.

Fields evaluate to zero outside their support.  Dense octonion fields hold a
(*shape, 8) array over an axis-aligned window; sparse ones hold values on an
explicit point list (used for boundary collars whose bounding box would be
far too large to materialize).  Split-valued fields hold one dense
coefficient array per normal-form word.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .octonion import Octonion
from .weyl import SplitElement

__all__ = [
    "Window",
    "OctField",
    "SparseOctField",
    "SplitField",
    "encode_points",
]

Point = tuple[int, ...]

_KEY_OFFSET = 128
_KEY_BASE = 256


def encode_points(pts: np.ndarray) -> np.ndarray:
    """Pack integer 8-vectors in [-128, 127] into sortable int64 keys."""
    pts = np.asarray(pts, dtype=np.int64)
    if pts.size and (pts.min() < -_KEY_OFFSET or pts.max() >= _KEY_BASE - _KEY_OFFSET):
        raise ValueError("coordinates out of the packable range [-128, 127]")
    keys = np.zeros(pts.shape[:-1], dtype=np.int64)
    for i in range(8):
        keys = keys * _KEY_BASE + (pts[..., i] + _KEY_OFFSET)
    return keys


@dataclass(frozen=True)
class Window:
    lo: Point
    shape: Point

    def __post_init__(self):
        if len(self.lo) != 8 or len(self.shape) != 8:
            raise ValueError("windows are 8-dimensional")
        if any(n <= 0 for n in self.shape):
            raise ValueError("window shape must be positive")

    @property
    def hi(self) -> Point:
        return tuple(a + n - 1 for a, n in zip(self.lo, self.shape))

    def inflate(self, m: int) -> "Window":
        return Window(
            tuple(a - m for a in self.lo), tuple(n + 2 * m for n in self.shape)
        )

    def points(self) -> np.ndarray:
        """All window points as an (N, 8) int array, row-major."""
        grids = np.meshgrid(
            *[np.arange(a, a + n) for a, n in zip(self.lo, self.shape)],
            indexing="ij",
        )
        return np.stack([g.ravel() for g in grids], axis=-1)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts)
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        return np.all((pts >= lo) & (pts <= hi), axis=-1)

    def ravel_index(self, pts: np.ndarray) -> np.ndarray:
        """Flat indices of points assumed inside the window."""
        rel = np.asarray(pts) - np.array(self.lo)
        return np.ravel_multi_index(rel.T, self.shape)


def _gather(data: np.ndarray, window: Window, pts: np.ndarray) -> np.ndarray:
    """Zero-padded gather of trailing-axis data at integer points."""
    pts = np.asarray(pts)
    inside = window.contains(pts)
    out_shape = pts.shape[:-1] + data.shape[len(window.shape):]
    out = np.zeros(out_shape, dtype=data.dtype)
    if np.any(inside):
        flat = data.reshape((-1,) + data.shape[len(window.shape):])
        out[inside] = flat[window.ravel_index(pts[inside])]
    return out


class OctField:
    """Octonion-valued field: (*window.shape, 8) coefficients."""

    def __init__(self, window: Window, data: np.ndarray | None = None):
        self.window = window
        if data is None:
            data = np.zeros(window.shape + (8,))
        if data.shape != window.shape + (8,):
            raise ValueError("data shape does not match window")
        self.data = data

    @staticmethod
    def from_values(values: dict, h_margin: int = 0) -> "OctField":
        """Build from a {point: Octonion} mapping."""
        pts = np.array(sorted(values))
        lo = tuple(pts.min(axis=0) - h_margin)
        hi = pts.max(axis=0) + h_margin
        win = Window(lo, tuple(hi - np.array(lo) + 1))
        f = OctField(win)
        for p, v in values.items():
            rel = tuple(np.array(p) - np.array(lo))
            f.data[rel] = v.as_array() if isinstance(v, Octonion) else np.asarray(v)
        return f

    def value(self, p: Point) -> Octonion:
        return Octonion.from_array(self.sample(np.array([p]))[0])

    def sample(self, pts: np.ndarray) -> np.ndarray:
        """(N, 8) component values at integer points, zero outside."""
        return _gather(self.data, self.window, pts)

    def sample_comp(self, pts: np.ndarray, k: int) -> np.ndarray:
        return self.sample(pts)[..., k]

    def shift_sample(self, pts: np.ndarray, j: int, s: int) -> np.ndarray:
        q = np.asarray(pts).copy()
        q[..., j] += s
        return self.sample(q)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def __add__(self, other: "OctField") -> "OctField":
        if other.window != self.window:
            raise ValueError("window mismatch")
        return OctField(self.window, self.data + other.data)

    def __sub__(self, other: "OctField") -> "OctField":
        if other.window != self.window:
            raise ValueError("window mismatch")
        return OctField(self.window, self.data - other.data)

    def __rmul__(self, s: float) -> "OctField":
        return OctField(self.window, s * self.data)


class SparseOctField:
    """Octonion field on an explicit point list; zero elsewhere.

    Mirrors the sampling interface of OctField without materializing the
    bounding box, so collar-shaped supports stay cheap.
    """

    def __init__(self, points: np.ndarray, values: np.ndarray):
        points = np.asarray(points, dtype=int).reshape(-1, 8)
        order = np.argsort(encode_points(points), kind="stable")
        self.points = points[order]
        self.values = np.asarray(values, dtype=float).reshape(-1, 8)[order]
        self.keys = encode_points(self.points)
        if len(np.unique(self.keys)) != len(self.keys):
            raise ValueError("duplicate points in sparse field")
        lo = tuple(int(v) for v in self.points.min(axis=0))
        hi = self.points.max(axis=0)
        self.window = Window(lo, tuple(int(v) for v in hi - np.array(lo) + 1))

    @staticmethod
    def from_values(values: dict) -> "SparseOctField":
        pts = np.array(sorted(values))
        vals = np.array(
            [
                values[tuple(p)].as_array()
                if isinstance(values[tuple(p)], Octonion)
                else np.asarray(values[tuple(p)], dtype=float)
                for p in pts
            ]
        )
        return SparseOctField(pts, vals)

    def sample(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts)
        keys = encode_points(pts.reshape(-1, 8))
        idx = np.searchsorted(self.keys, keys)
        idx = np.clip(idx, 0, len(self.keys) - 1)
        hit = self.keys[idx] == keys
        out = np.zeros((len(keys), 8))
        out[hit] = self.values[idx[hit]]
        return out.reshape(pts.shape[:-1] + (8,))

    def sample_comp(self, pts: np.ndarray, k: int) -> np.ndarray:
        return self.sample(pts)[..., k]

    def shift_sample(self, pts: np.ndarray, j: int, s: int) -> np.ndarray:
        q = np.asarray(pts).copy()
        q[..., j] += s
        return self.sample(q)

    def value(self, p) -> Octonion:
        return Octonion.from_array(self.sample(np.array([p]))[0])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def support_points(self) -> np.ndarray:
        return self.points


class SplitField:
    """Split-algebra-valued field: one dense coefficient array per word."""

    def __init__(self, window: Window, coeffs: dict | None = None):
        self.window = window
        self.coeffs = coeffs if coeffs is not None else {}

    def add_word(self, word: tuple, arr: np.ndarray) -> None:
        cur = self.coeffs.get(word)
        self.coeffs[word] = arr.copy() if cur is None else cur + arr

    def value(self, p: Point) -> SplitElement:
        pts = np.array([p])
        terms = {}
        for w, arr in self.coeffs.items():
            v = _gather(arr, self.window, pts)[0]
            if v != 0:
                terms[w] = v
        return SplitElement(terms)

    def values(self, pts: np.ndarray) -> dict:
        """{word: (N,) array} at the given points."""
        return {w: _gather(arr, self.window, pts) for w, arr in self.coeffs.items()}

    def max_abs(self) -> float:
        return max(
            (float(np.max(np.abs(a))) for a in self.coeffs.values()), default=0.0
        )

    def prune(self, tol: float = 0.0) -> "SplitField":
        kept = {
            w: a for w, a in self.coeffs.items() if np.max(np.abs(a)) > tol
        }
        return SplitField(self.window, kept)

    def __sub__(self, other: "SplitField") -> "SplitField":
        if other.window != self.window:
            raise ValueError("window mismatch")
        out = SplitField(self.window, {w: a.copy() for w, a in self.coeffs.items()})
        for w, a in other.coeffs.items():
            out.add_word(w, -a)
        return out
