"""Voxel domains on hZ^8 and their boundary-layer decomposition.

A domain is a finite mask of lattice points at spacing h.  The classifier
produces the three one-step boundary layers: the interior layer (mask points
with an outside neighbour), the middle layer (points straddled by a mask
neighbour on one side of some axis and an exterior neighbour opposite), and
the exterior layer.  The middle layer consists of the straddle points outside
the mask, and the exterior domain used by the formulas is the open complement
with the middle layer removed; this keeps the three layers pairwise disjoint
and reproduces the cuboid convention where the middle layer is the surface
shell between interior and exterior.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

__all__ = [
    "LatticeDomain",
    "BoundaryLayers",
    "classify",
    "face_sublayers",
    "sublayers_wrt",
    "characteristic",
    "in_exterior",
    "membership_grid",
    "exterior_selector",
    "cuboid_interior",
    "l_shaped_interior",
    "read_mask_file",
    "write_mask_file",
    "parse_domain_spec",
]

Point = tuple[int, ...]


def _neighbors(p: Point):
    for j in range(8):
        q = list(p)
        q[j] += 1
        yield tuple(q)
        q[j] -= 2
        yield tuple(q)


def _shift_point(p: Point, j: int, s: int) -> Point:
    q = list(p)
    q[j] += s
    return tuple(q)


@dataclass(frozen=True)
class LatticeDomain:
    """Finite point mask with spacing h."""

    h: float
    mask: frozenset

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("lattice spacing must be positive")
        if not self.mask:
            raise ValueError("domain mask must be nonempty")
        for p in self.mask:
            if len(p) != 8:
                raise ValueError("lattice points have 8 integer coordinates")

    @property
    def bbox(self) -> tuple[Point, Point]:
        pts = np.array(sorted(self.mask))
        return tuple(int(v) for v in pts.min(axis=0)), tuple(
            int(v) for v in pts.max(axis=0)
        )

    def __contains__(self, p) -> bool:
        return tuple(p) in self.mask


@dataclass(frozen=True)
class BoundaryLayers:
    """The three boundary layers and the per-axis middle sub-layers."""

    gamma_plus: frozenset
    gamma_star: frozenset
    gamma_minus: frozenset
    star_sub: tuple  # star_sub[j] = (left set, right set)
    exterior_near: frozenset  # exterior points within the two-step collar


def membership_grid(points, lo, hi) -> np.ndarray:
    """Boolean grid over the box [lo, hi] marking the given points."""
    lo = np.asarray(lo)
    shape = tuple(np.asarray(hi) - lo + 1)
    g = np.zeros(shape, dtype=bool)
    for p in points:
        rel = np.subtract(p, lo)
        if np.all(rel >= 0) and np.all(rel < shape):
            g[tuple(rel)] = True
    return g


def _shifted(grid: np.ndarray, j: int, s: int, fill: bool) -> np.ndarray:
    """grid evaluated at p + s e_j, with out-of-box values set to fill."""
    pad = [(1, 1) if ax == j else (0, 0) for ax in range(grid.ndim)]
    p = np.pad(grid, pad, constant_values=fill)
    n = grid.shape[j]
    sl = tuple(
        slice(1 + s, 1 + s + n) if ax == j else slice(None)
        for ax in range(grid.ndim)
    )
    return p[sl]


def _grid_to_set(grid: np.ndarray, lo) -> frozenset:
    idx = np.argwhere(grid)
    lo = np.asarray(lo)
    return frozenset(tuple(int(v) for v in row + lo) for row in idx)


def classify(domain: LatticeDomain) -> BoundaryLayers:
    """Compute the boundary layers of a domain (vectorized over a collar
    three steps beyond the bounding box)."""
    lo0, hi0 = domain.bbox
    lo = tuple(a - 3 for a in lo0)
    hi = tuple(b + 3 for b in hi0)
    M = membership_grid(domain.mask, lo, hi)
    notM = ~M

    def any_shift(g, fill):
        out = np.zeros_like(g)
        for j in range(8):
            out |= _shifted(g, j, +1, fill)
            out |= _shifted(g, j, -1, fill)
        return out

    # interior layer: mask points with an outside neighbour
    gplus = M & any_shift(notM, fill=True)

    # literal interior-of-complement: complement points with a complement
    # neighbour (everything outside the box qualifies)
    extlit = notM & any_shift(notM, fill=True)

    # middle layer: straddle points outside the mask
    star = np.zeros_like(M)
    for j in range(8):
        up_m = _shifted(M, j, +1, fill=False)
        dn_m = _shifted(M, j, -1, fill=False)
        up_e = _shifted(extlit, j, +1, fill=True)
        dn_e = _shifted(extlit, j, -1, fill=True)
        star |= (up_m & dn_e) | (dn_m & up_e)
    star &= notM

    ext = extlit & ~star
    # exterior layer: exterior points with a non-exterior neighbour
    gminus = ext & any_shift(~ext, fill=False)

    gamma_star = _grid_to_set(star, lo)
    star_sub = tuple(
        (
            _grid_to_set(star & _shifted(M, j, +1, fill=False), lo),
            _grid_to_set(star & _shifted(M, j, -1, fill=False), lo),
        )
        for j in range(8)
    )
    # report the exterior within the two-step collar
    crop = tuple(slice(1, n - 1) for n in ext.shape)
    ext_near = _grid_to_set(ext[crop], tuple(a + 1 for a in lo))
    return BoundaryLayers(
        gamma_plus=_grid_to_set(gplus, lo),
        gamma_star=gamma_star,
        gamma_minus=_grid_to_set(gminus, lo),
        star_sub=star_sub,
        exterior_near=ext_near,
    )


@lru_cache(maxsize=32)
def classify_cached(domain: LatticeDomain) -> BoundaryLayers:
    return classify(domain)


def in_exterior(p: Point, domain: LatticeDomain, gamma_star: frozenset) -> bool:
    """Pointwise membership in the exterior domain used by the formulas."""
    p = tuple(p)
    if p in domain.mask or p in gamma_star:
        return False
    return any(q not in domain.mask for q in _neighbors(p))


def exterior_selector(domain: LatticeDomain, gamma_star: frozenset, lo, hi):
    """Boolean grid over [lo, hi] of exterior-domain membership."""
    M = membership_grid(domain.mask, lo, hi)
    notM = ~M
    has_cn = np.zeros_like(M)
    for j in range(8):
        has_cn |= _shifted(notM, j, +1, fill=True)
        has_cn |= _shifted(notM, j, -1, fill=True)
    S = membership_grid(gamma_star, lo, hi)
    return notM & has_cn & ~S


def face_sublayers(layers: BoundaryLayers, domain: LatticeDomain, j: int):
    """Left/right middle sub-layers along axis j.

    Left collects middle points whose +e_j neighbour is in the mask, right
    those whose -e_j neighbour is; on a cuboid these are the two faces normal
    to axis j.  Corner points of non-convex masks may appear in both.
    """
    if j not in range(8):
        raise ValueError("axis out of range 0..7")
    return layers.star_sub[j]


def sublayers_wrt(gamma_star: frozenset, side, j: int):
    """Left/right sub-layers of the middle layer relative to a volume set.

    With side = the mask this is ``face_sublayers``; with side = the exterior
    domain it realizes the direction reversal of the exterior statements
    (including re-entrant corners adjoining the exterior on both sides).
    ``side`` may be a set or a membership predicate.
    """
    member = side if callable(side) else (lambda p: p in side)
    left = frozenset(p for p in gamma_star if member(_shift_point(p, j, 1)))
    right = frozenset(p for p in gamma_star if member(_shift_point(p, j, -1)))
    return left, right


def characteristic(domain: LatticeDomain):
    """Indicator of the mask; zero elsewhere."""
    mask = domain.mask

    def chi(p) -> float:
        return 1.0 if tuple(p) in mask else 0.0

    return chi


def cuboid_interior(sides, h: float = 1.0) -> LatticeDomain:
    """Open cuboid per the index convention m_i in [1, N_i - 1].

    ``sides`` gives the N_i; the middle layer then sits at m_i in {0, N_i}.
    """
    sides = tuple(int(n) for n in sides)
    if len(sides) != 8 or any(n < 2 for n in sides):
        raise ValueError("need 8 sides, each >= 2")
    pts = product(*[range(1, n) for n in sides])
    return LatticeDomain(h, frozenset(pts))


def l_shaped_interior(sides, h: float = 1.0) -> LatticeDomain:
    """Open cuboid minus its top corner voxel."""
    dom = cuboid_interior(sides, h)
    corner = tuple(n - 1 for n in sides)
    mask = set(dom.mask)
    mask.discard(corner)
    return LatticeDomain(h, frozenset(mask))


# -- mask file format ---------------------------------------------------------
# header "h=<value>", then one line per point: 8 integers.


def write_mask_file(domain: LatticeDomain, path_or_buf) -> None:
    buf = path_or_buf if hasattr(path_or_buf, "write") else open(path_or_buf, "w")
    try:
        buf.write(f"h={domain.h!r}\n")
        for p in sorted(domain.mask):
            buf.write(" ".join(str(c) for c in p) + "\n")
    finally:
        if buf is not path_or_buf:
            buf.close()


def read_mask_file(path_or_buf) -> LatticeDomain:
    buf = path_or_buf if hasattr(path_or_buf, "read") else open(path_or_buf)
    try:
        header = buf.readline().strip()
        if not header.startswith("h="):
            raise ValueError("mask file must start with an h=<value> header")
        h = float(header[2:])
        pts = []
        for line in buf:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            coords = tuple(int(t) for t in line.split())
            if len(coords) != 8:
                raise ValueError(f"expected 8 coordinates, got {len(coords)}")
            pts.append(coords)
        return LatticeDomain(h, frozenset(pts))
    finally:
        if buf is not path_or_buf:
            buf.close()


def parse_domain_spec(spec: str, h: float = 1.0) -> LatticeDomain:
    """CLI domain descriptors: ``cuboid:N0,...,N7``, ``lshape:N0,...,N7``,
    or ``file:<path>``."""
    kind, _, rest = spec.partition(":")
    if kind == "cuboid":
        return cuboid_interior([int(t) for t in rest.split(",")], h)
    if kind == "lshape":
        return l_shaped_interior([int(t) for t in rest.split(",")], h)
    if kind == "file":
        return read_mask_file(rest)
    raise ValueError(f"unknown domain spec {spec!r}")
