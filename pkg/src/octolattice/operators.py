"""Finite differences, the discrete Cauchy-Riemann operators, and the
star-Laplacian, acting on window-backed fields.

The two first-order operators attach the positive generator to the forward
difference and the negative one to the backward difference (swapped for the
adjoint); both square to minus the star-Laplacian, which the test suite
verifies symbolically from the reduction tables and numerically on random
fields.
"""

from __future__ import annotations

import numpy as np

from .domain import LatticeDomain, classify
from .fields import OctField, SplitField, Window
from .octonion import Octonion
from .weyl import NGEN, normal_order, rebracket_sign

__all__ = [
    "fwd_diff",
    "bwd_diff",
    "dirac_pm",
    "dirac_mp",
    "dirac_right_mp",
    "star_laplacian",
    "monogenicity_residual",
    "monogenic_basis",
    "PAIR_RED",
    "TRIPLE_RED",
    "LEFT_TRIPLE_RED",
]


def _reduce_seq(seq):
    out: dict = {}
    normal_order(seq, 1.0, out)
    return tuple(sorted(out.items()))


def _build_tables():
    pair = {}
    triple = {}
    left = {}
    for a in range(NGEN):
        for b in range(NGEN):
            pair[(a, b)] = _reduce_seq((a, b))
            for c in range(NGEN):
                red = _reduce_seq((a, b, c))
                triple[(a, b, c)] = red
                s = rebracket_sign(a >> 1, b >> 1, c >> 1)
                left[(a, b, c)] = tuple((w, s * v) for w, v in red)
    return pair, triple, left


#: PAIR_RED[(a,b)]: normal form of g_a g_b, as ((word, coeff), ...)
#: TRIPLE_RED[(a,b,c)]: normal form of the right-bracketed g_a (g_b g_c)
#: LEFT_TRIPLE_RED[(a,b,c)]: normal form of the left-bracketed (g_a g_b) g_c
PAIR_RED, TRIPLE_RED, LEFT_TRIPLE_RED = _build_tables()


def _axis_diff(arr: np.ndarray, j: int, sign: int, h: float) -> np.ndarray:
    """One-sided difference along axis j over the array's own index box,
    reading zero beyond the edges."""
    pad = [(1, 1) if ax == j else (0, 0) for ax in range(arr.ndim)]
    p = np.pad(arr, pad)
    n = arr.shape[j]

    def sl(a, b):
        return tuple(
            slice(a, b) if ax == j else slice(None) for ax in range(arr.ndim)
        )

    if sign > 0:
        return (p[sl(2, n + 2)] - p[sl(1, n + 1)]) / h
    return (p[sl(1, n + 1)] - p[sl(0, n)]) / h


def _inflate_data(f: OctField, margins) -> np.ndarray:
    pad = [(m, m) for m in margins] + [(0, 0)]
    return np.pad(f.data, pad)


def fwd_diff(f: OctField, j: int, h: float = 1.0) -> OctField:
    """Forward difference along axis j; support grows by one step there."""
    margins = [1 if ax == j else 0 for ax in range(8)]
    win = Window(
        tuple(a - m for a, m in zip(f.window.lo, margins)),
        tuple(n + 2 * m for n, m in zip(f.window.shape, margins)),
    )
    return OctField(win, _axis_diff(_inflate_data(f, margins), j, +1, h))


def bwd_diff(f: OctField, j: int, h: float = 1.0) -> OctField:
    margins = [1 if ax == j else 0 for ax in range(8)]
    win = Window(
        tuple(a - m for a, m in zip(f.window.lo, margins)),
        tuple(n + 2 * m for n, m in zip(f.window.shape, margins)),
    )
    return OctField(win, _axis_diff(_inflate_data(f, margins), j, -1, h))


def _oct_diffs(f: OctField, h: float):
    """All 16 one-sided differences over the window inflated by one."""
    win = f.window.inflate(1)
    base = _inflate_data(f, [1] * 8)
    d = {}
    for j in range(8):
        d[(j, +1)] = _axis_diff(base, j, +1, h)
        d[(j, -1)] = _axis_diff(base, j, -1, h)
    return win, d


def _accumulate_products(window: Window, contributions, table, max_degree=3):
    """Build a SplitField from (gid, other_gid, coeff_array) contributions
    reduced through the given word table."""
    out = SplitField(window)
    for gid, other, arr in contributions:
        for w, coeff in table[(gid, other)]:
            if len(w) > max_degree:
                raise ValueError("degree overflow in operator application")
            out.add_word(w, coeff * arr)
    return out.prune()


def dirac_pm(f, h: float = 1.0):
    """Left action sum_j e_j^+ d^{+j} + e_j^- d^{-j}.

    Octonion input gives split-valued output; split-valued input is accepted
    while products stay within the word-degree bound.
    """
    if isinstance(f, OctField):
        return _dirac_oct(f, h, swap=False)
    return _dirac_split(f, h, swap=False)


def dirac_mp(f, h: float = 1.0):
    """Left action of the adjoint: sum_j e_j^+ d^{-j} + e_j^- d^{+j}."""
    if isinstance(f, OctField):
        return _dirac_oct(f, h, swap=True)
    return _dirac_split(f, h, swap=True)


def _dirac_oct(f: OctField, h: float, swap: bool) -> SplitField:
    win, d = _oct_diffs(f, h)
    contributions = []
    for j in range(8):
        for pol in (0, 1):
            sign = -1 if (pol == 1) ^ swap else +1
            gid = 2 * j + pol
            darr = d[(j, sign)]
            for k in range(8):
                comp = darr[..., k]
                if not np.any(comp):
                    continue
                for c in (0, 1):
                    contributions.append((gid, 2 * k + c, comp))
    return _accumulate_products(win, contributions, PAIR_RED)


def _dirac_split(
    v: SplitField, h: float, swap: bool, max_degree: int = 3
) -> SplitField:
    win = v.window.inflate(1)
    out = SplitField(win)
    for w, arr in v.coeffs.items():
        base = np.pad(arr, [(1, 1)] * 8)
        for j in range(8):
            for pol in (0, 1):
                sign = -1 if (pol == 1) ^ swap else +1
                gid = 2 * j + pol
                darr = _axis_diff(base, j, sign, h)
                if not np.any(darr):
                    continue
                red: dict = {}
                normal_order((gid,) + w, 1.0, red)
                for ww, coeff in red.items():
                    if len(ww) > max_degree:
                        raise ValueError("degree overflow in operator application")
                    out.add_word(ww, coeff * darr)
    return out.prune()


def dirac_right_mp(g: OctField, h: float = 1.0) -> SplitField:
    """Right action (g D^{-+}) = sum_j d^{-j}g e_j^+ + d^{+j}g e_j^-.

    Words keep the built order (component generator first, operator generator
    second); a further right factor rebrackets against that order.
    """
    win, d = _oct_diffs(g, h)
    contributions = []
    for j in range(8):
        for pol, sgn in ((0, -1), (1, +1)):
            gid = 2 * j + pol
            darr = d[(j, sgn)]
            for k in range(8):
                comp = darr[..., k]
                if not np.any(comp):
                    continue
                for c in (0, 1):
                    contributions.append((2 * k + c, gid, comp))
    return _accumulate_products(win, contributions, PAIR_RED)


def star_laplacian(f: OctField, h: float = 1.0) -> OctField:
    """Componentwise 17-point stencil sum_j d^{+j} d^{-j}."""
    win = f.window.inflate(1)
    base = _inflate_data(f, [1] * 8)
    out = np.zeros(win.shape + (8,))
    for j in range(8):
        up = _axis_diff(base, j, +1, h)
        dn = _axis_diff(base, j, -1, h)
        out += (up - dn) / h
    return OctField(win, out)


def _stencil_points(p):
    pts = [tuple(p)]
    for j in range(8):
        q = list(p)
        q[j] += 1
        pts.append(tuple(q))
        q[j] -= 2
        pts.append(tuple(q))
    return pts


def dirac_values_at(f: OctField, pts: np.ndarray, h: float = 1.0, swap: bool = False):
    """D^{+-} f (or the adjoint) evaluated at given points; {word: (N,)}."""
    out: dict = {}
    base = f.sample(pts)
    for j in range(8):
        up = f.shift_sample(pts, j, +1)
        dn = f.shift_sample(pts, j, -1)
        dplus = (up - base) / h
        dminus = (base - dn) / h
        for pol in (0, 1):
            darr = dminus if (pol == 1) ^ swap else dplus
            gid = 2 * j + pol
            for k in range(8):
                comp = darr[:, k]
                if not np.any(comp):
                    continue
                for c in (0, 1):
                    for w, coeff in PAIR_RED[(gid, 2 * k + c)]:
                        cur = out.get(w)
                        out[w] = coeff * comp if cur is None else cur + coeff * comp
    return out


def monogenicity_residual(f: OctField, domain: LatticeDomain, h: float = 1.0) -> float:
    """Max norm of D^{+-} f over points whose full stencil lies within the
    mask plus its middle boundary layer; zero iff f is discrete left
    monogenic there."""
    layers = classify(domain)
    region = set(domain.mask) | set(layers.gamma_star)
    check = [p for p in region if all(q in region for q in _stencil_points(p))]
    if not check:
        return 0.0
    vals = dirac_values_at(f, np.array(check), h)
    return max(
        (float(np.max(np.abs(arr))) for arr in vals.values()), default=0.0
    )


def monogenic_basis(domain: LatticeDomain, h: float = 1.0, max_unknowns: int = 12000):
    """Orthonormal basis of the nullspace of f -> D^{+-} f on the domain.

    Unknowns are octonion values on the mask plus the middle layer; one
    constraint block per point whose stencil stays inside that region.
    Dense SVD, so the region must stay small.
    """
    layers = classify(domain)
    region = sorted(set(domain.mask) | set(layers.gamma_star))
    n_unknowns = 8 * len(region)
    if n_unknowns > max_unknowns:
        raise ValueError(
            f"domain too large for dense nullspace ({n_unknowns} unknowns)"
        )
    index = {p: i for i, p in enumerate(region)}
    region_set = set(region)
    check = [p for p in region if all(q in region_set for q in _stencil_points(p))]

    rows: dict = {}

    def add(p, w, col, val):
        d = rows.setdefault((p, w), {})
        d[col] = d.get(col, 0.0) + val

    eye = np.eye(8, dtype=int)
    for p in check:
        for j in range(8):
            up = tuple(np.add(p, eye[j]))
            dn = tuple(np.subtract(p, eye[j]))
            for pol, pts_pair in ((0, (up, p)), (1, (p, dn))):
                gid = 2 * j + pol
                for k in range(8):
                    for c in (0, 1):
                        for w, coeff in PAIR_RED[(gid, 2 * k + c)]:
                            a, b = pts_pair
                            add(p, w, 8 * index[a] + k, coeff / h)
                            add(p, w, 8 * index[b] + k, -coeff / h)

    mat = np.zeros((len(rows), n_unknowns))
    for r, (_, cols) in enumerate(sorted(rows.items(), key=lambda kv: str(kv[0]))):
        for col, val in cols.items():
            mat[r, col] = val

    from scipy.linalg import null_space

    kernel = null_space(mat, rcond=1e-10)
    fields = []
    for i in range(kernel.shape[1]):
        values = {
            p: Octonion.from_array(kernel[8 * j : 8 * j + 8, i])
            for j, p in enumerate(region)
        }
        fields.append(OctField.from_values(values))
    return fields
