"""Executable forms of the discrete Stokes, Borel-Pompeiu, and Cauchy
statements, each reported as a residual in the split-algebra norm.

Every formula is assembled from the same term groups:

  volume        sum over V of (w D^{-+}) f + w (D^{+-} f)         [h^8]
  assoc-volume  2 * quintuple-indexed associator sum over V        [h^8]
  left faces    -[w(r) e_j^+ f(r+e_j) + w(r+e_j) e_j^- f(r)]       [h^7]
                +2 * associator terms with the same arguments
  right faces   +[w(r-e_j) e_j^+ f(r) + w(r) e_j^- f(r-e_j)]       [h^7]
                -2 * associator terms with the same arguments

where the left faces along axis j are the middle-layer points whose +e_j
neighbour lies in the volume set V and the right faces those whose -e_j
neighbour does.  With V the mask this is the interior statement; with V the
exterior domain the same assembly realizes the direction-reversed exterior
statement.  The weight w may be octonion-valued (Stokes) or the shifted
split-valued fundamental solution (Borel-Pompeiu, Cauchy), whose generator
coefficients take the place of the octonion components in the associator
sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .domain import LatticeDomain, classify_cached, sublayers_wrt
from .fields import OctField, SparseOctField, SplitField, Window, encode_points
from .green import FundamentalSolution
from .octonion import fano_index_sets
from .operators import (
    LEFT_TRIPLE_RED,
    PAIR_RED,
    TRIPLE_RED,
    dirac_values_at,
    monogenicity_residual,
)
from .weyl import SplitElement, normal_order

__all__ = [
    "FormulaReport",
    "associator_tuples",
    "associator_middle_pairs",
    "stokes_whole",
    "stokes_half",
    "stokes_cuboid",
    "stokes_bounded",
    "borel_pompeiu",
    "cauchy_formula",
    "cauchy_transform",
    "cauchy_transform_dirac_residual",
]


def _anti_tuples():
    out = []
    sets = fano_index_sets()
    for s in range(7):
        for i in sorted(sets[s]):
            for j in sorted(sets[s]):
                if j == i:
                    continue
                for k in range(1, 8):
                    if k in sets[s]:
                        continue
                    out.append((s, i, j, k))
    return tuple(out)


#: the quintuple enumeration (s, i in I_s, j in I_s \ {i}, k notin I_s);
#: hits every anti-associative (i, j, k) exactly once -- 168 tuples.
ASSOC_TUPLES = _anti_tuples()


def associator_tuples():
    return ASSOC_TUPLES


@lru_cache(maxsize=8)
def associator_middle_pairs(j: int):
    """(i, k) pairs of anti-associative triples with middle index j."""
    return tuple((i, k) for (_, i, jj, k) in ASSOC_TUPLES if jj == j)


@dataclass
class FormulaReport:
    formula: str
    domain: str
    residual: float
    tolerance: float
    passed: bool
    groups: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "formula": self.formula,
            "domain": self.domain,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "groups": self.groups,
            "details": self.details,
        }


class Accumulator:
    """Coefficient accumulation over normal-form words."""

    __slots__ = ("terms",)

    def __init__(self):
        self.terms: dict = {}

    def add_word(self, w, c):
        self.terms[w] = self.terms.get(w, 0.0) + c

    def add_table(self, entries, scale):
        if scale == 0.0:
            return
        t = self.terms
        for w, c in entries:
            t[w] = t.get(w, 0.0) + scale * c

    def element(self) -> SplitElement:
        return SplitElement(self.terms)


class OctWeight:
    """Octonion-valued weight: both polarities share the component value."""

    def __init__(self, g: OctField):
        self.field = g

    def coeff_all(self, pts: np.ndarray) -> np.ndarray:
        comps = self.field.sample(pts)  # (N, 8)
        return np.repeat(comps.T, 2, axis=0)  # rows: e0+,e0-,e1+,...

    def support_box(self, margin: int):
        w = self.field.window
        return (
            np.array(w.lo) - margin,
            np.array(w.hi) + margin,
        )


class KernelWeight:
    """w(r) = E(r - probe): the shifted fundamental solution as a weight."""

    def __init__(self, E: FundamentalSolution, probe):
        self.E = E
        self.probe = np.asarray(probe, dtype=int)

    def coeff_all(self, pts: np.ndarray) -> np.ndarray:
        return self.E.coeff_matrix(np.asarray(pts) - self.probe)

    def support_box(self, margin: int):
        return None  # periodic: supported everywhere


def _shift_pts(pts: np.ndarray, j: int, s: int) -> np.ndarray:
    out = np.asarray(pts).copy()
    out[:, j] += s
    return out


def _component_matrix(f: OctField, pts: np.ndarray) -> np.ndarray:
    return f.sample(pts).T  # (8, N)


def _volume_terms(f: OctField, w, h: float, pts_left: np.ndarray, pts_right=None):
    """LHS volume sum and associator volume sum.

    pts_left carries the left action w(r) (D f)(r) and the associator sum
    (integrand supported where the weight and the differenced field overlap);
    pts_right carries the right action (dw)(r) f(r) (supported on the field).
    Passing pts_right=None reuses pts_left for both.  The right action uses
    the raw left-bracketed words (rebracketing signs included); the left
    action and the associator sums use right-bracketed words.
    """
    if pts_right is None:
        pts_right = pts_left
    lhs = Accumulator()
    assoc = Accumulator()
    vol = h**8
    nl, nr = len(pts_left), len(pts_right)
    FK_L = _component_matrix(f, pts_left) if nl else None
    CX_L = w.coeff_all(pts_left) if nl else None
    FK_R = _component_matrix(f, pts_right) if nr else None
    CX_R = w.coeff_all(pts_right) if nr else None
    for j in range(8):
        for pol in (0, 1):
            gid_op = 2 * j + pol
            sgn = +1 if pol == 0 else -1
            if nl:
                DF = (sgn * (f.sample(_shift_pts(pts_left, j, sgn)).T - FK_L)) / h
                M2 = (CX_L @ DF.T) * vol  # (16, 8): sum_r c_X d f_k
            else:
                M2 = np.zeros((16, 8))
            if nr:
                # right action pairs e_j^+ with the backward difference
                CXs = w.coeff_all(_shift_pts(pts_right, j, -sgn))
                DC = (sgn * (CX_R - CXs)) / h
                M1 = (DC @ FK_R.T) * vol  # (16, 8): sum_r d c_X f_k
            else:
                M1 = np.zeros((16, 8))
            for X in range(16):
                for k in range(8):
                    v1 = M1[X, k]
                    v2 = M2[X, k]
                    if v1 == 0.0 and v2 == 0.0:
                        continue
                    for c in (0, 1):
                        K = 2 * k + c
                        if v1 != 0.0:
                            lhs.add_table(LEFT_TRIPLE_RED[(X, gid_op, K)], v1)
                        if v2 != 0.0:
                            lhs.add_table(TRIPLE_RED[(X, gid_op, K)], v2)
            for i, k in associator_middle_pairs(j):
                for a in (0, 1):
                    v = M2[2 * i + a, k]
                    if v == 0.0:
                        continue
                    for c in (0, 1):
                        assoc.add_table(
                            TRIPLE_RED[(2 * i + a, gid_op, 2 * k + c)], 2.0 * v
                        )
    return lhs, assoc


def _boundary_terms(pts: np.ndarray, j: int, side: str, f: OctField, w, h: float):
    """Plain and associator boundary sums along axis j at the given
    middle-layer points; side 'left' shifts +e_j, side 'right' -e_j.

    Returns (plain, assoc) accumulators carrying the orientation signs:
    left contributes -plain +2 assoc, right +plain -2 assoc.
    """
    plain = Accumulator()
    assoc = Accumulator()
    if len(pts) == 0:
        return plain, assoc
    surf = h**7
    if side == "left":
        near, far = pts, _shift_pts(pts, j, +1)
        plain_sign, assoc_sign = -1.0, +2.0
    elif side == "right":
        near, far = _shift_pts(pts, j, -1), pts
        plain_sign, assoc_sign = +1.0, -2.0
    else:
        raise ValueError("side must be 'left' or 'right'")
    # pattern: w(near) e_j^+ f(far) + w(far) e_j^- f(near)
    C_near = w.coeff_all(near)
    C_far = w.coeff_all(far)
    F_near = _component_matrix(f, near)
    F_far = _component_matrix(f, far)
    M_plus = (C_near @ F_far.T) * surf  # pairs with e_j^+
    M_minus = (C_far @ F_near.T) * surf  # pairs with e_j^-
    for X in range(16):
        for k in range(8):
            vp = M_plus[X, k]
            vm = M_minus[X, k]
            if vp == 0.0 and vm == 0.0:
                continue
            for c in (0, 1):
                K = 2 * k + c
                if vp != 0.0:
                    plain.add_table(TRIPLE_RED[(X, 2 * j, K)], plain_sign * vp)
                if vm != 0.0:
                    plain.add_table(TRIPLE_RED[(X, 2 * j + 1, K)], plain_sign * vm)
    for i, k in associator_middle_pairs(j):
        for a in (0, 1):
            X = 2 * i + a
            vp = M_plus[X, k]
            vm = M_minus[X, k]
            if vp == 0.0 and vm == 0.0:
                continue
            for c in (0, 1):
                K = 2 * k + c
                if vp != 0.0:
                    assoc.add_table(TRIPLE_RED[(X, 2 * j, K)], assoc_sign * vp)
                if vm != 0.0:
                    assoc.add_table(TRIPLE_RED[(X, 2 * j + 1, K)], assoc_sign * vm)
    return plain, assoc


def _merge(*accs) -> SplitElement:
    total = Accumulator()
    for a in accs:
        for w, c in a.terms.items():
            total.add_word(w, c)
    return total.element()


def _field_box(f, margin: int):
    return np.array(f.window.lo) - margin, np.array(f.window.hi) + margin


def _box_pts(lo, hi) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(lo, hi)], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


class AxisSelector:
    """Axis-7 half-space / plane membership."""

    def __init__(self, kind: str):
        self.kind = kind

    def mask_points(self, pts: np.ndarray) -> np.ndarray:
        if self.kind == "upper":
            return pts[:, 7] >= 1
        if self.kind == "lower":
            return pts[:, 7] <= -1
        return pts[:, 7] == 0


class SetSelector:
    """Membership in a finite point set, via packed-key lookup."""

    def __init__(self, point_set):
        self.keys = np.sort(encode_points(np.array(sorted(point_set))))

    def mask_points(self, pts: np.ndarray) -> np.ndarray:
        return np.isin(encode_points(pts), self.keys, assume_unique=False)


class ExteriorSelectorVec:
    """Vectorized membership in the exterior domain of a mask."""

    def __init__(self, domain: LatticeDomain, gamma_star):
        self.mask_keys = np.sort(encode_points(np.array(sorted(domain.mask))))
        self.star_keys = np.sort(encode_points(np.array(sorted(gamma_star))))

    def mask_points(self, pts: np.ndarray) -> np.ndarray:
        keys = encode_points(pts)
        in_mask = np.isin(keys, self.mask_keys)
        in_star = np.isin(keys, self.star_keys)
        has_cn = np.zeros(len(pts), dtype=bool)
        for j in range(8):
            for s in (+1, -1):
                q = pts.copy()
                q[:, j] += s
                has_cn |= ~np.isin(encode_points(q), self.mask_keys)
        return ~in_mask & ~in_star & has_cn


def _inflate_pts(pts: np.ndarray, margin: int) -> np.ndarray:
    out = [pts]
    for _ in range(margin):
        cur = np.concatenate(out)
        shifts = [cur]
        for j in range(8):
            for s in (+1, -1):
                q = cur.copy()
                q[:, j] += s
                shifts.append(q)
        cur = np.concatenate(shifts)
        keys, idx = np.unique(encode_points(cur), return_index=True)
        out = [cur[idx]]
    return out[0]


def _field_candidates(f, margin: int):
    if hasattr(f, "support_points"):
        pts = f.support_points()
        return ("pts", _inflate_pts(pts, margin) if margin else pts)
    return ("box", *_field_box(f, margin))


def _resolve(primary, bound_boxes, selector) -> np.ndarray:
    """Materialize candidate points, clip to bounding boxes, apply selector."""
    bound_boxes = [b for b in bound_boxes if b is not None]
    if primary[0] == "pts":
        pts = primary[1]
        for lo, hi in bound_boxes:
            keep = np.all((pts >= lo) & (pts <= hi), axis=1)
            pts = pts[keep]
    else:
        boxes = [primary[1:]] + bound_boxes
        lo = np.max([b[0] for b in boxes], axis=0)
        hi = np.min([b[1] for b in boxes], axis=0)
        if np.any(hi < lo):
            return np.empty((0, 8), dtype=int)
        pts = _box_pts(lo, hi)
    if selector is not None and len(pts):
        pts = pts[selector.mask_points(pts)]
    return pts


def _weight_candidates(w, margin: int):
    field = getattr(w, "field", None)
    if field is not None:
        return _field_candidates(field, margin)
    return None  # kernel weights are supported everywhere


def _volume_point_pair(f, w, selector):
    """Left- and right-action volume point sets, restricted to where the
    respective integrands can be nonzero."""
    wc = _weight_candidates(w, 0)
    if wc is not None:
        pts_left = _resolve(wc, [_field_box(f, 1)], selector)
    else:
        pts_left = _resolve(_field_candidates(f, 1), [], selector)
    wbox = None if wc is None else (_field_box(w.field, 1))
    pts_right = _resolve(_field_candidates(f, 0), [wbox], selector)
    return pts_left, pts_right


def _report(name, domain_desc, lhs, rhs_groups, tolerance, details=None):
    rhs_total = _merge(*rhs_groups.values())
    residual = (lhs.element() - rhs_total).norm()
    groups = {k: v.element().norm() for k, v in rhs_groups.items()}
    groups["volume"] = lhs.element().norm()
    return FormulaReport(
        formula=name,
        domain=domain_desc,
        residual=float(residual),
        tolerance=tolerance,
        passed=bool(residual <= tolerance),
        groups=groups,
        details=details or {},
    )


def stokes_whole(f: OctField, g: OctField, h: float = 1.0, tolerance: float = 1e-10):
    """Whole-lattice pairing identity: volume terms against the associator
    volume sum, no boundary."""
    w = OctWeight(g)
    pts_left, pts_right = _volume_point_pair(f, w, None)
    lhs, assoc = _volume_terms(f, w, h, pts_left, pts_right)
    return _report(
        "stokes-whole",
        "hZ^8 (finitely supported)",
        lhs,
        {"associator-volume": assoc},
        tolerance,
    )


def stokes_half(
    f: OctField,
    g: OctField,
    side: str = "upper",
    h: float = 1.0,
    tolerance: float = 1e-10,
):
    """Half-space identity with boundary corrections on the m_7 = 0 plane.

    Upper volume is m_7 >= 1 with layers (0, h); lower is m_7 <= -1 with
    layers (-h, 0) and reversed orientation.  The plane sums group the
    middle-index-7 associator pairs by the three aligned sets {1,6}, {2,5},
    {3,4} with k running over the complement (see the errata registry for the
    transcription corrections this requires).
    """
    if side not in ("upper", "lower"):
        raise ValueError("side must be 'upper' or 'lower'")
    w = OctWeight(g)
    pts_left, pts_right = _volume_point_pair(f, w, AxisSelector(side))
    lhs, assoc = _volume_terms(f, w, h, pts_left, pts_right)
    plane = _resolve(
        _field_candidates(f, 1), [_field_box(g, 1)], AxisSelector("plane")
    )
    if side == "upper":
        plain, bassoc = _boundary_terms(plane, 7, "left", f, w, h)
    else:
        plain, bassoc = _boundary_terms(plane, 7, "right", f, w, h)
    return _report(
        f"stokes-half-{side}",
        f"hZ^8_{'+' if side == 'upper' else '-'}",
        lhs,
        {
            "associator-volume": assoc,
            f"boundary-{'left' if side == 'upper' else 'right'}": plain,
            "associator-boundary": bassoc,
        },
        tolerance,
    )


def _cuboid_face(sides, j, value):
    ranges = [
        [value] if ax == j else list(range(1, sides[ax]))
        for ax in range(8)
    ]
    return np.array(list(product(*ranges)), dtype=int)


def stokes_cuboid(
    f: OctField, g: OctField, sides, h: float = 1.0, tolerance: float = 1e-10
):
    """Cuboid identity with the faces taken from the index convention
    directly: interior m_i in [1, N_i - 1], left faces at m_j = 0, right
    faces at m_j = N_j."""
    sides = tuple(int(n) for n in sides)
    pts = np.array(
        list(product(*[range(1, n) for n in sides])), dtype=int
    )
    w = OctWeight(g)
    lhs, assoc = _volume_terms(f, w, h, pts)
    groups = {"associator-volume": assoc}
    bl_plain, bl_assoc = Accumulator(), Accumulator()
    br_plain, br_assoc = Accumulator(), Accumulator()
    for j in range(8):
        pl, sa = _boundary_terms(_cuboid_face(sides, j, 0), j, "left", f, w, h)
        for wd, c in pl.terms.items():
            bl_plain.add_word(wd, c)
        for wd, c in sa.terms.items():
            bl_assoc.add_word(wd, c)
        pr, sb = _boundary_terms(_cuboid_face(sides, j, sides[j]), j, "right", f, w, h)
        for wd, c in pr.terms.items():
            br_plain.add_word(wd, c)
        for wd, c in sb.terms.items():
            br_assoc.add_word(wd, c)
    groups["boundary-left"] = bl_plain
    groups["boundary-right"] = br_plain
    groups["associator-boundary-left"] = bl_assoc
    groups["associator-boundary-right"] = br_assoc
    return _report(
        "stokes-cuboid", f"cuboid N={sides}", lhs, groups, tolerance
    )


def stokes_bounded(
    f: OctField,
    g: OctField,
    domain: LatticeDomain,
    setting: str = "interior",
    h: float = 1.0,
    tolerance: float = 1e-10,
):
    """Arbitrary-mask identity, interior or exterior.

    The volume sum is weighted by the indicator of the mask (interior) or of
    the exterior domain; the middle-layer sub-layers are taken relative to
    the same volume set, which realizes the exterior direction reversal.
    """
    w = OctWeight(g)
    lhs, assoc, groups = _bounded_groups(f, w, domain, setting, h)
    return _report(
        f"stokes-bounded-{setting}",
        f"mask |{len(domain.mask)}|",
        lhs,
        {"associator-volume": assoc, **groups},
        tolerance,
    )


def _setting_selector(domain: LatticeDomain, layers, setting: str):
    if setting == "interior":
        return SetSelector(domain.mask)
    return ExteriorSelectorVec(domain, layers.gamma_star)


def _bounded_groups(f: OctField, w, domain: LatticeDomain, setting: str, h: float):
    if setting not in ("interior", "exterior"):
        raise ValueError("setting must be 'interior' or 'exterior'")
    layers = classify_cached(domain)
    side = domain.mask if setting == "interior" else layers.exterior_near
    sel = _setting_selector(domain, layers, setting)
    pts_left, pts_right = _volume_point_pair(f, w, sel)
    lhs, assoc = _volume_terms(f, w, h, pts_left, pts_right)
    groups = {}
    bl_plain, bl_assoc = Accumulator(), Accumulator()
    br_plain, br_assoc = Accumulator(), Accumulator()
    for j in range(8):
        left, right = sublayers_wrt(layers.gamma_star, side, j)
        if left:
            pl, sa = _boundary_terms(np.array(sorted(left)), j, "left", f, w, h)
            for wd, c in pl.terms.items():
                bl_plain.add_word(wd, c)
            for wd, c in sa.terms.items():
                bl_assoc.add_word(wd, c)
        if right:
            pr, sb = _boundary_terms(np.array(sorted(right)), j, "right", f, w, h)
            for wd, c in pr.terms.items():
                br_plain.add_word(wd, c)
            for wd, c in sb.terms.items():
                br_assoc.add_word(wd, c)
    groups["boundary-left"] = bl_plain
    groups["boundary-right"] = br_plain
    groups["associator-boundary-left"] = bl_assoc
    groups["associator-boundary-right"] = br_assoc
    return lhs, assoc, groups


# -- Borel-Pompeiu / Cauchy ---------------------------------------------------


def _half_space_groups(f: OctField, w, side: str, h: float):
    sel = AxisSelector("upper" if side == "upper-half" else "lower")
    pts_left, pts_right = _volume_point_pair(f, w, sel)
    lhs, assoc = _volume_terms(f, w, h, pts_left, pts_right)
    plane = _resolve(_field_candidates(f, 1), [], AxisSelector("plane"))
    if side == "upper-half":
        plain, bassoc = _boundary_terms(plane, 7, "left", f, w, h)
    else:
        plain, bassoc = _boundary_terms(plane, 7, "right", f, w, h)
    return {
        "associator-volume": assoc,
        "boundary": plain,
        "associator-boundary": bassoc,
    }


def _volume_kernel_term(pts: np.ndarray, f: OctField, w, h: float) -> Accumulator:
    """sum over pts of w(r) (D^{+-} f)(r) h^8, with w split-valued."""
    acc = Accumulator()
    if len(pts) == 0:
        return acc
    dfv = dirac_values_at(f, pts, h)
    CX = w.coeff_all(pts)
    vol = h**8
    for word, arr in dfv.items():
        dots = CX @ arr * vol  # (16,)
        for X in range(16):
            v = dots[X]
            if v == 0.0:
                continue
            if len(word) == 2:
                acc.add_table(TRIPLE_RED[(X, word[0], word[1])], v)
            elif len(word) == 1:
                acc.add_table(PAIR_RED[(X, word[0])], v)
            else:
                acc.add_word((X,), v)
    return acc


def borel_pompeiu(
    E: FundamentalSolution,
    f: OctField,
    m,
    setting: str,
    domain: LatticeDomain | None = None,
    h: float = 1.0,
) -> SplitElement:
    """Evaluate the reproduction sum at probe m.

    Equals embed(f(mh)) for probes in the volume set and vanishes elsewhere,
    up to the kernel's mean-mode defect.  Assembled as the boundary and
    associator groups of the bounded identity with the shifted fundamental
    solution as weight, minus the kernel-weighted volume term.
    """
    w = KernelWeight(E, m)
    if setting in ("interior", "exterior"):
        if domain is None:
            raise ValueError("bounded settings need a domain")
        lhs, assoc, groups = _bounded_groups(f, w, domain, setting, h)
        layers = classify_cached(domain)
        vol_pts = _resolve(
            _field_candidates(f, 1), [], _setting_selector(domain, layers, setting)
        )
        rhs = _merge(assoc, *groups.values())
    elif setting in ("upper-half", "lower-half"):
        vol_pts = _resolve(
            _field_candidates(f, 1),
            [],
            AxisSelector("upper" if setting == "upper-half" else "lower"),
        )
        ggroups = _half_space_groups(f, w, setting, h)
        rhs = _merge(*ggroups.values())
    else:
        raise ValueError(f"unknown setting {setting!r}")
    vterm = _volume_kernel_term(vol_pts, f, w, h)
    return rhs - vterm.element()


def cauchy_formula(
    E: FundamentalSolution,
    f: OctField,
    m,
    setting: str,
    domain: LatticeDomain | None = None,
    h: float = 1.0,
    monogenic_tol: float = 1e-10,
    enforce_precondition: bool = True,
) -> SplitElement:
    """Boundary-only reproduction of a discrete left monogenic field.

    The volume term of the reproduction sum is dropped; for monogenic input
    it vanishes identically, so the value still reproduces embed(f(mh)).
    """
    if enforce_precondition and domain is not None:
        res = monogenicity_residual(f, domain, h)
        if res > monogenic_tol:
            raise ValueError(
                f"input is not discrete left monogenic: residual {res:g}"
            )
    w = KernelWeight(E, m)
    if setting in ("interior", "exterior"):
        if domain is None:
            raise ValueError("bounded settings need a domain")
        lhs, assoc, groups = _bounded_groups(f, w, domain, setting, h)
        return _merge(assoc, *groups.values())
    if setting in ("upper-half", "lower-half"):
        ggroups = _half_space_groups(f, w, setting, h)
        return _merge(*ggroups.values())
    raise ValueError(f"unknown setting {setting!r}")


# -- Cauchy transforms --------------------------------------------------------


def _transform_layers(domain: LatticeDomain, setting: str):
    layers = classify_cached(domain)
    if setting == "interior":
        side = domain.mask
        data_layers = set(layers.gamma_star) | set(layers.gamma_plus)
    elif setting == "exterior":
        side = layers.exterior_near
        data_layers = set(layers.gamma_star) | set(layers.gamma_minus)
    else:
        raise ValueError("setting must be 'interior' or 'exterior'")
    return layers, side, data_layers


def _required_data_points(domain: LatticeDomain, setting: str):
    layers, side, _ = _transform_layers(domain, setting)
    req = set()
    for j in range(8):
        left, right = sublayers_wrt(layers.gamma_star, side, j)
        for p in left:
            req.add(p)
            q = list(p)
            q[j] += 1
            req.add(tuple(q))
        for p in right:
            req.add(p)
            q = list(p)
            q[j] -= 1
            req.add(tuple(q))
    return req


def cauchy_transform(
    E: FundamentalSolution,
    data: dict,
    setting: str,
    domain: LatticeDomain,
    probes,
    h: float = 1.0,
    volume_associator: str = "omit",
) -> dict:
    """Boundary-to-volume transform; returns {probe: SplitElement}.

    ``data`` maps layer points to octonion values on the middle layer plus
    the inner (interior setting) or outer (exterior) layer; missing required
    points raise.  The printed transform also carries a volume associator sum
    reading interior values; with layer data only, that term is evaluated on
    the zero extension when ``volume_associator='zero-extension'`` and left
    out by default (see the errata registry: including it breaks the
    monogenicity property on the shell next to the data layer).
    """
    layers, side, data_layers = _transform_layers(domain, setting)
    req = _required_data_points(domain, setting)
    missing = [p for p in req if p not in data]
    if missing:
        raise KeyError(
            f"boundary data missing on {len(missing)} required points, "
            f"e.g. {sorted(missing)[:3]}"
        )
    fdata = SparseOctField.from_values(data)
    out = {}
    for m in probes:
        w = KernelWeight(E, m)
        acc_groups = []
        for j in range(8):
            left, right = sublayers_wrt(layers.gamma_star, side, j)
            if left:
                pl, sa = _boundary_terms(
                    np.array(sorted(left)), j, "left", fdata, w, h
                )
                acc_groups += [pl, sa]
            if right:
                pr, sb = _boundary_terms(
                    np.array(sorted(right)), j, "right", fdata, w, h
                )
                acc_groups += [pr, sb]
        if volume_associator == "zero-extension":
            pts = _resolve(
                _field_candidates(fdata, 1),
                [],
                _setting_selector(domain, layers, setting),
            )
            _, assoc = _volume_terms(fdata, w, h, pts)
            acc_groups.append(assoc)
        elif volume_associator != "omit":
            raise ValueError("volume_associator must be 'omit' or 'zero-extension'")
        out[tuple(m)] = _merge(*acc_groups)
    return out


@lru_cache(maxsize=None)
def _car4(seq: tuple) -> tuple:
    out: dict = {}
    normal_order(seq, 1.0, out)
    return tuple(sorted(out.items()))


class _DiffKernelWeight:
    """Generator-resolved derivative of the shifted kernel weight.

    Row (J, X) holds -d~^J c_X(r - m), the coefficient family produced by
    carrying the Cauchy-Riemann operator at the probe through the kernel
    argument (the chain rule flips the difference polarities).
    """

    def __init__(self, E: FundamentalSolution, probe, h: float):
        self.E = E
        self.probe = np.asarray(probe, dtype=int)
        self.h = h

    def rows(self, pts: np.ndarray) -> np.ndarray:
        """(16, 16, N): leading-generator J, kernel-generator X."""
        rel = np.asarray(pts) - self.probe
        base = self.E.coeff_matrix(rel)  # (16, N)
        out = np.empty((16, 16) + base.shape[1:])
        for jp in range(8):
            for pol in (0, 1):
                J = 2 * jp + pol
                shifted = rel.copy()
                # e_j^+ at the probe carries -d^{-j} on the argument
                shifted[:, jp] += -1 if pol == 0 else +1
                cs = self.E.coeff_matrix(shifted)
                if pol == 0:
                    out[J] = -(base - cs) / self.h
                else:
                    out[J] = -(cs - base) / self.h
        return out


def cauchy_transform_dirac_residual(
    E: FundamentalSolution,
    data: dict,
    setting: str,
    domain: LatticeDomain,
    probes,
    h: float = 1.0,
) -> dict:
    """Norm of the Cauchy-Riemann operator applied through the kernel of the
    transform at each probe.

    The operator acting at the probe only sees the kernel argument, so each
    transform term differentiates into the kernel coefficients with a new
    leading generator; the resulting length-4 words are normal-ordered in the
    same algebra.  Off the data-adjacent shell the value collapses to the
    kernel's mean-mode defect.
    """
    layers, side, _ = _transform_layers(domain, setting)
    req = _required_data_points(domain, setting)
    missing = [p for p in req if p not in data]
    if missing:
        raise KeyError(f"boundary data missing on {len(missing)} required points")
    fdata = SparseOctField.from_values(data)
    out = {}
    for m in probes:
        dw = _DiffKernelWeight(E, m, h)
        acc = Accumulator()
        for j in range(8):
            left, right = sublayers_wrt(layers.gamma_star, side, j)
            for pts_set, sideways in ((left, "left"), (right, "right")):
                if not pts_set:
                    continue
                pts = np.array(sorted(pts_set))
                _d_boundary_terms(acc, pts, j, sideways, fdata, dw, h)
        out[tuple(m)] = acc.element().norm()
    return out


def _d_boundary_terms(acc, pts, j, side, f, dw: _DiffKernelWeight, h):
    surf = h**7
    if side == "left":
        near, far = pts, _shift_pts(pts, j, +1)
        plain_sign, assoc_sign = -1.0, +2.0
    else:
        near, far = _shift_pts(pts, j, -1), pts
        plain_sign, assoc_sign = +1.0, -2.0
    R_near = dw.rows(near)  # (16, 16, N)
    R_far = dw.rows(far)
    F_near = _component_matrix(f, near)
    F_far = _component_matrix(f, far)
    Mp = np.einsum("jxn,kn->jxk", R_near, F_far) * surf
    Mm = np.einsum("jxn,kn->jxk", R_far, F_near) * surf
    pairs = associator_middle_pairs(j)
    for J in range(16):
        for X in range(16):
            for k in range(8):
                vp = Mp[J, X, k]
                vm = Mm[J, X, k]
                if vp == 0.0 and vm == 0.0:
                    continue
                is_assoc_pair = (X >> 1, k) in pairs
                for c in (0, 1):
                    K = 2 * k + c
                    if vp != 0.0:
                        ent = _car4((J, X, 2 * j, K))
                        acc.add_table(ent, plain_sign * vp)
                        if is_assoc_pair:
                            acc.add_table(ent, assoc_sign * vp)
                    if vm != 0.0:
                        ent = _car4((J, X, 2 * j + 1, K))
                        acc.add_table(ent, plain_sign * vm)
                        if is_assoc_pair:
                            acc.add_table(ent, assoc_sign * vm)
