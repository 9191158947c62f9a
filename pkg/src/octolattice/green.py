"""Lattice Green's function of the star-Laplacian and the derived
fundamental solutions of the discrete Cauchy-Riemann operators.

The infinite-lattice kernel is approximated by periodization: on a T^8 torus
the scalar Green's function G solves -Lap G = delta_h - (T h)^{-8} h^... more
precisely delta_h minus its torus mean T^{-8} h^{-8}, because the singular
zero mode of the symbol is set to zero.  That mean-mode defect is the single
approximation in the whole verification chain; every downstream tolerance
carries it explicitly.

Two independent computations of G are provided: an FFT over the full torus
(used as the runtime table) and a separable heat-kernel quadrature usable at
any torus size without building the T^8 grid.  The infinite-lattice oracle is
the classical Bessel-integral representation.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.special import ive

from .weyl import SplitElement

__all__ = [
    "KernelTable",
    "green_torus",
    "green_torus_values",
    "green_bessel",
    "fundamental",
    "FundamentalSolution",
    "save_table",
    "load_table",
]

MAGIC = b"OCTK"
VERSION = 1


@dataclass
class KernelTable:
    """Scalar torus Green samples plus lazily derived difference kernels."""

    T: int
    h: float
    G: np.ndarray  # shape (T,)*8

    def __post_init__(self):
        if self.G.shape != (self.T,) * 8:
            raise ValueError("Green table shape mismatch")

    def green_at(self, pts: np.ndarray) -> np.ndarray:
        """G at integer offsets, reduced mod T."""
        pts = np.asarray(pts)
        idx = np.mod(pts, self.T)
        flat = np.ravel_multi_index(idx.reshape(-1, 8).T, (self.T,) * 8)
        return self.G.reshape(-1)[flat].reshape(pts.shape[:-1])

    def k_coeff(self, j: int, pol: int, pts: np.ndarray) -> np.ndarray:
        """K_j^+ = d^{+j} G (pol=0) or K_j^- = d^{-j} G (pol=1) at offsets."""
        pts = np.asarray(pts)
        shifted = pts.copy()
        shifted[..., j] += 1 if pol == 0 else -1
        if pol == 0:
            return (self.green_at(shifted) - self.green_at(pts)) / self.h
        return (self.green_at(pts) - self.green_at(shifted)) / self.h

    @property
    def mean_defect(self) -> float:
        """The removed zero mode: delta_h is reproduced minus this constant."""
        return self.h**-8 / self.T**8


def green_torus(T: int, h: float = 1.0, memory_budget_bytes: int = 4 << 30) -> KernelTable:
    """Torus Green's function via an 8-D inverse FFT of 1/d^2.

    T must be even and at least 8; the zero mode is set to zero after
    asserting the symbol grid is nonsingular elsewhere.  The imaginary
    residue of the transform is checked before being discarded.
    """
    if T < 8 or T % 2:
        raise ValueError("torus size must be an even integer >= 8")
    need = (T**8) * 16 * 2.5  # complex grid plus transform workspace
    if need > memory_budget_bytes:
        raise MemoryError(
            f"T={T} needs ~{need/2**30:.1f} GiB; raise memory_budget_bytes "
            "or use green_torus_values for pointwise evaluation"
        )
    k = np.arange(T)
    s2 = np.sin(np.pi * k / T) ** 2 * (4.0 / h**2)
    d2 = np.zeros((T,) * 8)
    for ax in range(8):
        shape = [1] * 8
        shape[ax] = T
        d2 = d2 + s2.reshape(shape)
    d2.reshape(-1)[0] = 1.0
    ghat = 1.0 / d2
    ghat.reshape(-1)[0] = 0.0
    g = np.fft.ifftn(ghat)
    scale = float(np.max(np.abs(g.real)))
    imag = float(np.max(np.abs(g.imag)))
    if imag > 1e-12 * max(scale, 1.0):
        raise FloatingPointError(f"imaginary residue {imag:g} too large")
    return KernelTable(T, h, np.ascontiguousarray(g.real) / h**8)


def _quad_nodes(lam_min: float, panels: int = 60, order: int = 16):
    """Gauss-Legendre nodes/weights on geometrically graded panels of
    [0, 60/lam_min]."""
    x, w = leggauss(order)
    edges = np.concatenate(
        [[0.0], np.geomspace(1e-3 / lam_min, 60.0 / lam_min, panels)]
    )
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def green_torus_values(T: int, h: float, pts: np.ndarray) -> np.ndarray:
    """Torus Green's function at selected offsets, without the T^8 grid.

    Uses the separable heat-kernel form: 1/d^2 integrates exp(-t d^2), whose
    inverse DFT factorizes into per-axis theta sums; the zero mode is removed
    inside the integrand.  Agrees with the FFT table to quadrature accuracy.
    """
    if T < 8 or T % 2:
        raise ValueError("torus size must be an even integer >= 8")
    pts = np.asarray(pts)
    lam = 4.0 * np.sin(np.pi / T) ** 2  # slowest nonzero mode at h=1
    t, w = _quad_nodes(lam)
    k = np.arange(T)
    ev = 4.0 * np.sin(np.pi * k / T) ** 2  # h=1 symbol per axis
    # theta[v, q] = (1/T) sum_k cos(2 pi v k / T) exp(-t_q ev_k)
    vmax = int(np.max(np.abs(pts))) + 1
    v = np.arange(-vmax, vmax + 1)
    phase = np.cos(2.0 * np.pi * np.outer(v, k) / T)
    theta = phase @ np.exp(-np.outer(ev, t)) / T  # (len(v), len(t))
    prod = np.ones((pts.reshape(-1, 8).shape[0], t.size))
    flat = pts.reshape(-1, 8)
    for ax in range(8):
        prod *= theta[flat[:, ax] + vmax]
    integrand = prod - T**-8.0
    vals = integrand @ w
    # spacing scaling: G_h(mh) = h^{-6} G_1(m)
    return (vals * h**-6.0).reshape(pts.shape[:-1])


def green_bessel(m, epsabs: float = 1e-13, epsrel: float = 1e-12) -> float:
    """Infinite-lattice Green value at integer offset m (h = 1).

    The unique decaying solution of -Lap G = delta on Z^8 via the
    heat-kernel/Bessel representation; adaptive quadrature of the scaled
    modified Bessel product.
    """
    orders = [abs(int(c)) for c in m]
    if len(orders) != 8:
        raise ValueError("offset must have 8 coordinates")

    def integrand(t):
        out = 1.0
        for n in orders:
            out *= ive(n, 2.0 * t)
        return out

    val, err, info = quad(
        integrand, 0.0, np.inf, epsabs=epsabs, epsrel=epsrel, limit=800,
        full_output=True,
    )[:3]
    if err > 1e-9 * max(abs(val), 1.0):
        raise RuntimeError(f"Bessel quadrature did not converge: err={err:g}")
    return float(val)


class FundamentalSolution:
    """Split-valued fundamental solution derived from a kernel table.

    variant "+-": coefficient of e_j^+ is d^{+j}G and of e_j^- is d^{-j}G;
    variant "-+" swaps the difference polarities.  Satisfies the defining
    delta identity up to the table's mean defect.
    """

    def __init__(self, table: KernelTable, variant: str):
        if variant not in ("+-", "-+"):
            raise ValueError("variant must be '+-' or '-+'")
        self.table = table
        self.variant = variant

    def coeff(self, gid: int, pts: np.ndarray) -> np.ndarray:
        """Coefficient of generator gid at integer offsets."""
        j, pol = gid >> 1, gid & 1
        if self.variant == "+-":
            k_pol = pol  # e_j^+ carries K_j^+
        else:
            k_pol = 1 - pol
        return self.table.k_coeff(j, k_pol, pts)

    def coeff_matrix(self, pts: np.ndarray) -> np.ndarray:
        """(16, N) coefficients of all generators at the given offsets."""
        out = np.empty((16,) + np.asarray(pts).shape[:-1])
        for gid in range(16):
            out[gid] = self.coeff(gid, pts)
        return out

    def element(self, m) -> SplitElement:
        pts = np.array([m])
        return SplitElement(
            {(gid,): float(self.coeff(gid, pts)[0]) for gid in range(16)}
        )


def fundamental(table: KernelTable, variant: str) -> FundamentalSolution:
    return FundamentalSolution(table, variant)


def save_table(table: KernelTable, path) -> None:
    """Binary format: magic, u32 version, f64 h, u32 T, then T^8 f64 samples."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<d", table.h))
        fh.write(struct.pack("<I", table.T))
        fh.write(np.ascontiguousarray(table.G, dtype="<f8").tobytes())


def load_table(path) -> KernelTable:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}; not a kernel table file")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != VERSION:
            raise ValueError(f"unsupported kernel table version {version}")
        (h,) = struct.unpack("<d", fh.read(8))
        (T,) = struct.unpack("<I", fh.read(4))
        payload = fh.read(T**8 * 8)
        if len(payload) != T**8 * 8:
            raise ValueError("truncated kernel table file")
        G = np.frombuffer(payload, dtype="<f8").reshape((T,) * 8)
    return KernelTable(T, h, G.copy())


def cache_dir() -> str | None:
    return os.environ.get("OCTOLATTICE_CACHE")


def cached_table(T: int, h: float) -> KernelTable:
    """Load (or build and store) the table under OCTOLATTICE_CACHE."""
    cdir = cache_dir()
    if cdir:
        os.makedirs(cdir, exist_ok=True)
        path = os.path.join(cdir, f"green_T{T}_h{h!r}.octk")
        if os.path.exists(path):
            return load_table(path)
        table = green_torus(T, h)
        save_table(table, path)
        return table
    return green_torus(T, h)
