"""Octonion arithmetic over the basis e_0..e_7.

The multiplication table is generated at import time from the four seed
products e_4 = e_1 e_2, e_5 = e_1 e_3, e_6 = e_2 e_3, e_7 = e_4 e_3 together
with anticommutativity, e_i^2 = -1, and the triple rules (alternativity plus
anti-associativity for non-aligned triples).  Signs that the seeds leave free
come out of the Cayley-Dickson doubling construction; the generated table is
cross-checked against the doubling product for all 64 basis pairs at import,
and a golden copy ships with the package so regeneration drift fails tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

__all__ = [
    "Octonion",
    "oct_basis_mul",
    "oct_mul",
    "associator",
    "fano_index_sets",
    "is_antiassociative_triple",
    "cayley_dickson_mul",
    "cayley_table",
    "cayley_table_lines",
]

# Oriented seed lines: (a, b, c) means e_a e_b = +e_c.
_SEED_LINES = [(1, 2, 4), (1, 3, 5), (2, 3, 6), (4, 3, 7)]

# Basis relabeling into Cayley-Dickson order (1, i, j, k, l, il, jl, kl):
# e_3 plays the role of the doubling unit l, e_4 the role of k = ij.
_TO_CD = [0, 1, 2, 4, 3, 5, 6, 7]


def cayley_dickson_mul(x, y):
    """Multiply two coefficient vectors of length 2^n by recursive doubling.

    Uses (a, b)(c, d) = (ac - d*b, da + bc*) with conjugation
    (a, b)* = (a*, -b); the base case is real multiplication.  Serves as the
    independent oracle for the generated table (and works for dimension 16).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or (x.size & (x.size - 1)):
        raise ValueError("operands must be equal power-of-two length vectors")
    if x.size == 1:
        return x * y
    n = x.size // 2
    a, b = x[:n], x[n:]
    c, d = y[:n], y[n:]
    return np.concatenate([
        cayley_dickson_mul(a, c) - cayley_dickson_mul(_cd_conj(d), b),
        cayley_dickson_mul(d, a) + cayley_dickson_mul(b, _cd_conj(c)),
    ])


def _cd_conj(x):
    out = -np.asarray(x, dtype=float)
    out[0] = -out[0]
    return out


def _generate_table():
    """Close the seed products under the basis rules.

    Returns an 8x8 array t with t[i, j] = s*(k+1) encoding e_i e_j = s e_k
    (the +1 offset keeps the sign of k=0 visible).
    """
    prod: dict[tuple[int, int], tuple[int, int]] = {}

    def put(a, b, sign, k):
        cur = prod.get((a, b))
        if cur is not None:
            if cur != (sign, k):
                raise RuntimeError(f"inconsistent table entry for ({a},{b})")
            return
        prod[(a, b)] = (sign, k)
        if a != b and a != 0 and b != 0 and k != 0:
            prod.setdefault((b, a), (-sign, k))

    for i in range(8):
        put(0, i, 1, i)
        put(i, 0, 1, i)
    for i in range(1, 8):
        put(i, i, -1, 0)
    for a, b, c in _SEED_LINES:
        # e_a e_b = e_c plus the alternativity-derived cyclic completions.
        put(a, b, 1, c)
        put(b, c, 1, a)
        put(c, a, 1, b)

    # Remaining products follow from e_x (e_c e_d) = -(e_x e_c) e_d whenever
    # x, c, d are distinct, nonzero, and e_x e_c lands off {+-e_d}.
    changed = True
    while changed:
        changed = False
        for x in range(1, 8):
            for y in range(1, 8):
                if (x, y) in prod or x == y:
                    continue
                for (c, d), (s1, k1) in list(prod.items()):
                    if k1 != y or 0 in (c, d) or c == d or x in (c, d):
                        continue
                    if (x, c) not in prod:
                        continue
                    s2, m = prod[(x, c)]
                    if m == d or m == 0:
                        continue  # aligned triple: rule does not apply
                    if (m, d) not in prod:
                        continue
                    s3, k3 = prod[(m, d)]
                    put(x, y, -s1 * s2 * s3, k3)
                    changed = True
                    break

    table = np.zeros((8, 8), dtype=np.int8)
    for i in range(8):
        for j in range(8):
            if (i, j) not in prod:
                raise RuntimeError(f"table generation incomplete at ({i},{j})")
            sign, k = prod[(i, j)]
            table[i, j] = sign * (k + 1)
    return table


def _oracle_check(table):
    for i in range(8):
        for j in range(8):
            x = np.zeros(8)
            y = np.zeros(8)
            x[_TO_CD[i]] = 1.0
            y[_TO_CD[j]] = 1.0
            z = cayley_dickson_mul(x, y)
            sign, k = _decode(table[i, j])
            want = np.zeros(8)
            want[_TO_CD[k]] = sign
            if not np.array_equal(z, want):
                raise RuntimeError(
                    f"generated table disagrees with doubling oracle at ({i},{j})"
                )


def _decode(cell):
    sign = 1 if cell > 0 else -1
    return sign, abs(int(cell)) - 1


_TABLE = _generate_table()
_oracle_check(_TABLE)


def cayley_table():
    """The full basis table as an 8x8 int array, t[i,j] = sign*(k+1)."""
    return _TABLE.copy()


def cayley_table_lines():
    """Golden-file serialization: 64 lines ``i j sign k``."""
    lines = []
    for i in range(8):
        for j in range(8):
            sign, k = _decode(_TABLE[i, j])
            lines.append(f"{i} {j} {sign:+d} {k}")
    return lines


def oct_basis_mul(i: int, j: int) -> tuple[int, int]:
    """Return (sign, k) with e_i e_j = sign * e_k."""
    return _decode(_TABLE[i, j])


@dataclass(frozen=True)
class Octonion:
    """An octonion as 8 real coefficients over e_0..e_7."""

    c: tuple[float, ...]

    def __post_init__(self):
        if len(self.c) != 8:
            raise ValueError("octonion needs exactly 8 coefficients")

    @staticmethod
    def basis(k: int) -> "Octonion":
        v = [0.0] * 8
        v[k] = 1.0
        return Octonion(tuple(v))

    @staticmethod
    def zero() -> "Octonion":
        return Octonion((0.0,) * 8)

    @staticmethod
    def from_array(a) -> "Octonion":
        return Octonion(tuple(float(t) for t in a))

    def as_array(self) -> np.ndarray:
        return np.array(self.c, dtype=float)

    def __add__(self, other: "Octonion") -> "Octonion":
        return Octonion(tuple(a + b for a, b in zip(self.c, other.c)))

    def __sub__(self, other: "Octonion") -> "Octonion":
        return Octonion(tuple(a - b for a, b in zip(self.c, other.c)))

    def __neg__(self) -> "Octonion":
        return Octonion(tuple(-a for a in self.c))

    def __rmul__(self, scalar: float) -> "Octonion":
        return Octonion(tuple(scalar * a for a in self.c))

    def __mul__(self, other: "Octonion") -> "Octonion":
        return oct_mul(self, other)

    def norm(self) -> float:
        return float(np.sqrt(sum(a * a for a in self.c)))


def oct_mul(a: Octonion, b: Octonion) -> Octonion:
    """Bilinear product through the generated Cayley table."""
    out = [0.0] * 8
    for i, ai in enumerate(a.c):
        if ai == 0.0:
            continue
        for j, bj in enumerate(b.c):
            if bj == 0.0:
                continue
            sign, k = _decode(_TABLE[i, j])
            out[k] += sign * ai * bj
    return Octonion(tuple(out))


def associator(a: Octonion, b: Octonion, c: Octonion) -> Octonion:
    """(a b) c - a (b c)."""
    return oct_mul(oct_mul(a, b), c) - oct_mul(a, oct_mul(b, c))


@lru_cache(maxsize=1)
def fano_index_sets() -> tuple[frozenset, ...]:
    """The seven aligned index triples I_1..I_7, in the conventional order."""
    return (
        frozenset({1, 2, 4}),
        frozenset({1, 3, 5}),
        frozenset({1, 6, 7}),
        frozenset({2, 3, 6}),
        frozenset({2, 5, 7}),
        frozenset({3, 4, 7}),
        frozenset({4, 5, 6}),
    )


def is_antiassociative_triple(i: int, j: int, k: int) -> bool:
    """True iff i, j, k are mutually distinct, nonzero, and e_i e_j != +-e_k.

    Exactly these triples flip sign under rebracketing; everything else
    (a zero index, a repeat, or an aligned triple) associates.  The predicate
    is symmetric in its three arguments.
    """
    if len({i, j, k}) != 3 or 0 in (i, j, k):
        return False
    _, m = _decode(_TABLE[i, j])
    return m != k


def golden_table_text() -> str:
    return "\n".join(cayley_table_lines()) + "\n"


def packaged_golden_table() -> str:
    """Golden table text shipped with the package."""
    return resources.files("octolattice.data").joinpath("cayley_table.txt").read_text()
