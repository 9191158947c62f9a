"""The split-generator algebra on e_j^+/e_j^-, truncated at word degree 3.

Each octonion direction splits into a positive and a negative generator
subject to the Weyl anticommutation rules

    e_j^+ e_k^+ + e_k^+ e_j^+ = 0
    e_j^- e_k^- + e_k^- e_j^- = 0
    e_j^+ e_k^- + e_k^- e_j^+ = -delta_jk

together with the bracketing rule (x y) z = s * x (y z), where s = -1 exactly
on anti-associative octonion index triples and +1 otherwise.

Normal form.  Because the anticommutation rules hold inside any bracket and
the contraction -delta_jk only fires on repeated indices (where s = +1), the
right-bracketed degree-<=3 words reduce exactly like a fermionic algebra on 16
generators: every element has a unique expansion over strictly increasing
generator words of length 0..3.  Rebracketing enters only when a product
(x y) z is formed, contributing the sign s keyed on the octonion indices.
This normal form is confluent (the consistency suite in the tests checks that
every relation instance reduces to zero), which is what makes the discrete
Stokes/Borel-Pompeiu identities hold with zero residual.

The narrower "bracket-local" reduction that never orders a leading factor
against its bracket is also provided (``reduce_tree_bracket_local``); it is
not confluent, and the scan in the test suite enumerates its critical pairs.

Generator encoding: id = 2*j for e_j^+, 2*j+1 for e_j^-; words are strictly
increasing tuples of ids.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .octonion import Octonion, is_antiassociative_triple

__all__ = [
    "Generator",
    "SplitElement",
    "DegreeOverflowError",
    "gen",
    "gen_id",
    "gen_name",
    "embed_octonion",
    "rebracket_sign",
    "canonical_form",
    "equals",
    "normal_order",
    "reduce_tree_bracket_local",
    "parse_expression",
    "CANONICAL_WORDS",
    "WORD_INDEX",
]

NGEN = 16


class DegreeOverflowError(ValueError):
    """A product left the degree-3 word space; the expression is malformed."""


def gen_id(polarity: str, j: int) -> int:
    if j not in range(8):
        raise ValueError(f"generator index {j} out of range 0..7")
    if polarity not in ("+", "-"):
        raise ValueError(f"polarity must be '+' or '-', got {polarity!r}")
    return 2 * j + (0 if polarity == "+" else 1)


def gen_name(g: int) -> str:
    return f"e{g >> 1}{'+' if g % 2 == 0 else '-'}"


def gen_index(g: int) -> int:
    return g >> 1


def gen_polarity(g: int) -> str:
    return "+" if g % 2 == 0 else "-"


# Convenience alias mirroring the notation e_j^{+-}.
Generator = int


def _delta(a: int, b: int) -> float:
    # 1 exactly for same index, opposite polarity.
    return 1.0 if (a ^ b) == 1 else 0.0


def rebracket_sign(i: int, j: int, k: int) -> int:
    """Sign s in (g_i g_j) g_k = s * g_i (g_j g_k), keyed on octonion indices.

    Independent of polarities; -1 iff (i, j, k) is an anti-associative triple.
    """
    return -1 if is_antiassociative_triple(i, j, k) else 1


def normal_order(seq: tuple[int, ...], coeff, out: dict) -> None:
    """Accumulate coeff * (g_{seq[0]} g_{seq[1]} ...) into ``out`` in normal form.

    Right-bracketed reading; applies swap/contract rules until the word is
    strictly increasing.
    """
    n = len(seq)
    for i in range(n - 1):
        a, b = seq[i], seq[i + 1]
        if a < b:
            continue
        if a == b:
            return  # g g = 0
        rest = seq[:i] + (b, a) + seq[i + 2 :]
        normal_order(rest, -coeff, out)
        if _delta(a, b):
            normal_order(seq[:i] + seq[i + 2 :], -coeff, out)
        return
    out[seq] = out.get(seq, 0.0) + coeff


def _word_mul(w1: tuple[int, ...], w2: tuple[int, ...], coeff, out: dict) -> None:
    d1, d2 = len(w1), len(w2)
    if d1 == 0 or d2 == 0:
        normal_order(w1 + w2, coeff, out)
        return
    if d1 + d2 > 3:
        raise DegreeOverflowError(
            f"product degree {d1 + d2} exceeds 3: {_word_str(w1)} * {_word_str(w2)}"
        )
    if d1 == 2:
        # (a b) c picks up the rebracketing sign before normal ordering.
        a, b = w1
        (c,) = w2
        s = rebracket_sign(a >> 1, b >> 1, c >> 1)
        normal_order((a, b, c), s * coeff, out)
        return
    normal_order(w1 + w2, coeff, out)


def _word_str(w: tuple[int, ...]) -> str:
    if not w:
        return "1"
    return " ".join(gen_name(g) for g in w)


class SplitElement:
    """A real- (or complex-) linear combination of normal-form generator words.

    Immutable in spirit: arithmetic returns fresh elements.  Coefficients below
    1e-15 of the element's magnitude are pruned on construction.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, ...], complex] | None = None):
        t = {}
        if terms:
            for w, c in terms.items():
                if c != 0:
                    t[tuple(w)] = t.get(tuple(w), 0.0) + c
        self.terms = {w: c for w, c in t.items() if c != 0}

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero() -> "SplitElement":
        return SplitElement()

    @staticmethod
    def scalar(c) -> "SplitElement":
        return SplitElement({(): c})

    @staticmethod
    def word(w: Iterable[int], c=1.0) -> "SplitElement":
        out: dict = {}
        normal_order(tuple(w), c, out)
        return SplitElement(out)

    # -- algebra -------------------------------------------------------------

    def __add__(self, other: "SplitElement") -> "SplitElement":
        t = dict(self.terms)
        for w, c in other.terms.items():
            t[w] = t.get(w, 0.0) + c
        return SplitElement(t)

    def __sub__(self, other: "SplitElement") -> "SplitElement":
        t = dict(self.terms)
        for w, c in other.terms.items():
            t[w] = t.get(w, 0.0) - c
        return SplitElement(t)

    def __neg__(self) -> "SplitElement":
        return SplitElement({w: -c for w, c in self.terms.items()})

    def __rmul__(self, scalar) -> "SplitElement":
        return SplitElement({w: scalar * c for w, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, SplitElement):
            out: dict = {}
            for w1, c1 in self.terms.items():
                for w2, c2 in other.terms.items():
                    _word_mul(w1, w2, c1 * c2, out)
            return SplitElement(out)
        return SplitElement({w: c * other for w, c in self.terms.items()})

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def norm(self) -> float:
        """Max absolute coefficient in normal form."""
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def coefficient(self, w: Iterable[int]):
        return self.terms.get(tuple(w), 0.0)

    def prune(self, tol: float = 0.0) -> "SplitElement":
        if tol <= 0.0:
            return SplitElement(self.terms)
        return SplitElement({w: c for w, c in self.terms.items() if abs(c) > tol})

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms, key=lambda w: (len(w), w)):
            c = self.terms[w]
            parts.append(f"{c:+g}*{_word_str(w)}" if w else f"{c:+g}")
        return " ".join(parts)


def gen(polarity: str, j: int) -> SplitElement:
    """The basis generator e_j^+ or e_j^-."""
    return SplitElement.word((gen_id(polarity, j),))


def embed_octonion(a: Octonion) -> SplitElement:
    """sum_j a_j (e_j^+ + e_j^-); linear, not multiplicative."""
    t = {}
    for j, c in enumerate(a.c):
        if c != 0.0:
            t[(2 * j,)] = c
            t[(2 * j + 1,)] = c
    return SplitElement(t)


def canonical_form(x: SplitElement) -> SplitElement:
    """Normal form of x.  Elements are stored in normal form, so this only
    re-prunes; kept as the named entry point used by equality and norms."""
    return SplitElement(x.terms)


def equals(x: SplitElement, y: SplitElement, tol: float = 0.0) -> bool:
    d = canonical_form(x) - canonical_form(y)
    return d.norm() <= tol


def _all_words():
    words = [()]
    words += [(g,) for g in range(NGEN)]
    words += [(a, b) for a in range(NGEN) for b in range(a + 1, NGEN)]
    words += [
        (a, b, c)
        for a in range(NGEN)
        for b in range(a + 1, NGEN)
        for c in range(b + 1, NGEN)
    ]
    return tuple(words)


CANONICAL_WORDS = _all_words()
WORD_INDEX = {w: i for i, w in enumerate(CANONICAL_WORDS)}
DIM = len(CANONICAL_WORDS)  # 1 + 16 + 120 + 560


def to_vector(x: SplitElement, dtype=float) -> np.ndarray:
    v = np.zeros(DIM, dtype=dtype)
    for w, c in x.terms.items():
        v[WORD_INDEX[w]] = c
    return v


# -- bracket-local reduction (for the confluence scan) -----------------------
#
# Trees are ("g", id) leaves or ("*", left, right) nodes.  The bracket-local
# strategy reduces pairs inside their own bracket and rebrackets degree-3
# words, but never orders a leading factor against its bracket; its degree-3
# words are ("T", lead, a, b) with only (a, b) ordered.


def _local_pair(a: int, b: int) -> dict:
    if a == b:
        return {}
    if a < b:
        return {(a, b): 1.0}
    out = {(b, a): -1.0}
    if _delta(a, b):
        out[()] = -1.0
    return out


def _leaves(tree) -> int:
    return 1 if tree[0] == "g" else _leaves(tree[1]) + _leaves(tree[2])


def _attach(lead: int, pair_terms: dict, scale: float, out: dict) -> None:
    for w, c in pair_terms.items():
        word = ("T", lead, w[0], w[1]) if w else (lead,)
        out[word] = out.get(word, 0.0) + scale * c


def reduce_tree_bracket_local(tree, order: str = "rebracket_first") -> dict:
    """Reduce a degree-<=3 product tree without cross-bracket ordering.

    order = "rebracket_first": flip (x y) z to x (y z) on the raw factors,
    then contract/order the inner pair.  order = "contract_first": reduce the
    pair (x y) inside its own bracket first, then rebracket the survivors.
    The two disagree exactly on the critical pairs that make this strategy
    non-confluent; the shipped arithmetic uses ``normal_order`` instead.
    """
    if tree[0] == "g":
        return {(tree[1],): 1.0}
    _, lt, rt = tree
    dl, dr = _leaves(lt), _leaves(rt)
    if dl + dr > 3:
        raise DegreeOverflowError("bracket-local degree overflow")
    out: dict = {}
    if dl == 1 and dr == 1:
        return _local_pair(lt[1], rt[1])
    if dl == 1 and dr == 2:
        inner = reduce_tree_bracket_local(rt, order)
        x = lt[1]
        for w, c in inner.items():
            if w == ():
                out[(x,)] = out.get((x,), 0.0) + c
            else:
                _attach(x, {w: c}, 1.0, out)
        return {w: c for w, c in out.items() if c != 0.0}
    # (x y) z with raw leaves x, y
    x, y = lt[1][1], lt[2][1]
    z = rt[1]
    if order == "rebracket_first":
        s = rebracket_sign(x >> 1, y >> 1, z >> 1)
        inner = _local_pair(y, z)
        _attach(x, {w: c for w, c in inner.items() if w}, s, out)
        if () in inner:
            out[(x,)] = out.get((x,), 0.0) + s * inner[()]
    else:  # contract_first
        for w, c in _local_pair(x, y).items():
            if w == ():
                out[(z,)] = out.get((z,), 0.0) + c
            else:
                a, b = w
                s = rebracket_sign(a >> 1, b >> 1, z >> 1)
                inner = _local_pair(b, z)
                _attach(a, {ww: cc for ww, cc in inner.items() if ww}, s * c, out)
                if () in inner:
                    out[(a,)] = out.get((a,), 0.0) + s * c * inner[()]
    return {w: c for w, c in out.items() if c != 0.0}


# -- expression parser for the CLI ``reduce`` subcommand ---------------------


def parse_expression(text: str) -> SplitElement:
    """Parse expressions like ``(e1+ * e2-) * e3+ + 2``.

    Grammar: sums of products of atoms; atoms are generators ``e<j><+->``,
    octonion units ``E<j>`` (embedded), numeric literals, or parenthesized
    expressions.  ``*`` is required between factors.
    """
    tokens = _tokenize(text)
    pos = [0]

    def peek():
        return tokens[pos[0]] if pos[0] < len(tokens) else None

    def take():
        t = tokens[pos[0]]
        pos[0] += 1
        return t

    def parse_sum():
        node = parse_product()
        while peek() in ("+", "-"):
            op = take()
            rhs = parse_product()
            node = node + rhs if op == "+" else node - rhs
        return node

    def parse_product():
        node = parse_atom()
        while peek() == "*":
            take()
            node = node * parse_atom()
        return node

    def parse_atom():
        t = peek()
        if t is None:
            raise ValueError("unexpected end of expression")
        if t == "(":
            take()
            node = parse_sum()
            if take() != ")":
                raise ValueError("unbalanced parentheses")
            return node
        if t == "-":
            take()
            return -parse_atom()
        take()
        if t.startswith("e") and (t.endswith("+") or t.endswith("-")):
            return gen(t[-1], int(t[1:-1]))
        if t.startswith("E"):
            return embed_octonion(Octonion.basis(int(t[1:])))
        return SplitElement.scalar(float(t))

    out = parse_sum()
    if peek() is not None:
        raise ValueError(f"trailing input at token {peek()!r}")
    return out


def _tokenize(text: str) -> list[str]:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()*":
            out.append(ch)
            i += 1
        elif ch == "e" and i + 1 < len(text) and text[i + 1].isdigit():
            j = i + 1
            while j < len(text) and text[j].isdigit():
                j += 1
            if j < len(text) and text[j] in "+-":
                out.append(text[i : j + 1])
                i = j + 1
            else:
                raise ValueError(f"generator at {i} missing polarity")
        elif ch == "E" and i + 1 < len(text) and text[i + 1].isdigit():
            j = i + 1
            while j < len(text) and text[j].isdigit():
                j += 1
            out.append(text[i:j])
            i = j
        elif ch in "+-":
            out.append(ch)
            i += 1
        elif ch.isdigit() or ch == ".":
            j = i
            while j < len(text) and (text[j].isdigit() or text[j] in ".eE"):
                j += 1
            out.append(text[i:j])
            i = j
        else:
            raise ValueError(f"unexpected character {ch!r} at {i}")
    return out
