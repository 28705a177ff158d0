"""The normalized Hochschild complex over F2 and its chain-level products.

A bar word a0[a1|...|an] is a pair (head, bars) of reduced monomials with no
bar entry equal to the unit: entries that reduce to a scalar kill the term
(normalized complex).  Chains are frozensets of words; adding a word twice
cancels.  The internal degree of a word is the plain sum of the internal
degrees of all its slots, which both b and B preserve.

u-chains carry the bookkeeping for the four homology theories: the entry at
u-exponent i is a chain of bar length n + 2i, where n is the total
homological degree.  Exponents are >= 0 for the minus theory, <= 0 for the
plus theory (the class of u^{-i}) and unrestricted for per.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .gralg import AlgebraPresentation, Monomial

BarWord = tuple  # (head: Monomial, bars: tuple[Monomial, ...])
ChainElement = frozenset  # frozenset[BarWord]

ZERO_CHAIN: ChainElement = frozenset()


class ChainError(Exception):
    pass


def word(head: Monomial, bars: tuple[Monomial, ...]) -> BarWord:
    return (head, bars)


def word_hom_degree(w: BarWord) -> int:
    return len(w[1])


def word_internal_degree(A: AlgebraPresentation, w: BarWord) -> int:
    return A.mono_degree(w[0]) + sum(A.mono_degree(b) for b in w[1])


def chain(words) -> ChainElement:
    out: set = set()
    for w in words:
        out.symmetric_difference_update({w})
    return frozenset(out)


def single(A: AlgebraPresentation, head, bars=()) -> ChainElement:
    """Build the chain for one word, normalizing all slots.

    head and every bar may be given as monomials or polynomial frozensets;
    multilinear expansion applies and scalar bar entries drop out.
    """
    headp = head if isinstance(head, frozenset) else A.normal_form([head])
    out: set = set()
    barsp = []
    for b in bars:
        bp = b if isinstance(b, frozenset) else A.normal_form([b])
        barsp.append([m for m in bp if m != A.one])
    for h in headp:
        for combo in itertools.product(*barsp):
            out.symmetric_difference_update({(h, tuple(combo))})
    return frozenset(out)


def boundary_b(A: AlgebraPresentation, c: ChainElement) -> ChainElement:
    """Hochschild boundary; signs vanish in characteristic 2."""
    out: set = set()
    one = A.one
    for head, bars in c:
        n = len(bars)
        if n == 0:
            continue
        # merge into the head at both ends
        for m in A.mul(head, bars[0]):
            out.symmetric_difference_update({(m, bars[1:])})
        for m in A.mul(bars[-1], head):
            out.symmetric_difference_update({(m, bars[:-1])})
        # merge adjacent bar entries; scalar products drop (normalization)
        for i in range(n - 1):
            rest = bars[:i] + bars[i + 2:]
            for m in A.mul(bars[i], bars[i + 1]):
                if m != one:
                    out.symmetric_difference_update(
                        {(head, bars[:i] + (m,) + rest[i:])})
    return frozenset(out)


def connes_B(A: AlgebraPresentation, c: ChainElement) -> ChainElement:
    """Connes' boundary: the sum of cyclic rotations with head 1."""
    out: set = set()
    one = A.one
    for head, bars in c:
        if head == one:
            continue  # every term puts the head in a bar slot
        cycle = (head,) + bars
        n1 = len(cycle)
        for i in range(n1):
            # rotation starting at slot i of (a0, a1, ..., an)
            rot = cycle[i:] + cycle[:i]
            out.symmetric_difference_update({(one, rot)})
    return frozenset(out)


# ----- shuffle combinatorics -----

@lru_cache(maxsize=None)
def shuffles(p: int, q: int) -> tuple[tuple[int, ...], ...]:
    """All (p,q)-shuffles as image tuples (sigma(1), ..., sigma(p+q))."""
    if p < 0 or q < 0:
        raise ChainError("negative shuffle parameters")
    n = p + q
    out = []
    for pos in itertools.combinations(range(n), p):
        images = [0] * n
        rest = [i for i in range(n) if i not in pos]
        for k, slot in enumerate(pos):
            images[k] = slot + 1
        for k, slot in enumerate(rest):
            images[p + k] = slot + 1
        out.append(tuple(images))
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def cyclic_shuffles(p: int, q: int) -> tuple[tuple[int, ...], ...]:
    """Cyclic (p,q)-shuffles: rotate each block, shuffle, keep 1 before p+1."""
    if p < 1 or q < 1:
        raise ChainError("cyclic shuffles need p, q >= 1")
    n = p + q
    block1 = list(range(1, p + 1))
    block2 = list(range(p + 1, n + 1))
    seen = set()
    for r1 in range(p):
        rot1 = block1[r1:] + block1[:r1]
        for r2 in range(q):
            rot2 = block2[r2:] + block2[:r2]
            for pos in itertools.combinations(range(n), p):
                seq = [0] * n
                rest = [i for i in range(n) if i not in pos]
                for k, slot in enumerate(pos):
                    seq[slot] = rot1[k]
                for k, slot in enumerate(rest):
                    seq[slot] = rot2[k]
                if seq.index(1) < seq.index(p + 1):
                    seen.add(tuple(seq))
    return tuple(sorted(seen))


def act(perm: tuple[int, ...], items: tuple) -> tuple:
    """The left action sigma . (c_1..c_n): item k lands in slot sigma(k)."""
    out = [None] * len(perm)
    for k, v in enumerate(perm):
        out[v - 1] = items[k]
    return tuple(out)


def act_inverse(perm: tuple[int, ...], items: tuple) -> tuple:
    """The action of sigma^{-1}: slot k receives item sigma(k)."""
    return tuple(items[perm[k] - 1] for k in range(len(perm)))


def shuffle_product(A: AlgebraPresentation, c1: ChainElement,
                    c2: ChainElement) -> ChainElement:
    """Chain-level product on the Hochschild complex (shuffle then multiply)."""
    out: set = set()
    for h1, b1 in c1:
        for h2, b2 in c2:
            content = b1 + b2
            heads = A.mul(h1, h2)
            for tau in shuffles(len(b1), len(b2)):
                bars = act(tau, content)
                for h in heads:
                    out.symmetric_difference_update({(h, bars)})
    return frozenset(out)


# ----- u-chains and the mixed products -----

THEORIES = ("minus", "plus", "per")


def _combine_theories(t1: str, t2: str) -> str:
    if t1 == t2:
        return t1
    if t1 == "minus":
        return t2
    if t2 == "minus":
        return t1
    raise ChainError(f"incompatible theory tags: {t1} x {t2}")


@dataclass(frozen=True)
class UChain:
    """Finitely supported map u-exponent -> chain, tagged with its theory."""

    theory: str
    entries: tuple[tuple[int, ChainElement], ...]
    clipped: bool = False

    def __post_init__(self):
        if self.theory not in THEORIES:
            raise ChainError(f"unknown theory {self.theory}")
        for i, c in self.entries:
            if self.theory == "minus" and i < 0:
                raise ChainError("negative u-exponent in a minus chain")
            if self.theory == "plus" and i > 0:
                raise ChainError("positive u-exponent in a plus chain")

    @classmethod
    def make(cls, theory: str, entries: dict[int, ChainElement],
             clipped: bool = False) -> "UChain":
        items = tuple(sorted((i, c) for i, c in entries.items() if c))
        return cls(theory, items, clipped)

    def entry(self, i: int) -> ChainElement:
        for j, c in self.entries:
            if j == i:
                return c
        return ZERO_CHAIN

    def is_zero(self) -> bool:
        return not self.entries

    def __add__(self, other: "UChain") -> "UChain":
        if other.theory != self.theory:
            raise ChainError("cannot add chains from different theories")
        acc: dict[int, set] = {}
        for i, c in self.entries + other.entries:
            acc.setdefault(i, set()).symmetric_difference_update(c)
        return UChain.make(self.theory,
                           {i: frozenset(s) for i, s in acc.items()},
                           self.clipped or other.clipped)

    def total_degrees(self, A: AlgebraPresentation) -> tuple[int, int]:
        """(homological, internal) bidegree; requires homogeneity."""
        homs = set()
        ints = set()
        for i, c in self.entries:
            for w in c:
                homs.add(word_hom_degree(w) - 2 * i)
                ints.add(word_internal_degree(A, w))
        if len(homs) > 1 or len(ints) > 1:
            raise ChainError("inhomogeneous u-chain")
        return (homs.pop() if homs else 0, ints.pop() if ints else 0)


def unit_uchain(A: AlgebraPresentation, theory: str = "minus",
                exponent: int = 0) -> UChain:
    return UChain.make(theory, {exponent: frozenset({(A.one, ())})})


def mu_chain(A: AlgebraPresentation, x: UChain, y: UChain,
             window: int | None = None) -> UChain:
    """The chain-level product: shuffle part plus u times the cyclic part.

    Works for minus x minus, per x per and the module pairings where one
    factor is a minus chain.  In the plus theory, terms pushed above u^0 are
    quotiented away; with a per window, terms below -window are dropped and
    the result is marked clipped.
    """
    theory = _combine_theories(x.theory, y.theory)
    acc: dict[int, set] = {}
    clipped = x.clipped or y.clipped
    one = A.one

    def add_word(exp: int, w: BarWord):
        acc.setdefault(exp, set()).symmetric_difference_update({w})

    for i, ci in x.entries:
        for j, cj in y.entries:
            for (h1, b1) in ci:
                for (h2, b2) in cj:
                    p, q = len(b1), len(b2)
                    # shuffle part at u^{i+j}
                    e0 = i + j
                    keep0 = not (theory == "plus" and e0 > 0)
                    if keep0 and not (window is not None and e0 < -window):
                        heads = A.mul(h1, h2)
                        content = b1 + b2
                        for tau in shuffles(p, q):
                            bars = act(tau, content)
                            for h in heads:
                                add_word(e0, (h, bars))
                    elif window is not None and e0 < -window:
                        clipped = True
                    # cyclic-shuffle part at u^{i+j+1}; dies if a head is 1
                    if h1 == one or h2 == one:
                        continue
                    e1 = i + j + 1
                    if theory == "plus" and e1 > 0:
                        continue
                    if window is not None and e1 < -window:
                        clipped = True
                        continue
                    content = (h1,) + b1 + (h2,) + b2
                    for sigma in cyclic_shuffles(p + 1, q + 1):
                        bars = act_inverse(sigma, content)
                        add_word(e1, (one, bars))
    return UChain.make(theory, {i: frozenset(s) for i, s in acc.items()},
                       clipped)


def uchain_boundary(A: AlgebraPresentation, x: UChain) -> UChain:
    """The total differential b + u.B on a u-chain."""
    acc: dict[int, set] = {}
    for i, c in x.entries:
        bc = boundary_b(A, c)
        if bc:
            acc.setdefault(i, set()).symmetric_difference_update(bc)
        Bc = connes_B(A, c)
        if Bc and not (x.theory == "plus" and i + 1 > 0):
            acc.setdefault(i + 1, set()).symmetric_difference_update(Bc)
    return UChain.make(x.theory, {i: frozenset(s) for i, s in acc.items()},
                       x.clipped)


def scale_u(x: UChain, k: int = 1) -> UChain:
    """Multiply by u^k (shift exponents); plus-theory overflow is quotiented."""
    acc = {}
    clipped = x.clipped
    for i, c in x.entries:
        e = i + k
        if x.theory == "minus" and e < 0:
            raise ChainError("u^-1 does not act on minus chains")
        if x.theory == "plus" and e > 0:
            continue
        acc[e] = c
    return UChain.make(x.theory, acc, clipped)
