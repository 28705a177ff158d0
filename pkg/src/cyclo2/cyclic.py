"""Truncated towers, the four homology theories and their exact sequences.

A tower slice T_n collects the columns p of the mixed (B, b)-bicomplex that
the chosen theory allows, in one total degree n and one internal degree d
(the plain sum of slot degrees, which B + b preserves).  Bar length in
column p is n - 2p, so the right bound is always finite; for graded
algebras the left bound is finite too because every bar entry has positive
degree.  Only ungraded minus/per towers need the truncation column -S, and
those results carry a stable / truncation-limited flag decided by
recomputing at S + 1.

The u-exponent i of the chain notation corresponds to column p = -i.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .f2linalg import (
    F2Matrix,
    SubspaceBasis,
    class_coordinates,
    complement_basis,
    echelonize_in,
    eliminate_tracked,
    solve,
)
from .gralg import AlgebraPresentation, Monomial, grevlex_key, mono_mul
from .hochschild import BarWord, UChain, boundary_b, connes_B

THEORY_BOUNDS = {
    "hh": (0, 0),
    "plus": (0, None),
    "minus": (None, 0),
    "per": (None, None),
}

THEORY_ALIASES = {
    "hh": "hh", "hc": "plus", "plus": "plus", "hcminus": "minus",
    "minus": "minus", "hcper": "per", "per": "per",
}


class TowerError(Exception):
    pass


def theory_key(theory: str) -> str:
    try:
        return THEORY_ALIASES[theory]
    except KeyError:
        raise TowerError(f"unknown theory {theory!r}") from None


def enumerate_words(A: AlgebraPresentation, nbars: int, d: int) -> list[BarWord]:
    """All normalized bar words with nbars bars and internal degree d."""
    if nbars < 0:
        return []
    if A.graded:
        out: list[BarWord] = []

        # build bars left to right (degree >= 1 each), head soaks up the rest
        def rec(slots_left: int, rem: int, acc: list[Monomial]):
            if slots_left == 0:
                for head in A.degree_basis(rem):
                    out.append((head, tuple(acc)))
                return
            for e in range(1, rem - (slots_left - 1) + 1):
                for m in A.degree_basis(e):
                    acc.append(m)
                    rec(slots_left - 1, rem - e, acc)
                    acc.pop()

        rec(nbars, d, [])
        return out
    if d != 0:
        return []
    basis = A.basis_all()
    bars_pool = [m for m in basis if m != A.one]
    out = []
    for head in basis:
        for bars in itertools.product(bars_pool, repeat=nbars):
            out.append((head, bars))
    return out


def _word_key(A: AlgebraPresentation, w: BarWord):
    return (grevlex_key(w[0]), tuple(grevlex_key(b) for b in w[1]))


def _block_key(w: BarWord):
    # multidegree of the whole word; valid block split for monomial ideals
    total = w[0]
    for b in w[1]:
        total = mono_mul(total, b)
    return total


@dataclass(frozen=True)
class TowerSlice:
    """One total degree of a truncated tower, with a fixed ordered basis."""

    theory: str
    n: int
    d: int
    S: int
    p_min: int
    p_max: int
    truncated: bool
    basis: tuple[tuple[int, BarWord], ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self) -> dict[tuple[int, BarWord], int]:
        idx = self.__dict__.get("_index_cache")
        if idx is None:
            idx = {pw: k for k, pw in enumerate(self.basis)}
            object.__setattr__(self, "_index_cache", idx)
        return idx


def build_tower(A: AlgebraPresentation, theory: str, n: int, d: int,
                S: int = 1) -> TowerSlice:
    """Assemble the degree-n slice of T^{alpha,beta} at internal degree d."""
    t = theory_key(theory)
    alpha, beta = THEORY_BOUNDS[t]
    if not A.graded and d != 0:
        return TowerSlice(t, n, d, S, 0, -1, False, ())
    p_max = n // 2  # bar length n - 2p must be >= 0
    p_max = min(p_max, beta) if beta is not None else p_max
    truncated = False
    if alpha is not None:
        p_min = alpha
    elif A.graded:
        p_min = -((d - n) // 2)  # ceil((n - d) / 2): bar length <= d
    else:
        if S < 1:
            raise TowerError("S >= 1 required for an infinite left bound")
        p_min = -S
        truncated = True
    key = (t, n, d, S if truncated else 0)
    cache = _slice_cache(A)
    if key in cache:
        return cache[key]
    basis: list[tuple[int, BarWord]] = []
    for p in range(p_min, p_max + 1):
        words = enumerate_words(A, n - 2 * p, d)
        if A.monomial_ideal:
            words.sort(key=lambda w: (_block_key(w), _word_key(A, w)))
        else:
            words.sort(key=lambda w: _word_key(A, w))
        basis.extend((p, w) for w in words)
    sl = TowerSlice(t, n, d, S if truncated else 0, p_min, p_max, truncated,
                    tuple(basis))
    cache[key] = sl
    return sl


def _slice_cache(A: AlgebraPresentation) -> dict:
    cache = getattr(A, "_tower_cache", None)
    if cache is None:
        cache = {}
        setattr(A, "_tower_cache", cache)
    return cache


def _matrix_cache(A: AlgebraPresentation) -> dict:
    cache = getattr(A, "_tower_matrix_cache", None)
    if cache is None:
        cache = {}
        setattr(A, "_tower_matrix_cache", cache)
    return cache


def vectorize(A: AlgebraPresentation, sl: TowerSlice, x: UChain,
              allow_projection: bool = False) -> int:
    """Coordinates of a u-chain in a slice basis (bitmask).

    With allow_projection, components below the truncation window are
    dropped (the quotient-complex projection); otherwise any missing word is
    an error.
    """
    idx = sl.index()
    v = 0
    for i, c in x.entries:
        p = -i
        for w in c:
            key = (p, w)
            j = idx.get(key)
            if j is None:
                if p < sl.p_min and (allow_projection or sl.truncated):
                    continue
                raise TowerError(f"chain component {key} outside slice")
            v ^= 1 << j
    return v


def unvectorize(sl: TowerSlice, v: int) -> UChain:
    entries: dict[int, set] = {}
    for j, (p, w) in enumerate(sl.basis):
        if (v >> j) & 1:
            entries.setdefault(-p, set()).add(w)
    theory = sl.theory if sl.theory != "hh" else "minus"
    return UChain.make(theory, {i: frozenset(s) for i, s in entries.items()})


def differential_columns(A: AlgebraPresentation, src: TowerSlice,
                         tgt: TowerSlice) -> list[int]:
    """Columns of B + b from src (degree n) to tgt (degree n - 1)."""
    if tgt.n != src.n - 1 or tgt.d != src.d:
        raise TowerError("differential endpoints mismatch")
    key = ("diff", src.theory, src.n, src.d, src.S if src.truncated else 0)
    cache = _matrix_cache(A)
    if key in cache:
        return cache[key]
    idx = tgt.index()
    cols: list[int] = []
    for p, w in src.basis:
        v = 0
        for w2 in boundary_b(A, frozenset({w})):
            v ^= 1 << idx[(p, w2)]
        if p - 1 >= tgt.p_min:
            for w2 in connes_B(A, frozenset({w})):
                v ^= 1 << idx[(p - 1, w2)]
        # p - 1 < p_min: the B-component is cut by the truncation / bound
        cols.append(v)
    cache[key] = cols
    return cols


@dataclass(frozen=True)
class HomologyPresentation:
    """Cycle/boundary bases and class coordinates in one bidegree."""

    theory: str
    n: int
    d: int
    S: int
    slice: TowerSlice
    cycles: SubspaceBasis
    boundaries: SubspaceBasis
    complement: tuple[int, ...]
    flag: str  # "stable" | "truncation-limited"
    persistent_rank: Optional[int] = None
    # classes (in this presentation's coordinates) that lift one window up;
    # only populated when the stabilization protocol ran
    persistent_image: Optional[SubspaceBasis] = None

    @property
    def dim(self) -> int:
        return len(self.complement)

    def coords(self, v: int) -> tuple[int, ...]:
        return class_coordinates(self.complement, self.boundaries, v)

    def coords_of_uchain(self, A: AlgebraPresentation, x: UChain,
                         allow_projection: bool = False) -> tuple[int, ...]:
        return self.coords(vectorize(A, self.slice, x, allow_projection))

    def rep(self, k: int) -> int:
        return self.complement[k]

    def rep_uchain(self, k: int) -> UChain:
        return unvectorize(self.slice, self.complement[k])


def _homology_at(A: AlgebraPresentation, theory: str, n: int, d: int,
                 S: int) -> HomologyPresentation:
    sl_n = build_tower(A, theory, n, d, S)
    sl_dn = build_tower(A, theory, n - 1, d, S)
    sl_up = build_tower(A, theory, n + 1, d, S)
    dn_cols = differential_columns(A, sl_n, sl_dn)
    up_cols = differential_columns(A, sl_up, sl_n)
    pivot_rows, zero_trackers = eliminate_tracked(dn_cols)
    cycles = echelonize_in(zero_trackers, sl_n.dim)
    boundaries = echelonize_in(
        [v for v in up_cols if v], sl_n.dim)
    # boundaries must be cycles; reduce them into the cycle space
    comp = complement_basis(cycles, boundaries)
    return HomologyPresentation(
        theory=sl_n.theory, n=n, d=d, S=S, slice=sl_n, cycles=cycles,
        boundaries=boundaries, complement=comp,
        flag="stable", persistent_rank=None)


def homology(A: AlgebraPresentation, theory: str, n: int, d: int,
             S: int = 3) -> HomologyPresentation:
    """Homology of the chosen tower in bidegree (n, d).

    For graded algebras all towers are finite and the result is exact.  For
    ungraded minus/per towers the computation runs at S and S + 1; the flag
    is stable only if the dimensions agree and the projection induces an
    isomorphism between the two answers.
    """
    t = theory_key(theory)
    alpha, _ = THEORY_BOUNDS[t]
    needs_protocol = (alpha is None) and not A.graded
    cache = _homology_cache(A)
    key = (t, n, d, S if needs_protocol else 0)
    if key in cache:
        return cache[key]
    if not needs_protocol:
        pres = _homology_at(A, t, n, d, S)
        cache[key] = pres
        return pres
    small = _homology_at(A, t, n, d, S)
    big = _homology_at(A, t, n, d, S + 1)
    # project the S+1 class representatives into the S window
    coords = []
    for k in range(big.dim):
        xc = big.rep_uchain(k)
        coords.append(small.coords_of_uchain(A, xc, allow_projection=True))
    image = echelonize_in(
        [sum(1 << j for j, b in enumerate(c) if b) for c in coords],
        small.dim)
    rank = image.dim
    stable = small.dim == big.dim and rank == small.dim
    pres = HomologyPresentation(
        theory=small.theory, n=n, d=d, S=S, slice=small.slice,
        cycles=small.cycles, boundaries=small.boundaries,
        complement=small.complement,
        flag="stable" if stable else "truncation-limited",
        persistent_rank=rank, persistent_image=image)
    cache[key] = pres
    return pres


def _homology_cache(A: AlgebraPresentation) -> dict:
    cache = getattr(A, "_homology_cache", None)
    if cache is None:
        cache = {}
        setattr(A, "_homology_cache", cache)
    return cache


# ----- maps of the three long exact sequences -----

def matrix_from_columns(cols: list[int], nrows: int) -> F2Matrix:
    rows = [0] * nrows
    for j, c in enumerate(cols):
        while c:
            i = (c & -c).bit_length() - 1
            c &= c - 1
            rows[i] |= 1 << j
    return F2Matrix(nrows, len(cols), tuple(rows))


def class_map(A: AlgebraPresentation, src: HomologyPresentation,
              tgt: HomologyPresentation, chain_map) -> F2Matrix:
    """Matrix of a chain-level map on homology classes.

    chain_map takes a slice vector of src and returns a slice vector of tgt;
    it must send cycles to cycles and boundaries to boundaries.
    """
    cols = []
    for k in range(src.dim):
        img = chain_map(src.rep(k))
        c = tgt.coords(img)
        cols.append(sum(1 << i for i, b in enumerate(c) if b))
    return matrix_from_columns(cols, tgt.dim)


def slice_shift_map(A: AlgebraPresentation, src: TowerSlice, tgt: TowerSlice,
                    shift: int):
    """Vector map moving column p to p + shift, dropping cut components."""
    idx = tgt.index()

    def f(v: int) -> int:
        out = 0
        while v:
            j = (v & -v).bit_length() - 1
            v &= v - 1
            p, w = src.basis[j]
            key = (p + shift, w)
            k = idx.get(key)
            if k is None:
                if p + shift < tgt.p_min:
                    continue
                raise TowerError(f"shifted component {key} outside slice")
            out ^= 1 << k
        return out

    return f


def connecting_map(A: AlgebraPresentation,
                   HN: HomologyPresentation, HL: HomologyPresentation,
                   M_n: TowerSlice, M_n1: TowerSlice,
                   p_map, i_map) -> F2Matrix:
    """Snake-lemma connecting homomorphism via explicit lifting.

    p_map : M_n slice vector -> N_n slice vector (surjection of the SES)
    i_map : L slice vector -> M_{n-1} slice vector (injection of the SES)
    The lift and the preimage are found with f2linalg.solve, not by a
    closed formula.
    """
    p_cols = [p_map(1 << j) for j in range(M_n.dim)]
    p_mat = matrix_from_columns(p_cols, HN.slice.dim)
    i_cols = [i_map(1 << j) for j in range(HL.slice.dim)]
    i_mat = matrix_from_columns(i_cols, M_n1.dim)
    d_cols = differential_columns(A, M_n, M_n1)
    cols = []
    for k in range(HN.dim):
        z = HN.rep(k)
        x = solve(p_mat, z)
        if x is None:
            raise TowerError("connecting map: lift failed")
        dx = 0
        xx = x
        while xx:
            j = (xx & -xx).bit_length() - 1
            xx &= xx - 1
            dx ^= d_cols[j]
        w = solve(i_mat, dx)
        if w is None:
            raise TowerError("connecting map: boundary not in subcomplex")
        c = HL.coords(w)
        cols.append(sum(1 << i for i, b in enumerate(c) if b))
    return matrix_from_columns(cols, HL.dim)


@dataclass
class LESData:
    """Maps and spaces of one window of a long exact sequence."""

    which: str
    n: int
    d: int
    spaces: dict
    maps: dict
    flags: dict
    joints: dict

    def exactness_defects(self) -> dict[str, int]:
        """rank f + rank g - dim(middle) at each joint (0 iff exact)."""
        from .f2linalg import rank_kernel_image
        out = {}
        for joint, (fname, mid, gname) in self.joints.items():
            f = self.maps[fname]
            g = self.maps[gname]
            rf = rank_kernel_image(f)[0]
            rg = rank_kernel_image(g)[0]
            comp = g.compose(f)
            out[joint] = abs(rf + rg - self.spaces[mid].dim) + \
                (0 if comp.is_zero() else 1)
        return out


def les_maps(A: AlgebraPresentation, which: str, n: int, d: int,
             S: int = 3) -> LESData:
    """Class-level maps of one of the three long exact sequences at degree n."""
    if which == "minus_les":
        if not A.graded and S < 2:
            raise TowerError("minus_les needs S >= 2 for ungraded algebras "
                             "(the subcomplex lives one window shallower)")
        Hm_n2 = homology(A, "minus", n + 2, d, S)
        Hm_n = homology(A, "minus", n, d, S)
        Hh_n = homology(A, "hh", n, d, S)
        Hm_n1 = homology(A, "minus", n + 1, d, S - 1 if not A.graded else S)
        Hm_nm1 = homology(A, "minus", n - 1, d, S)
        mat_u = class_map(A, Hm_n2, Hm_n,
                          slice_shift_map(A, Hm_n2.slice, Hm_n.slice, -1))
        mat_h = class_map(A, Hm_n, Hh_n, _column_zero_projection(Hm_n.slice, Hh_n.slice))
        # SES 0 -> (columns <= -1) -> T^minus -> T^{0,0} -> 0
        M_n = Hm_n.slice
        M_n1 = build_tower(A, "minus", n - 1, d, S)
        bd = connecting_map(
            A, Hh_n, Hm_n1, M_n, M_n1,
            _column_zero_projection(M_n, Hh_n.slice),
            slice_shift_map(A, Hm_n1.slice, M_n1, -1))
        mat_u_next = class_map(A, Hm_n1, Hm_nm1,
                               slice_shift_map(A, Hm_n1.slice, Hm_nm1.slice, -1))
        spaces = {"Hminus_n2": Hm_n2, "Hminus_n": Hm_n, "HH_n": Hh_n,
                  "Hminus_n1": Hm_n1, "Hminus_nm1": Hm_nm1}
        return LESData(which, n, d, spaces,
                       maps={"u": mat_u, "h": mat_h, "bd": bd,
                             "u_next": mat_u_next},
                       flags={k: v.flag for k, v in spaces.items()},
                       joints={
                           "at_HCminus_n": ("u", "Hminus_n", "h"),
                           "at_HH_n": ("h", "HH_n", "bd"),
                           "at_HCminus_n1": ("bd", "Hminus_n1", "u_next"),
                       })
    if which == "connes":
        Hh_n = homology(A, "hh", n, d, S)
        Hc_n = homology(A, "plus", n, d, S)
        Hc_n2 = homology(A, "plus", n - 2, d, S)
        Hh_nm1 = homology(A, "hh", n - 1, d, S)
        mat_I = class_map(A, Hh_n, Hc_n,
                          slice_shift_map(A, Hh_n.slice, Hc_n.slice, 0))
        mat_u = class_map(A, Hc_n, Hc_n2, _plus_u_map(Hc_n.slice, Hc_n2.slice))
        M_n = Hc_n.slice
        M_n1 = build_tower(A, "plus", n - 1, d, S)
        bd = connecting_map(
            A, Hc_n2, Hh_nm1, M_n, M_n1,
            _plus_u_map(M_n, Hc_n2.slice),
            slice_shift_map(A, Hh_nm1.slice, M_n1, 0))
        mat_I_next = class_map(A, Hh_nm1, homology(A, "plus", n - 1, d, S),
                               slice_shift_map(
                                   A, Hh_nm1.slice,
                                   homology(A, "plus", n - 1, d, S).slice, 0))
        spaces = {"HH_n": Hh_n, "HC_n": Hc_n, "HC_n2": Hc_n2,
                  "HH_nm1": Hh_nm1}
        return LESData(which, n, d, spaces,
                       maps={"I": mat_I, "u": mat_u, "bd": bd,
                             "I_next": mat_I_next},
                       flags={k: v.flag for k, v in spaces.items()},
                       joints={
                           "at_HC_n": ("I", "HC_n", "u"),
                           "at_HC_n2": ("u", "HC_n2", "bd"),
                           "at_HH_nm1": ("bd", "HH_nm1", "I_next"),
                       })
    if which == "per_les":
        Hm_n = homology(A, "minus", n, d, S)
        Hp_n = homology(A, "per", n, d, S)
        Hc_n2 = homology(A, "plus", n - 2, d, S)
        Hm_nm1 = homology(A, "minus", n - 1, d, S)
        mat_iota = class_map(A, Hm_n, Hp_n,
                             slice_shift_map(A, Hm_n.slice, Hp_n.slice, 0))
        mat_S = class_map(A, Hp_n, Hc_n2, _plus_u_map(Hp_n.slice, Hc_n2.slice))
        M_n = Hp_n.slice
        M_n1 = build_tower(A, "per", n - 1, d, S)
        bd = connecting_map(
            A, Hc_n2, Hm_nm1, M_n, M_n1,
            _plus_u_map(M_n, Hc_n2.slice),
            slice_shift_map(A, Hm_nm1.slice, M_n1, 0))
        mat_iota_next = class_map(
            A, Hm_nm1, homology(A, "per", n - 1, d, S),
            slice_shift_map(A, Hm_nm1.slice,
                            homology(A, "per", n - 1, d, S).slice, 0))
        spaces = {"HCminus_n": Hm_n, "HCper_n": Hp_n, "HC_n2": Hc_n2,
                  "HCminus_nm1": Hm_nm1}
        return LESData(which, n, d, spaces,
                       maps={"iota": mat_iota, "S": mat_S, "bd": bd,
                             "iota_next": mat_iota_next},
                       flags={k: v.flag for k, v in spaces.items()},
                       joints={
                           "at_HCper_n": ("iota", "HCper_n", "S"),
                           "at_HC_n2": ("S", "HC_n2", "bd"),
                           "at_HCminus_nm1": ("bd", "HCminus_nm1", "iota_next"),
                       })
    raise TowerError(f"unknown sequence {which!r}")


def _column_zero_projection(src: TowerSlice, tgt: TowerSlice):
    idx = tgt.index()

    def f(v: int) -> int:
        out = 0
        while v:
            j = (v & -v).bit_length() - 1
            v &= v - 1
            p, w = src.basis[j]
            if p == 0:
                out ^= 1 << idx[(0, w)]
        return out

    return f


def _plus_u_map(src: TowerSlice, tgt: TowerSlice):
    """Multiplication by u on a right-unbounded tower: keep columns >= 1."""
    idx = tgt.index()

    def f(v: int) -> int:
        out = 0
        while v:
            j = (v & -v).bit_length() - 1
            v &= v - 1
            p, w = src.basis[j]
            if p >= 1:
                out ^= 1 << idx[(p - 1, w)]
        return out

    return f


# ----- the column-filtration spectral sequence -----

def e1_page(A: AlgebraPresentation, alpha: Optional[int], beta: Optional[int],
            s: int, t: int, d: int, S: int = 3):
    """E^1_{s,t} = HH_{t-s} at internal degree d, zero outside [alpha, beta]."""
    if (alpha is not None and s < alpha) or (beta is not None and s > beta):
        return None
    return homology(A, "hh", t - s, d, S)


def d1_matrix(A: AlgebraPresentation, alpha, beta, s: int, t: int, d: int,
              S: int = 3) -> Optional[F2Matrix]:
    """d^1 = B_*, from (s, t) to (s - 1, t)."""
    src = e1_page(A, alpha, beta, s, t, d, S)
    tgt = e1_page(A, alpha, beta, s - 1, t, d, S)
    if src is None or tgt is None:
        return None
    sl_src = src.slice
    sl_tgt = tgt.slice
    idx = sl_tgt.index()
    cols = []
    for k in range(src.dim):
        x = src.rep(k)
        img: set = set()
        while x:
            j = (x & -x).bit_length() - 1
            x &= x - 1
            img.symmetric_difference_update(
                connes_B(A, frozenset({sl_src.basis[j][1]})))
        v = 0
        for w in img:
            v ^= 1 << idx[(0, w)]
        c = tgt.coords(v)
        cols.append(sum(1 << i for i, b in enumerate(c) if b))
    return matrix_from_columns(cols, tgt.dim)


def e2_page(A: AlgebraPresentation, alpha, beta, s: int, t: int, d: int,
            S: int = 3) -> tuple[int, list[tuple[int, ...]]]:
    """Dimension and basis (in E^1 class coordinates) of E^2_{s,t}."""
    e1 = e1_page(A, alpha, beta, s, t, d, S)
    if e1 is None:
        return 0, []
    out_mat = d1_matrix(A, alpha, beta, s, t, d, S)
    in_mat = d1_matrix(A, alpha, beta, s + 1, t, d, S)
    dim_e1 = e1.dim
    if out_mat is not None:
        from .f2linalg import rank_kernel_image
        _, ker, _ = rank_kernel_image(out_mat)
        cycle_vs = list(ker.vectors)
    else:
        cycle_vs = [1 << j for j in range(dim_e1)]
    cycles = echelonize_in(cycle_vs, dim_e1)
    if in_mat is not None:
        bdry_vs = [c for c in in_mat.columns()]
        boundaries = echelonize_in([v for v in bdry_vs if v], dim_e1)
    else:
        boundaries = SubspaceBasis(dim_e1, ())
    comp = complement_basis(cycles, boundaries)
    basis = [tuple((v >> j) & 1 for j in range(dim_e1)) for v in comp]
    return len(comp), basis
