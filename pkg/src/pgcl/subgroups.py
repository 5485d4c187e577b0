"""Subgroups as canonical induced generating sequences.

A subgroup ``H`` of a pc group is stored by one element per *leading depth*:
for every depth ``d`` occurring as the first nonzero position of some element
of ``H`` there is exactly one element ``l_d`` of ``H`` with depth ``d``,
exponent 1 at ``d`` and exponent 0 at every other leading depth of ``H``.
These conditions determine ``l_d`` uniquely, so two subgroups are equal iff
their sequences are equal.  Membership is decided by sifting: strip the
leading exponent with a power of the matching ``l_d`` and repeat.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import HypothesisError
from .pc import Element, Exps, PcPresentation
from .tables import GroupTable, table_for


def _depth(v: Exps) -> int:
    for i, e in enumerate(v):
        if e:
            return i
    return len(v)


def _exps(pres: PcPresentation, a) -> Exps:
    if isinstance(a, Element):
        if a.group is not pres:
            raise ValueError("element belongs to a different presentation")
        return a.exps
    a = tuple(a)
    if len(a) != pres.n:
        raise ValueError("exponent vector has the wrong length")
    return a


class _Echelon:
    """Mutable echelon used while closing a generating set."""

    def __init__(self, pres: PcPresentation):
        self.pres = pres
        self.lead: dict[int, Exps] = {}
        self._neg: dict[int, list[Exps]] = {}

    def neg_powers(self, d: int) -> list[Exps]:
        neg = self._neg.get(d)
        if neg is None:
            pres = self.pres
            li = pres.inv(self.lead[d])
            neg = [(0,) * pres.n, li]
            for _ in range(pres.p - 2):
                neg.append(pres.mul(neg[-1], li))
            self._neg[d] = neg
        return neg

    def sift(self, v: Exps) -> Exps:
        pres = self.pres
        d = _depth(v)
        while d < pres.n:
            if d not in self.lead:
                return v
            v = pres.mul(v, self.neg_powers(d)[v[d]])
            d = _depth(v)
        return v

    def add(self, v: Exps) -> Exps | None:
        """Insert the residue of ``v``; return the new lead or ``None``."""
        v = self.sift(v)
        d = _depth(v)
        if d == self.pres.n:
            return None
        p = self.pres.p
        v = self.pres.pow(v, pow(v[d], -1, p))
        self.lead[d] = v
        return v

    def close(self, gens: Iterable[Exps]) -> None:
        pres = self.pres
        queue = list(gens)
        while queue:
            new = self.add(queue.pop())
            if new is None:
                continue
            queue.append(pres.pow(new, pres.p))
            for d, l in list(self.lead.items()):
                if l is not new:
                    queue.append(pres.comm(new, l))

    def canonical(self) -> tuple[Exps, ...]:
        pres = self.pres
        depths = sorted(self.lead)
        out = []
        for k, d in enumerate(depths):
            v = self.lead[d]
            for d2 in depths[k + 1:]:
                if v[d2]:
                    v = pres.mul(v, self.neg_powers(d2)[v[d2]])
            out.append(v)
        return tuple(out)


class Subgroup:
    """Subgroup of a pc group given by its canonical induced generating sequence."""

    def __init__(self, parent: PcPresentation, igs: Sequence[Exps], *, _trusted: bool = False):
        self.parent = parent
        if _trusted:
            self.igs: tuple[Exps, ...] = tuple(igs)
        else:
            ech = _Echelon(parent)
            ech.close(_exps(parent, g) for g in igs)
            self.igs = ech.canonical()
        self.depths: tuple[int, ...] = tuple(_depth(v) for v in self.igs)
        self._ech: _Echelon | None = None
        self._codes: np.ndarray | None = None

    # -- basic data ---------------------------------------------------------

    @property
    def log_order(self) -> int:
        return len(self.igs)

    @property
    def order(self) -> int:
        return self.parent.p ** len(self.igs)

    @property
    def gens(self) -> list[Element]:
        return [Element(self.parent, v) for v in self.igs]

    def is_trivial(self) -> bool:
        return not self.igs

    def _echelon(self) -> _Echelon:
        if self._ech is None:
            ech = _Echelon(self.parent)
            ech.lead = dict(zip(self.depths, self.igs))
            self._ech = ech
        return self._ech

    def sift(self, a) -> Exps:
        return self._echelon().sift(_exps(self.parent, a))

    def contains(self, a) -> bool:
        return not any(self.sift(a))

    __contains__ = contains

    def exponents(self, a) -> tuple[int, ...]:
        """Exponents ``(a_1, ..)`` with ``a = l_1^a_1 l_2^a_2 ...`` (``a`` must lie in H)."""
        pres = self.parent
        ech = self._echelon()
        v = _exps(pres, a)
        out = []
        for d in self.depths:
            e = v[d]
            out.append(e)
            if e:
                v = pres.mul(v, ech.neg_powers(d)[e])
        if any(v):
            raise ValueError("element is not in the subgroup")
        return tuple(out)

    def element_from(self, coeffs: Sequence[int]) -> Exps:
        pres = self.parent
        v = (0,) * pres.n
        for l, e in zip(self.igs, coeffs):
            if e:
                v = pres.mul(v, pres.pow(l, e))
        return v

    def codes(self, table: GroupTable | None = None) -> np.ndarray:
        """Sorted element codes (regular-representation enumeration)."""
        if self._codes is None:
            table = table or table_for(self.parent)
            self._codes = table.span([self.parent.index_of(v) for v in self.igs])
        return self._codes

    def elements(self) -> list[Element]:
        pres = self.parent
        return [Element(pres, pres.exps_of(int(c))) for c in self.codes()]

    def iter_exps(self):
        """Enumerate elements without the regular representation."""
        pres = self.parent
        cur = [(0,) * pres.n]
        for l in reversed(self.igs):
            powers = [(0,) * pres.n]
            for _ in range(pres.p - 1):
                powers.append(pres.mul(powers[-1], l))
            cur = [pres.mul(q, c) for q in powers for c in cur]
        return cur

    # -- comparisons --------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.parent is other.parent and self.igs == other.igs

    def __hash__(self):
        return hash((id(self.parent), self.igs))

    def __le__(self, other: "Subgroup") -> bool:
        _same(self, other)
        if not set(self.depths) <= set(other.depths):
            return False
        return all(other.contains(v) for v in self.igs)

    def __lt__(self, other: "Subgroup") -> bool:
        return self.log_order < other.log_order and self <= other

    def __ge__(self, other):
        return other <= self

    def __gt__(self, other):
        return other < self

    def __repr__(self):
        gens = ", ".join(repr(g) for g in self.gens)
        return f"Subgroup(order={self.parent.p}^{self.log_order}, igs=[{gens}])"


def _same(*subs: Subgroup) -> PcPresentation:
    pres = subs[0].parent
    for s in subs[1:]:
        if s.parent is not pres:
            raise ValueError("subgroups of different presentations")
    return pres


# -- constructors -----------------------------------------------------------


def trivial_subgroup(pres: PcPresentation) -> Subgroup:
    return Subgroup(pres, (), _trusted=True)


def whole_group(pres: PcPresentation) -> Subgroup:
    return Subgroup(pres, [pres._unit(i) for i in range(pres.n)], _trusted=True)


def subgroup_closure(gens: Iterable, parent: PcPresentation | None = None) -> Subgroup:
    """Smallest subgroup containing ``gens`` (Elements or exponent tuples)."""
    gens = list(gens)
    if parent is None:
        if not gens or not isinstance(gens[0], Element):
            raise ValueError("parent presentation required")
        parent = gens[0].group
    return Subgroup(parent, [_exps(parent, g) for g in gens])


def normal_closure(gens: Iterable, ambient: Subgroup) -> Subgroup:
    """Smallest subgroup containing ``gens`` and normalised by ``ambient``."""
    pres = ambient.parent
    H = Subgroup(pres, [_exps(pres, g) for g in gens])
    while True:
        new = []
        for h in H.igs:
            for s in ambient.igs:
                c = pres.comm(h, s)
                if not H.contains(c):
                    new.append(c)
        if not new:
            return H
        H = Subgroup(pres, list(H.igs) + new)


def subgroup_from_codes(pres: PcPresentation, codes) -> Subgroup:
    """Subgroup with the given element set, read off extensionally.

    The canonical sequence is located directly in the set (the unique element
    of each leading depth with exponent 1 there and 0 at other leading
    depths), so this is independent of closure and sifting.  Raises
    ``ValueError`` if the set is not a subgroup.
    """
    codes = np.unique(np.asarray(codes, dtype=np.int64))
    table = table_for(pres)
    digits = table.digits(codes)
    nz = digits != 0
    depth = np.where(nz.any(axis=1), nz.argmax(axis=1), pres.n)
    depths = sorted(set(int(d) for d in depth) - {pres.n})
    igs = []
    for d in depths:
        mask = (depth == d) & (digits[:, d] == 1)
        for d2 in depths:
            if d2 > d:
                mask &= digits[:, d2] == 0
        idx = np.flatnonzero(mask)
        if idx.size != 1:
            raise ValueError("code set is not a subgroup")
        igs.append(tuple(int(e) for e in digits[idx[0]]))
    H = Subgroup(pres, igs, _trusted=True)
    if H.order != codes.size or not np.array_equal(H.codes(table), codes):
        raise ValueError("code set is not a subgroup")
    return H


# -- lattice operations -----------------------------------------------------


def contains(H: Subgroup, a) -> bool:
    return H.contains(a)


def is_normal(H: Subgroup, ambient: Subgroup) -> bool:
    """Whether ``ambient`` normalises ``H``."""
    pres = _same(H, ambient)
    return all(H.contains(pres.conj(h, s)) for h in H.igs for s in ambient.igs)


def index(H: Subgroup, K: Subgroup) -> int:
    """``|H : K|`` for ``K <= H``."""
    if not K <= H:
        raise ValueError("index requires K <= H")
    return H.parent.p ** (H.log_order - K.log_order)


def intersection(H: Subgroup, K: Subgroup) -> Subgroup:
    pres = _same(H, K)
    if H <= K:
        return H
    if K <= H:
        return K
    small, big = (H, K) if H.log_order <= K.log_order else (K, H)
    from .config import gates

    if pres.order <= gates().table:
        table = table_for(pres)
        return subgroup_from_codes(pres, np.intersect1d(small.codes(table), big.codes(table)))
    if small.order > gates().enumerate:
        from .tables import GateExceeded

        raise GateExceeded(f"intersection needs enumeration of {small.order} elements")
    return Subgroup(pres, [v for v in small.iter_exps() if big.contains(v)])


def product(H: Subgroup, K: Subgroup) -> Subgroup:
    """``HK``; requires one factor to normalise the other."""
    pres = _same(H, K)
    if not (is_normal(H, K) or is_normal(K, H)):
        raise HypothesisError("product requires one subgroup to normalise the other")
    return Subgroup(pres, list(H.igs) + list(K.igs))


def commutator_subgroup(H: Subgroup, K: Subgroup) -> Subgroup:
    """``[H, K]`` for subgroups normalised by each other (e.g. both normal)."""
    pres = _same(H, K)
    gens = [pres.comm(h, k) for h in H.igs for k in K.igs]
    return normal_closure(gens, Subgroup(pres, list(H.igs) + list(K.igs)))


# -- sections -----------------------------------------------------------------


class Section:
    """The factor ``A/B`` for ``B`` normal in ``A``.

    Uses the relative sequence made of ``B``'s canonical elements and
    ``A``'s canonical elements at the leading depths not in ``B`` (the *top*
    depths).  Sifting through it writes ``u`` in ``A`` as ``t * b`` with ``t``
    a product of top elements and ``b`` in ``B``; ``coords`` returns the top
    exponents.  When ``A/B`` is elementary abelian these are linear
    coordinates on ``A/B`` over ``F_p``.
    """

    def __init__(self, A: Subgroup, B: Subgroup):
        _same(A, B)
        if not B <= A:
            raise ValueError("section requires B <= A")
        self.A, self.B = A, B
        self.pres = A.parent
        bdepths = set(B.depths)
        self.top_depths = tuple(d for d in A.depths if d not in bdepths)
        self.top = tuple(v for v, d in zip(A.igs, A.depths) if d not in bdepths)
        ech = _Echelon(self.pres)
        ech.lead = dict(zip(B.depths, B.igs))
        ech.lead.update(zip(self.top_depths, self.top))
        self._ech = ech

    @property
    def dim(self) -> int:
        return len(self.top)

    def coords(self, a) -> tuple[int, ...]:
        pres = self.pres
        v = _exps(pres, a)
        out = {}
        d = _depth(v)
        while d < pres.n:
            if d not in self._ech.lead:
                raise ValueError("element is not in the section's numerator")
            out[d] = v[d]
            v = pres.mul(v, self._ech.neg_powers(d)[v[d]])
            d = _depth(v)
        return tuple(out.get(d, 0) for d in self.top_depths)

    def coords_codes(self, table, codes) -> np.ndarray:
        """Vectorized ``coords`` over an array of element codes; one row per code."""
        pres = self.pres
        cur = np.asarray(codes, dtype=table.dtype).copy()
        out = np.zeros((cur.size, self.dim), dtype=np.int64)
        col = {d: k for k, d in enumerate(self.top_depths)}
        for d in range(pres.n):
            digit = (cur.astype(np.int64) // table.weights[d]) % pres.p
            if d not in self._ech.lead:
                if digit.any():
                    raise ValueError("element is not in the section's numerator")
                continue
            if d in col:
                out[:, col[d]] = digit
            negs = np.array([pres.index_of(v) for v in self._ech.neg_powers(d)], dtype=table.dtype)
            cur = table.mul(cur, negs[digit])
        return out

    def lift(self, coeffs: Sequence[int]) -> Exps:
        pres = self.pres
        v = (0,) * pres.n
        for l, e in zip(self.top, coeffs):
            if e % pres.p:
                v = pres.mul(v, pres.pow(l, e % pres.p))
        return v


# -- chief series -------------------------------------------------------------


def chief_chain(G: Subgroup, L: Subgroup, N: Subgroup) -> list[Subgroup]:
    """Terms ``L = S_0 > S_1 > .. > S_r = N``, all normal in ``G``, factors of order p.

    Descends through the layers ``X > [X, G] X^p N`` (central and elementary
    abelian modulo the lower term).  Within a layer the canonical elements of
    ``X`` over the lower term are dropped in order of increasing leading depth.
    """
    pres = _same(G, L, N)
    if not N <= L:
        raise HypothesisError("chief refinement requires N <= L")
    for S, name in ((L, "L"), (N, "N")):
        if not is_normal(S, G):
            raise HypothesisError(f"chief refinement requires {name} normal in G")
    terms = [L]
    X = L
    while X.log_order > N.log_order:
        gens = [pres.comm(x, s) for x in X.igs for s in G.igs]
        gens += [pres.pow(x, pres.p) for x in X.igs]
        Y = normal_closure(gens + list(N.igs), G)
        sec = Section(X, Y)
        for t in range(1, sec.dim):
            terms.append(Subgroup(pres, list(Y.igs) + list(sec.top[t:])))
        terms.append(Y)
        X = Y
    return terms


# -- centraliser-type subgroups -------------------------------------------------


def _kernel(K: Subgroup, f) -> Subgroup:
    """Kernel of a homomorphism ``f: K -> F_p`` given on elements.

    Uses Schreier generators for the transversal ``1, h, .., h^(p-1)``.
    """
    pres = K.parent
    p = pres.p
    vals = [f(l) % p for l in K.igs]
    if not any(vals):
        return K
    # pick the deepest generator with nonzero image as h (keeps products short)
    hi = max(i for i, v in enumerate(vals) if v)
    h, fh = K.igs[hi], vals[hi]
    inv_fh = pow(fh, -1, p)
    hp = [(0,) * pres.n]
    for _ in range(p - 1):
        hp.append(pres.mul(hp[-1], h))
    hinv = [(0,) * pres.n] + [pres.inv(q) for q in hp[1:]]
    gens = [pres.pow(h, p)]
    for l, v in zip(K.igs, vals):
        c = (v * inv_fh) % p
        if l is h:
            continue
        for a in range(p):
            b = (a + c) % p
            gens.append(pres.mul(pres.mul(hp[a], l), hinv[b]))
    return Subgroup(pres, gens)


def condition_subgroup(G: Subgroup, target: Subgroup, modulus: Subgroup,
                       chain: list[Subgroup] | None = None) -> Subgroup:
    """``{z in G : [z, t] in modulus for all t in target}``.

    Requires ``modulus`` normal in ``G`` (then the set is the preimage of the
    centraliser of ``target * modulus / modulus`` in ``G / modulus``).  For each
    generator ``t`` of ``target`` the condition is imposed one chief factor at
    a time along a chief series of ``G`` through ``modulus``: on the subgroup
    where ``[z, t]`` already lies in ``S_j``, the coordinate of ``[z, t]`` in
    ``S_j/S_{j+1}`` is a homomorphism to ``F_p`` and we pass to its kernel.
    A precomputed ``chief_chain(G, G, modulus)`` may be passed as ``chain``.
    """
    pres = _same(G, target, modulus)
    if not modulus <= G or not target <= G:
        raise HypothesisError("target and modulus must lie in G")
    if not is_normal(modulus, G):
        raise HypothesisError("modulus must be normal in G")
    if chain is None:
        chain = chief_chain(G, G, modulus)
    sections = [Section(chain[j], chain[j + 1]) for j in range(len(chain) - 1)]
    K = G
    for t in target.igs:
        if modulus.contains(t):
            continue
        for sec in sections:
            K = _kernel(K, lambda z, t=t, sec=sec: sec.coords(pres.comm(z, t))[0])
    return K


def condition_subgroup_bruteforce(G: Subgroup, target: Subgroup, modulus: Subgroup) -> Subgroup:
    """Extensional version of :func:`condition_subgroup` via the regular representation."""
    pres = _same(G, target, modulus)
    table = table_for(pres)
    gcodes = G.codes(table)
    mmask = table.mask(modulus.codes(table))
    ok = np.ones(gcodes.size, dtype=bool)
    for t in target.igs:
        c = table.comm(gcodes, pres.index_of(t))
        ok &= mmask[c]
    return subgroup_from_codes(pres, gcodes[ok])


def centralizer(G: Subgroup, H: Subgroup) -> Subgroup:
    return condition_subgroup(G, H, trivial_subgroup(G.parent))


def center(G: Subgroup) -> Subgroup:
    return condition_subgroup(G, G, trivial_subgroup(G.parent))


# -- quotients ----------------------------------------------------------------


class QuotientMap:
    """Projection ``G -> G/N`` onto a pc presentation of the factor group.

    The target's pc generators are the images of the source generators at the
    depths that are not leading depths of ``N``; every element has a unique
    representative with zero exponents at ``N``'s depths, and its remaining
    exponents are the normal form of the image.
    """

    def __init__(self, source: PcPresentation, kernel: Subgroup):
        if kernel.parent is not source:
            raise ValueError("kernel belongs to a different presentation")
        if not is_normal(kernel, whole_group(source)):
            raise HypothesisError("quotient requires a normal subgroup")
        self.source = source
        self.kernel = kernel
        kd = set(kernel.depths)
        self.kept = tuple(i for i in range(source.n) if i not in kd)
        self._pos = {g: k for k, g in enumerate(self.kept)}
        ech = kernel._echelon()
        self._ech = ech
        m = len(self.kept)
        powers = {}
        comms = {}
        for a, i in enumerate(self.kept):
            powers[a] = self._reduce(source.pow(source._unit(i), source.p))
            for b, j in enumerate(self.kept[a + 1:], start=a + 1):
                comms[(b, a)] = self._reduce(source.comm(source._unit(j), source._unit(i)))
        names = [source.names[i] for i in self.kept]
        self.target = PcPresentation(source.p, m, powers, comms, names)
        # per-generator image table
        self.images = tuple(self.image(source.gen(i)) for i in range(source.n))

    def _reduce(self, v: Exps) -> Exps:
        pres = self.source
        for d in self.kernel.depths:
            if v[d]:
                v = pres.mul(v, self._ech.neg_powers(d)[v[d]])
        return tuple(v[i] for i in self.kept)

    def image(self, a) -> Element:
        return Element(self.target, self._reduce(_exps(self.source, a)))

    __call__ = image

    def section(self, b) -> Element:
        b = _exps(self.target, b)
        v = [0] * self.source.n
        for k, i in enumerate(self.kept):
            v[i] = b[k]
        return Element(self.source, tuple(v))

    def image_subgroup(self, H: Subgroup) -> Subgroup:
        return Subgroup(self.target, [self._reduce(v) for v in H.igs])

    def preimage(self, H: Subgroup) -> Subgroup:
        if H.parent is not self.target:
            raise ValueError("subgroup of the wrong presentation")
        gens = [self.section(v).exps for v in H.igs] + list(self.kernel.igs)
        return Subgroup(self.source, gens)

    def image_codes(self, codes) -> np.ndarray:
        """Images of source element codes as target codes (vectorised)."""
        tt = table_for(self.target)
        ts = table_for(self.source)
        d = ts.digits(codes)
        out = np.zeros(d.shape[0], dtype=tt.dtype)
        img = [tt.code(im.exps) for im in self.images]
        for i in range(self.source.n):
            col = d[:, i]
            for s in range(1, self.source.p):
                mask = col >= s
                if not mask.any():
                    break
                out[mask] = tt.mul(out[mask], img[i])
        return out


def quotient(G: PcPresentation, N: Subgroup) -> QuotientMap:
    return QuotientMap(G, N)
