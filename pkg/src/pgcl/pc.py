"""Power-commutator presentations of finite p-groups and their arithmetic.

A presentation has pc generators ``g_0 .. g_{n-1}`` (0-based in the Python
API, 1-based in the text format), each of relative order ``p``.  Elements are
stored as exponent vectors ``(e_0, .., e_{n-1})`` with ``0 <= e_i < p``,
standing for the normal form ``g_0^e_0 ... g_{n-1}^e_{n-1}``.

Commutators follow ``[a, b] = a^-1 b^-1 a b`` and conjugation is
``a^b = b^-1 a b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

Exps = tuple[int, ...]
Letter = tuple[int, int]
Word = Sequence[Letter]

MAX_PRIME = 251
_MEMO_LIMIT = 400_000


class PresentationError(ValueError):
    """Base class for rejected presentations."""


class MalformedPresentationError(PresentationError):
    """A relation word is not in normal form or not supported to the right."""


class InconsistentPresentationError(PresentationError):
    def __init__(self, result: "ConsistencyResult"):
        super().__init__(f"inconsistent presentation: {result.describe()}")
        self.result = result


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def _as_exps(rel, n: int, p: int, where: str) -> Exps:
    """Normalise a relation given as a word, a sparse mapping or a full vector."""
    if rel is None:
        return (0,) * n
    if isinstance(rel, Mapping):
        letters = sorted(rel.items())
    elif len(rel) == n and all(isinstance(e, int) for e in rel):
        return tuple(int(e) for e in rel)
    else:
        letters = [tuple(l) for l in rel]
    vec = [0] * n
    last = -1
    for g, e in letters:
        if not 0 <= g < n:
            raise MalformedPresentationError(f"{where}: generator index {g} out of range")
        if g <= last:
            raise MalformedPresentationError(f"{where}: word is not in normal form")
        if not 0 <= e < p:
            raise MalformedPresentationError(f"{where}: exponent {e} not in [0, {p})")
        vec[g] = e
        last = g
    return tuple(vec)


class PcPresentation:
    """A refined power-commutator presentation with all relative orders ``p``.

    ``powers[i]`` is the normal form of ``g_i^p`` and ``comms[(j, i)]`` (``j > i``)
    the normal form of ``[g_j, g_i]``.  Relations may be given as lists of
    ``(generator, exponent)`` pairs, sparse ``{generator: exponent}`` dicts or
    full exponent vectors.  Omitted relations are trivial.

    Construction verifies consistency unless ``verify=False``; unverified
    presentations exist only so that :func:`check_consistency` can report on
    them.
    """

    def __init__(self, p: int, n: int, powers=None, comms=None, names=None, *, verify=True):
        if not is_prime(p) or p > MAX_PRIME:
            raise PresentationError(f"p = {p} must be a prime <= {MAX_PRIME}")
        if n < 0:
            raise PresentationError("n must be non-negative")
        self.p = p
        self.n = n
        self.names = tuple(names) if names is not None else tuple(f"g{i + 1}" for i in range(n))
        if len(self.names) != n:
            raise PresentationError("wrong number of generator names")

        powers = dict(powers or {})
        comms = dict(comms or {})
        self.powers: tuple[Exps, ...] = tuple(
            _as_exps(powers.pop(i, None), n, p, f"pow {i + 1}") for i in range(n))
        self.comms: dict[tuple[int, int], Exps] = {}
        for j in range(n):
            for i in range(j):
                self.comms[(j, i)] = _as_exps(comms.pop((j, i), None), n, p, f"comm {j + 1} {i + 1}")
        if powers or comms:
            raise MalformedPresentationError(
                f"relations for unknown generator pairs: {sorted(powers) + sorted(comms)}")
        for i, w in enumerate(self.powers):
            if any(w[: i + 1]):
                raise MalformedPresentationError(f"pow {i + 1}: relation not supported right of g{i + 1}")
        for (j, i), w in self.comms.items():
            if any(w[: j + 1]):
                raise MalformedPresentationError(
                    f"comm {j + 1} {i + 1}: relation not supported right of g{j + 1}")

        self._power_letters = [_letters(w) for w in self.powers]
        # g_j^{g_i} = g_j [g_j, g_i]
        self._conj_letters = [[None] * n for _ in range(n)]
        self._movers: list[tuple[int, ...]] = []
        for i in range(n):
            movers = []
            for j in range(i + 1, n):
                c = self.comms[(j, i)]
                self._conj_letters[j][i] = [(j, 1)] + _letters(c)
                if any(c):
                    movers.append(j)
            self._movers.append(tuple(movers))
        self._phi_memo: list[dict] = [{} for _ in range(n)]
        self._lpow_memo: list[dict] = [{} for _ in range(n)]

        self.verified = False
        if verify:
            result = check_consistency(self)
            if not result:
                raise InconsistentPresentationError(result)
            self.verified = True

    # -- basic data -------------------------------------------------------

    @property
    def order(self) -> int:
        return self.p ** self.n

    @property
    def identity(self) -> "Element":
        return Element(self, (0,) * self.n)

    def gen(self, i: int) -> "Element":
        v = [0] * self.n
        v[i] = 1
        return Element(self, tuple(v))

    def gens(self) -> list["Element"]:
        return [self.gen(i) for i in range(self.n)]

    def element(self, exps: Iterable[int]) -> "Element":
        exps = tuple(int(e) % self.p for e in exps)
        if len(exps) != self.n:
            raise ValueError(f"expected {self.n} exponents, got {len(exps)}")
        return Element(self, exps)

    def index_of(self, exps: Exps) -> int:
        """Base-``p`` integer code of a normal form, ``e_0`` most significant."""
        k = 0
        for e in exps:
            k = k * self.p + e
        return k

    def exps_of(self, index: int) -> Exps:
        out = [0] * self.n
        for i in range(self.n - 1, -1, -1):
            index, out[i] = divmod(index, self.p)
        return tuple(out)

    def elements(self):
        for k in range(self.order):
            yield Element(self, self.exps_of(k))

    def random_element(self, rng) -> "Element":
        return Element(self, tuple(int(e) for e in rng.integers(0, self.p, self.n)))

    def relations_equal(self, other: "PcPresentation") -> bool:
        return (self.p, self.n, self.powers, self.comms) == (other.p, other.n, other.powers, other.comms)

    def __eq__(self, other):
        if not isinstance(other, PcPresentation):
            return NotImplemented
        return self.relations_equal(other) and self.names == other.names

    def __hash__(self):
        return id(self)

    def __repr__(self):
        return f"PcPresentation(p={self.p}, n={self.n})"

    # -- collection -------------------------------------------------------

    def _collect(self, vec: list[int], letters: Iterable[Letter]) -> None:
        """Multiply the normal form ``vec`` in place by a word with positive exponents."""
        step = self._mul_gen
        for g, e in letters:
            for _ in range(e):
                step(vec, g)

    def _mul_gen(self, vec: list[int], g: int) -> None:
        """``vec <- vec * g``.

        With ``vec = prefix * g^e * tail``, the product is
        ``prefix * g^(e+1) * tail^g`` and, on overflow, ``prefix * w_g * tail^g``
        where ``w_g = g^p``.  Both tail maps are memoised per generator; the
        recursion only ever descends to strictly larger generator indices.
        """
        tail = tuple(vec[g + 1:])
        for j in self._movers[g]:
            if vec[j]:
                memo = self._phi_memo[g]
                t = memo.get(tail)
                if t is None:
                    t = self._phi(g, tail)
                    if len(memo) > _MEMO_LIMIT:
                        memo.clear()
                    memo[tail] = t
                tail = t
                break
        s = vec[g] + 1
        if s == self.p:
            vec[g] = 0
            if self._power_letters[g]:
                memo = self._lpow_memo[g]
                t = memo.get(tail)
                if t is None:
                    t = self._lpow(g, tail)
                    if len(memo) > _MEMO_LIMIT:
                        memo.clear()
                    memo[tail] = t
                tail = t
        else:
            vec[g] = s
        vec[g + 1:] = tail

    def _phi(self, g: int, tail: Exps) -> Exps:
        # tail^g as the product of (g_j^g)^t_j
        v = [0] * self.n
        conj = self._conj_letters
        for off, t in enumerate(tail):
            if t:
                w = conj[g + 1 + off][g]
                for _ in range(t):
                    self._collect(v, w)
        return tuple(v[g + 1:])

    def _lpow(self, g: int, tail: Exps) -> Exps:
        v = list(self.powers[g])
        self._collect(v, [(g + 1 + off, t) for off, t in enumerate(tail) if t])
        return tuple(v[g + 1:])

    def collect_word(self, word: Word) -> Exps:
        """Normal form of an arbitrary word of ``(generator, integer exponent)`` pairs."""
        vec = [0] * self.n
        p = self.p
        for g, e in word:
            if not 0 <= g < self.n:
                raise ValueError(f"generator index {g} out of range")
            if e < 0:
                gi = self.inv(self._unit(g))
                letters = _letters(gi)
                for _ in range(-e):
                    self._collect(vec, letters)
            while e > 0:
                c = min(e, p - 1)
                self._collect(vec, [(g, c)])
                e -= c
        return tuple(vec)

    def _unit(self, g: int) -> Exps:
        v = [0] * self.n
        v[g] = 1
        return tuple(v)

    # tuple-level arithmetic; the Element API wraps these

    def mul(self, a: Exps, b: Exps) -> Exps:
        vec = list(a)
        self._collect(vec, [(i, e) for i, e in enumerate(b) if e])
        return tuple(vec)

    def inv(self, a: Exps) -> Exps:
        # u * g_0^t_0 * g_1^t_1 ... = 1, eliminating one depth at a time
        cur = list(a)
        out = [0] * self.n
        for k in range(self.n):
            if cur[k]:
                t = self.p - cur[k]
                out[k] = t
                self._collect(cur, [(k, t)])
        return tuple(out)

    def pow(self, a: Exps, k: int) -> Exps:
        if k < 0:
            a, k = self.inv(a), -k
        result = (0,) * self.n
        base = a
        while k:
            if k & 1:
                result = self.mul(result, base)
            k >>= 1
            if k:
                base = self.mul(base, base)
        return result

    def comm(self, a: Exps, b: Exps) -> Exps:
        return self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b))

    def conj(self, a: Exps, b: Exps) -> Exps:
        return self.mul(self.mul(self.inv(b), a), b)

    def element_order(self, a: Exps) -> int:
        o = 1
        zero = (0,) * self.n
        while a != zero:
            a = self.pow(a, self.p)
            o *= self.p
        return o


def _letters(exps: Exps) -> list[Letter]:
    return [(i, e) for i, e in enumerate(exps) if e]


@dataclass(frozen=True, eq=False)
class Element:
    """A group element in normal form; supports ``*``, ``~``, ``**``."""

    group: PcPresentation
    exps: Exps

    def _check(self, other: "Element") -> None:
        if other.group is not self.group:
            raise ValueError("elements belong to different presentations")

    def __mul__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.group, self.group.mul(self.exps, other.exps))

    def __invert__(self) -> "Element":
        return Element(self.group, self.group.inv(self.exps))

    def __pow__(self, k: int) -> "Element":
        return Element(self.group, self.group.pow(self.exps, k))

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.group is other.group and self.exps == other.exps

    def __hash__(self):
        return hash(self.exps)

    def __lt__(self, other: "Element") -> bool:
        return self.exps < other.exps

    @property
    def is_identity(self) -> bool:
        return not any(self.exps)

    @property
    def depth(self) -> int:
        """Index of the first nonzero exponent (``n`` for the identity)."""
        for i, e in enumerate(self.exps):
            if e:
                return i
        return len(self.exps)

    @property
    def index(self) -> int:
        return self.group.index_of(self.exps)

    def order(self) -> int:
        return self.group.element_order(self.exps)

    def __repr__(self):
        if self.is_identity:
            return "1"
        parts = []
        for name, e in zip(self.group.names, self.exps):
            if e:
                parts.append(name if e == 1 else f"{name}^{e}")
        return "*".join(parts)


# -- module-level operations ---------------------------------------------


def collect(pres: PcPresentation, word: Word) -> Element:
    return Element(pres, pres.collect_word(word))


def mul(a: Element, b: Element) -> Element:
    return a * b


def inv(a: Element) -> Element:
    return ~a


def power(a: Element, k: int) -> Element:
    return a ** k


def commutator(a: Element, b: Element) -> Element:
    a._check(b)
    return Element(a.group, a.group.comm(a.exps, b.exps))


def conjugate(a: Element, b: Element) -> Element:
    """``a^b = b^-1 a b``."""
    a._check(b)
    return Element(a.group, a.group.conj(a.exps, b.exps))


def hall_petrescu_defect(x: Element, y: Element, k: int) -> Element:
    """The element ``z`` with ``(xy)^k = x^k y^k z``."""
    if k < 1:
        raise ValueError("k must be positive")
    return ~(x ** k * y ** k) * (x * y) ** k


# -- consistency ----------------------------------------------------------


@dataclass(frozen=True)
class ConsistencyResult:
    consistent: bool
    test: str = ""
    generators: tuple[int, ...] = ()
    left: Exps = ()
    right: Exps = ()

    def __bool__(self):
        return self.consistent

    def describe(self) -> str:
        if self.consistent:
            return "consistent"
        gens = ", ".join(f"g{g + 1}" for g in self.generators)
        return f"overlap {self.test} on ({gens}) collects to {self.left} vs {self.right}"


def check_consistency(pres: PcPresentation) -> ConsistencyResult:
    """Run the standard overlap tests of a pc presentation with relative orders ``p``.

    For ``k > j > i``: ``(g_k g_j) g_i = g_k (g_j g_i)``; for ``j > i``:
    ``(g_j^p) g_i = g_j^(p-1) (g_j g_i)`` and ``g_j (g_i^p) = (g_j g_i) g_i^(p-1)``;
    for every ``i``: ``(g_i^p) g_i = g_i (g_i^p)``.
    """
    p, n = pres.p, pres.n
    unit = pres._unit
    nf = pres.collect_word
    mul = pres.mul
    pw = pres.powers

    def gp(i, e):
        v = [0] * n
        v[i] = e
        return tuple(v)

    pairs = {}
    for j in range(n):
        for i in range(j):
            pairs[(j, i)] = nf([(j, 1), (i, 1)])

    for k in range(n):
        for j in range(k):
            kj = pairs[(k, j)]
            for i in range(j):
                left = mul(kj, unit(i))
                right = mul(unit(k), pairs[(j, i)])
                if left != right:
                    return ConsistencyResult(False, "(gk gj) gi = gk (gj gi)", (k, j, i), left, right)
    for j in range(n):
        for i in range(j):
            left = mul(pw[j], unit(i))
            right = mul(gp(j, p - 1), pairs[(j, i)])
            if left != right:
                return ConsistencyResult(False, "(gj^p) gi = gj^(p-1) (gj gi)", (j, i), left, right)
            left = mul(unit(j), pw[i])
            right = mul(pairs[(j, i)], gp(i, p - 1))
            if left != right:
                return ConsistencyResult(False, "gj (gi^p) = (gj gi) gi^(p-1)", (j, i), left, right)
    for i in range(n):
        left = mul(pw[i], unit(i))
        right = mul(unit(i), pw[i])
        if left != right:
            return ConsistencyResult(False, "(gi^p) gi = gi (gi^p)", (i,), left, right)
    return ConsistencyResult(True)


# -- collection confluence ------------------------------------------------


def random_word(pres: PcPresentation, rng, max_len: int = 12) -> list[Letter]:
    """A random word with letters ``(i, e)``, ``-2p <= e <= 2p``."""
    length = int(rng.integers(0, max_len + 1))
    if pres.n == 0:
        return []
    return [(int(rng.integers(pres.n)), int(rng.integers(-2 * pres.p, 2 * pres.p + 1)))
            for _ in range(length)]


def confluence_check(pres: PcPresentation, samples: int = 1000, seed: int = 0) -> list[str]:
    """``collect(w1 w2) == collect(w1) * collect(w2)`` on random word pairs.

    Returns the failing pairs (empty when confluent on the sample).
    """
    rng = np.random.default_rng(seed)
    failures = []
    for _ in range(samples):
        w1, w2 = random_word(pres, rng), random_word(pres, rng)
        joint = pres.collect_word(list(w1) + list(w2))
        split = pres.mul(pres.collect_word(w1), pres.collect_word(w2))
        if joint != split:
            failures.append(f"{w1} . {w2}: {joint} != {split}")
    return failures
