"""Builders for concrete groups, recipes, and the presentation text format.

Text format (UTF-8, line oriented, ``#`` starts a comment)::

    p 5
    n 3
    names x y z          # optional
    pow 1 : 1            # g1^p = 1 (omitted relations are trivial)
    comm 2 1 : g3^1      # [g2, g1] = g3

Words are ``1`` or whitespace-separated factors ``g<k>^<e>`` with strictly
increasing ``k`` and ``1 <= e < p`` (``g<k>`` alone means exponent 1).
Generators are 1-based in the file and 0-based in the Python API.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .pc import Exps, PcPresentation, PresentationError, is_prime, _as_exps


class ParseError(PresentationError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# -- generic families -------------------------------------------------------------


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise PresentationError(f"p = {p} is not prime")


def build_abelian(p: int, n: int) -> PcPresentation:
    """Elementary abelian group of order ``p^n``."""
    _check_prime(p)
    return PcPresentation(p, n, names=[f"e{i + 1}" for i in range(n)])


def build_cyclic(p: int, k: int) -> PcPresentation:
    """Cyclic group of order ``p^k`` on ``c, c^p, c^(p^2), ..``."""
    _check_prime(p)
    powers = {i: [(i + 1, 1)] for i in range(k - 1)}
    names = ["c"] + [f"c^{p}^{i}" if i > 1 else f"c^{p}" for i in range(1, k)]
    return PcPresentation(p, k, powers=powers, names=names)


def build_heisenberg(p: int) -> PcPresentation:
    """Upper unitriangular 3x3 matrices over ``F_p``: ``[y, x] = z``."""
    _check_prime(p)
    return PcPresentation(p, 3, comms={(1, 0): [(2, 1)]}, names=["x", "y", "z"])


def build_extraspecial(p: int, exponent: int) -> PcPresentation:
    """Extraspecial group of order ``p^3`` and the given exponent (``p`` or ``p^2``)."""
    _check_prime(p)
    if exponent == p:
        return build_heisenberg(p)
    if exponent == p * p:
        return PcPresentation(p, 3, powers={0: [(2, 1)]}, comms={(1, 0): [(2, 1)]},
                              names=["x", "y", "z"])
    raise ValueError("extraspecial exponent must be p or p^2")


@dataclass(frozen=True)
class FreeClass2:
    """``F_d / gamma_3(F_d) F_d^p`` on ``a_1..a_d`` and ``c_ij = [a_j, a_i]`` (``i < j``).

    ``pairs[k] = (i, j)`` (0-based) names the central generator at position
    ``d + k``, which is the coordinate of ``a_i ^ a_j`` in the exterior square
    of the Frattini quotient.
    """

    pres: PcPresentation
    d: int
    pairs: tuple[tuple[int, int], ...]

    def pair_index(self, i: int, j: int) -> int:
        """pc generator index of ``[a_j, a_i]`` for ``i < j``."""
        return self.d + self.pairs.index((i, j))


def build_free_class2(p: int, d: int) -> FreeClass2:
    _check_prime(p)
    if p == 2:
        raise PresentationError("free class-2 exponent-p quotient needs odd p")
    if d < 1:
        raise ValueError("d must be at least 1")
    pairs = tuple((i, j) for i in range(d) for j in range(i + 1, d))
    comms = {(j, i): [(d + k, 1)] for k, (i, j) in enumerate(pairs)}
    names = [f"a{i + 1}" for i in range(d)] + [f"c{i + 1}{j + 1}" for i, j in pairs]
    pres = PcPresentation(p, d + len(pairs), comms=comms, names=names)
    return FreeClass2(pres, d, pairs)


HUPPERT_NAMES = ("x", "b1", "b2", "a1", "a2", "a3")


def huppert_conjugation_table(p: int) -> dict[tuple[str, str], dict[str, int]]:
    """The printed action: ``(g, h) -> g^h`` as a sparse word in the generators."""
    m = p - 1
    return {
        ("a1", "b1"): {"a1": 1, "a3": m}, ("a2", "b1"): {"a2": 1, "a3": 1}, ("a3", "b1"): {"a3": 1},
        ("a1", "b2"): {"a1": 1, "a3": m}, ("a2", "b2"): {"a2": 1}, ("a3", "b2"): {"a3": 1},
        ("a1", "x"): {"a1": 1, "a2": m}, ("a2", "x"): {"a2": 1}, ("a3", "x"): {"a3": 1},
        ("b1", "x"): {"b1": 1, "b2": m}, ("b2", "x"): {"b2": 1, "a1": m},
    }


def build_huppert_example(p: int) -> PcPresentation:
    """The maximal-class group ``((C_p^3) x| C_p^2) x| C_p`` on ``x, b1, b2, a1, a2, a3``.

    pc relations ``[g, h] = g^-1 g^h`` are read off the conjugation table and
    then checked against it by collection.
    """
    _check_prime(p)
    if p < 5:
        raise PresentationError("the maximal-class example needs p >= 5")
    m = p - 1
    x, b1, b2, a1, a2, a3 = range(6)
    comms = {
        (b1, x): [(b2, m)],
        (b2, x): [(a1, m)],
        (a1, x): [(a2, m)],
        (a1, b1): [(a3, m)],
        (a2, b1): [(a3, 1)],
        (a1, b2): [(a3, m)],
    }
    pres = PcPresentation(p, 6, comms=comms, names=HUPPERT_NAMES)
    idx = {name: k for k, name in enumerate(HUPPERT_NAMES)}
    for (g, h), img in huppert_conjugation_table(p).items():
        got = pres.conj(pres._unit(idx[g]), pres._unit(idx[h]))
        want = _as_exps({idx[k]: e for k, e in img.items()}, 6, p, "table")
        if got != want:
            raise AssertionError(f"conjugation table mismatch for {g}^{h}: {got} != {want}")
    # generators of A commute, as do those of B
    for g, h in (("a2", "a1"), ("a3", "a1"), ("a3", "a2"), ("b2", "b1")):
        if any(pres.comm(pres._unit(idx[g]), pres._unit(idx[h]))):
            raise AssertionError(f"[{g}, {h}] should be trivial")
    return pres


# -- semidirect products -----------------------------------------------------------


class ActionError(PresentationError):
    """An action table does not define an automorphism action of the acting group."""


def _eval_hom(base: PcPresentation, images: Sequence[Exps], v: Exps) -> Exps:
    out = (0,) * base.n
    for j, e in enumerate(v):
        if e:
            out = base.mul(out, base.pow(images[j], e))
    return out


def automorphism_order(base: PcPresentation, images: Sequence[Exps], limit: int = 10_000) -> int:
    """Order of the endomorphism defined by generator images (must be bijective)."""
    gens = [base._unit(j) for j in range(base.n)]
    cur = list(images)
    for k in range(1, limit + 1):
        if cur == gens:
            return k
        cur = [_eval_hom(base, images, c) for c in cur]
    raise ActionError(f"automorphism order exceeds {limit}")


def build_semidirect(base: PcPresentation, acting: PcPresentation,
                     action: Sequence[Sequence] | Mapping[int, Sequence],
                     names: Sequence[str] | None = None) -> PcPresentation:
    """``base x| acting`` with ``acting``'s generators first.

    ``action[i][j]`` is the image ``g_j^(k_i)`` of base generator ``j`` under
    acting generator ``i``, as a word, sparse dict or exponent vector over
    ``base``.  Checks, in order: each image map preserves the base relations;
    it has ``p``-power order; it fixes every base pc layer (images of ``g_j``
    are ``g_j`` times later generators, so the combined pc series is valid);
    the acting relations hold as maps.  The combined presentation is then
    verified for consistency.
    """
    if base.p != acting.p:
        raise ActionError("base and acting group must have the same prime")
    p, nb, nk = base.p, base.n, acting.n
    if isinstance(action, Mapping):
        action = [action.get(i, None) for i in range(nk)]
    if len(action) != nk:
        raise ActionError(f"need images for {nk} acting generators")
    maps: list[list[Exps]] = []
    for i, row in enumerate(action):
        if row is None:
            row = [base._unit(j) for j in range(nb)]
        if len(row) != nb:
            raise ActionError(f"acting generator {i + 1}: need {nb} images")
        maps.append([_as_exps(w, nb, p, f"image of g{j + 1} under k{i + 1}") for j, w in enumerate(row)])

    for i, imgs in enumerate(maps):
        where = f"acting generator {i + 1}"
        for j in range(nb):
            lhs = base.pow(imgs[j], p)
            rhs = _eval_hom(base, imgs, base.powers[j])
            if lhs != rhs:
                raise ActionError(f"{where}: power relation of g{j + 1} not preserved")
            for k in range(j):
                lhs = base.comm(imgs[j], imgs[k])
                rhs = _eval_hom(base, imgs, base.comms[(j, k)])
                if lhs != rhs:
                    raise ActionError(f"{where}: relation [g{j + 1}, g{k + 1}] not preserved")
        order = automorphism_order(base, imgs)
        q = order
        while q % p == 0:
            q //= p
        if q != 1:
            raise ActionError(f"{where}: automorphism has order {order}, not a power of {p}")
        for j in range(nb):
            img = imgs[j]
            if any(img[:j]) or img[j] != 1:
                raise ActionError(f"{where}: image of g{j + 1} is not g{j + 1} times later generators")

    def compose(first: list[Exps], second: list[Exps]) -> list[Exps]:
        # conjugation by k1 then k2: g -> second(first(g))
        return [_eval_hom(base, second, w) for w in first]

    ident = [base._unit(j) for j in range(nb)]

    def act_word(v: Exps) -> list[Exps]:
        cur = ident
        for i, e in enumerate(v):
            for _ in range(e):
                cur = compose(cur, maps[i])
        return cur

    for i in range(nk):
        p_power = tuple(p if t == i else 0 for t in range(nk))
        if act_word(p_power) != act_word(acting.powers[i]):
            raise ActionError(f"acting relation k{i + 1}^p not respected by the action")
        for k in range(i):
            # k_i k_k = k_k k_i [k_i, k_k]
            left = compose(maps[i], maps[k])
            right = compose(compose(maps[k], maps[i]), act_word(acting.comms[(i, k)]))
            if left != right:
                raise ActionError(f"acting relation [k{i + 1}, k{k + 1}] not respected by the action")

    n = nk + nb
    powers = {}
    comms = {}
    for i in range(nk):
        powers[i] = tuple(acting.powers[i]) + (0,) * nb
        for k in range(i):
            comms[(i, k)] = tuple(acting.comms[(i, k)]) + (0,) * nb
    for j in range(nb):
        powers[nk + j] = (0,) * nk + tuple(base.powers[j])
        for k in range(j):
            comms[(nk + j, nk + k)] = (0,) * nk + tuple(base.comms[(j, k)])
        for i in range(nk):
            c = base.mul(base.inv(base._unit(j)), maps[i][j])
            comms[(nk + j, i)] = (0,) * nk + tuple(c)
    if names is None:
        names = [f"k{i + 1}" for i in range(nk)] + list(base.names)
        if len(set(names)) != len(names):
            names = None
    return PcPresentation(p, n, powers, comms, names)


def build_huppert_semidirect(p: int) -> PcPresentation:
    """The maximal-class example assembled as ``(A x| B) x| X`` by two semidirect products."""
    if p < 5:
        raise PresentationError("the maximal-class example needs p >= 5")
    m = p - 1
    A = PcPresentation(p, 3, names=["a1", "a2", "a3"])
    B = PcPresentation(p, 2, names=["b1", "b2"])
    # images of a1, a2, a3 under b1 and b2
    Y = build_semidirect(A, B, [
        [{0: 1, 2: m}, {1: 1, 2: 1}, {2: 1}],
        [{0: 1, 2: m}, {1: 1}, {2: 1}],
    ], names=["b1", "b2", "a1", "a2", "a3"])
    X = PcPresentation(p, 1, names=["x"])
    # Y generators: b1, b2, a1, a2, a3
    return build_semidirect(Y, X, [[
        {0: 1, 1: m}, {1: 1, 2: m}, {2: 1, 3: m}, {3: 1}, {4: 1},
    ]], names=list(HUPPERT_NAMES))


def build_abelian_pgroup(p: int, exponents: Sequence[int]) -> PcPresentation:
    """``C_(p^e1) x C_(p^e2) x ..`` with pc generators ordered by power level.

    Level-``l`` generators are ``c_i^(p^l)``; all level-0 generators come first,
    then level 1, and so on, so each ``p``-th power points to a later generator.
    """
    _check_prime(p)
    slots = []
    for lvl in range(max(exponents, default=0)):
        for i, e in enumerate(exponents):
            if lvl < e:
                slots.append((i, lvl))
    pos = {s: k for k, s in enumerate(slots)}
    powers = {}
    for k, (i, lvl) in enumerate(slots):
        if (i, lvl + 1) in pos:
            powers[k] = [(pos[(i, lvl + 1)], 1)]
    names = [f"u{i + 1}" if lvl == 0 else f"u{i + 1}_{lvl}" for i, lvl in slots]
    return PcPresentation(p, len(slots), powers=powers, names=names)


def _scalar_images(base: PcPresentation, scalar: int) -> list[Exps]:
    return [base.pow(base._unit(j), scalar) for j in range(base.n)]


def build_scalar_semidirect(p: int, base_exponent: int, acting_exponent: int, rank: int = 2) -> PcPresentation:
    """``(C_(p^a))^rank x| C_(p^b)`` with the generator acting as ``u -> u^(1+p)``."""
    base = build_abelian_pgroup(p, [base_exponent] * rank)
    acting = build_cyclic(p, acting_exponent)
    row = _scalar_images(base, 1 + p)
    action = [row] + [[base._unit(j) for j in range(base.n)]] * (acting.n - 1)
    # later generators of the acting cyclic group are powers of the first; their action is derived
    for i in range(1, acting.n):
        prev = action[i - 1]
        cur = [base._unit(j) for j in range(base.n)]
        for _ in range(p):
            cur = [_eval_hom(base, prev, w) for w in cur]
        action[i] = cur
    names = ["t"] + [f"t_{i}" for i in range(1, acting.n)] + list(base.names)
    return build_semidirect(base, acting, action, names=names)


def build_cyclic_derived(p: int) -> PcPresentation:
    """Class 2, ``G' = <c>`` cyclic of order ``p^2``: ``(C_(p^2) x C_(p^2)) x| C_(p^2)``.

    The acting generator ``y`` sends ``x -> x c`` and fixes ``c``.
    """
    base = build_abelian_pgroup(p, [2, 2])  # u1=x, u2=c, u1_1=x^p, u2_1=c^p
    acting = build_cyclic(p, 2)
    x_img = base.mul(base._unit(0), base._unit(1))
    row0 = [x_img] + [base._unit(j) for j in range(1, base.n)]
    row0[2] = base.pow(x_img, p)
    row1 = [base._unit(j) for j in range(base.n)]
    cur = [base._unit(j) for j in range(base.n)]
    for _ in range(p):
        cur = [_eval_hom(base, row0, w) for w in cur]
    row1 = cur
    names = ["y", "y^p", "x", "c", "x^p", "c^p"]
    return build_semidirect(base, acting, [row0, row1], names=names)


# -- recipes ---------------------------------------------------------------------

FAMILIES = {
    "abelian": "elementary abelian group of order p^n",
    "elementary-abelian": "elementary abelian group of order p^n",
    "heisenberg": "extraspecial group of order p^3 and exponent p",
    "extraspecial": "extraspecial group of order p^3, exponent p or p^2 (param e=1|2)",
    "free-class2": "F_d / gamma_3(F_d) F_d^p",
    "huppert": "maximal-class example of order p^6 on x, b1, b2, a1, a2, a3",
    "huppert-semidirect": "the same group assembled by two semidirect products",
    "scalar-semidirect": "(C_(p^a))^r x| C_(p^b) acting by u -> u^(1+p) (params a, b, r)",
    "cyclic-derived": "class 2 with cyclic derived subgroup of order p^2",
    "cyclic": "cyclic group of order p^k",
}

_RECIPE_RE = re.compile(r"^\s*([a-z0-9-]+)\s*(?:\((.*)\))?\s*$")


@dataclass(frozen=True)
class GroupRecipe:
    family: str
    params: tuple[tuple[str, int], ...] = field(default=())

    @classmethod
    def parse(cls, text: str) -> "GroupRecipe":
        m = _RECIPE_RE.match(text)
        if not m:
            raise ValueError(f"bad recipe {text!r}")
        family = m.group(1)
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}; known: {', '.join(sorted(FAMILIES))}")
        params = {}
        if m.group(2):
            for part in m.group(2).split(","):
                if not part.strip():
                    continue
                key, _, val = part.partition("=")
                if not _:
                    raise ValueError(f"bad recipe parameter {part!r}")
                params[key.strip()] = int(val)
        return cls(family, tuple(sorted(params.items())))

    def get(self, key: str, default=None):
        return dict(self.params).get(key, default)

    def __str__(self):
        if not self.params:
            return self.family
        return f"{self.family}(" + ",".join(f"{k}={v}" for k, v in self.params) + ")"

    def build(self) -> PcPresentation:
        p = self.get("p", 5)
        f = self.family
        if f in ("abelian", "elementary-abelian"):
            return build_abelian(p, self.get("n", 3))
        if f == "heisenberg":
            return build_heisenberg(p)
        if f == "extraspecial":
            return build_extraspecial(p, p ** self.get("e", 1))
        if f == "free-class2":
            return build_free_class2(p, self.get("d", 3)).pres
        if f == "huppert":
            return build_huppert_example(p)
        if f == "huppert-semidirect":
            return build_huppert_semidirect(p)
        if f == "scalar-semidirect":
            return build_scalar_semidirect(p, self.get("a", 2), self.get("b", 1), self.get("r", 2))
        if f == "cyclic-derived":
            return build_cyclic_derived(p)
        if f == "cyclic":
            return build_cyclic(p, self.get("k", 2))
        raise ValueError(f"unknown family {f!r}")


# -- text format -----------------------------------------------------------------

_FACTOR_RE = re.compile(r"g(\d+)(?:\^(-?\d+))?$")


def _parse_word(tok_cols: list[tuple[str, int]], p: int, n: int, lineno: int) -> dict[int, int]:
    if len(tok_cols) == 1 and tok_cols[0][0] == "1":
        return {}
    if not tok_cols:
        raise ParseError("empty word (write 1 for the identity)", lineno, 1)
    out: dict[int, int] = {}
    last = 0
    for tok, col in tok_cols:
        m = _FACTOR_RE.match(tok)
        if not m:
            raise ParseError(f"bad factor {tok!r} (expected g<k>^<e>)", lineno, col)
        k = int(m.group(1))
        e = int(m.group(2)) if m.group(2) is not None else 1
        if not 1 <= k <= n:
            raise ParseError(f"generator g{k} out of range 1..{n}", lineno, col)
        if k <= last:
            raise ParseError("factors must have strictly increasing generator indices", lineno, col)
        if not 1 <= e < p:
            raise ParseError(f"exponent {e} not in 1..{p - 1}", lineno, col)
        out[k - 1] = e
        last = k
    return out


def _tokens(line: str) -> list[tuple[str, int]]:
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", line)]


def parse_presentation(text: str) -> PcPresentation:
    """Parse the text format; raises ParseError or a consistency error."""
    p = n = None
    names = None
    powers: dict[int, dict[int, int]] = {}
    comms: dict[tuple[int, int], dict[int, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        key, col = toks[0]
        if key == "p":
            if len(toks) != 2 or not toks[1][0].isdigit():
                raise ParseError("expected 'p <prime>'", lineno, col)
            p = int(toks[1][0])
            if not is_prime(p):
                raise ParseError(f"{p} is not prime", lineno, toks[1][1])
            continue
        if key == "n":
            if len(toks) != 2 or not toks[1][0].isdigit():
                raise ParseError("expected 'n <count>'", lineno, col)
            n = int(toks[1][0])
            continue
        if p is None or n is None:
            raise ParseError("header 'p' and 'n' must come first", lineno, col)
        if key == "names":
            names = [t for t, _ in toks[1:]]
            if len(names) != n:
                raise ParseError(f"expected {n} names, got {len(names)}", lineno, col)
            continue
        if key in ("pow", "comm"):
            nidx = 1 if key == "pow" else 2
            try:
                colon = [t for t, _ in toks].index(":")
            except ValueError:
                raise ParseError("missing ':'", lineno, col) from None
            if colon != 1 + nidx:
                raise ParseError(f"'{key}' takes {nidx} generator indices", lineno, col)
            idx = []
            for t, c in toks[1:colon]:
                if not t.isdigit() or not 1 <= int(t) <= n:
                    raise ParseError(f"bad generator index {t!r}", lineno, c)
                idx.append(int(t) - 1)
            word = _parse_word(toks[colon + 1:], p, n, lineno)
            wcol = toks[colon + 1][1] if colon + 1 < len(toks) else toks[colon][1] + 1
            support = idx[0]
            if key == "comm":
                j, i = idx
                if j <= i:
                    raise ParseError("comm j i needs j > i", lineno, toks[1][1])
                if (j, i) in comms:
                    raise ParseError("duplicate relation", lineno, col)
                comms[(j, i)] = word
            else:
                if idx[0] in powers:
                    raise ParseError("duplicate relation", lineno, col)
                powers[idx[0]] = word
            if word and min(word) <= support:
                raise ParseError(f"relation word must involve only generators after g{support + 1}",
                                 lineno, wcol)
            continue
        raise ParseError(f"unknown directive {key!r}", lineno, col)
    if p is None or n is None:
        raise ParseError("missing header", 1, 1)
    return PcPresentation(p, n, powers, comms, names)


def _word_text(v: Exps) -> str:
    parts = [f"g{i + 1}^{e}" for i, e in enumerate(v) if e]
    return " ".join(parts) if parts else "1"


def emit_presentation(pres: PcPresentation) -> str:
    lines = [f"p {pres.p}", f"n {pres.n}"]
    default = tuple(f"g{i + 1}" for i in range(pres.n))
    if pres.names != default and pres.n:
        lines.append("names " + " ".join(pres.names))
    for i, w in enumerate(pres.powers):
        if any(w):
            lines.append(f"pow {i + 1} : {_word_text(w)}")
    for j in range(pres.n):
        for i in range(j):
            w = pres.comms[(j, i)]
            if any(w):
                lines.append(f"comm {j + 1} {i + 1} : {_word_text(w)}")
    return "\n".join(lines) + "\n"


def digest(pres: PcPresentation) -> str:
    """sha256 of the canonical emitted text."""
    return hashlib.sha256(emit_presentation(pres).encode("utf-8")).hexdigest()


def load_presentation(path) -> PcPresentation:
    with open(path, encoding="utf-8") as fh:
        return parse_presentation(fh.read())


def save_presentation(pres: PcPresentation, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit_presentation(pres))
