"""Commutator sets and the verification procedures built on them.

Extensional sets are arrays of element codes (see ``PcPresentation.index_of``).
Two identities keep enumeration cheap:

* ``K_x(G) = x^-1 Cl(x)``, so ``K(G)`` is the conjugation closure of
  ``{r^-1 y : y ~ r}`` over class representatives ``r``, and
  ``|K_x(G)| = |G : C_G(x)|``;
* ``[x, g]`` only depends on the cosets ``x Z(G)`` and ``g Z(G)``, which is
  how ``K(G)`` is enumerated when the regular representation is too large.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import gates
from .constructions import FreeClass2, digest
from .errors import GateExceeded, HypothesisError
from .pc import Element, Exps, PcPresentation
from .series import (
    as_subgroup,
    cf_parameters,
    derived_subgroup,
    exponent,
    frattini,
    is_powerful,
    is_uniserial_mod,
    lower_central,
    power_subgroup,
    rank,
    theorem_b_chain,
)
from .subgroups import (
    QuotientMap,
    Section,
    Subgroup,
    _exps,
    center,
    chief_chain,
    commutator_subgroup,
    condition_subgroup,
    is_normal,
    normal_closure,
    quotient,
    subgroup_closure,
    trivial_subgroup,
    whole_group,
)
from .tables import table_for


class Infeasible(GateExceeded):
    """The requested enumeration exceeds every configured gate."""


# -- element sets ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ElementSet:
    """A finite set of elements of ``parent``, stored as sorted unique codes.

    ``subgroups`` optionally lists subgroups whose union is the set; membership
    then prefers them.
    """

    parent: PcPresentation
    codes: np.ndarray
    subgroups: tuple[Subgroup, ...] = ()

    @classmethod
    def from_codes(cls, parent: PcPresentation, codes, subgroups=()) -> "ElementSet":
        return cls(parent, np.unique(np.asarray(codes, dtype=np.int64)), tuple(subgroups))

    @classmethod
    def of_subgroup(cls, H: Subgroup) -> "ElementSet":
        return cls.from_codes(H.parent, H.codes(), (H,))

    def __len__(self):
        return int(self.codes.size)

    def __contains__(self, a) -> bool:
        v = _exps(self.parent, a)
        if self.subgroups:
            return any(H.contains(v) for H in self.subgroups)
        c = self.parent.index_of(v)
        i = np.searchsorted(self.codes, c)
        return bool(i < self.codes.size and self.codes[i] == c)

    def __eq__(self, other):
        if isinstance(other, Subgroup):
            other = ElementSet.of_subgroup(other)
        if not isinstance(other, ElementSet):
            return NotImplemented
        return self.parent is other.parent and np.array_equal(self.codes, other.codes)

    __hash__ = None

    def issubset(self, other) -> bool:
        if isinstance(other, Subgroup):
            other = ElementSet.of_subgroup(other)
        return bool(np.isin(self.codes, other.codes).all())

    def elements(self) -> list[Element]:
        pres = self.parent
        return [Element(pres, pres.exps_of(int(c))) for c in self.codes]

    def union(self, other: "ElementSet") -> "ElementSet":
        return ElementSet.from_codes(self.parent, np.union1d(self.codes, other.codes),
                                     self.subgroups + other.subgroups)

    def __repr__(self):
        return f"ElementSet(size={len(self)})"


def _table_ok(pres: PcPresentation) -> bool:
    return pres.order <= gates().table


def _kx_codes_table(pres: PcPresentation, x: Exps) -> np.ndarray:
    table = table_for(pres)
    return np.unique(table.comm(pres.index_of(x), table.all()).astype(np.int64))


def _left_transversal(pres: PcPresentation, H: Subgroup) -> Iterable[Exps]:
    """Elements with zero exponents at ``H``'s leading depths (``G = T H``)."""
    free = [d for d in range(pres.n) if d not in set(H.depths)]
    for combo in itertools.product(range(pres.p), repeat=len(free)):
        v = [0] * pres.n
        for d, e in zip(free, combo):
            v[d] = e
        yield tuple(v)


def kx_codes(G, x) -> np.ndarray:
    """Codes of ``K_x(G) = {[x, g] : g in G}``."""
    G = as_subgroup(G)
    pres = G.parent
    x = _exps(pres, x)
    if G.log_order == pres.n and _table_ok(pres):
        return _kx_codes_table(pres, x)
    if G.log_order == pres.n:
        # [x, g] is constant on right cosets C_G(x) g; t^-1 runs over them
        C = condition_subgroup(G, subgroup_closure([x], pres), trivial_subgroup(pres))
        size = G.order // C.order
        if size > gates().pairs:
            raise Infeasible(f"|G : C_G(x)| = {size} above the pair gate")
        out = {pres.index_of(pres.comm(x, pres.inv(t))) for t in _left_transversal(pres, C)}
        return np.array(sorted(out), dtype=np.int64)
    table = table_for(pres)
    return np.unique(table.comm(pres.index_of(x), G.codes(table)).astype(np.int64))


def _conjugation_closure(table, mask: np.ndarray) -> np.ndarray:
    allc = table.all()
    perms = []
    for j in range(table.n):
        g = np.zeros(table.n, dtype=np.int64)
        g[j] = 1
        perms.append(table.conj(allc, table.codes(g[None, :])[0]))
    while True:
        new = mask.copy()
        for perm in perms:
            new[perm[mask]] = True
        if (new == mask).all():
            return mask
        mask = new


def _pairs_chunk(pres: PcPresentation, xs: list[Exps]) -> set[int]:
    # for each x only a right transversal of C_G(x) is needed
    out = set()
    one = trivial_subgroup(pres)
    G = whole_group(pres)
    chain = chief_chain(G, G, one)
    for x in xs:
        C = condition_subgroup(G, subgroup_closure([x], pres), one, chain)
        for t in _left_transversal(pres, C):
            out.add(pres.index_of(pres.comm(x, pres.inv(t))))
    return out


def k_set(G, x=None, *, jobs: int = 1) -> ElementSet:
    """``K(G)`` (all commutators) or ``K_x(G)`` when ``x`` is given.

    Raises :class:`Infeasible` when no enumeration route fits the gates.
    """
    G = as_subgroup(G)
    pres = G.parent
    if G.log_order != pres.n:
        raise ValueError("k_set works on the whole group of a presentation")
    if x is not None:
        return ElementSet.from_codes(pres, kx_codes(G, x))
    if pres.order <= min(gates().kset, gates().table):
        table = table_for(pres)
        allc = table.all()
        labels = table.class_labels
        base = table.mul(table.inverses[labels], allc)
        mask = np.zeros(table.size, dtype=bool)
        mask[base] = True
        mask = _conjugation_closure(table, mask)
        return ElementSet.from_codes(pres, np.flatnonzero(mask))
    Z = center(G)
    reps = list(_left_transversal(pres, Z))
    if len(reps) ** 2 > gates().pairs:
        raise Infeasible(
            f"K(G) needs {len(reps)}^2 centre-coset pairs, above the pair gate {gates().pairs}")
    if jobs > 1:
        chunks = [reps[i::jobs] for i in range(jobs)]
        out: set[int] = set()
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            for part in ex.map(_pairs_chunk, [pres] * jobs, chunks):
                out |= part
    else:
        out = _pairs_chunk(pres, reps)
    return ElementSet.from_codes(pres, sorted(out))


def centralizer_index(G, x) -> int:
    """``|G : C_G(x)|`` computed extensionally (class size)."""
    G = as_subgroup(G)
    pres = G.parent
    table = table_for(pres)
    labels = table.class_labels
    return int((labels == labels[pres.index_of(_exps(pres, x))]).sum())


# -- rank oracle -----------------------------------------------------------------


def rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    """Rank of an integer matrix over ``F_p`` (Gaussian elimination)."""
    m = [[int(a) % p for a in r] for r in rows]
    rk = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((r for r in range(rk, len(m)) if m[r][c]), None)
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        inv = pow(m[rk][c], -1, p)
        m[rk] = [(a * inv) % p for a in m[rk]]
        for r in range(len(m)):
            if r != rk and m[r][c]:
                f = m[r][c]
                m[r] = [(a - f * b) % p for a, b in zip(m[r], m[rk])]
        rk += 1
    return rk


def bivector_matrix(fc: FreeClass2, c) -> list[list[int]]:
    """Alternating matrix of an element of ``G'`` of the free class-2 quotient."""
    pres = fc.pres
    v = _exps(pres, c)
    if any(v[: fc.d]):
        raise HypothesisError("element does not lie in the derived subgroup")
    A = [[0] * fc.d for _ in range(fc.d)]
    for k, (i, j) in enumerate(fc.pairs):
        e = v[fc.d + k]
        A[i][j] = e % pres.p
        A[j][i] = (-e) % pres.p
    return A


def decomposable_rank_oracle(fc: FreeClass2, c) -> bool:
    """``c`` is a commutator iff its alternating form has rank at most 2."""
    if not isinstance(fc, FreeClass2):
        raise HypothesisError("rank oracle applies only to free class-2 exponent-p quotients")
    return rank_mod_p(bivector_matrix(fc, c), fc.pres.p) <= 2


# -- D(T), C, C_i ------------------------------------------------------------------


@dataclass(frozen=True)
class DSubgroups:
    pairs: tuple[tuple[Subgroup, Subgroup], ...]
    D: ElementSet | None

    @property
    def hyperplanes(self) -> list[Subgroup]:
        return [T for T, _ in self.pairs]

    def in_D(self, a) -> bool:
        return any(DT.contains(a) for _, DT in self.pairs)


def normal_maximal_in_derived(G) -> list[Subgroup]:
    """Index-p subgroups of ``G'`` that are normal in ``G``.

    They are the hyperplanes of ``G'`` containing ``W = [G', G] Phi(G')``
    (the action of a p-group on ``G'/Phi(G')`` is unipotent, so invariant
    hyperplanes are exactly those containing the image of ``[G', G]``).
    """
    G = as_subgroup(G)
    pres = G.parent
    Gd = derived_subgroup(G)
    W = Subgroup(pres, list(commutator_subgroup(Gd, G).igs) + list(frattini(Gd).igs))
    sec = Section(Gd, W)
    s = sec.dim
    out = []
    for f in itertools.product(range(pres.p), repeat=s):
        nz = [e for e in f if e]
        if not nz or nz[0] != 1:
            continue
        # kernel basis of the functional f on F_p^s
        lead = next(i for i, e in enumerate(f) if e)
        basis = []
        for i in range(s):
            if i == lead:
                continue
            vec = [0] * s
            vec[i] = 1
            vec[lead] = (-f[i]) % pres.p
            basis.append(vec)
        T = Subgroup(pres, list(W.igs) + [sec.lift(b) for b in basis])
        out.append(T)
    return out


def d_subgroups(G, *, with_set: bool = True) -> DSubgroups:
    G = as_subgroup(G)
    pres = G.parent
    if derived_subgroup(G).is_trivial():
        raise HypothesisError("D(T) is defined for non-abelian groups only")
    pairs = []
    for T in normal_maximal_in_derived(G):
        pairs.append((T, condition_subgroup(G, G, T)))
    D = None
    if with_set and _table_ok(pres):
        codes = np.unique(np.concatenate([DT.codes() for _, DT in pairs]))
        D = ElementSet.from_codes(pres, codes, [DT for _, DT in pairs])
    return DSubgroups(tuple(pairs), D)


@dataclass
class LemmaDReport:
    passed: bool
    elements: int
    classes: int
    hyperplanes: int
    failures: list[str] = field(default_factory=list)


def _derived_by_x(pres: PcPresentation, G: Subgroup, x: Exps) -> Subgroup:
    """``[x, G]``, the normal closure of the ``[x, g_i]``."""
    return normal_closure([pres.comm(x, g) for g in G.igs], G)


def verify_lemma_D(G) -> LemmaDReport:
    """For all ``x``: ``[x, G] = G'`` iff ``x`` is outside ``D``; ``Phi(G) <= D(T)``; even codimension.

    ``[x, G]`` is a normal subgroup depending only on the conjugacy class of
    ``x``, so it is computed once per class (by normal closure, independently
    of ``D``) and compared with ``D`` membership on every element.
    """
    G = as_subgroup(G)
    pres = G.parent
    if pres.order > gates().enumerate:
        raise Infeasible(f"Lemma D suite needs |G| <= {gates().enumerate}")
    Gd = derived_subgroup(G)
    ds = d_subgroups(G)
    table = table_for(pres)
    failures = []
    Phi = frattini(G)
    for T, DT in ds.pairs:
        if not Phi <= DT:
            failures.append(f"Phi(G) not contained in D(T) for T = {T!r}")
        if (G.log_order - DT.log_order) % 2:
            failures.append(f"log_p |G : D(T)| = {G.log_order - DT.log_order} is odd for T = {T!r}")
    labels = table.class_labels
    reps = np.unique(labels)
    full = np.zeros(table.size, dtype=bool)
    for r in reps.tolist():
        full[r] = _derived_by_x(pres, G, pres.exps_of(r)) == Gd
    full_all = full[labels]
    in_D = np.zeros(table.size, dtype=bool)
    in_D[ds.D.codes] = True
    bad = np.flatnonzero(full_all == in_D)
    for c in bad[:5].tolist():
        failures.append(f"x = {pres.exps_of(c)}: [x,G] = G' is {bool(full_all[c])} "
                        f"but x in D is {bool(in_D[c])}")
    if bad.size > 5:
        failures.append(f"... {bad.size - 5} more disagreements")
    return LemmaDReport(not failures, table.size, int(reps.size), len(ds.pairs), failures)


# -- Hall congruences ------------------------------------------------------------------


@dataclass
class HallReport:
    status: str  # "pass", "fail" or "hypotheses not met"
    reason: str = ""
    levels: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "pass"


def hall_hypotheses(G, x, g, L, N, k: int) -> str | None:
    """Return the first violated hypothesis of the Hall congruence lemma, or ``None``."""
    G = as_subgroup(G)
    pres = G.parent
    p = pres.p
    if p < 3:
        return "p >= 3 required"
    P = power_subgroup(derived_subgroup(G), k)
    if not is_powerful(P):
        return "(G')^(p^k) is not powerful"
    for S, name in ((L, "L"), (N, "N")):
        if not is_normal(S, G):
            return f"{name} is not normal in G"
    if not (power_subgroup(P, 1) <= N and N <= L and L <= P):
        return "((G')^(p^k))^p <= N <= L <= (G')^(p^k) fails"
    d = rank(P)
    if d > p ** (k + 1) - p ** k - 1:
        return f"d = {d} exceeds p^(k+1) - p^k - 1"
    if not power_subgroup(G, k).contains(g):
        return "g is not in G^(p^k)"
    c = pres.comm(x, g)
    if Subgroup(pres, [c] + list(N.igs)) != L:
        return "L/N is not generated by [x, g] N"
    return None


def hall_congruence_check(G, x, g, L, N, k: int) -> HallReport:
    """``[x, g]^(p^i) == [x, g^(p^i)] (mod N^(p^i))`` and ``L^(p^i)/N^(p^i) = <[x, g^(p^i)]>``."""
    G = as_subgroup(G)
    pres = G.parent
    x, g = _exps(pres, x), _exps(pres, g)
    why = hall_hypotheses(G, x, g, L, N, k)
    if why is not None:
        return HallReport("hypotheses not met", why)
    c = pres.comm(x, g)
    failures = []
    i = 0
    while True:
        q = pres.p ** i
        Li, Ni = power_subgroup(L, i), power_subgroup(N, i)
        lhs = pres.pow(c, q)
        rhs = pres.comm(x, pres.pow(g, q))
        if not Ni.contains(pres.mul(lhs, pres.inv(rhs))):
            failures.append(f"i={i}: congruence fails")
        if Subgroup(pres, [rhs] + list(Ni.igs)) != Li:
            failures.append(f"i={i}: L^(p^i)/N^(p^i) not generated by [x, g^(p^i)]")
        if Li.is_trivial():
            break
        i += 1
    return HallReport("fail" if failures else "pass", levels=i + 1, failures=failures)


def random_hall_instances(G, count: int, seed: int = 0, max_tries: int = 20000):
    """Random hypothesis-satisfying ``(x, g, L, N, k)`` tuples."""
    G = as_subgroup(G)
    pres = G.parent
    rng = np.random.default_rng(seed)
    Gd = derived_subgroup(G)
    ks = []
    for k in (0, 1):
        P = power_subgroup(Gd, k)
        if P.is_trivial() or not is_powerful(P):
            continue
        if rank(P) <= pres.p ** (k + 1) - pres.p ** k - 1:
            chain = chief_chain(G, P, power_subgroup(P, 1))
            ks.append((k, P, chain, power_subgroup(G, k)))
    if not ks:
        return []
    out = []
    tries = 0
    while len(out) < count and tries < max_tries:
        tries += 1
        k, P, chain, Gk = ks[rng.integers(len(ks))]
        x = pres.random_element(rng).exps
        g = Gk.element_from([int(a) for a in rng.integers(0, pres.p, Gk.log_order)])
        j = int(rng.integers(len(chain)))
        N = chain[j]
        L = Subgroup(pres, [pres.comm(x, g)] + list(N.igs))
        if hall_hypotheses(G, x, g, L, N, k) is None:
            out.append((x, g, L, N, k))
    return out


# -- Theorem B witnesses ---------------------------------------------------------------


class WitnessSearchError(RuntimeError):
    """No witness was found although the hypotheses hold."""


@dataclass
class WitnessCertificate:
    digest: str
    p: int
    n: int
    witness: Exps
    chain: list[Subgroup]
    pairing: list[Exps]
    d: int
    verdict: str = "G' = K_x(G)"
    transcript: list[dict] = field(default_factory=list)
    experimental: bool = False

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "kind": "theorem-b-witness",
            "presentation_digest": self.digest,
            "p": self.p,
            "n": self.n,
            "d": self.d,
            "experimental": self.experimental,
            "witness": list(self.witness),
            "chain": [[list(v) for v in S.igs] for S in self.chain],
            "pairing": [{"rung": j, "g": list(g)} for j, g in enumerate(self.pairing)],
            "verdict": self.verdict,
            "transcript": self.transcript,
        }

    @classmethod
    def from_dict(cls, data: dict, pres: PcPresentation) -> "WitnessCertificate":
        chain = [Subgroup(pres, [tuple(v) for v in igs]) for igs in data["chain"]]
        pairing = [tuple(e["g"]) for e in sorted(data["pairing"], key=lambda e: e["rung"])]
        return cls(data["presentation_digest"], data["p"], data["n"], tuple(data["witness"]),
                   chain, pairing, data["d"], data.get("verdict", "G' = K_x(G)"),
                   data.get("transcript", []), data.get("experimental", False))


@dataclass
class ReplayResult:
    passed: bool
    failures: list[str]
    transcript: list[dict]
    failed_rung: int | None = None


def replay_certificate(cert: WitnessCertificate, pres: PcPresentation) -> ReplayResult:
    """Re-verify every rung of a certificate extensionally, without searching.

    For each rung ``N_j > N_(j+1)``: both terms normal in ``G`` with index
    ``p``; ``[x, g_j]`` lies in ``N_j`` but not ``N_(j+1)``; the cosets of
    ``[x, g_j^a]`` (``a = 0..p-1``) exhaust ``N_j/N_(j+1)`` (central-lemma
    coverage); and bottom-up, ``N_(j+1) <= K_x(G)`` together with
    ``N_j/N_(j+1) <= K_(x N_(j+1))(G/N_(j+1))`` gives ``N_j <= K_x(G)``.
    Finally ``K_x(G) = G'`` as sets.
    """
    failures: list[str] = []
    transcript: list[dict] = []
    if cert.digest != digest(pres):
        raise HypothesisError("certificate was issued for a different presentation")
    if (cert.p, cert.n) != (pres.p, pres.n):
        raise HypothesisError("certificate shape does not match the presentation")
    G = whole_group(pres)
    x = tuple(cert.witness)
    chain = cert.chain
    if len(cert.pairing) != len(chain) - 1:
        return ReplayResult(False, ["pairing length does not match the chain"], [], None)
    Gd = derived_subgroup(G)
    if not chain or chain[0] != Gd or not chain[-1].is_trivial():
        return ReplayResult(False, ["chain must run from G' to 1"], [], None)
    kx = kx_codes(G, x)
    table = table_for(pres)
    kx_mask = table.mask(kx)
    first_bad = None
    for j in range(len(chain) - 2, -1, -1):
        top, bot = chain[j], chain[j + 1]
        g = tuple(cert.pairing[j])
        c = pres.comm(x, g)
        step = {"rung": j, "top_log_order": top.log_order, "g": list(g), "commutator": list(c)}
        step["normal"] = is_normal(top, G) and is_normal(bot, G)
        step["index_p"] = bot <= top and top.log_order - bot.log_order == 1
        step["generates"] = top.contains(c) and not bot.contains(c)
        cover = set()
        if step["index_p"]:
            sec = Section(top, bot)
            ga = (0,) * pres.n
            for _ in range(pres.p):
                ca = pres.comm(x, ga)
                if top.contains(ca):
                    cover.add(sec.coords(ca))
                ga = pres.mul(ga, g)
        step["central_coverage"] = len(cover) == pres.p
        # domino: cosets of bot met by K_x cover top, and bot is inside K_x
        top_codes = top.codes(table)
        bot_codes = bot.codes(table)
        step["lower_contained"] = bool(kx_mask[bot_codes].all())
        if step["index_p"]:
            hit = set()
            for cc in kx[table.mask(top_codes)[kx]].tolist():
                hit.add(Section(top, bot).coords(pres.exps_of(cc)))
            step["domino_premise"] = len(hit) == pres.p
        else:
            step["domino_premise"] = False
        step["contained"] = bool(kx_mask[top_codes].all())
        ok = all(step[key] for key in ("normal", "index_p", "generates", "central_coverage",
                                      "lower_contained", "domino_premise", "contained"))
        step["ok"] = ok
        if not ok:
            bad = [key for key in ("normal", "index_p", "generates", "central_coverage",
                                   "lower_contained", "domino_premise", "contained") if not step[key]]
            failures.append(f"rung {j}: " + ", ".join(bad))
            if first_bad is None or j > first_bad:
                first_bad = j
        transcript.append(step)
    transcript.reverse()
    gd_codes = Gd.codes(table)
    final = {"kx_size": int(kx.size), "derived_size": int(gd_codes.size),
             "equal": bool(np.array_equal(kx, gd_codes))}
    if not final["equal"]:
        failures.append("K_x(G) != G'")
    transcript.append({"final": final})
    return ReplayResult(not failures, failures, transcript, first_bad)


def theorem_b_hypotheses(G, experimental: bool = False) -> tuple[int, str | None]:
    """``(d, reason)`` with ``reason`` the first violated hypothesis or ``None``."""
    G = as_subgroup(G)
    pres = G.parent
    Gd = derived_subgroup(G)
    Gdp = power_subgroup(Gd, 1)
    d = Gd.log_order - Gdp.log_order
    bound = pres.p - 1
    if experimental and Gdp.is_trivial():
        bound = pres.p + 1
    if d > bound:
        return d, f"d = {d} exceeds {bound}"
    ok, _ = is_uniserial_mod(G, Gd, Gdp)
    if not ok:
        return d, "action of G on G' is not uniserial modulo (G')^p"
    return d, None


def _transversal_lex(pres: PcPresentation, H: Subgroup) -> Iterable[Exps]:
    yield from _left_transversal(pres, H)


def find_theorem_b_witness(G, *, experimental: bool = False) -> WitnessCertificate:
    """Search ``x`` outside ``D`` and the two-step centralisers, pair rungs, verify.

    ``experimental`` relaxes ``d <= p-1`` to ``d <= p+1`` when ``(G')^p = 1``;
    the result is then only as good as its extensional verification.
    """
    G = as_subgroup(G)
    pres = G.parent
    one = trivial_subgroup(pres)
    Gd = derived_subgroup(G)
    if Gd.is_trivial():
        cert = WitnessCertificate(digest(pres), pres.p, pres.n, (0,) * pres.n, [Gd], [], 0,
                                  experimental=experimental)
        res = replay_certificate(cert, pres)
        cert.transcript = res.transcript
        return cert
    d, why = theorem_b_hypotheses(G, experimental)
    if why is not None:
        raise HypothesisError(why)
    chain_top = theorem_b_chain(G)  # G_2 .. G_(d+2)
    Gdp = chain_top[-1]
    Cs = [condition_subgroup(G, chain_top[i - 2], chain_top[i]) for i in range(2, d + 1)]
    ds = d_subgroups(G, with_set=False)
    Ds = [DT for _, DT in ds.pairs]
    Phi = frattini(G)
    x = None
    for t in _transversal_lex(pres, Phi):
        if not any(t):
            continue
        if any(S.contains(t) for S in Ds) or any(S.contains(t) for S in Cs):
            continue
        x = t
        break
    if x is None:
        raise WitnessSearchError(
            f"no witness outside D and C_2..C_d; |G| = {pres.p}^{pres.n}, d = {d}, "
            f"|D(T)| = {[S.log_order for S in Ds]}, |C_i| = {[S.log_order for S in Cs]}")
    chain = list(chain_top)
    if not Gdp.is_trivial():
        chain += chief_chain(G, Gdp, one)[1:]
    C2 = Cs[0] if Cs else condition_subgroup(G, chain_top[0], chain_top[min(2, len(chain_top) - 1)])
    pairing: list[Exps] = []
    for j in range(len(chain) - 1):
        top, bot = chain[j], chain[j + 1]
        if j == 0:
            pool = C2
        elif j < d:
            pool = chain_top[j - 1] if j >= 1 else G
            pool = chain_top[j - 1]
        else:
            pool = G
        candidates: list[Exps] = []
        if j >= d:
            for g in pairing:
                q = g
                for _ in range(8):
                    q = pres.pow(q, pres.p)
                    if not any(q):
                        break
                    candidates.append(q)
        candidates += list(pool.igs)
        found = None
        for g in itertools.chain(candidates, pool.iter_exps() if pool.order <= gates().enumerate
                                 else ()):
            c = pres.comm(x, g)
            if top.contains(c) and not bot.contains(c):
                found = g
                break
        if found is None:
            raise WitnessSearchError(f"no pairing element for rung {j} (x = {x})")
        pairing.append(found)
    cert = WitnessCertificate(digest(pres), pres.p, pres.n, x, chain, pairing, d,
                              experimental=experimental)
    res = replay_certificate(cert, pres)
    cert.transcript = res.transcript
    if not res.passed:
        raise WitnessSearchError(f"witness x = {x} failed verification: {res.failures}")
    return cert


def witness_hall_instances(cert: WitnessCertificate, pres: PcPresentation):
    """Hypothesis-satisfying Hall-lemma instances ``(x, g, L, N, k)`` from a certificate's rungs."""
    G = whole_group(pres)
    out = []
    x = cert.witness
    for j, g in enumerate(cert.pairing):
        L, N = cert.chain[j], cert.chain[j + 1]
        for k in (0, 1):
            if hall_hypotheses(G, x, g, L, N, k) is None:
                out.append((x, g, L, N, k))
        # the power-shifted instance used in the proof
        gp = pres.pow(g, pres.p)
        if any(gp):
            Lp, Np = power_subgroup(L, 1), power_subgroup(N, 1)
            if Lp != Np and hall_hypotheses(G, x, gp, Lp, Np, 1) is None:
                out.append((x, gp, Lp, Np, 1))
    return out


# -- Lemma "union" -----------------------------------------------------------------------


@dataclass
class UnionResult:
    subgroups: list[tuple[Subgroup, Subgroup]]
    target: Subgroup
    union_equal: bool
    derived_match: bool
    all_powerful: bool
    all_proper: bool

    @property
    def passed(self) -> bool:
        return self.union_equal and self.derived_match and self.all_powerful and self.all_proper


def union_hypotheses(G, x, u, v) -> str | None:
    G = as_subgroup(G)
    pres = G.parent
    Gd = derived_subgroup(G)
    Gdp = power_subgroup(Gd, 1)
    if pres.p < 5:
        return "p >= 5 required"
    if not is_powerful(Gd):
        return "G' is not powerful"
    if rank(Gd) != 3:
        return "d(G') = 3 required"
    if Subgroup(pres, [pres.comm(u, v), pres.comm(x, u), pres.comm(x, v)]) != Gd:
        return "G' != <[u,v], [x,u], [x,v]>"
    xG = _derived_by_x(pres, G, x)
    if xG == Gd:
        return "G' = [x, G]"
    if not commutator_subgroup(xG, G) <= Gdp:
        return "[x, G, G] is not contained in (G')^p"
    return None


def lemma_union_decomposition(G, x, u, v) -> UnionResult:
    """``H_i = <x, u v^i, v^p>`` (``i < p``), ``H_p = <x, v, u^p>`` and their derived subgroups."""
    G = as_subgroup(G)
    pres = G.parent
    x, u, v = (_exps(pres, a) for a in (x, u, v))
    why = union_hypotheses(G, x, u, v)
    if why is not None:
        raise HypothesisError(why)
    p = pres.p
    Gd = derived_subgroup(G)
    Gdp = power_subgroup(Gd, 1)
    target = Subgroup(pres, list(_derived_by_x(pres, G, x).igs) + list(Gdp.igs))
    subs = []
    expected = []
    for i in range(p):
        w = pres.mul(u, pres.pow(v, i))
        H = Subgroup(pres, [x, w, pres.pow(v, p)])
        subs.append((H, derived_subgroup(H)))
        expected.append(Subgroup(pres, [pres.comm(x, w)] + list(Gdp.igs)))
    H = Subgroup(pres, [x, v, pres.pow(u, p)])
    subs.append((H, derived_subgroup(H)))
    expected.append(Subgroup(pres, [pres.comm(x, v)] + list(Gdp.igs)))
    derived_match = all(Hd == e for (_, Hd), e in zip(subs, expected))
    all_powerful = all(is_powerful(Hd) for _, Hd in subs)
    all_proper = all(H.log_order < pres.n for H, _ in subs)
    if _table_ok(pres):
        codes = np.unique(np.concatenate([Hd.codes() for _, Hd in subs]))
        union_equal = bool(np.array_equal(codes, target.codes()))
    else:
        union_equal = all(Hd <= target for _, Hd in subs) and sum(
            Hd.order - Gdp.order for _, Hd in subs) + Gdp.order == target.order
    return UnionResult(subs, target, union_equal, derived_match, all_powerful, all_proper)


def find_case3_triple(G) -> tuple[Exps, Exps, Exps]:
    """``(x, u, v)`` meeting the union-lemma hypotheses, chosen as in Case 3.

    ``x`` with ``|[x, G](G')^p : (G')^p| = p^2``; ``M`` maximal containing
    ``C* = C_G(x mod (G')^p)``; then ``u`` outside ``M`` and ``v`` in ``M``
    outside ``C*`` with ``G' = <[u,v], [x,u], [x,v]>``.  Candidates are taken
    from the lexicographic transversal of ``Phi(G)``.
    """
    G = as_subgroup(G)
    pres = G.parent
    Gd = derived_subgroup(G)
    Gdp = power_subgroup(Gd, 1)
    if pres.p < 5:
        raise HypothesisError("p >= 5 required")
    if rank(Gd) != 3:
        raise HypothesisError(f"d(G') = {rank(Gd)}, Case 3 needs 3")
    if not is_powerful(Gd):
        raise HypothesisError("G' is not powerful")
    if not lower_central(G, 3) <= Gdp:
        raise HypothesisError("Case 3 needs gamma_3(G) <= (G')^p")
    Phi = frattini(G)
    reps = [t for t in _transversal_lex(pres, Phi) if any(t)]
    for x in reps:
        xG = Subgroup(pres, list(_derived_by_x(pres, G, x).igs) + list(Gdp.igs))
        if xG.log_order - Gdp.log_order != 2:
            continue
        Cs = condition_subgroup(G, subgroup_closure([x], pres), Gdp)
        sec = Section(G, Cs)
        if sec.dim < 2:
            continue
        M = Subgroup(pres, list(Cs.igs) + [sec.top[-1]])
        us = [t for t in reps if not M.contains(t)]
        vs = [t for t in reps if M.contains(t) and not Cs.contains(t)]
        for u in us:
            for v in vs:
                if union_hypotheses(G, x, u, v) is None:
                    return x, u, v
    raise WitnessSearchError("no Case 3 triple found")


# -- Honda consequence ---------------------------------------------------------------------


@dataclass
class HondaReport:
    passed: bool
    vacuous: bool
    checked: int
    failures: list[str] = field(default_factory=list)


def honda_power_check(G, sample_size: int = 50, seed: int = 0, kset: ElementSet | None = None) -> HondaReport:
    """For sampled ``c`` in ``K(G)`` and ``e = 1 mod p`` below ``exp(G')``: ``c^e`` in ``K(G)``."""
    G = as_subgroup(G)
    pres = G.parent
    if pres.order > gates().enumerate:
        raise Infeasible("Honda check needs K(G) within the enumeration gate")
    K = kset if kset is not None else k_set(G)
    expo = exponent(derived_subgroup(G))
    vacuous = expo <= pres.p
    rng = np.random.default_rng(seed)
    sample = K.codes if K.codes.size <= sample_size else rng.choice(K.codes, sample_size, replace=False)
    kmask = np.zeros(pres.order, dtype=bool)
    kmask[K.codes] = True
    table = table_for(pres)
    failures = []
    checked = 0
    exps_list = list(range(1 + pres.p, expo, pres.p)) if not vacuous else list(range(1 + pres.p, pres.p * pres.p, pres.p))
    for c in np.sort(sample).tolist():
        for e in exps_list:
            ce = int(table.pow(c, e))
            checked += 1
            if not kmask[ce]:
                failures.append(f"{pres.exps_of(c)}^{e} is not a commutator")
    return HondaReport(not failures, vacuous, checked, failures)


# -- Theorem A verdict -------------------------------------------------------------------------


@dataclass
class TheoremAReport:
    holds: bool
    branch: str
    derived_rank: int
    details: dict = field(default_factory=dict)
    certificate: WitnessCertificate | None = None


def theorem_a_verdict(G, *, kset: ElementSet | None = None) -> TheoremAReport:
    G = as_subgroup(G)
    pres = G.parent
    if pres.p < 5:
        raise HypothesisError("Theorem A verdicts need p >= 5")
    Gd = derived_subgroup(G)
    r = rank(Gd)
    if r > 3:
        raise HypothesisError(f"rank(G') = {r} > 3")
    K = kset if kset is not None else k_set(G)
    holds = K == ElementSet.of_subgroup(Gd)
    details: dict = {"k_size": len(K), "derived_order": Gd.order}
    cert = None
    if r <= 2:
        branch = "rank(G') <= 2"
    elif is_powerful(Gd):
        Gdp = power_subgroup(Gd, 1)
        Gamma = Subgroup(pres, list(Gdp.igs) + list(lower_central(G, 3).igs))
        idx = Gd.log_order - Gamma.log_order
        details["log_index_gamma"] = idx
        if idx == 1:
            g4 = Subgroup(pres, list(Gdp.igs) + list(lower_central(G, 4).igs))
            if Gamma.log_order - g4.log_order == 1:
                branch = "powerful -> Case 1 (uniserial) -> Theorem B"
                cert = find_theorem_b_witness(G)
            else:
                branch = "powerful -> Case 1"
        elif idx == 2:
            branch = "powerful -> Case 2"
        else:
            branch = "powerful -> Case 3"
    else:
        Gdp = power_subgroup(Gd, 1)
        q = quotient(pres, Gdp)
        cf = cf_parameters(q.target)
        details["cf_m"] = cf.m if cf else None
        details["log_index_power"] = Gd.log_order - Gdp.log_order
        uni, _ = is_uniserial_mod(G, Gd, Gdp)
        details["uniserial"] = uni
        if cf is None or cf.m != 6 or details["log_index_power"] != 4 or not uni:
            branch = "non-powerful -> CF(6,p) reduction failed"
            holds = False
        else:
            branch = f"non-powerful -> CF(6,{pres.p}) -> Theorem B"
            cert = find_theorem_b_witness(G)
    return TheoremAReport(bool(holds), branch, r, details, cert)


# -- X_N sets ------------------------------------------------------------------------------


@dataclass
class XNResult:
    X: ElementSet
    union_of_cosets: bool
    quotient_order: int


def x_n_set(G, N: Subgroup) -> XNResult:
    """``X_N = {x : (G/N)' = K_(xN)(G/N)}``, via ``|K_y(Q)| = |Cl_Q(y)|``."""
    G = as_subgroup(G)
    pres = G.parent
    q: QuotientMap = quotient(pres, N)
    Q = q.target
    tq = table_for(Q)
    Qd = derived_subgroup(Q)
    labels = tq.class_labels
    sizes = np.bincount(labels, minlength=tq.size)[labels]
    good = sizes == Qd.order
    ts = table_for(pres)
    allc = ts.all()
    img = q.image_codes(allc)
    X = allc[good[img]]
    xmask = ts.mask(X)
    closed = True
    # closed under right multiplication by generators of N means closed under N
    for gen in N.igs:
        if not xmask[ts.mul(X, pres.index_of(gen))].all():
            closed = False
            break
    return XNResult(ElementSet.from_codes(pres, X), closed, Q.order)


__all__ = [
    "DSubgroups",
    "ElementSet",
    "HallReport",
    "HondaReport",
    "Infeasible",
    "LemmaDReport",
    "ReplayResult",
    "TheoremAReport",
    "UnionResult",
    "WitnessCertificate",
    "WitnessSearchError",
    "XNResult",
    "bivector_matrix",
    "centralizer_index",
    "d_subgroups",
    "decomposable_rank_oracle",
    "find_case3_triple",
    "find_theorem_b_witness",
    "hall_congruence_check",
    "hall_hypotheses",
    "honda_power_check",
    "k_set",
    "kx_codes",
    "lemma_union_decomposition",
    "normal_maximal_in_derived",
    "random_hall_instances",
    "rank_mod_p",
    "replay_certificate",
    "theorem_a_verdict",
    "theorem_b_hypotheses",
    "union_hypotheses",
    "verify_lemma_D",
    "witness_hall_instances",
    "x_n_set",
]
