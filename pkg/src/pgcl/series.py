"""Characteristic series and classification predicates.

Power structure uses two routes.  When the nilpotency class of ``H`` is less
than ``p`` the group is regular, so ``H^(p^k)`` is the normal closure of the
``p^k``-th powers of a generating set and the exponent is the largest
generator order.  Otherwise both are read off the regular representation,
which is gated by order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .config import gates
from .errors import GateExceeded, HypothesisError
from .pc import PcPresentation
from .subgroups import (
    Section,
    Subgroup,
    chief_chain,
    commutator_subgroup,
    condition_subgroup,
    is_normal,
    normal_closure,
    subgroup_from_codes,
    trivial_subgroup,
    whole_group,
)
from .tables import table_for


def as_subgroup(G) -> Subgroup:
    if isinstance(G, Subgroup):
        return G
    if isinstance(G, PcPresentation):
        return whole_group(G)
    raise TypeError(f"expected a Subgroup or PcPresentation, got {type(G).__name__}")


@dataclass(frozen=True)
class NormalSeries:
    """Descending series of subgroups of a common parent."""

    terms: tuple[Subgroup, ...]

    def __post_init__(self):
        for a, b in zip(self.terms, self.terms[1:]):
            if not b <= a:
                raise ValueError("series terms must descend")

    def __len__(self):
        return len(self.terms)

    def __iter__(self) -> Iterator[Subgroup]:
        return iter(self.terms)

    def __getitem__(self, i):
        return self.terms[i]

    @property
    def factor_log_orders(self) -> tuple[int, ...]:
        return tuple(a.log_order - b.log_order for a, b in zip(self.terms, self.terms[1:]))

    @property
    def steps(self) -> int:
        return max(len(self.terms) - 1, 0)

    def chief_flags(self, G: Subgroup | None = None) -> tuple[bool, ...]:
        """Factor of order ``p`` with both ends normal in ``G`` (default: the parent)."""
        if not self.terms:
            return ()
        G = G or whole_group(self.terms[0].parent)
        normal = [is_normal(t, G) for t in self.terms]
        return tuple(
            f == 1 and normal[k] and normal[k + 1]
            for k, f in enumerate(self.factor_log_orders))


# -- basic series ----------------------------------------------------------------


def derived_subgroup(H) -> Subgroup:
    H = as_subgroup(H)
    return commutator_subgroup(H, H)


def lower_central_series(G) -> list[Subgroup]:
    """``[gamma_1, gamma_2, ..]`` ending with the first trivial term."""
    G = as_subgroup(G)
    out = [G]
    while not out[-1].is_trivial():
        nxt = commutator_subgroup(out[-1], G)
        if nxt == out[-1]:
            raise RuntimeError("lower central series stabilised above 1")
        out.append(nxt)
    return out


def lower_central(G, i: int) -> Subgroup:
    """``gamma_i(G)`` (``gamma_1 = G``)."""
    if i < 1:
        raise ValueError("lower central terms are indexed from 1")
    series = lower_central_series(G)
    return series[i - 1] if i <= len(series) else series[-1]


def nilpotency_class(G) -> int:
    return len(lower_central_series(G)) - 1


def _table_available(pres: PcPresentation) -> bool:
    return pres.order <= gates().table


def _generated_by_codes(pres: PcPresentation, codes: np.ndarray) -> Subgroup:
    """Subgroup generated by a set of element codes."""
    table = table_for(pres)
    codes = np.unique(np.asarray(codes, dtype=np.int64))
    H = trivial_subgroup(pres)
    while True:
        mask = table.mask(H.codes(table))
        missing = codes[~mask[codes]]
        if missing.size == 0:
            return H
        H = Subgroup(pres, list(H.igs) + [pres.exps_of(int(missing[0]))])


def power_subgroup(H, k: int = 1) -> Subgroup:
    """``H^(p^k)``, the subgroup generated by all ``p^k``-th powers."""
    H = as_subgroup(H)
    pres = H.parent
    if k <= 0:
        return H
    q = pres.p ** k
    if nilpotency_class(H) < pres.p:
        return normal_closure([pres.pow(l, q) for l in H.igs], H)
    if not _table_available(pres):
        raise GateExceeded(f"power subgroup of a class >= p group of order {pres.p}^{pres.n}")
    table = table_for(pres)
    return _generated_by_codes(pres, table.pow(H.codes(table), q))


def frattini(H) -> Subgroup:
    """``Phi(H) = H' H^p``."""
    H = as_subgroup(H)
    pres = H.parent
    D = derived_subgroup(H)
    return Subgroup(pres, list(D.igs) + [pres.pow(l, pres.p) for l in H.igs])


def rank(H) -> int:
    """Frattini rank ``log_p |H : Phi(H)|`` (minimal number of generators)."""
    H = as_subgroup(H)
    return H.log_order - frattini(H).log_order


def _element_codes(H: Subgroup) -> np.ndarray:
    if not _table_available(H.parent):
        raise GateExceeded(f"enumeration of a group of order {H.parent.p}^{H.parent.n}")
    return H.codes()


def exponent(H) -> int:
    H = as_subgroup(H)
    pres = H.parent
    if H.is_trivial():
        return 1
    if nilpotency_class(H) < pres.p:
        return max(pres.element_order(l) for l in H.igs)
    return int(table_for(pres).orders(_element_codes(H)).max())


def omega(H, i: int = 1) -> Subgroup:
    """``Omega_i(H)``, generated by the elements of order dividing ``p^i``."""
    H = as_subgroup(H)
    pres = H.parent
    codes = _element_codes(H)
    orders = table_for(pres).orders(codes)
    return _generated_by_codes(pres, codes[orders <= pres.p ** i])


# -- predicates --------------------------------------------------------------------


def is_abelian(H) -> bool:
    H = as_subgroup(H)
    pres = H.parent
    return all(not any(pres.comm(a, b)) for k, a in enumerate(H.igs) for b in H.igs[k + 1:])


def is_powerful(H) -> bool:
    H = as_subgroup(H)
    k = 2 if H.parent.p == 2 else 1
    return derived_subgroup(H) <= power_subgroup(H, k)


def is_potent(G) -> bool:
    G = as_subgroup(G)
    p = G.parent.p
    if p == 2:
        return derived_subgroup(G) <= power_subgroup(G, 2)
    return lower_central(G, p - 1) <= power_subgroup(G, 1)


@dataclass(frozen=True)
class PowerAbelian:
    """The three power-abelian conditions, each over all ``i`` up to the exponent.

    ``complete`` is false when the group exceeded the enumeration gate; the
    conditions are then ``None`` (not evaluated).
    """

    power_sets: bool | None
    omega_sets: bool | None
    index_equal: bool | None
    complete: bool = True
    failures: tuple[str, ...] = ()

    def __iter__(self):
        return iter((self.power_sets, self.omega_sets, self.index_equal))

    def __bool__(self):
        return bool(self.power_sets and self.omega_sets and self.index_equal)


def is_power_abelian(H) -> PowerAbelian:
    H = as_subgroup(H)
    pres = H.parent
    if H.order > gates().enumerate or not _table_available(pres):
        return PowerAbelian(None, None, None, complete=False,
                            failures=(f"|H| = {pres.p}^{H.log_order} above enumeration gate",))
    table = table_for(pres)
    codes = H.codes(table)
    orders = table.orders(codes)
    top = int(round(np.log(orders.max()) / np.log(pres.p))) if codes.size else 0
    ok1 = ok2 = ok3 = True
    failures = []
    for i in range(top + 1):
        q = pres.p ** i
        pw = np.unique(table.pow(codes, q))
        Hq = power_subgroup(H, i)
        if not np.array_equal(pw, Hq.codes(table)):
            ok1 = False
            failures.append(f"H^(p^{i}) is not the set of p^{i}-th powers")
        small = codes[orders <= q]
        Om = _generated_by_codes(pres, small)
        if Om.order != small.size:
            ok2 = False
            failures.append(f"Omega_{i} is not the set of elements of order <= p^{i}")
        if H.log_order - Hq.log_order != Om.log_order:
            ok3 = False
            failures.append(f"|H : H^(p^{i})| != |Omega_{i}(H)|")
    return PowerAbelian(ok1, ok2, ok3, True, tuple(failures))


def commutator_chain(G, N, M) -> NormalSeries:
    """``N M >= [N, G] M >= [N, G, G] M >= ..`` down to the first repeat."""
    G, N, M = as_subgroup(G), as_subgroup(N), as_subgroup(M)
    pres = G.parent
    X = Subgroup(pres, list(N.igs) + list(M.igs))
    terms = [X]
    while True:
        Y = Subgroup(pres, list(commutator_subgroup(X, G).igs) + list(M.igs))
        if Y == X:
            break
        terms.append(Y)
        X = Y
    return NormalSeries(tuple(terms))


def is_uniserial_mod(G, N, M) -> tuple[bool, NormalSeries]:
    """Whether ``[N, G, .., G] M`` descends to ``M`` in steps of order at most ``p``."""
    G, N, M = as_subgroup(G), as_subgroup(N), as_subgroup(M)
    if not M <= N:
        raise HypothesisError("is_uniserial_mod requires M <= N")
    if not (is_normal(N, G) and is_normal(M, G)):
        raise HypothesisError("is_uniserial_mod requires N and M normal in G")
    chain = commutator_chain(G, N, M)
    ok = chain[-1] == M and all(f <= 1 for f in chain.factor_log_orders)
    return ok, chain


def two_step_centralizer(G, i: int, modulus=None) -> Subgroup:
    """``C_G(gamma_i(G) M / gamma_(i+2)(G) M)`` with ``M`` the given modulus (default 1)."""
    G = as_subgroup(G)
    pres = G.parent
    M = as_subgroup(modulus) if modulus is not None else trivial_subgroup(pres)
    top = Subgroup(pres, list(lower_central(G, i).igs) + list(M.igs))
    bottom = Subgroup(pres, list(lower_central(G, i + 2).igs) + list(M.igs))
    return condition_subgroup(G, top, bottom)


@dataclass(frozen=True)
class CFParameters:
    m: int
    degree: int | None
    series: tuple[int, ...] = field(default=())


def cf_parameters(G) -> CFParameters | None:
    """``(m, degree of commutativity)`` when ``G`` is a CF(m, p)-group, else ``None``.

    The degree is the largest ``k <= m - 2`` with ``[G_i, G_j] <= G_(i+j+k)``
    for all ``i, j >= 1``, where ``G_1 = C_G(gamma_2/gamma_4)`` and
    ``G_i = gamma_i`` for ``i >= 2``; ``None`` if even ``k = 0`` fails.
    """
    G = as_subgroup(G)
    pres = G.parent
    lcs = lower_central_series(G)
    c = len(lcs) - 1
    if c < 2:
        return None
    ok, _ = is_uniserial_mod(G, lcs[1], trivial_subgroup(pres))
    if not ok:
        return None
    m = c + 1
    one = trivial_subgroup(pres)

    def term(i: int) -> Subgroup:
        if i == 1:
            return condition_subgroup(G, lcs[1], lcs[3] if len(lcs) > 3 else one)
        return lcs[i - 1] if i - 1 < len(lcs) else one

    terms = {i: term(i) for i in range(1, m)}
    degree = None
    for k in range(m - 1):
        good = True
        for i in range(1, m):
            for j in range(i, m):
                target = terms.get(i + j + k, one)
                if not commutator_subgroup(terms[i], terms[j]) <= target:
                    good = False
                    break
            if not good:
                break
        if not good:
            break
        degree = k
    return CFParameters(m, degree, tuple(t.log_order for t in lcs))


def chief_refinement(G, L, N) -> NormalSeries:
    """Series from ``L`` to ``N`` through normal subgroups of ``G``, factors of order p."""
    return NormalSeries(tuple(chief_chain(as_subgroup(G), as_subgroup(L), as_subgroup(N))))


# -- power-class property checks ----------------------------------------------------
#
# Each returns a list of failure strings (empty means the property holds).


def _section_map_check(src_top: Subgroup, src_bot: Subgroup, dst_top: Subgroup,
                       dst_bot: Subgroup, q: int, label: str) -> list[str]:
    """Is ``g src_bot -> g^q dst_bot`` a well defined epimorphism ``src_top/src_bot -> dst_top/dst_bot``?

    Checked extensionally on the regular representation.
    """
    pres = src_top.parent
    table = table_for(pres)
    a = src_top.codes(table)
    img = table.pow(a, q)
    dmask_top = table.mask(dst_top.codes(table))
    if not dmask_top[img].all():
        return [f"{label}: image leaves the target"]
    dsec = Section(dst_top, dst_bot)
    ssec = Section(src_top, src_bot)
    # coset labels of source and image
    sc = ssec.coords_codes(table, a)
    dc = dsec.coords_codes(table, img)
    wts = lambda m: pres.p ** np.arange(m.shape[1] - 1, -1, -1, dtype=np.int64)
    skey, dkey = sc @ wts(sc), dc @ wts(dc)
    order = np.argsort(skey, kind="stable")
    skey, dkey, sc, dc = skey[order], dkey[order], sc[order], dc[order]
    starts = np.flatnonzero(np.r_[True, skey[1:] != skey[:-1]])
    if not np.array_equal(dkey, np.repeat(dkey[starts], np.diff(np.r_[starts, skey.size]))):
        return [f"{label}: power map not constant on cosets"]
    sdig = {tuple(sc[i].tolist()): tuple(dc[i].tolist()) for i in starts.tolist()}
    out = []
    # homomorphism: f(xt) = f(x) f(t) mod dst_bot for every coset x and generator t;
    # induction on word length in the generators gives f(xy) = f(x) f(y)
    reps = {sc: ssec.lift(sc) for sc in sdig}
    keys = list(reps)
    for x in keys:
        for t in ssec.top:
            lhs = dsec.coords(pres.pow(pres.mul(reps[x], t), q))
            rhs = dsec.coords(pres.mul(pres.pow(reps[x], q), pres.pow(t, q)))
            if lhs != rhs:
                return [f"{label}: power map not a homomorphism"]
    if len(set(sdig.values())) != pres.p ** dsec.dim:
        out.append(f"{label}: power map not surjective")
    return out


def check_power_map_epimorphism(G) -> list[str]:
    """Powerful groups: ``G^(p^(i-1))/G^(p^i) -> G^(p^i)/G^(p^(i+1))`` is an epimorphism."""
    G = as_subgroup(G)
    p = G.parent.p
    failures = []
    terms = [G]
    while not terms[-1].is_trivial():
        terms.append(power_subgroup(G, len(terms)))
    terms.append(terms[-1])
    for i in range(1, len(terms) - 1):
        failures += _section_map_check(terms[i - 1], terms[i], terms[i], terms[i + 1], p, f"i={i}")
    return failures


def check_remark_index(G, N, L) -> list[str]:
    """Powerful ``G`` and ``G^p <= N <= L``: ``|L^(p^i) : N^(p^i)| <= |L : N|`` and generators map."""
    G, N, L = as_subgroup(G), as_subgroup(N), as_subgroup(L)
    pres = G.parent
    failures = []
    base = L.log_order - N.log_order
    i = 1
    while True:
        Li, Ni = power_subgroup(L, i), power_subgroup(N, i)
        if not Ni <= Li:
            failures.append(f"i={i}: N^(p^i) not in L^(p^i)")
            break
        if Li.log_order - Ni.log_order > base:
            failures.append(f"i={i}: |L^(p^i):N^(p^i)| > |L:N|")
        if N.log_order - Ni.log_order > L.log_order - Li.log_order:
            failures.append(f"i={i}: |N:N^(p^i)| > |L:L^(p^i)|")
        # L^(p^i)/N^(p^i) generated by p^i-th powers of generators of L/N
        sec = Section(L, N)
        gens = [pres.pow(t, pres.p ** i) for t in sec.top] + list(Ni.igs)
        if Subgroup(pres, gens) != Li:
            failures.append(f"i={i}: L^(p^i) not generated by powers of generators mod N^(p^i)")
        if Li.is_trivial():
            break
        i += 1
    return failures


def check_lemma_index(G, N, L) -> list[str]:
    """Potent ``G``, normal ``N <= L``: ``|N : N^(p^i)| <= |L : L^(p^i)|`` for all ``i``."""
    N, L = as_subgroup(N), as_subgroup(L)
    failures = []
    i = 1
    while True:
        Ni, Li = power_subgroup(N, i), power_subgroup(L, i)
        if N.log_order - Ni.log_order > L.log_order - Li.log_order:
            failures.append(f"i={i}: |N:N^(p^i)| > |L:L^(p^i)|")
        if Li.log_order - Ni.log_order > L.log_order - N.log_order:
            failures.append(f"i={i}: |L^(p^i):N^(p^i)| > |L:N|")
        if Li.is_trivial():
            break
        i += 1
    return failures


def check_lemma_potent(G, normals: list[Subgroup]) -> list[str]:
    """Potent ``G`` (p odd): each normal ``N`` is power abelian, and powerful if ``N <= G^p``."""
    G = as_subgroup(G)
    Gp = power_subgroup(G, 1)
    failures = []
    for N in normals:
        pa = is_power_abelian(N)
        if pa.complete and not pa:
            failures.append(f"{N!r} not power abelian: {', '.join(pa.failures)}")
        if N <= Gp and not is_powerful(N):
            failures.append(f"{N!r} <= G^p but not powerful")
    return failures


def theorem_b_chain(G) -> list[Subgroup]:
    """``G_i = gamma_i(G) (G')^p`` for ``i = 2, 3, ..`` down to ``(G')^p``."""
    G = as_subgroup(G)
    pres = G.parent
    D = derived_subgroup(G)
    Dp = power_subgroup(D, 1)
    out = []
    i = 2
    while True:
        Gi = Subgroup(pres, list(lower_central(G, i).igs) + list(Dp.igs))
        out.append(Gi)
        if Gi == Dp:
            return out
        i += 1


def check_theorem_b_power_map(G) -> list[str]:
    """``G_i/G_(i+1) -> G_i^p/G_(i+1)^p``, ``g -> g^p``, is an epimorphism for ``2 <= i <= d+1``."""
    G = as_subgroup(G)
    chain = theorem_b_chain(G)
    failures = []
    for k in range(len(chain) - 1):
        Gi, Gn = chain[k], chain[k + 1]
        failures += _section_map_check(Gi, Gn, power_subgroup(Gi, 1), power_subgroup(Gn, 1),
                                       G.parent.p, f"G_{k + 2}")
    return failures


def normal_subgroups(G, limit: int | None = None, within=None, above=None) -> list[Subgroup]:
    """All normal subgroups of ``G`` (extensional; small groups only).

    With ``within`` and ``above`` (both normal in ``G``) only those ``N`` with
    ``above <= N <= within`` are produced.

    Grows subgroups by adjoining normal closures of single elements, starting
    from the trivial group.  Raises :class:`GateExceeded` when ``G`` is above
    the enumeration gate or has more than ``limit`` normal subgroups.
    """
    G = as_subgroup(G)
    pres = G.parent
    if G.order > gates().enumerate:
        raise GateExceeded("normal subgroup enumeration above the enumeration gate")
    table = table_for(pres)
    # normal closures of class representatives are the cyclic-normal building blocks
    labels = table.class_labels
    W = G if within is None else as_subgroup(within)
    gcodes = W.codes(table)
    reps = np.unique(labels[gcodes])
    blocks = {}
    for r in reps.tolist():
        N = normal_closure([pres.exps_of(r)], G)
        blocks[N.igs] = N
    base = trivial_subgroup(pres) if above is None else as_subgroup(above)
    found = {base.igs: base}
    frontier = list(found.values())
    block_list = list(blocks.values())
    while frontier:
        nxt = []
        for N in frontier:
            for B in block_list:
                if B <= N:
                    continue
                M = Subgroup(pres, list(N.igs) + list(B.igs))
                if M.igs not in found:
                    found[M.igs] = M
                    nxt.append(M)
                    if limit is not None and len(found) > limit:
                        raise GateExceeded(f"more than {limit} normal subgroups")
        frontier = nxt
    return sorted(found.values(), key=lambda s: (s.log_order, s.igs))


__all__ = [
    "CFParameters",
    "NormalSeries",
    "PowerAbelian",
    "as_subgroup",
    "cf_parameters",
    "check_lemma_index",
    "check_lemma_potent",
    "check_power_map_epimorphism",
    "check_remark_index",
    "check_theorem_b_power_map",
    "chief_refinement",
    "commutator_chain",
    "derived_subgroup",
    "exponent",
    "frattini",
    "is_abelian",
    "is_potent",
    "is_power_abelian",
    "is_powerful",
    "is_uniserial_mod",
    "lower_central",
    "lower_central_series",
    "nilpotency_class",
    "normal_subgroups",
    "omega",
    "power_subgroup",
    "rank",
    "theorem_b_chain",
    "two_step_centralizer",
]
