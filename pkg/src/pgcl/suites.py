"""Check suites: each runs one family of verifications on a group and returns a verdict.

Verdicts are ``PASS``, ``FAIL``, ``SKIPPED`` (enumeration infeasible under the
configured gates) and ``REJECTED`` (the group is outside the hypotheses of the
check).  Details are JSON-serialisable and deterministic for a fixed seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import commutators as cm
from .config import gates
from .constructions import FreeClass2, GroupRecipe, build_free_class2, digest, load_presentation
from .errors import GateExceeded, HypothesisError, PresentationError
from .pc import PcPresentation, check_consistency, confluence_check
from .series import (
    as_subgroup,
    cf_parameters,
    check_lemma_index,
    check_lemma_potent,
    check_power_map_epimorphism,
    check_remark_index,
    check_theorem_b_power_map,
    derived_subgroup,
    exponent,
    frattini,
    is_potent,
    is_powerful,
    is_uniserial_mod,
    lower_central,
    lower_central_series,
    nilpotency_class,
    normal_subgroups,
    omega,
    power_subgroup,
    rank,
)
from .subgroups import Subgroup, center, trivial_subgroup, whole_group
from .tables import table_for

PASS, FAIL, SKIPPED, REJECTED = "PASS", "FAIL", "SKIPPED", "REJECTED"

SUITES = (
    "consistency",
    "profile",
    "lemma-D",
    "hall",
    "theorem-a",
    "theorem-b",
    "union",
    "honda",
    "power-classes",
    "uniserial",
    "tower",
    "k-gap",
)


@dataclass
class CheckResult:
    name: str
    verdict: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self, timing: bool = False) -> dict:
        out = {"name": self.name, "verdict": self.verdict, "details": self.details}
        if timing:
            out["seconds"] = round(self.seconds, 3)
        return out


@dataclass
class GroupHandle:
    """A group under test together with how it was obtained."""

    label: str
    pres: PcPresentation
    recipe: GroupRecipe | None = None
    free: FreeClass2 | None = None
    path: str | None = None

    @property
    def digest(self) -> str:
        return digest(self.pres)


def resolve_group(spec: str, p: int | None = None, d: int | None = None) -> GroupHandle:
    """A recipe such as ``huppert(p=5)`` or a path to a presentation file."""
    path = Path(spec)
    if path.suffix in (".pc", ".txt") or path.exists():
        pres = load_presentation(path)
        return GroupHandle(str(path), pres, path=str(path))
    recipe = GroupRecipe.parse(spec)
    params = dict(recipe.params)
    if p is not None:
        params.setdefault("p", p)
    if d is not None and recipe.family == "free-class2":
        params.setdefault("d", d)
    recipe = GroupRecipe(recipe.family, tuple(sorted(params.items())))
    if recipe.family == "free-class2":
        fc = build_free_class2(recipe.get("p", 5), recipe.get("d", 3))
        return GroupHandle(str(recipe), fc.pres, recipe, fc)
    return GroupHandle(str(recipe), recipe.build(), recipe)


def _exps_list(v) -> list[int]:
    return [int(a) for a in v]


# -- individual suites ---------------------------------------------------------------


def suite_consistency(h: GroupHandle, seed: int = 0, samples: int = 1000) -> CheckResult:
    pres = h.pres
    res = check_consistency(pres)
    details = {"consistent": bool(res), "overlap": res.describe()}
    fails = confluence_check(pres, samples, seed)
    details["confluence_samples"] = samples
    details["confluence_failures"] = fails[:5]
    table_mismatch = 0
    if pres.order <= gates().enumerate:
        # the regular representation is built from the relations, not the collector
        table = table_for(pres)
        rng = np.random.default_rng(seed)
        a = rng.integers(0, pres.order, 500)
        b = rng.integers(0, pres.order, 500)
        tab = table.mul(a, b)
        for x, y, z in zip(a.tolist(), b.tolist(), tab.tolist()):
            if pres.index_of(pres.mul(pres.exps_of(x), pres.exps_of(y))) != z:
                table_mismatch += 1
        details["table_products_compared"] = 500
        details["table_mismatches"] = table_mismatch
    ok = bool(res) and not fails and not table_mismatch
    return CheckResult("consistency", PASS if ok else FAIL, details)


def group_profile(G) -> dict:
    G = as_subgroup(G)
    pres = G.parent
    Gd = derived_subgroup(G)
    prof = {
        "p": pres.p,
        "log_order": pres.n,
        "class": nilpotency_class(G),
        "derived_log_order": Gd.log_order,
        "derived_rank": rank(Gd),
        "derived_powerful": is_powerful(Gd),
        "lower_central_log_orders": [S.log_order for S in lower_central_series(G)],
    }
    try:
        prof["exponent"] = exponent(G)
    except GateExceeded:
        prof["exponent"] = None
    if prof["class"] >= 5:
        G2 = derived_subgroup(Gd)
        g5 = lower_central(G, 5)
        prof["second_derived_equals_gamma5"] = G2 == g5
        prof["second_derived_log_order"] = G2.log_order
    cf = cf_parameters(G)
    prof["cf_m"] = cf.m if cf else None
    prof["cf_degree"] = cf.degree if cf else None
    return prof


def suite_profile(h: GroupHandle, seed: int = 0) -> CheckResult:
    prof = group_profile(whole_group(h.pres))
    if h.recipe is None or h.recipe.family not in ("huppert", "huppert-semidirect"):
        return CheckResult("profile", PASS, prof)
    p = h.pres.p
    expected = {
        "log_order": 6,
        "exponent": p,
        "class": 5,
        "derived_rank": 3,
        "second_derived_equals_gamma5": True,
        "derived_powerful": False,
        "cf_m": 6,
    }
    mism = {k: {"expected": v, "found": prof.get(k)} for k, v in expected.items() if prof.get(k) != v}
    if prof.get("second_derived_log_order") == 0:
        mism["second_derived_nontrivial"] = {"expected": True, "found": False}
    prof["mismatches"] = mism
    return CheckResult("profile", FAIL if mism else PASS, prof)


def suite_lemma_d(h: GroupHandle, seed: int = 0) -> CheckResult:
    G = whole_group(h.pres)
    try:
        rep = cm.verify_lemma_D(G)
    except GateExceeded as exc:
        return CheckResult("lemma-D", SKIPPED, {"reason": str(exc)})
    except HypothesisError as exc:
        return CheckResult("lemma-D", REJECTED, {"reason": str(exc)})
    details = {"elements": rep.elements, "classes": rep.classes, "hyperplanes": rep.hyperplanes,
               "failures": rep.failures}
    return CheckResult("lemma-D", PASS if rep.passed else FAIL, details)


def suite_theorem_b(h: GroupHandle, seed: int = 0, experimental: bool = False) -> CheckResult:
    G = whole_group(h.pres)
    try:
        cert = cm.find_theorem_b_witness(G, experimental=experimental)
    except HypothesisError as exc:
        return CheckResult("theorem-b", REJECTED, {"reason": str(exc)})
    except GateExceeded as exc:
        return CheckResult("theorem-b", SKIPPED, {"reason": str(exc)})
    except cm.WitnessSearchError as exc:
        return CheckResult("theorem-b", FAIL, {"reason": str(exc)})
    final = cert.transcript[-1]["final"]
    details = {"witness": _exps_list(cert.witness), "d": cert.d, "kx_size": final["kx_size"],
               "derived_size": final["derived_size"], "certificate": cert.to_dict()}
    return CheckResult("theorem-b", PASS if final["equal"] else FAIL, details)


def hall_instances(h: GroupHandle, seed: int = 0, count: int = 100):
    G = whole_group(h.pres)
    inst = []
    sources = {"witness": 0, "random": 0}
    try:
        cert = cm.find_theorem_b_witness(G)
        w = cm.witness_hall_instances(cert, h.pres)
        inst += w
        sources["witness"] = len(w)
    except (HypothesisError, GateExceeded):
        pass
    r = cm.random_hall_instances(G, count, seed)
    inst += r
    sources["random"] = len(r)
    return inst, sources


def suite_hall(h: GroupHandle, seed: int = 0, count: int = 100) -> CheckResult:
    G = whole_group(h.pres)
    inst, sources = hall_instances(h, seed, count)
    if not inst:
        return CheckResult("hall", REJECTED, {"reason": "no hypothesis-satisfying instances"})
    failures = []
    levels = 0
    for x, g, L, N, k in inst:
        rep = cm.hall_congruence_check(G, x, g, L, N, k)
        levels += rep.levels
        if rep.status != "pass":
            failures.append({"x": _exps_list(x), "g": _exps_list(g), "k": k,
                             "status": rep.status, "why": rep.reason or rep.failures})
    details = {"instances": len(inst), "sources": sources, "congruence_levels": levels,
               "failures": failures[:5]}
    return CheckResult("hall", FAIL if failures else PASS, details)


def suite_theorem_a(h: GroupHandle, seed: int = 0, jobs: int = 1) -> CheckResult:
    G = whole_group(h.pres)
    try:
        if h.pres.p < 5:
            raise HypothesisError("Theorem A verdicts need p >= 5")
        r = rank(derived_subgroup(G))
        if r > 3:
            raise HypothesisError(f"rank(G') = {r} > 3")
        K = cm.k_set(G, jobs=jobs)
        rep = cm.theorem_a_verdict(G, kset=K)
    except HypothesisError as exc:
        return CheckResult("theorem-a", REJECTED, {"reason": str(exc)})
    except GateExceeded as exc:
        return CheckResult("theorem-a", SKIPPED, {"reason": str(exc)})
    details = {"holds": rep.holds, "branch": rep.branch, "derived_rank": rep.derived_rank}
    details.update(rep.details)
    if rep.certificate is not None:
        details["witness"] = _exps_list(rep.certificate.witness)
    return CheckResult("theorem-a", PASS if rep.holds else FAIL, details)


def suite_union(h: GroupHandle, seed: int = 0) -> CheckResult:
    G = whole_group(h.pres)
    try:
        x, u, v = cm.find_case3_triple(G)
        res = cm.lemma_union_decomposition(G, x, u, v)
    except HypothesisError as exc:
        return CheckResult("union", REJECTED, {"reason": str(exc)})
    except cm.WitnessSearchError as exc:
        return CheckResult("union", FAIL, {"reason": str(exc)})
    details = {
        "x": _exps_list(x), "u": _exps_list(u), "v": _exps_list(v),
        "subgroups": len(res.subgroups),
        "derived_orders": [Hd.order for _, Hd in res.subgroups],
        "target_order": res.target.order,
        "union_equal": res.union_equal,
        "derived_match": res.derived_match,
        "all_powerful": res.all_powerful,
        "all_proper": res.all_proper,
    }
    return CheckResult("union", PASS if res.passed else FAIL, details)


def suite_honda(h: GroupHandle, seed: int = 0, sample_size: int = 50) -> CheckResult:
    G = whole_group(h.pres)
    try:
        rep = cm.honda_power_check(G, sample_size, seed)
    except GateExceeded as exc:
        return CheckResult("honda", SKIPPED, {"reason": str(exc)})
    details = {"vacuous": rep.vacuous, "checked": rep.checked, "failures": rep.failures[:5]}
    return CheckResult("honda", PASS if rep.passed else FAIL, details)


def _structural_normals(G: Subgroup) -> list[Subgroup]:
    """Characteristic subgroups reachable without enumerating the lattice."""
    out = {}
    for S in lower_central_series(G):
        out[S.igs] = S
    Gd = derived_subgroup(G)
    for H in (G, Gd):
        k = 0
        while True:
            P = power_subgroup(H, k)
            out[P.igs] = P
            if P.is_trivial():
                break
            k += 1
    for S in (frattini(G), center(G), derived_subgroup(Gd)):
        out[S.igs] = S
    try:
        for i in (1, 2):
            S = omega(G, i)
            out[S.igs] = S
    except GateExceeded:
        pass
    return sorted(out.values(), key=lambda S: (S.log_order, S.igs))


def suite_power_classes(h: GroupHandle, seed: int = 0, max_normals: int = 40,
                        max_pairs: int = 200) -> CheckResult:
    G = whole_group(h.pres)
    if h.pres.order > gates().table:
        return CheckResult("power-classes", SKIPPED, {"reason": "above the table gate"})
    rng = np.random.default_rng(seed)
    normals = _structural_normals(G)
    lattice = "characteristic subgroups"
    try:
        everything = normal_subgroups(G, limit=400)
        lattice = "all normal subgroups"
        if len(everything) > max_normals:
            # keep the characteristic ones and a seeded sample of the rest
            have = {S.igs for S in normals}
            rest = [S for S in everything if S.igs not in have]
            pick = np.sort(rng.choice(len(rest), max(0, max_normals - len(normals)), replace=False))
            normals = sorted(normals + [rest[i] for i in pick], key=lambda S: (S.log_order, S.igs))
            lattice = f"sample of {len(everything)} normal subgroups"
        else:
            normals = everything
    except GateExceeded:
        pass
    pairs = [(N, L) for L in normals for N in normals if N <= L]
    if len(pairs) > max_pairs:
        idx = np.sort(rng.choice(len(pairs), max_pairs, replace=False))
        pairs = [pairs[i] for i in idx]
    failures: list[str] = []
    counts = {"epimorphism": 0, "remark_index": 0, "lemma_index": 0, "lemma_potent": 0,
              "theorem_b_power_map": 0}
    for H in normals:
        if not H.is_trivial() and is_powerful(H):
            counts["epimorphism"] += 1
            failures += [f"power map on {H!r}: {f}" for f in check_power_map_epimorphism(H)]
    if is_powerful(G):
        Gp = power_subgroup(G, 1)
        for N, L in pairs:
            if Gp <= N:
                counts["remark_index"] += 1
                failures += check_remark_index(G, N, L)
    if h.pres.p > 2 and is_potent(G):
        for N, L in pairs:
            counts["lemma_index"] += 1
            failures += check_lemma_index(G, N, L)
        counts["lemma_potent"] = len(normals)
        failures += check_lemma_potent(G, normals)
    d, why = cm.theorem_b_hypotheses(G)
    if why is None and d >= 1:
        counts["theorem_b_power_map"] = 1
        failures += check_theorem_b_power_map(G)
    details = {"lattice": lattice, "normals": len(normals), "pairs": len(pairs),
               "instances": counts, "failures": failures[:5]}
    if not any(counts.values()):
        return CheckResult("power-classes", REJECTED, {"reason": "no qualifying instance", **details})
    return CheckResult("power-classes", FAIL if failures else PASS, details)


def suite_uniserial(h: GroupHandle, seed: int = 0) -> CheckResult:
    """Cross-check the chain-based uniseriality test against the normal-subgroup lattice.

    The action on ``G'/(G')^p`` is uniserial iff the normal subgroups between
    ``(G')^p`` and ``G'`` are totally ordered.
    """
    G = whole_group(h.pres)
    Gd = derived_subgroup(G)
    Gdp = power_subgroup(Gd, 1)
    flag, series = is_uniserial_mod(G, Gd, Gdp)
    details = {"uniserial": flag, "chain_log_orders": [S.log_order for S in series]}
    try:
        between = normal_subgroups(G, limit=2000, within=Gd, above=Gdp)
    except GateExceeded as exc:
        details["reason"] = str(exc)
        return CheckResult("uniserial", SKIPPED, details)
    chain = all(A <= B or B <= A for A in between for B in between)
    details["normal_subgroups_between"] = len(between)
    details["lattice_is_chain"] = chain
    return CheckResult("uniserial", PASS if chain == flag else FAIL, details)


def suite_tower(h: GroupHandle, seed: int = 0) -> CheckResult:
    G = whole_group(h.pres)
    if h.pres.order > gates().enumerate:
        return CheckResult("tower", SKIPPED, {"reason": "above the enumeration gate"})
    tower = [S for S in lower_central_series(G)[1:]]
    if not tower or not tower[-1].is_trivial():
        tower.append(trivial_subgroup(h.pres))
    results = []
    failures = []
    XG = cm.x_n_set(G, G)
    if len(XG.X) != h.pres.order:
        failures.append("X_G != G")
    prev = None
    for N in tower:
        r = cm.x_n_set(G, N)
        results.append({"N_log_order": N.log_order, "X_size": len(r.X), "union_of_cosets": r.union_of_cosets})
        if not r.union_of_cosets:
            failures.append(f"X_N is not a union of cosets for |N| = p^{N.log_order}")
        if prev is not None and not r.X.issubset(prev):
            failures.append(f"monotonicity fails at |N| = p^{N.log_order}")
        prev = r.X
    return CheckResult("tower", FAIL if failures else PASS, {"tower": results, "failures": failures})


def _gap_candidate(fc: FreeClass2):
    pres = fc.pres
    v = (0,) * pres.n
    for i in range(0, fc.d - 1, 2):
        v = pres.mul(v, pres.comm(pres._unit(i), pres._unit(i + 1)))
    return v


def suite_k_gap(h: GroupHandle, seed: int = 0, jobs: int = 1) -> CheckResult:
    """Look for an element of ``G'`` that is not a commutator."""
    G = whole_group(h.pres)
    pres = h.pres
    details: dict = {}
    cand = None
    oracle_says = None
    if h.free is not None:
        cand = _gap_candidate(h.free)
        oracle_says = not cm.decomposable_rank_oracle(h.free, cand)
        details["candidate"] = _exps_list(cand)
        details["candidate_form_rank"] = cm.rank_mod_p(cm.bivector_matrix(h.free, cand), pres.p)
        details["oracle_non_commutator"] = oracle_says
    try:
        K = cm.k_set(G, jobs=jobs)
    except GateExceeded as exc:
        details["enumeration"] = f"SKIPPED: {exc}"
        if oracle_says is None:
            return CheckResult("k-gap", SKIPPED, details)
        details["method"] = "rank-oracle"
        return CheckResult("k-gap", PASS if oracle_says else REJECTED, details)
    Gd = derived_subgroup(G)
    gd_codes = Gd.codes() if pres.order <= gates().table else np.array(
        sorted(pres.index_of(v) for v in Gd.iter_exps()), dtype=np.int64)
    gap = np.setdiff1d(gd_codes, K.codes)
    details["enumeration"] = "complete"
    details["k_size"] = len(K)
    details["derived_size"] = int(gd_codes.size)
    details["gap_size"] = int(gap.size)
    if h.free is not None:
        kmask = np.isin(gd_codes, K.codes)
        oracle = np.array([cm.decomposable_rank_oracle(h.free, pres.exps_of(int(c))) for c in gd_codes])
        disagree = int((oracle != kmask).sum())
        details["oracle_disagreements"] = disagree
        details["method"] = "enumeration + rank-oracle"
        if disagree or oracle_says != (pres.index_of(cand) in set(gap.tolist())):
            return CheckResult("k-gap", FAIL, details)
    else:
        details["method"] = "enumeration"
    if gap.size == 0:
        details["reason"] = "G' = K(G): no gap"
        return CheckResult("k-gap", REJECTED, details)
    details["witness"] = _exps_list(cand if cand is not None and oracle_says else pres.exps_of(int(gap[0])))
    return CheckResult("k-gap", PASS, details)


RUNNERS = {
    "consistency": suite_consistency,
    "profile": suite_profile,
    "lemma-D": suite_lemma_d,
    "hall": suite_hall,
    "theorem-a": suite_theorem_a,
    "theorem-b": suite_theorem_b,
    "union": suite_union,
    "honda": suite_honda,
    "power-classes": suite_power_classes,
    "uniserial": suite_uniserial,
    "tower": suite_tower,
    "k-gap": suite_k_gap,
}

_TAKES_JOBS = {"theorem-a", "k-gap"}


def run_suite(h: GroupHandle, name: str, seed: int = 0, jobs: int = 1) -> CheckResult:
    if name not in RUNNERS:
        raise ValueError(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
    t = time.perf_counter()
    kwargs = {"seed": seed}
    if name in _TAKES_JOBS:
        kwargs["jobs"] = jobs
    try:
        res = RUNNERS[name](h, **kwargs)
    except GateExceeded as exc:
        res = CheckResult(name, SKIPPED, {"reason": str(exc)})
    res.seconds = time.perf_counter() - t
    return res


def overall_verdict(verdicts: list[str]) -> str:
    """``FAIL`` if any check failed; ``PASS`` if at least one passed; else ``SKIPPED`` or ``REJECTED``."""
    if FAIL in verdicts:
        return FAIL
    if PASS in verdicts or not verdicts:
        return PASS
    if SKIPPED in verdicts:
        return SKIPPED
    return REJECTED


DEFAULT_CORPUS = (
    ("elementary-abelian(p={p},n=3)", ("consistency", "theorem-b")),
    ("heisenberg(p={p})", ("consistency", "lemma-D", "theorem-a", "theorem-b", "honda",
                           "power-classes", "uniserial")),
    ("extraspecial(e=1,p={p})", ("consistency", "lemma-D", "theorem-a", "theorem-b", "power-classes")),
    ("extraspecial(e=2,p={p})", ("consistency", "lemma-D", "theorem-a", "theorem-b", "honda",
                                 "power-classes", "uniserial")),
    ("free-class2(d=3,p={p})", ("consistency", "lemma-D", "theorem-a", "theorem-b", "union", "honda",
                                "power-classes", "uniserial")),
    ("free-class2(d=4,p={p})", ("consistency", "theorem-a", "k-gap")),
    ("free-class2(d=6,p={p})", ("consistency", "theorem-a", "lemma-D", "k-gap")),
    ("huppert(p={p})", ("consistency", "profile", "lemma-D", "theorem-a", "theorem-b", "hall", "honda",
                        "power-classes", "uniserial", "tower")),
    ("huppert-semidirect(p={p})", ("consistency", "profile", "lemma-D")),
    ("scalar-semidirect(a=2,b=1,p={p})", ("consistency", "lemma-D", "theorem-a", "honda",
                                          "power-classes")),
    ("scalar-semidirect(a=3,b=2,p={p})", ("consistency", "hall", "power-classes")),
    ("cyclic-derived(p={p})", ("consistency", "lemma-D", "theorem-a", "theorem-b", "hall", "honda",
                               "power-classes")),
)


def default_corpus(p: int = 5) -> list[tuple[str, tuple[str, ...]]]:
    return [(spec.format(p=p), suites) for spec, suites in DEFAULT_CORPUS]


def check_group(spec: str, suites, seed: int = 0, jobs: int = 1, p: int | None = None,
                d: int | None = None) -> tuple[GroupHandle | None, list[CheckResult]]:
    """Resolve ``spec`` and run ``suites``; a parse or consistency error becomes a single FAIL."""
    try:
        h = resolve_group(spec, p, d)
    except (PresentationError, OSError) as exc:
        return None, [CheckResult("consistency", FAIL, {"group": spec, "error": str(exc)})]
    return h, [run_suite(h, s, seed, jobs) for s in suites]
