import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgcl.constructions import build_heisenberg, build_huppert_example
from pgcl.pc import (
    InconsistentPresentationError,
    MalformedPresentationError,
    PcPresentation,
    check_consistency,
    collect,
    commutator,
    confluence_check,
    conjugate,
    hall_petrescu_defect,
    inv,
    mul,
    power,
)
from pgcl.series import derived_subgroup
from pgcl.subgroups import subgroup_closure


def elements_of(pres):
    return st.lists(st.integers(0, pres.p - 1), min_size=pres.n, max_size=pres.n).map(pres.element)


HEIS = build_heisenberg(5)
_HUP = build_huppert_example(5)


def test_abelian_presentation_is_consistent():
    for n in range(0, 5):
        assert check_consistency(PcPresentation(5, n))


def test_heisenberg_consistent_and_order(heis5):
    assert check_consistency(heis5)
    assert heis5.order == 125


def test_left_supported_relation_is_malformed():
    # g2^5 = g1 points left of g2
    with pytest.raises(MalformedPresentationError):
        PcPresentation(5, 2, powers={0: [(1, 1)], 1: [(0, 1)]})


def test_planted_inconsistency_is_detected():
    with pytest.raises(InconsistentPresentationError) as exc:
        PcPresentation(5, 3, powers={0: [(1, 1)]}, comms={(1, 0): [(2, 1)]})
    res = exc.value.result
    assert not res.consistent and res.test


def test_unverified_presentation_reports_first_overlap():
    pres = PcPresentation(5, 3, powers={0: [(1, 1)]}, comms={(1, 0): [(2, 1)]}, verify=False)
    res = check_consistency(pres)
    assert not res
    assert "g1" in res.describe()


def test_collect_examples(heis5):
    assert collect(heis5, []).exps == (0, 0, 0)
    assert collect(heis5, [(1, 1), (0, 1)]).exps == (1, 1, 1)
    assert collect(heis5, [(0, 4), (0, 1)]).is_identity


def test_commutator_examples(heis5):
    g1, g2, g3 = heis5.gens()
    assert commutator(g2, g1) == g3
    assert commutator(g1, g1).is_identity
    assert commutator(g1, heis5.identity).is_identity


def test_heisenberg_exponent_p(heis5):
    assert power(heis5.element((1, 1, 0)), 5).is_identity


def test_hall_petrescu_examples(heis5, huppert5):
    g1, g2, _ = heis5.gens()
    assert hall_petrescu_defect(g1, g2, 5).is_identity
    assert hall_petrescu_defect(g1, g1, 7).is_identity
    x, y = huppert5.gen(3), huppert5.gen(1)  # a1, b1
    z = hall_petrescu_defect(x, y, 5)
    assert derived_subgroup(subgroup_closure([x, y])).contains(z)


@settings(max_examples=60, deadline=None)
@given(elements_of(HEIS), elements_of(HEIS), elements_of(HEIS))
def test_group_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert (mul(a, inv(a))).is_identity
    assert power(a, 125).is_identity
    assert conjugate(a, b) == mul(a, commutator(a, b))
    assert commutator(a, b) == inv(commutator(b, a))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 5 ** 6 - 1), st.integers(0, 5 ** 6 - 1), st.integers(-30, 30))
def test_power_laws_huppert(a, b, k):
    G = _HUP
    x = G.element(G.exps_of(a))
    assert power(x, k) * power(x, -k) == G.identity
    assert power(x, k + 1) == power(x, k) * x


def test_confluence_on_corpus(heis5, huppert5, f3):
    for pres in (heis5, huppert5, f3.pres):
        assert confluence_check(pres, 300, seed=3) == []


def test_multiplication_table_is_a_group_of_order_pn(heis5):
    elems = list(heis5.elements())
    assert len(set(elems)) == heis5.order
    # closure and identity/inverses by brute force
    es = set(elems)
    for a, b in itertools.product(elems[:40], elems):
        assert a * b in es
    for a in elems:
        assert (a * ~a).is_identity and (~a * a).is_identity


def test_mixed_presentations_rejected(heis5, huppert5):
    with pytest.raises(ValueError):
        heis5.gen(0) * huppert5.gen(0)


def test_random_words_reduce_like_products(heis5):
    rng = np.random.default_rng(0)
    for _ in range(50):
        w = [(int(rng.integers(3)), int(rng.integers(-9, 10))) for _ in range(6)]
        v = heis5.identity
        for g, e in w:
            v = v * heis5.gen(g) ** e
        assert collect(heis5, w) == v
