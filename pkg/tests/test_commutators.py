import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pgcl.commutators import (
    ElementSet,
    WitnessCertificate,
    centralizer_index,
    d_subgroups,
    decomposable_rank_oracle,
    find_case3_triple,
    find_theorem_b_witness,
    hall_congruence_check,
    honda_power_check,
    k_set,
    kx_codes,
    lemma_union_decomposition,
    normal_maximal_in_derived,
    random_hall_instances,
    rank_mod_p,
    replay_certificate,
    theorem_a_verdict,
    theorem_b_hypotheses,
    union_hypotheses,
    verify_lemma_D,
    x_n_set,
)
from pgcl.constructions import build_free_class2
from pgcl.errors import HypothesisError
from pgcl.series import derived_subgroup, lower_central, lower_central_series, power_subgroup
from pgcl.subgroups import Subgroup, trivial_subgroup, whole_group
from pgcl.tables import table_for


def brute_commutators(pres):
    out = set()
    elems = list(itertools.product(range(pres.p), repeat=pres.n))
    for x in elems:
        for g in elems:
            out.add(pres.index_of(pres.comm(x, g)))
    return out


def test_k_set_heisenberg_is_centre(heis5):
    G = whole_group(heis5)
    K = k_set(G)
    assert K == ElementSet.of_subgroup(derived_subgroup(G))
    assert set(K.codes.tolist()) == brute_commutators(heis5)


def test_k_set_abelian_is_identity(abelian5):
    K = k_set(whole_group(abelian5))
    assert len(K) == 1 and (0, 0, 0) in K


def test_k_set_coset_route_agrees_with_table(f3):
    from pgcl.config import using_gates
    G = whole_group(f3.pres)
    table_route = k_set(G)
    with using_gates(kset=10):
        pair_route = k_set(G)
    assert table_route == pair_route
    assert len(table_route) == 125


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=6, max_size=6))
def test_kx_size_is_centralizer_index(huppert5, x):
    G = whole_group(huppert5)
    assert len(kx_codes(G, tuple(x))) == centralizer_index(G, tuple(x))


def test_kx_size_matches_brute_centralizer(heis5):
    elems = list(itertools.product(range(5), repeat=3))
    G = whole_group(heis5)
    for x in [(1, 0, 0), (0, 0, 1), (2, 3, 4)]:
        cent = sum(1 for g in elems if heis5.mul(x, g) == heis5.mul(g, x))
        assert len(kx_codes(G, x)) == 125 // cent


def test_rank_mod_p_examples():
    assert rank_mod_p([[0, 1], [4, 0]], 5) == 2
    assert rank_mod_p([[1, 2], [2, 4]], 5) == 1
    assert rank_mod_p([[0, 0], [0, 0]], 5) == 0


def test_rank_oracle_on_free_class2(f4):
    pres = f4.pres
    v = [0] * pres.n
    v[f4.pair_index(0, 1)] = 1
    assert decomposable_rank_oracle(f4, tuple(v))
    v[f4.pair_index(2, 3)] = 1
    assert not decomposable_rank_oracle(f4, tuple(v))
    with pytest.raises(HypothesisError):
        decomposable_rank_oracle(pres, tuple(v))


def test_rank_oracle_matches_k_set_on_f3(f3):
    # every bivector in dimension 3 is decomposable
    K = k_set(whole_group(f3.pres))
    Gd = derived_subgroup(whole_group(f3.pres))
    for c in Gd.elements():
        assert decomposable_rank_oracle(f3, c) == (c in K)


def test_normal_hyperplanes_heisenberg(heis5):
    Ts = normal_maximal_in_derived(whole_group(heis5))
    assert len(Ts) == 1 and Ts[0].is_trivial()


def test_normal_hyperplanes_f3_counts(f3):
    # G' = Z(G) elementary abelian of rank 3: all (p^3-1)/(p-1) hyperplanes
    assert len(normal_maximal_in_derived(whole_group(f3.pres))) == 31


def test_d_subgroups_heisenberg(heis5):
    D = d_subgroups(whole_group(heis5))
    (T, DT), = D.pairs
    assert DT == whole_group(heis5).__class__(heis5, [(0, 0, 1)])
    assert D.in_D((0, 0, 3)) and not D.in_D((1, 0, 0))


@pytest.mark.parametrize("name", ["heis5", "ext25", "huppert5", "small_semidirect"])
def test_lemma_d(request, name):
    rep = verify_lemma_D(whole_group(request.getfixturevalue(name)))
    assert rep.passed, rep.failures


def test_hall_identity_g_trivial_case(hall_group):
    G = whole_group(hall_group)
    P = derived_subgroup(G)
    N = power_subgroup(P, 1)
    # with L = N the generator condition holds for g = 1
    rep = hall_congruence_check(G, (1,) + (0,) * (hall_group.n - 1), (0,) * hall_group.n, N, N, 0)
    assert rep.ok, rep


def test_hall_rejects_non_normal_modulus(hall_group):
    G = whole_group(hall_group)
    bad = Subgroup(hall_group, [(1,) + (0,) * (hall_group.n - 1)])
    rep = hall_congruence_check(G, (0,) * hall_group.n, (0,) * hall_group.n, bad, bad, 0)
    assert rep.status == "hypotheses not met"


def test_random_hall_instances_pass(hall_group):
    G = whole_group(hall_group)
    insts = list(random_hall_instances(G, 20, seed=3))
    assert len(insts) == 20
    for x, g, L, N, k in insts:
        rep = hall_congruence_check(G, x, g, L, N, k)
        assert rep.ok, (rep, x, g, k)


def test_theorem_b_witness_and_replay(huppert5):
    G = whole_group(huppert5)
    cert = find_theorem_b_witness(G)
    assert cert.d == 4
    res = replay_certificate(cert, huppert5)
    assert res.passed, res.failures
    assert res.transcript[-1]["final"]["kx_size"] == 625


def test_certificate_json_round_trip(huppert5):
    cert = find_theorem_b_witness(whole_group(huppert5))
    back = WitnessCertificate.from_dict(cert.to_dict(), huppert5)
    assert back.to_dict() == cert.to_dict()


def test_tampered_certificate_fails_at_rung(huppert5):
    cert = find_theorem_b_witness(whole_group(huppert5))
    data = cert.to_dict()
    data["pairing"][1]["g"] = [0] * huppert5.n
    res = replay_certificate(WitnessCertificate.from_dict(data, huppert5), huppert5)
    assert not res.passed and res.failed_rung == 1


def test_certificate_for_other_group_raises(huppert5, heis5):
    cert = find_theorem_b_witness(whole_group(huppert5))
    with pytest.raises(HypothesisError):
        replay_certificate(cert, heis5)


def test_theorem_b_abelian_trivial(abelian5):
    cert = find_theorem_b_witness(whole_group(abelian5))
    assert cert.d == 0 and replay_certificate(cert, abelian5).passed


def test_theorem_b_rejects_f3(f3):
    d, why = theorem_b_hypotheses(whole_group(f3.pres))
    assert d == 3 and why is not None


def test_union_decomposition_f3(f3):
    G = whole_group(f3.pres)
    x, u, v = find_case3_triple(G)
    res = lemma_union_decomposition(G, x, u, v)
    assert res.passed and len(res.subgroups) == 6
    assert res.target.order == 25


def test_union_hypotheses_rejections(f3, heis5):
    G = whole_group(f3.pres)
    a1, a2, a3 = ((1, 0, 0, 0, 0, 0), (0, 1, 0, 0, 0, 0), (0, 0, 1, 0, 0, 0))
    # x = identity gives [x, G] = 1 but the generating condition fails
    assert union_hypotheses(G, (0,) * 6, a1, a2) is not None
    assert union_hypotheses(whole_group(heis5), (1, 0, 0), (0, 1, 0), (0, 0, 1)) is not None
    assert union_hypotheses(G, a3, a1, a2) is None
    with pytest.raises(HypothesisError):
        lemma_union_decomposition(G, a1, a1, a1)


def test_honda_non_vacuous(cyclic_derived):
    rep = honda_power_check(whole_group(cyclic_derived), sample_size=30)
    assert rep.passed and not rep.vacuous


def test_theorem_a_verdicts(huppert5, f3, heis5):
    rep = theorem_a_verdict(whole_group(huppert5))
    assert rep.holds and rep.branch == "non-powerful -> CF(6,5) -> Theorem B"
    assert theorem_a_verdict(whole_group(f3.pres)).branch == "powerful -> Case 3"
    assert theorem_a_verdict(whole_group(heis5)).branch == "rank(G') <= 2"
    with pytest.raises(HypothesisError):
        theorem_a_verdict(whole_group(build_free_class2(5, 4).pres))


def test_x_n_tower(huppert5):
    G = whole_group(huppert5)
    prev = None
    for N in [G] + lower_central_series(G)[2:]:
        res = x_n_set(G, N)
        assert res.union_of_cosets
        if N == G:
            assert len(res.X) == huppert5.order
        if prev is not None:
            assert res.X.issubset(prev)
        prev = res.X


def test_x_trivial_matches_theorem_b_witnesses(heis5):
    G = whole_group(heis5)
    X = x_n_set(G, trivial_subgroup(heis5)).X
    t = table_for(heis5)
    Gd = derived_subgroup(G).order
    expect = [c for c in t.all().tolist() if len(kx_codes(G, heis5.exps_of(c))) == Gd]
    assert X.codes.tolist() == expect
