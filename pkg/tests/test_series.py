import pytest

from pgcl.series import (
    cf_parameters,
    check_lemma_index,
    check_lemma_potent,
    check_power_map_epimorphism,
    check_remark_index,
    check_theorem_b_power_map,
    derived_subgroup,
    exponent,
    frattini,
    is_abelian,
    is_potent,
    is_power_abelian,
    is_powerful,
    is_uniserial_mod,
    lower_central,
    lower_central_series,
    nilpotency_class,
    normal_subgroups,
    omega,
    power_subgroup,
    rank,
    two_step_centralizer,
)
from pgcl.subgroups import trivial_subgroup, whole_group


def test_example_profile_p5(huppert5):
    G = whole_group(huppert5)
    assert [S.log_order for S in lower_central_series(G)] == [6, 4, 3, 2, 1, 0]
    assert nilpotency_class(G) == 5
    Gd = derived_subgroup(G)
    assert rank(Gd) == 3
    assert derived_subgroup(Gd) == lower_central(G, 5) and not lower_central(G, 5).is_trivial()
    assert not is_powerful(Gd)
    assert cf_parameters(G).m == 6


def test_exponent_at_p5_is_25(huppert5):
    # class 5 = p: a product of two order-5 elements has order 25
    G = whole_group(huppert5)
    assert exponent(G) == 25
    assert power_subgroup(G, 1).log_order == 1


def test_example_profile_p7(huppert7):
    G = whole_group(huppert7)
    assert exponent(G) == 7
    assert nilpotency_class(G) == 5
    assert is_potent(G)


def test_powerful_and_rank(hall_group, f3):
    G = whole_group(hall_group)
    Gd = derived_subgroup(G)
    assert is_powerful(Gd) and rank(Gd) == 2 and exponent(Gd) == 25
    F = whole_group(f3.pres)
    assert is_abelian(derived_subgroup(F))
    assert rank(F) == 3 and frattini(F) == derived_subgroup(F)


def test_power_abelian_on_powerful(cyclic_derived, ext25):
    for pres in (cyclic_derived, ext25):
        Gd = derived_subgroup(whole_group(pres))
        pa = is_power_abelian(Gd)
        assert tuple(pa) == (True, True, True)


def test_omega_of_extraspecial_exponent_p2(ext25):
    G = whole_group(ext25)
    O = omega(G, 1)
    assert O.order == 25


def test_uniserial(huppert5, f3):
    G = whole_group(huppert5)
    ok, chain = is_uniserial_mod(G, derived_subgroup(G), trivial_subgroup(huppert5))
    assert ok and chain.factor_log_orders == (1, 1, 1, 1)
    F = whole_group(f3.pres)
    ok, _ = is_uniserial_mod(F, derived_subgroup(F), trivial_subgroup(f3.pres))
    assert not ok


def test_two_step_centralizers_are_maximal(huppert5):
    G = whole_group(huppert5)
    for i in (2, 3, 4):
        assert two_step_centralizer(G, i).log_order == 5


def test_power_class_checks(hall_group, ext25, huppert7):
    G = whole_group(hall_group)
    assert check_power_map_epimorphism(derived_subgroup(G)) == []
    E = whole_group(ext25)
    normals = normal_subgroups(E)
    for L in normals:
        for N in normals:
            if N <= L:
                assert check_lemma_index(E, N, L) == []
    H7 = whole_group(huppert7)
    assert check_theorem_b_power_map(H7) == []
    Gd = derived_subgroup(H7)
    assert check_lemma_potent(H7, [Gd, lower_central(H7, 4)]) == []


def test_remark_index_on_powerful_group(ext25):
    G = whole_group(ext25)
    assert is_powerful(G)
    Gp = power_subgroup(G, 1)
    for N in normal_subgroups(G):
        if Gp <= N:
            assert check_remark_index(G, N, G) == []
            assert check_remark_index(G, Gp, N) == []


def test_normal_subgroup_limit(f3):
    from pgcl.errors import GateExceeded
    with pytest.raises(GateExceeded):
        normal_subgroups(whole_group(f3.pres), limit=50)


def test_power_map_check_detects_non_powerful(huppert5):
    # exponent 25 at p = 5, but G is far from powerful
    assert check_power_map_epimorphism(whole_group(huppert5)) == ["i=1: power map not a homomorphism"]


def test_vectorized_section_coords_agree(huppert5):
    from pgcl.subgroups import Section
    from pgcl.tables import table_for
    G = whole_group(huppert5)
    A, B = derived_subgroup(G), lower_central(G, 4)
    sec = Section(A, B)
    t = table_for(huppert5)
    codes = A.codes(t)
    rows = sec.coords_codes(t, codes)
    for c, row in zip(codes.tolist(), rows.tolist()):
        assert tuple(row) == sec.coords(huppert5.exps_of(c))
