import pytest

from pgcl.constructions import (
    ActionError,
    GroupRecipe,
    ParseError,
    build_abelian,
    build_cyclic,
    build_free_class2,
    build_heisenberg,
    build_huppert_example,
    build_huppert_semidirect,
    build_semidirect,
    emit_presentation,
    huppert_conjugation_table,
    parse_presentation,
)
from pgcl.errors import InconsistentPresentationError, PresentationError
from pgcl.pc import PcPresentation, check_consistency
from pgcl.series import (
    derived_subgroup,
    exponent,
    is_abelian,
    lower_central,
    lower_central_series,
    nilpotency_class,
    power_subgroup,
    rank,
)
from pgcl.subgroups import center, whole_group
from pgcl.tables import table_for

RECIPES = [
    "elementary-abelian(p=5,n=3)",
    "heisenberg(p=5)",
    "extraspecial(p=5,e=1)",
    "extraspecial(p=5,e=2)",
    "free-class2(p=5,d=3)",
    "huppert(p=5)",
    "huppert-semidirect(p=5)",
    "scalar-semidirect(p=5,a=2,b=1)",
    "scalar-semidirect(p=5,a=3,b=2)",
    "cyclic-derived(p=5)",
    "huppert(p=7)",
    "cyclic(p=5,k=3)",
]

EXPECTED_LOG_ORDER = {
    "elementary-abelian(p=5,n=3)": 3, "heisenberg(p=5)": 3, "extraspecial(p=5,e=1)": 3,
    "extraspecial(p=5,e=2)": 3, "free-class2(p=5,d=3)": 6, "huppert(p=5)": 6,
    "huppert-semidirect(p=5)": 6, "scalar-semidirect(p=5,a=2,b=1)": 5,
    "scalar-semidirect(p=5,a=3,b=2)": 8, "cyclic-derived(p=5)": 6, "huppert(p=7)": 6,
    "cyclic(p=5,k=3)": 3,
}


@pytest.mark.parametrize("spec", RECIPES)
def test_builders_consistent_with_advertised_order(spec):
    pres = GroupRecipe.parse(spec).build()
    assert check_consistency(pres)
    assert pres.n == EXPECTED_LOG_ORDER[spec]


@pytest.mark.parametrize("spec", RECIPES)
def test_emit_parse_round_trip(spec):
    pres = GroupRecipe.parse(spec).build()
    assert parse_presentation(emit_presentation(pres)) == pres


def test_recipe_text_round_trip():
    r = GroupRecipe.parse("free-class2(d=4, p=5)")
    assert str(r) == "free-class2(d=4,p=5)"
    assert GroupRecipe.parse(str(r)) == r
    with pytest.raises(ValueError):
        GroupRecipe.parse("nonsense(p=5)")


@pytest.mark.parametrize("d", [1, 2, 3])
def test_free_class2_structure(d):
    fc = build_free_class2(5, d)
    G = whole_group(fc.pres)
    assert fc.pres.n == d + d * (d - 1) // 2
    assert lower_central(G, 3).is_trivial()
    assert power_subgroup(G, 1).is_trivial()
    if d >= 2:
        assert center(G) == derived_subgroup(G)


def test_free_class2_commutators_match_bivector_coordinates():
    fc = build_free_class2(5, 4)
    pres = fc.pres
    for i in range(4):
        for j in range(i + 1, 4):
            c = pres.comm(pres._unit(j), pres._unit(i))
            k = fc.pair_index(i, j)
            assert c == pres._unit(k)


def test_free_class2_d6_builds_and_refuses_tables():
    from pgcl.errors import GateExceeded
    fc = build_free_class2(5, 6)
    assert fc.pres.n == 21
    with pytest.raises(GateExceeded):
        table_for(fc.pres)


def test_free_class2_rejects_p2():
    with pytest.raises(PresentationError):
        build_free_class2(2, 3)


def test_huppert_example_matches_printed_conjugation_table():
    p = 5
    pres = build_huppert_example(p)
    names = list(pres.names)
    for (g, h), image in huppert_conjugation_table(p).items():
        gi, hi = names.index(g), names.index(h)
        v = [0] * pres.n
        for name, e in image.items():
            v[names.index(name)] = e % p
        assert pres.conj(pres._unit(gi), pres._unit(hi)) == tuple(v)


def test_huppert_rejects_small_primes():
    with pytest.raises(PresentationError):
        build_huppert_example(3)


def test_huppert_two_semidirect_products_same_profile():
    a = whole_group(build_huppert_example(5))
    b = whole_group(build_huppert_semidirect(5))
    prof = lambda G: ([S.log_order for S in lower_central_series(G)], nilpotency_class(G),
                      rank(derived_subgroup(G)), exponent(G))
    assert prof(a) == prof(b)


def test_semidirect_trivial_action_is_direct_product():
    A = build_heisenberg(5)
    K = build_cyclic(5, 2)
    P = build_semidirect(A, K, [None, None])
    assert P.order == A.order * K.order
    assert derived_subgroup(whole_group(P)).order == 5


def test_semidirect_rejects_non_p_power_order():
    A = build_abelian(5, 1)
    K = build_abelian(5, 1)
    # g -> g^2 has order 4 on C_5; it also moves g1 off its layer
    with pytest.raises(ActionError):
        build_semidirect(A, K, [[{0: 2}]])


def test_semidirect_rejects_non_homomorphism():
    A = build_heisenberg(5)
    K = build_abelian(5, 1)
    # x -> x z, y -> y, z -> y breaks the relations
    with pytest.raises(ActionError):
        build_semidirect(A, K, [[{0: 1, 2: 1}, {1: 1}, {1: 1}]])


HEIS_TEXT = """\
# Heisenberg group mod 5
p 5
n 3
names x y z
comm 2 1 : g3^1
"""


def test_hand_written_heisenberg_file():
    pres = parse_presentation(HEIS_TEXT)
    assert pres.order == 125 and pres == build_heisenberg(5)


@pytest.mark.parametrize("text, line", [
    ("p 5\nn 2\npow 2 : g1^1\n", 3),         # left-supported
    ("p 5\nn 2\ncomm 1 2 : 1\n", 3),          # j <= i
    ("p 4\nn 2\n", 1),                         # not prime
    ("p 5\nn 2\npow 1 : g2^7\n", 3),          # exponent out of range
    ("p 5\nn 2\nfrob 1 : 1\n", 3),            # unknown directive
    ("pow 1 : 1\n", 1),                        # missing header
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as exc:
        parse_presentation(text)
    assert exc.value.line == line


def test_parse_rejects_inconsistent_file():
    with pytest.raises(InconsistentPresentationError):
        parse_presentation("p 5\nn 3\npow 1 : g2\ncomm 2 1 : g3\n")
