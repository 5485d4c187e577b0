import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgcl.constructions import build_huppert_example
from pgcl.errors import HypothesisError
from pgcl.series import derived_subgroup, lower_central
from pgcl.subgroups import (
    Section,
    Subgroup,
    center,
    chief_chain,
    condition_subgroup,
    condition_subgroup_bruteforce,
    contains,
    index,
    intersection,
    is_normal,
    normal_closure,
    product,
    quotient,
    subgroup_closure,
    subgroup_from_codes,
    trivial_subgroup,
    whole_group,
)
from pgcl.tables import table_for

HUP = build_huppert_example(5)
codes = st.integers(0, HUP.order - 1)


def el(c):
    return HUP.exps_of(c)


@settings(max_examples=40, deadline=None)
@given(st.lists(codes, min_size=1, max_size=3))
def test_closure_matches_extensional_closure(cs):
    H = subgroup_closure([el(c) for c in cs], HUP)
    # extensional oracle: close the code set under the table product
    t = table_for(HUP)
    seen = np.zeros(HUP.order, dtype=bool)
    seen[0] = True
    frontier = np.array([0])
    while frontier.size:
        nxt = np.unique(np.concatenate([t.mul(frontier, int(g)) for g in cs]))
        nxt = nxt[~seen[nxt]]
        seen[nxt] = True
        frontier = nxt
    S = set(np.flatnonzero(seen).tolist())
    assert set(H.codes().tolist()) == S
    assert subgroup_from_codes(HUP, sorted(S)) == H


@settings(max_examples=40, deadline=None)
@given(codes, codes)
def test_membership_agrees_with_codes(a, b):
    H = subgroup_closure([el(a)], HUP)
    assert contains(H, el(b)) == (b in set(H.codes().tolist()))


def test_canonical_igs_is_unique():
    G = whole_group(HUP)
    A = subgroup_closure([HUP._unit(3), HUP._unit(4)], HUP)
    B = subgroup_closure([HUP.mul(HUP._unit(3), HUP._unit(4)), HUP._unit(4)], HUP)
    assert A == B and A.igs == B.igs
    assert A <= G and not G <= A


def test_normality_index_and_products():
    G = whole_group(HUP)
    Gd = derived_subgroup(G)
    assert is_normal(Gd, G)
    assert index(G, Gd) == 25
    X = subgroup_closure([HUP._unit(0)], HUP)
    assert not is_normal(X, G)
    P = product(X, Gd)
    assert P.order == 5 * Gd.order
    assert intersection(X, Gd).is_trivial()
    with pytest.raises(HypothesisError):
        product(X, subgroup_closure([HUP._unit(1)], HUP))


@settings(max_examples=25, deadline=None)
@given(codes, codes, codes)
def test_condition_subgroup_matches_bruteforce(a, b, c):
    G = whole_group(HUP)
    target = subgroup_closure([el(a), el(b)], HUP)
    modulus = normal_closure([el(c)], G)
    assert condition_subgroup(G, target, modulus) == condition_subgroup_bruteforce(G, target, modulus)


def test_condition_subgroup_requires_normal_modulus():
    G = whole_group(HUP)
    X = subgroup_closure([HUP._unit(0)], HUP)
    with pytest.raises(HypothesisError):
        condition_subgroup(G, G, X)


def test_center_of_example():
    G = whole_group(HUP)
    Z = center(G)
    assert Z == subgroup_closure([HUP._unit(5)], HUP)
    assert Z == condition_subgroup_bruteforce(G, G, trivial_subgroup(HUP))


def test_chief_chain_factors_have_order_p():
    G = whole_group(HUP)
    ch = chief_chain(G, G, trivial_subgroup(HUP))
    assert [S.log_order for S in ch] == [6, 5, 4, 3, 2, 1, 0]
    assert all(is_normal(S, G) for S in ch)
    with pytest.raises(HypothesisError):
        chief_chain(G, trivial_subgroup(HUP), G)


@settings(max_examples=15, deadline=None)
@given(codes, st.lists(st.tuples(codes, codes), min_size=5, max_size=5))
def test_quotient_is_homomorphism(n, pairs):
    G = whole_group(HUP)
    N = normal_closure([el(n)], G)
    q = quotient(HUP, N)
    assert q.target.order * N.order == HUP.order
    for a, b in pairs:
        x, y = HUP.element(el(a)), HUP.element(el(b))
        assert q(x * y) == q(x) * q(y)
    # kernel is N
    t = table_for(HUP)
    img = q.image_codes(t.all())
    assert set(np.flatnonzero(img == 0).tolist()) == set(N.codes().tolist())


def test_preimage_and_image():
    G = whole_group(HUP)
    N = lower_central(G, 4)
    q = quotient(HUP, N)
    Gd = derived_subgroup(G)
    assert q.preimage(q.image_subgroup(Gd)) == Gd
    assert q.image_subgroup(Gd).order == Gd.order // N.order


def test_section_coordinates_are_linear():
    G = whole_group(HUP)
    A, B = lower_central(G, 2), lower_central(G, 3)
    sec = Section(A, B)
    assert sec.dim == 1
    a = A.igs[0]
    for k in range(5):
        assert sec.coords(HUP.pow(a, k)) == ((k * sec.coords(a)[0]) % 5,)
