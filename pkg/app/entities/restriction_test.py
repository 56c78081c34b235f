from itertools import product

import pytest

from app.entities.category import find_isomorphism
from app.entities.fixtures import build_finset_p, finset_name
from app.entities.restriction import (
    RestrictionCategory,
    check_idempotents_split,
    check_restriction_axioms,
    compatible,
    find_restriction_isomorphism,
    is_restriction_functor,
    is_restriction_idempotent,
    is_total,
    leq,
    restriction_idempotents,
    splitting,
    total_inclusion,
    total_subcategory,
    trivial_restriction,
)
from app.exception.domain_error import NotParallel


def graph(x, f):
    return x.base.morphism(f).name.split(":")[1]


def parallel_pairs(x):
    c = x.base
    for a, b in product(c.object_ids(), repeat=2):
        for f, g in product(c.hom(a, b), repeat=2):
            yield f, g


def test_trivial_restriction_satisfies_axioms(finset_2):
    assert check_restriction_axioms(trivial_restriction(finset_2)).ok


@pytest.mark.parametrize("n", [0, 1, 2])
def test_finset_p_satisfies_axioms(n):
    assert check_restriction_axioms(build_finset_p(n)).lines() == []


def test_nojoin_fixture_is_a_restriction_category(nojoin):
    assert check_restriction_axioms(nojoin).ok


def test_mutant_bar_is_reported(finset_p_2):
    c = finset_p_2.base
    f = c.morphism_id(finset_name(2, 2, (0, 0)))
    swap = c.morphism_id(finset_name(2, 2, (1, 0)))
    bar = list(finset_p_2.bar)
    bar[f] = swap  # не идемпотент
    report = check_restriction_axioms(RestrictionCategory(base=c, bar=tuple(bar)))
    assert report.tags() & {"R1", "R3"}


def test_bar_of_wrong_type_is_reported(finset_p_2):
    c = finset_p_2.base
    f = c.morphism_id(finset_name(2, 1, (0, 0)))
    bar = list(finset_p_2.bar)
    bar[f] = f
    report = check_restriction_axioms(RestrictionCategory(base=c, bar=tuple(bar)))
    assert report.has("BAR-TYPE", f)


def test_leq_is_reflexive(finset_p_2):
    assert all(leq(finset_p_2, f, f) for f in finset_p_2.base.morphism_ids())


def test_leq_is_graph_inclusion(finset_p_2):
    for f, g in parallel_pairs(finset_p_2):
        included = all(u == "_" or u == v for u, v in zip(graph(finset_p_2, f), graph(finset_p_2, g)))
        assert leq(finset_p_2, f, g) == included


def test_compatible_is_agreement_on_overlap(finset_p_2):
    for f, g in parallel_pairs(finset_p_2):
        agree = all(u == "_" or v == "_" or u == v for u, v in zip(graph(finset_p_2, f), graph(finset_p_2, g)))
        assert compatible(finset_p_2, f, g) == agree


@pytest.mark.parametrize("first, second, expected", [
    ((0, None), (0, 1), True),
    ((0, None), (None, 1), True),
    ((0, 1), (1, 1), False),
    ((None, 0), (None, 1), False),
])
def test_compatible_examples(finset_p_2, first, second, expected):
    c = finset_p_2.base
    f = c.morphism_id(finset_name(2, 2, first))
    g = c.morphism_id(finset_name(2, 2, second))
    assert compatible(finset_p_2, f, g) is expected


def test_non_parallel_pair_is_an_error(finset_p_2):
    c = finset_p_2.base
    with pytest.raises(NotParallel):
        leq(finset_p_2, c.identity(1), c.identity(2))
    with pytest.raises(NotParallel):
        compatible(finset_p_2, c.identity(1), c.identity(2))


def test_leq_implies_compatible(finset_p_2):
    for f, g in parallel_pairs(finset_p_2):
        if leq(finset_p_2, f, g):
            assert compatible(finset_p_2, f, g)


def test_compatible_with_equal_bars_are_equal(finset_p_2):
    for f, g in parallel_pairs(finset_p_2):
        if compatible(finset_p_2, f, g) and finset_p_2.bar[f] == finset_p_2.bar[g]:
            assert f == g


def test_bar_is_a_restriction_idempotent(finset_p_2):
    assert all(is_restriction_idempotent(finset_p_2, finset_p_2.bar[f]) for f in finset_p_2.base.morphism_ids())


def test_hom_order_is_a_partial_order(finset_p_2):
    c = finset_p_2.base
    for a, b in product(c.object_ids(), repeat=2):
        hom = c.hom(a, b)
        for f, g in product(hom, repeat=2):
            if leq(finset_p_2, f, g) and leq(finset_p_2, g, f):
                assert f == g
            for h in hom:
                if leq(finset_p_2, f, g) and leq(finset_p_2, g, h):
                    assert leq(finset_p_2, f, h)


def test_total_subcategory_of_trivial_is_whole_category(finset_2):
    total = total_subcategory(trivial_restriction(finset_2))
    assert len(total.morphisms) == len(finset_2.morphisms)


def test_total_subcategory_of_finset_p_is_finset(finset_p_2, finset_2):
    total = total_subcategory(finset_p_2)
    assert find_isomorphism(total, finset_2) is not None


@pytest.mark.parametrize("a", [1, 2])
def test_empty_map_is_not_total(finset_p_2, a):
    empty = finset_p_2.base.morphism_id(finset_name(a, a, (None,) * a))
    assert not is_total(finset_p_2, empty)
    assert empty not in total_inclusion(finset_p_2).on_morphisms


def test_restriction_idempotents_are_partial_identities(finset_p_2):
    assert len(restriction_idempotents(finset_p_2, 2)) == 4
    assert len(restriction_idempotents(finset_p_2, 1)) == 2


def test_finset_p_is_split(finset_p_2):
    assert check_idempotents_split(finset_p_2).ok
    e = finset_p_2.base.morphism_id(finset_name(2, 2, (None, 1)))
    m, r = splitting(finset_p_2, e)
    assert finset_p_2.base.src(m) == 1


def test_nojoin_fixture_is_not_split(nojoin):
    report = check_idempotents_split(nojoin)
    assert report.has("SPLIT", nojoin.base.morphism_id("e1"))


def test_total_inclusion_is_a_restriction_functor(finset_p_2):
    inclusion = total_inclusion(finset_p_2)
    assert is_restriction_functor(inclusion, trivial_restriction(inclusion.source), finset_p_2)


def test_restriction_isomorphism_of_finset_p(finset_p_1):
    assert find_restriction_isomorphism(finset_p_1, finset_p_1) is not None
    assert find_restriction_isomorphism(finset_p_1, trivial_restriction(finset_p_1.base)) is None
