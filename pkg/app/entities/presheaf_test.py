import pytest

from app.entities.category import identity_functor
from app.entities.presheaf import (
    NatTrans,
    Presheaf,
    check_functorial,
    check_natural,
    closed_subsets,
    constant_presheaf,
    empty_presheaf,
    is_nat_iso,
    nat_compose,
    nat_identity,
    natural_isomorphism,
    natural_transformations,
    representable,
    representable_map,
    require_natural,
    restrict_along,
    subpresheaves,
    terminal_presheaf,
    transformation_space,
)
from app.exception.domain_error import NotNatural


@pytest.mark.parametrize("d, sizes", [
    (0, (1, 0, 0)),
    (1, (1, 1, 1)),
    (2, (1, 2, 4)),
])
def test_representable_sizes(finset_2, d, sizes):
    p = representable(finset_2, d)
    assert p.sizes == sizes
    assert check_functorial(p).ok


@pytest.mark.parametrize("k", [0, 1, 2])
def test_constant_presheaf_is_functorial(finset_2, k):
    assert check_functorial(constant_presheaf(finset_2, k)).ok


def test_broken_identity_action_is_reported(finset_2):
    p = representable(finset_2, 2)
    identity = finset_2.identity(2)
    action = list(p.action)
    action[identity] = (1, 0, 2, 3)
    mutant = p.model_copy(update={"action": tuple(action)})
    report = check_functorial(mutant)
    assert report.has("PSH-ID", 2, 0)


def test_action_table_of_wrong_size_is_rejected(finset_2):
    p = representable(finset_2, 2)
    action = list(p.action)
    action[finset_2.identity(2)] = (0, 1)
    with pytest.raises(ValueError):
        Presheaf(category=finset_2, sizes=p.sizes, action=tuple(action))


@pytest.mark.parametrize("a, expected", [(0, 1), (1, 2), (2, 4)])
def test_yoneda_counts_transformations(finset_2, a, expected):
    # Nat(y(a), P) ≅ P(a)
    found = natural_transformations(representable(finset_2, a), representable(finset_2, 2))
    assert len(found) == expected
    assert all(check_natural(alpha).ok for alpha in found)


def test_global_sections_of_representable_are_points(finset_2):
    assert len(natural_transformations(terminal_presheaf(finset_2), representable(finset_2, 2))) == 2


def test_no_transformation_into_empty_presheaf(finset_2):
    assert natural_transformations(terminal_presheaf(finset_2), empty_presheaf(finset_2)) == []
    assert len(natural_transformations(empty_presheaf(finset_2), terminal_presheaf(finset_2))) == 1


def test_sampling_is_deterministic(finset_2):
    p = representable(finset_2, 2)
    assert transformation_space(p, p) > 3
    first = natural_transformations(p, p, bound=3, seed=7)
    second = natural_transformations(p, p, bound=3, seed=7)
    assert len(first) == 3
    assert [a.components for a in first] == [a.components for a in second]


def test_natural_isomorphism_of_representable(finset_2):
    p = representable(finset_2, 2)
    found = natural_isomorphism(p, p)
    assert found is not None
    alpha, inverse = found
    assert is_nat_iso(alpha)
    assert nat_compose(inverse, alpha).components == nat_identity(p).components


def test_no_isomorphism_between_different_representables(finset_2):
    assert natural_isomorphism(representable(finset_2, 1), representable(finset_2, 2)) is None


def test_non_natural_family_is_rejected(finset_2):
    p = representable(finset_2, 2)
    components = list(nat_identity(p).components)
    components[1] = (1, 0)
    mutant = NatTrans(source=p, target=p, components=tuple(components))
    assert not check_natural(mutant).ok
    with pytest.raises(NotNatural):
        require_natural(mutant)


def test_representable_map_is_natural(finset_2):
    for h in finset_2.morphism_ids():
        assert check_natural(representable_map(finset_2, h)).ok


def test_closed_subsets_of_a_chain():
    found = closed_subsets([1, 2, 3], lambda e: frozenset(range(1, e + 1)))
    assert sorted(map(sorted, found)) == [[], [1], [1, 2], [1, 2, 3]]


@pytest.mark.parametrize("d, expected", [(0, 2), (1, 3)])
def test_subpresheaves_of_representable(finset_2, d, expected):
    found = subpresheaves(representable(finset_2, d))
    assert len(found) == expected
    for inclusion in found:
        assert check_functorial(inclusion.source).ok
        assert check_natural(inclusion).ok


def test_restrict_along_identity(finset_2):
    p = representable(finset_2, 2)
    functor = identity_functor(finset_2)
    q = restrict_along(p, finset_2, functor.on_objects, functor.on_morphisms)
    assert q.sizes == p.sizes
    assert q.action == p.action
