import pytest

from app.entities.fixtures import build_finset_mcat, finset_name
from app.entities.presheaf import (
    constant_presheaf,
    is_nat_iso,
    nat_identity,
    natural_isomorphism,
    representable,
    representable_map,
    subpresheaves,
    terminal_presheaf,
)
from app.entities.site import (
    Sieve,
    Topology,
    all_sieves,
    amalgamations,
    basis_covers,
    characteristic_maps,
    check_topology,
    generate_topology,
    generated_sieve,
    is_separated,
    is_sheaf,
    m_psh_member,
    m_sh_member,
    matching_families,
    maximal_topology,
    plus,
    require_sheaf,
    resaturate,
    sheaf_failures,
    sheafify,
    sheafify_map,
    sieve_inclusion,
    sieve_presheaf,
    sigma_amalgamate,
    sigma_classifier,
)
from app.exception.domain_error import NotAMono, NotASheaf, NotGeometric


def arrow(mc, a, b, values):
    return mc.base.morphism_id(finset_name(a, b, values))


@pytest.fixture(scope="module")
def site_2(inj_2):
    return generate_topology(inj_2)


@pytest.fixture(scope="module")
def points_sieve(inj_2):
    """Решето на 2-множестве, порожденное двумя точками"""
    arrows = generated_sieve(inj_2.base, 2, [arrow(inj_2, 1, 2, (0,)), arrow(inj_2, 1, 2, (1,))])
    return Sieve(target=2, arrows=arrows)


def test_sieves_on_a_point(inj_2):
    # пустое, через пустое множество, максимальное
    assert len(all_sieves(inj_2.base, 1)) == 3


def test_maximal_topology_is_a_topology(inj_2):
    assert check_topology(maximal_topology(inj_2.base)).ok


def test_every_presheaf_is_a_sheaf_for_maximal_topology(inj_2):
    j = maximal_topology(inj_2.base)
    assert is_sheaf(constant_presheaf(inj_2.base, 2), j)
    assert is_sheaf(representable(inj_2.base, 1), j)


def test_identity_is_a_basic_cover(inj_2):
    basis = basis_covers(inj_2)
    for a in inj_2.base.object_ids():
        assert (inj_2.base.identity(a),) in basis[a]


def test_points_cover_the_two_set(inj_2):
    first, second = arrow(inj_2, 1, 2, (0,)), arrow(inj_2, 1, 2, (1,))
    basis = basis_covers(inj_2)
    assert tuple(sorted((first, second))) in basis[2]
    assert (first,) not in basis[2]


def test_empty_family_covers_initial_object(inj_2):
    basis = basis_covers(inj_2)
    assert () in basis[0]
    assert () not in basis[1]


def test_basis_requires_geometric_category(iso_2):
    with pytest.raises(NotGeometric):
        basis_covers(iso_2)


def test_generated_topology_is_saturated(inj_2, site_2):
    assert check_topology(site_2).lines() == []
    assert resaturate(site_2).covers == site_2.covers


def test_generated_topology_covers(inj_2, site_2, points_sieve):
    assert site_2.covers_sieve(2, points_sieve.arrows)
    assert site_2.covers_sieve(0, frozenset())
    assert not site_2.covers_sieve(1, frozenset())


def test_trivial_site_covers_with_empty_sieve():
    # единственный объект начальный, поэтому пустое семейство тоже покрытие
    j = generate_topology(build_finset_mcat(0, "inj"))
    assert j.covers_sieve(0, frozenset())


@pytest.mark.parametrize("d", [0, 1, 2])
def test_topology_is_subcanonical(inj_2, site_2, d):
    assert is_sheaf(representable(inj_2.base, d), site_2)


def test_constant_presheaf_is_not_a_sheaf(inj_2, site_2):
    p = constant_presheaf(inj_2.base, 2)
    failures = sheaf_failures(p, site_2)
    assert any(f.object == 0 and f.sieve == () and f.amalgamations == 2 for f in failures)
    assert not is_separated(p, site_2)
    with pytest.raises(NotASheaf):
        require_sheaf(p, site_2)


def test_terminal_presheaf_is_a_sheaf(inj_2, site_2):
    assert is_sheaf(terminal_presheaf(inj_2.base), site_2)


def test_matching_families_on_maximal_sieve_are_sections(inj_2):
    p = representable(inj_2.base, 2)
    sieve = Sieve(target=2, arrows=frozenset(inj_2.base.into(2)))
    families = matching_families(p, sieve)
    assert len(families) == p.sizes[2]
    for family in families:
        assert len(amalgamations(p, sieve, family)) == 1


def test_sheafify_is_identity_on_sheaves(inj_2, site_2):
    result = sheafify(representable(inj_2.base, 2), site_2)
    assert is_nat_iso(result.unit)


def test_sheafify_constant_presheaf(inj_2, site_2):
    result = sheafify(constant_presheaf(inj_2.base, 2), site_2)
    assert is_sheaf(result.sheaf, site_2)
    assert result.sheaf.sizes == (1, 2, 4)
    assert natural_isomorphism(result.sheaf, representable(inj_2.base, 2)) is not None
    assert is_nat_iso(sheafify(result.sheaf, site_2).unit)


def test_separated_presheaf_needs_one_plus(inj_2, site_2, points_sieve):
    s = sieve_presheaf(inj_2.base, points_sieve)
    assert is_separated(s, site_2)
    assert not is_sheaf(s, site_2)
    first = plus(s, site_2)
    assert is_sheaf(first.result, site_2)
    assert is_nat_iso(plus(first.result, site_2).unit)


def test_sheafify_inverts_covering_sieve_inclusion(inj_2, site_2, points_sieve):
    inclusion = sieve_inclusion(inj_2.base, points_sieve)
    assert is_nat_iso(sheafify_map(inclusion, site_2))


def test_every_covering_sieve_of_a_basic_cover_is_inverted(inj_2, site_2):
    c = inj_2.base
    for a, families in enumerate(basis_covers(inj_2)):
        for family in families:
            sieve = Sieve(target=a, arrows=generated_sieve(c, a, family))
            assert is_nat_iso(sheafify_map(sieve_inclusion(c, sieve), site_2))


def test_identity_is_in_m_psh(inj_2):
    p = representable(inj_2.base, 2)
    assert m_psh_member(nat_identity(p), inj_2)


def test_yoneda_image_of_m_map_is_in_m_psh(inj_2):
    assert m_psh_member(representable_map(inj_2.base, arrow(inj_2, 1, 2, (0,))), inj_2)


def test_sieve_of_one_point_depends_on_m(inj_2, iso_2):
    point = arrow(inj_2, 1, 2, (0,))
    sieve = Sieve(target=2, arrows=generated_sieve(inj_2.base, 2, [point]))
    assert m_psh_member(sieve_inclusion(inj_2.base, sieve), inj_2)
    assert not m_psh_member(sieve_inclusion(iso_2.base, sieve), iso_2)


def test_two_point_sieve_is_not_in_m_psh(inj_2, points_sieve):
    assert not m_psh_member(sieve_inclusion(inj_2.base, points_sieve), inj_2)


def test_m_psh_requires_mono(inj_2):
    with pytest.raises(NotAMono):
        m_psh_member(representable_map(inj_2.base, arrow(inj_2, 2, 1, (0, 0))), inj_2)


@pytest.fixture(scope="module")
def everything_covers(inj_2):
    """Вырожденная топология: покрывает каждое решето, в том числе пустое"""
    c = inj_2.base
    covers = tuple(tuple(tuple(sorted(s)) for s in all_sieves(c, a)) for a in c.object_ids())
    return Topology(category=c, name="all", covers=covers)


def _m_sh_cases(c):
    return [*subpresheaves(representable(c, 2)), nat_identity(terminal_presheaf(c))]


def test_m_sh_agrees_with_m_psh_on_subcanonical_site(inj_2, site_2, caplog):
    results = []
    for inclusion in _m_sh_cases(inj_2.base):
        expected = (
            m_psh_member(inclusion, inj_2)
            and is_sheaf(inclusion.source, site_2)
            and is_sheaf(inclusion.target, site_2)
        )
        assert m_sh_member(inclusion, inj_2, site_2) == expected
        results.append(expected)
    assert any(results) and not all(results)
    assert "differs" not in caplog.text


def test_m_sh_agrees_with_m_psh_on_degenerate_site(inj_2, everything_covers, caplog):
    c = inj_2.base
    assert check_topology(everything_covers).ok
    assert not is_sheaf(representable(c, 2), everything_covers)
    for inclusion in _m_sh_cases(c):
        expected = (
            m_psh_member(inclusion, inj_2)
            and is_sheaf(inclusion.source, everything_covers)
            and is_sheaf(inclusion.target, everything_covers)
        )
        assert m_sh_member(inclusion, inj_2, everything_covers) == expected
    assert m_sh_member(nat_identity(terminal_presheaf(c)), inj_2, everything_covers)
    assert "differs" not in caplog.text


def test_representables_collapse_on_degenerate_site(inj_2, everything_covers):
    c = inj_2.base
    # a(y(2)) схлопывается в терминальный пучок
    assert sheafify(representable(c, 2), everything_covers).sheaf.sizes == (1, 1, 1)


def test_sigma_is_subobject_presheaf(inj_2):
    sigma = sigma_classifier(inj_2)
    assert sigma.presheaf.sizes == (1, 2, 4)


def test_sigma_of_trivial_category_is_a_point():
    assert sigma_classifier(build_finset_mcat(0, "inj")).presheaf.sizes == (1,)


def test_sigma_is_a_separated_sheaf(inj_2, site_2):
    sigma = sigma_classifier(inj_2).presheaf
    assert is_separated(sigma, site_2)
    assert is_sheaf(sigma, site_2)


@pytest.mark.parametrize("d", [1, 2])
def test_sigma_classifies_m_psh_monos(inj_2, d):
    sigma = sigma_classifier(inj_2)
    for inclusion in subpresheaves(representable(inj_2.base, d)):
        if m_psh_member(inclusion, inj_2):
            assert len(characteristic_maps(sigma, inclusion)) == 1


@pytest.mark.parametrize("first, second, union", [
    ((0,), (0,), (0, 1)),
    ((0,), (), (0,)),
    ((), (), ()),
])
def test_sigma_amalgamation_is_join(inj_2, first, second, union):
    c = inj_2.base
    cover = [arrow(inj_2, 1, 2, (0,)), arrow(inj_2, 1, 2, (1,))]
    family = [arrow(inj_2, len(first), 1, first), arrow(inj_2, len(second), 1, second)]
    glued = sigma_amalgamate(inj_2, 2, cover, family)
    assert glued == arrow(inj_2, len(union), 2, union)

    sigma = sigma_classifier(inj_2).presheaf
    elements = [list(sigma.labels[a]) for a in c.object_ids()]
    x = elements[2].index(c.morphism(glued).name)
    for a_i, m_i in zip(cover, family):
        assert sigma.act(x, a_i) == elements[1].index(c.morphism(m_i).name)
