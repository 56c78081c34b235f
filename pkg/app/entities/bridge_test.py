from itertools import product

import pytest

from app.entities.bridge import (
    cocompletion_unit,
    f_tilde,
    f_tilde_map,
    g_dot,
    jrp_to_sheaf,
    roundtrip_report,
    sheaf_to_jrp,
    total_sections,
)
from app.entities.fixtures import build_finset_p, finset_name
from app.entities.par import ParMorphism, par_leq_oracle
from app.entities.presheaf import (
    check_functorial,
    check_natural,
    constant_presheaf,
    empty_presheaf,
    is_nat_iso,
    nat_identity,
    natural_isomorphism,
    representable,
    representable_map,
)
from app.entities.restriction_presheaf import (
    check_jrp_axioms,
    check_rp_axioms,
    element_leq,
    restriction_isomorphism,
    yoneda_jr,
)
from app.entities.site import generate_topology
from app.exception.domain_error import NotASheaf


def arrow(mc, a, b, values):
    return mc.base.morphism_id(finset_name(a, b, values))


def section(c, a, d, values):
    """Позиция отображения a -> d в y(d)(a)"""
    return c.hom(a, d).index(c.morphism_id(finset_name(a, d, values)))


@pytest.fixture(scope="module")
def site_2(inj_2):
    return generate_topology(inj_2)


@pytest.fixture(scope="module")
def y2_tilde(inj_2, par_inj_2, site_2):
    return sheaf_to_jrp(representable(inj_2.base, 2), par_inj_2, site_2)


@pytest.mark.parametrize("d", [0, 1, 2])
def test_f_tilde_of_representable_is_par_representable(inj_2, par_inj_2, d):
    q = f_tilde(representable(inj_2.base, d), par_inj_2)
    assert check_functorial(q.presheaf).ok
    assert check_rp_axioms(q).lines() == []
    assert restriction_isomorphism(q, yoneda_jr(par_inj_2, d)) is not None


def test_f_tilde_of_empty_presheaf_is_empty(inj_2, par_inj_2):
    q = f_tilde(empty_presheaf(inj_2.base), par_inj_2)
    assert q.presheaf.sizes == (0, 0, 0)


def test_f_tilde_counts_subobject_section_pairs(inj_2, par_inj_2):
    # над 2-множеством подобъекты ∅, {0}, {1}, 2: 1 + 2 + 2 + 4 сечений y(2)
    q = f_tilde(representable(inj_2.base, 2), par_inj_2)
    assert q.presheaf.sizes[2] == 9


def test_element_order_is_span_order(inj_2, par_inj_2):
    c = inj_2.base
    q = f_tilde(representable(c, 2), par_inj_2)

    def as_span(x):
        m, s = q.spans[2][x]
        return ParMorphism(source=2, target=2, monic=m, arrow=c.hom(c.src(m), 2)[s])

    for x, y in product(q.sections(2), repeat=2):
        assert element_leq(q, (2, x), (2, y)) == par_leq_oracle(inj_2, as_span(x), as_span(y))


@pytest.mark.parametrize("name, build", [
    ("y0", lambda c: representable(c, 0)),
    ("y1", lambda c: representable(c, 1)),
    ("y2", lambda c: representable(c, 2)),
    ("const2", lambda c: constant_presheaf(c, 2)),
])
def test_total_sections_of_f_tilde_recover_presheaf(inj_2, par_inj_2, name, build):
    p = build(inj_2.base)
    assert natural_isomorphism(g_dot(f_tilde(p, par_inj_2), par_inj_2), p) is not None


@pytest.mark.parametrize("d", [0, 1, 2])
def test_total_sections_of_par_representable(inj_2, par_inj_2, d):
    g = g_dot(yoneda_jr(par_inj_2, d), par_inj_2)
    assert check_functorial(g).ok
    assert natural_isomorphism(g, representable(inj_2.base, d)) is not None


def test_non_sheaf_has_no_join_recipe(inj_2, par_inj_2, site_2):
    p = constant_presheaf(inj_2.base, 2)
    with pytest.raises(NotASheaf):
        sheaf_to_jrp(p, par_inj_2, site_2)
    # над пустым подобъектом два несравнимых сечения: наименьшего элемента нет
    assert "JRP-JOIN" in check_jrp_axioms(f_tilde(p, par_inj_2)).tags()


@pytest.mark.parametrize("d", [1, 2])
def test_sheaf_transfer_passes_jrp_axioms(inj_2, par_inj_2, site_2, d):
    q = sheaf_to_jrp(representable(inj_2.base, d), par_inj_2, site_2)
    # JRP-LUB сверяет рецепт с точной верхней гранью
    assert check_jrp_axioms(q).lines() == []


def test_singleton_join_is_the_element(y2_tilde):
    for x in y2_tilde.sections(2):
        assert y2_tilde.join(2, (x,)) == x


def test_empty_join_is_nowhere_defined(inj_2, par_inj_2, y2_tilde):
    bottom = y2_tilde.join(2, ())
    nowhere = arrow(inj_2, 0, 2, ())
    assert y2_tilde.spans[2][bottom][0] == nowhere
    assert y2_tilde.bar(2, bottom) == par_inj_2.span_id(nowhere, nowhere)


def test_join_glues_sections_on_points(inj_2, y2_tilde):
    c = inj_2.base
    first = y2_tilde.index(2, arrow(inj_2, 1, 2, (0,)), section(c, 1, 2, (1,)))
    second = y2_tilde.index(2, arrow(inj_2, 1, 2, (1,)), section(c, 1, 2, (0,)))
    swap = y2_tilde.index(2, c.identity(2), section(c, 2, 2, (1, 0)))
    assert y2_tilde.join(2, (first, second)) == swap
    assert swap in total_sections(y2_tilde, y2_tilde.par)[2]


@pytest.mark.parametrize("d", [0, 1, 2])
def test_jrp_transfer_formula_matches_search(inj_2, par_inj_2, site_2, d):
    certificate = jrp_to_sheaf(yoneda_jr(par_inj_2, d), par_inj_2, site_2)
    assert certificate.report.lines() == []
    assert certificate.amalgamations
    for found in certificate.amalgamations:
        assert found.searched == (found.formula,)
    assert natural_isomorphism(certificate.presheaf, representable(inj_2.base, d)) is not None


def test_maximal_sieve_amalgamation_is_value_at_identity(inj_2, par_inj_2, site_2):
    c = inj_2.base
    certificate = jrp_to_sheaf(yoneda_jr(par_inj_2, 2), par_inj_2, site_2)
    for found in certificate.amalgamations:
        if len(found.sieve) == len(c.into(found.object)):
            identity = found.sieve.index(c.identity(found.object))
            assert found.formula == found.family[identity]


def test_two_piece_cover_is_glued(inj_2, par_inj_2, site_2):
    c = inj_2.base
    certificate = jrp_to_sheaf(yoneda_jr(par_inj_2, 2), par_inj_2, site_2)
    points = {arrow(inj_2, 1, 2, (0,)), arrow(inj_2, 1, 2, (1,))}
    covers = [f for f in certificate.amalgamations if f.object == 2 and points <= set(f.sieve)
              and c.identity(2) not in f.sieve]
    assert covers
    assert all(f.formula is not None for f in covers)


@pytest.mark.parametrize("d", [1, 2])
def test_roundtrip_from_sheaf(inj_2, par_inj_2, site_2, d):
    result = roundtrip_report(representable(inj_2.base, d), par_inj_2, site_2)
    assert result.direction == "to-jrp"
    assert result.report.lines() == []
    assert result.ok
    alpha, inverse = result.witness
    assert is_nat_iso(alpha)
    assert check_natural(inverse).ok


def test_roundtrip_stops_on_non_sheaf(inj_2, par_inj_2, site_2):
    result = roundtrip_report(constant_presheaf(inj_2.base, 2), par_inj_2, site_2)
    assert not result.ok
    assert result.checks["sheaf"] is False
    assert "SHEAF" in result.report.tags()
    assert result.witness is None


@pytest.mark.parametrize("d", [1, 2])
def test_roundtrip_from_join_restriction_presheaf(par_inj_2, site_2, d):
    result = roundtrip_report(yoneda_jr(par_inj_2, d), par_inj_2, site_2)
    assert result.direction == "to-sheaf"
    assert result.report.lines() == []
    assert result.witness is not None


def test_f_tilde_map_of_identity(inj_2, par_inj_2):
    p = representable(inj_2.base, 2)
    alpha = f_tilde_map(nat_identity(p), par_inj_2)
    assert alpha.components == nat_identity(alpha.source).components


def test_f_tilde_map_is_natural(inj_2, par_inj_2):
    c = inj_2.base
    for h in c.hom(1, 2):
        assert check_natural(f_tilde_map(representable_map(c, h), par_inj_2)).ok


@pytest.mark.parametrize("n, objects", [(0, 1), (1, 2)])
def test_cocompletion_unit_small(n, objects):
    result = cocompletion_unit(build_finset_p(n))
    assert result.report.lines() == []
    assert len(result.witnesses) == objects
    assert all(w.searched for w in result.witnesses)


def test_cocompletion_unit_of_trivial_category_is_terminal():
    result = cocompletion_unit(build_finset_p(0))
    assert result.witnesses[0].route.presheaf.sizes == (1,)


def test_cocompletion_unit_finset_p_2(finset_p_2):
    result = cocompletion_unit(finset_p_2)
    assert result.ok
    assert [w.object for w in result.witnesses] == [0, 1, 2]
    for witness in result.witnesses:
        assert is_nat_iso(witness.comparison)
