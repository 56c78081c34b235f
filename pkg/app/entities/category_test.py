import pytest
from hypothesis import given, settings, strategies as st

from app.entities.category import (
    Diagram,
    category_from_composition,
    check_functor,
    colimit,
    find_isomorphism,
    identity_functor,
    inverse,
    is_mono,
    pullback,
    validate_category,
)
from app.entities.fixtures import build_finset, finset_name
from app.exception.domain_error import InvalidDiagram, NotACospan, UnknownMorphism


def values_of(c, f):
    return c.morphism(f).name.split(":")[1]


def one_morphism_category():
    return category_from_composition("1", ["*"], [(0, 0, "1")], [0], lambda g, f: 0)


def two_parallel_arrows():
    # X --f,g--> Y
    morphisms = [(0, 0, "1_X"), (1, 1, "1_Y"), (0, 1, "f"), (0, 1, "g")]

    def compose(g, f):
        return f if g in (0, 1) else g

    return category_from_composition("XY", ["X", "Y"], morphisms, [0, 1], compose)


def cospan_without_meet():
    # a -> t <- b, общей нижней грани нет
    morphisms = [(0, 0, "1_a"), (1, 1, "1_b"), (2, 2, "1_t"), (0, 2, "a"), (1, 2, "b")]

    def compose(g, f):
        return f if g < 3 else g

    return category_from_composition("poset", ["a", "b", "t"], morphisms, [0, 1, 2], compose)


def test_trivial_category_is_valid():
    assert validate_category(one_morphism_category()).ok


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_finset_is_a_category(n):
    assert validate_category(build_finset(n)).lines() == []


def test_mutated_left_identity_is_reported():
    c = two_parallel_arrows()
    comp = dict(c.comp)
    comp[(1, 2)] = 3  # 1_Y∘f := g
    mutant = c.model_copy(update={"comp": comp})
    report = validate_category(mutant)
    assert report.has("CAT-LEFT-ID", 2)
    assert not report.has("CAT-LEFT-ID", 3)


def test_missing_composite_is_reported():
    c = two_parallel_arrows()
    comp = dict(c.comp)
    del comp[(1, 3)]
    report = validate_category(c.model_copy(update={"comp": comp}))
    assert report.has("CAT-COMP-DOMAIN", 1, 3)


def test_unknown_morphism(finset_2):
    with pytest.raises(UnknownMorphism):
        finset_2.src(len(finset_2.morphisms))


def test_identities_are_mono(finset_2):
    assert all(is_mono(finset_2, finset_2.identity(a)) for a in finset_2.object_ids())


@pytest.mark.parametrize("name, expected", [
    (finset_name(2, 1, (0, 0)), False),  # константа 2 -> 1
    (finset_name(1, 2, (0,)), True),  # вложение точки
    (finset_name(2, 2, (1, 0)), True),  # перестановка
    (finset_name(2, 2, (1, 1)), False),
    (finset_name(0, 2, ()), True),  # пустое отображение
])
def test_is_mono(finset_2, name, expected):
    assert is_mono(finset_2, finset_2.morphism_id(name)) is expected


def test_is_mono_agrees_with_injectivity(finset_3):
    for f in finset_3.morphism_ids():
        values = values_of(finset_3, f)
        assert is_mono(finset_3, f) == (len(set(values)) == len(values))


def test_inverse_of_swap(finset_2):
    swap = finset_2.morphism_id(finset_name(2, 2, (1, 0)))
    assert inverse(finset_2, swap) == swap
    assert inverse(finset_2, finset_2.morphism_id(finset_name(2, 2, (0, 0)))) is None


def test_pullback_along_identity(finset_2):
    for f in finset_2.morphism_ids():
        cone = pullback(finset_2, f, finset_2.identity(finset_2.tgt(f)))
        assert cone.apex == finset_2.src(f)
        assert cone.legs == (finset_2.identity(finset_2.src(f)), f)


@pytest.mark.parametrize("first, second, meet_size", [
    ((0, 1), (1, 2), 1),
    ((0,), (1, 2), 0),
    ((0, 1), (0, 1), 2),
    ((0, 1, 2), (2,), 1),
])
def test_pullback_of_inclusions_is_intersection(finset_3, first, second, meet_size):
    m = finset_3.morphism_id(finset_name(len(first), 3, first))
    n = finset_3.morphism_id(finset_name(len(second), 3, second))
    cone = pullback(finset_3, m, n)
    assert cone.apex == meet_size
    p, q = cone.legs
    assert finset_3.compose(m, p) == finset_3.compose(n, q)


def test_pullback_missing_in_poset_without_meets():
    c = cospan_without_meet()
    assert pullback(c, 3, 4) is None


def test_pullback_rejects_non_cospan(finset_2):
    f = finset_2.morphism_id(finset_name(1, 2, (0,)))
    g = finset_2.morphism_id(finset_name(2, 1, (0, 0)))
    with pytest.raises(NotACospan):
        pullback(finset_2, f, g)


def test_colimit_of_empty_diagram_is_initial(finset_2):
    empty = category_from_composition("empty", [], [], [], lambda g, f: 0)
    diagram = Diagram(source=empty, target=finset_2, on_objects=(), on_morphisms=())
    cocone = colimit(finset_2, diagram)
    assert cocone.apex == 0
    assert cocone.legs == ()


def test_colimit_of_point_diagram(finset_2):
    point = one_morphism_category()
    for a in finset_2.object_ids():
        diagram = Diagram(source=point, target=finset_2, on_objects=(a,), on_morphisms=(finset_2.identity(a),))
        cocone = colimit(finset_2, diagram)
        assert cocone.apex == a
        assert cocone.legs == (finset_2.identity(a),)


def test_colimit_rejects_non_functorial_diagram(finset_2):
    point = one_morphism_category()
    swap = finset_2.morphism_id(finset_name(2, 2, (1, 0)))
    diagram = Diagram(source=point, target=finset_2, on_objects=(2,), on_morphisms=(swap,))
    with pytest.raises(InvalidDiagram):
        colimit(finset_2, diagram)


def test_identity_functor_is_a_functor(finset_2):
    assert check_functor(identity_functor(finset_2)).ok


def test_find_isomorphism_of_finset_with_itself(finset_2):
    iso = find_isomorphism(finset_2, finset_2)
    assert iso is not None
    assert check_functor(iso).ok
    assert sorted(iso.on_morphisms) == list(finset_2.morphism_ids())


def test_find_isomorphism_rejects_different_sizes(finset_2, finset_3):
    assert find_isomorphism(finset_2, finset_3) is None


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_composition_is_associative(finset_3, data):
    c = finset_3
    f = data.draw(st.sampled_from(list(c.morphism_ids())))
    g = data.draw(st.sampled_from(list(c.out_of(c.tgt(f)))))
    h = data.draw(st.sampled_from(list(c.out_of(c.tgt(g)))))
    assert c.compose(h, c.compose(g, f)) == c.compose(c.compose(h, g), f)
