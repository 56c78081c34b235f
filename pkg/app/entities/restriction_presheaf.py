from __future__ import annotations

import logging
from itertools import combinations
from typing import Iterable, Iterator, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.entities.category import category_from_composition
from app.entities.join import cliques, compatible_families, join_of
from app.entities.law_report import LawReport
from app.entities.presheaf import (
    NatTrans,
    Presheaf,
    check_natural,
    nat_compose,
    natural_isomorphism,
    natural_transformations,
    representable,
    representable_map,
    require_natural,
)
from app.entities.restriction import RestrictionCategory, restriction_idempotents
from app.exception.domain_error import ElementsFromDifferentObjects, IncompatibleFamily, InternalInvariantBreach

logger = logging.getLogger(__name__)

# элемент предпучка: (объект, сечение)
Element = tuple[int, int]


class RestrictionPresheaf(BaseModel):
    """Предпучок на restriction-категории с ограничением элементов x ↦ x̄ ∈ hom(a, a)"""
    model_config = ConfigDict(frozen=True)

    presheaf: Presheaf
    category: RestrictionCategory
    # element_bar[a][x] = id морфизма x̄
    element_bar: tuple[tuple[int, ...], ...]

    @model_validator(mode="after")
    def _check_bars(self) -> RestrictionPresheaf:
        if tuple(len(row) for row in self.element_bar) != self.presheaf.sizes:
            raise ValueError("element restriction must be given for every section")
        return self

    @property
    def name(self) -> str:
        return self.presheaf.name

    def sections(self, a: int) -> range:
        return self.presheaf.sections(a)

    def act(self, x: int, f: int) -> int:
        return self.presheaf.act(x, f)

    def bar(self, a: int, x: int) -> int:
        return self.element_bar[a][x]


class JoinRestrictionPresheaf(RestrictionPresheaf):
    """
    Restriction-предпучок с joins совместимых семейств элементов.
    joins хранит результаты рецепта построения; семейства вне него ищутся как точная верхняя грань
    """

    joins: dict[tuple[int, tuple[int, ...]], int] = Field(default_factory=dict)

    def join(self, a: int, members: Iterable[int]) -> Optional[int]:
        key = (a, tuple(sorted(set(members))))
        if key in self.joins:
            return self.joins[key]
        return element_join(self, a, key[1])


def trivial_restriction_presheaf(p: Presheaf, x: RestrictionCategory) -> RestrictionPresheaf:
    """Все x̄ = 1"""
    c = x.base
    return RestrictionPresheaf(
        presheaf=p,
        category=x,
        element_bar=tuple(tuple(c.identity(a) for _ in p.sections(a)) for a in c.object_ids()),
    )


def _require_same_object(x: Element, y: Element) -> None:
    if x[0] != y[0]:
        raise ElementsFromDifferentObjects(x, y)


def element_leq(p: RestrictionPresheaf, x: Element, y: Element) -> bool:
    """x ≤ y ⟺ x = y·x̄"""
    _require_same_object(x, y)
    a = x[0]
    return x[1] == p.act(y[1], p.bar(a, x[1]))


def element_compatible(p: RestrictionPresheaf, x: Element, y: Element) -> bool:
    """x·ȳ = y·x̄"""
    _require_same_object(x, y)
    a = x[0]
    return p.act(x[1], p.bar(a, y[1])) == p.act(y[1], p.bar(a, x[1]))


def element_join(p: RestrictionPresheaf, a: int, members: Sequence[int]) -> Optional[int]:
    """Точная верхняя грань совместимого семейства в порядке на P(a), поиском"""
    for s, t in combinations(sorted(set(members)), 2):
        if not element_compatible(p, (a, s), (a, t)):
            raise IncompatibleFamily(s, t)
    bounds = [u for u in p.sections(a) if all(element_leq(p, (a, s), (a, u)) for s in members)]
    for u in bounds:
        if all(element_leq(p, (a, u), (a, v)) for v in bounds):
            return u
    return None


def compatible_element_families(p: RestrictionPresheaf, a: int, max_size: Optional[int] = None) -> Iterator[frozenset[int]]:
    yield from cliques(
        tuple(p.sections(a)), lambda s, t: element_compatible(p, (a, s), (a, t)), max_size
    )


def check_rp_axioms(p: RestrictionPresheaf) -> LawReport:
    """
    RP-BAR-TYPE x̄ не эндоморфизм a; RP-IDEM x̄ не идемпотент ограничения;
    RP1 x·x̄ = x; RP2 (x·ē)‾ = x̄∘ē; RP3 x̄∘g = g∘(x·g)‾;
    RP-L1 ḡ∘(x·g)‾ = (x·g)‾; RP-L2 (x̄∘g)‾ = (x·g)‾ (следствия, только при чистых RP1–RP3)
    """
    x_cat = p.category
    c = x_cat.base
    report = LawReport(subject=f"restriction presheaf {p.name}")
    for a in c.object_ids():
        for x in p.sections(a):
            e = p.bar(a, x)
            if not 0 <= e < len(c.morphisms) or c.src(e) != a or c.tgt(e) != a:
                report.add("RP-BAR-TYPE", a, x)
            elif x_cat.bar[e] != e:
                report.add("RP-IDEM", a, x)
    if not report.ok:
        return report

    for a in c.object_ids():
        idempotents = restriction_idempotents(x_cat, a)
        for x in p.sections(a):
            xb = p.bar(a, x)
            if p.act(x, xb) != x:
                report.add("RP1", a, x)
            for e in idempotents:
                if p.bar(a, p.act(x, e)) != c.compose(xb, e):
                    report.add("RP2", a, x, e)
            for g in c.into(a):
                if c.compose(xb, g) != c.compose(g, p.bar(c.src(g), p.act(x, g))):
                    report.add("RP3", a, x, g)
    if not report.ok:
        return report

    for a in c.object_ids():
        for x in p.sections(a):
            for g in c.into(a):
                b = c.src(g)
                restricted = p.bar(b, p.act(x, g))
                if c.compose(x_cat.bar[g], restricted) != restricted:
                    report.add("RP-L1", a, x, g)
                if x_cat.bar[c.compose(p.bar(a, x), g)] != restricted:
                    report.add("RP-L2", a, x, g)
    return report


def check_jrp_axioms(p: JoinRestrictionPresheaf, max_family: Optional[int] = None) -> LawReport:
    """
    Для каждого совместимого S ⊆ P(a):
    JRP-JOIN нет ⋁S; JRP-LUB заданный join не точная верхняя грань;
    JRP1 (⋁S)‾ = ⋁s̄; JRP2 (⋁S)·g = ⋁(s·g);
    JRP-POST x·(⋁T) = ⋁(x·t) для совместимых T ⊆ hom(b, a) (только при чистых JRP1/JRP2)
    """
    x_cat = p.category
    c = x_cat.base
    report = LawReport(subject=f"join restriction presheaf {p.name}")
    report.extend(check_rp_axioms(p))
    if not report.ok:
        return report
    for a in c.object_ids():
        for members in compatible_element_families(p, a, max_family):
            ids = tuple(sorted(members))
            top = p.join(a, ids)
            if top is None:
                report.add("JRP-JOIN", a, *ids)
                continue
            if element_join(p, a, ids) != top:
                report.add("JRP-LUB", a, *ids)
            bars = join_of(x_cat, a, a, (p.bar(a, s) for s in ids))
            if bars is None or p.bar(a, top) != bars:
                report.add("JRP1", a, *ids)
            for g in c.into(a):
                pulled = p.join(c.src(g), (p.act(s, g) for s in ids))
                if pulled is None or p.act(top, g) != pulled:
                    report.add("JRP2", a, g, *ids)
    if not report.ok:
        return report

    for a in c.object_ids():
        for b in c.object_ids():
            for members in compatible_families(x_cat, b, a, max_family):
                total = join_of(x_cat, b, a, members)
                if total is None:
                    continue
                for x in p.sections(a):
                    joined = p.join(b, (p.act(x, t) for t in members))
                    if joined is None or p.act(x, total) != joined:
                        logger.warning("post-composition identity fails for %s at %s", p.name, (a, x))
                        report.add("JRP-POST", a, x, *sorted(members))
    return report


def collage(p: RestrictionPresheaf) -> RestrictionCategory:
    """
    Категория с объектами X и ⋆: hom(A, B) = X(A, B), hom(A, ⋆) = P(A), hom(⋆, ⋆) = {1_⋆}.
    Ограничение на элементах это x̄
    """
    x_cat = p.category
    c = x_cat.base
    star = len(c.objects)
    morphisms = [(c.src(f), c.tgt(f), c.morphism(f).name) for f in c.morphism_ids()]
    identity_star = len(morphisms)
    morphisms.append((star, star, "1_⋆"))
    element_id: dict[Element, int] = {}
    for a in c.object_ids():
        for x in p.sections(a):
            element_id[(a, x)] = len(morphisms)
            morphisms.append((a, star, f"⟨{p.presheaf.label(a, x)}⟩"))
    element_of = {i: e for e, i in element_id.items()}

    def compose(g: int, f: int) -> int:
        if g < identity_star:
            return c.compose(g, f)
        if g == identity_star:
            return f
        a, x = element_of[g]
        return element_id[(c.src(f), p.act(x, f))]

    base = category_from_composition(
        f"collage({p.name})", [*c.objects, "⋆"], morphisms, [*c.identities, identity_star], compose
    )
    bar = [*x_cat.bar, identity_star]
    bar.extend(p.bar(a, x) for a, x in sorted(element_id, key=element_id.get))
    return RestrictionCategory(base=base, bar=tuple(bar))


def hom_restriction(alpha: NatTrans, p: RestrictionPresheaf, q: RestrictionPresheaf) -> NatTrans:
    """ᾱ: P => P, ᾱ_a(x) = x·(α_a(x))‾"""
    require_natural(alpha)
    components = tuple(
        tuple(p.act(x, q.bar(a, alpha.at(a, x))) for x in p.sections(a)) for a in p.category.base.object_ids()
    )
    return NatTrans(source=p.presheaf, target=p.presheaf, components=components, name=f"{alpha.name}‾")


def nat_compatible(alpha: NatTrans, beta: NatTrans, p: RestrictionPresheaf, q: RestrictionPresheaf) -> bool:
    """α∘β̄ = β∘ᾱ"""
    left = nat_compose(alpha, hom_restriction(beta, p, q))
    return left.components == nat_compose(beta, hom_restriction(alpha, p, q)).components


def nat_leq(alpha: NatTrans, beta: NatTrans, p: RestrictionPresheaf, q: RestrictionPresheaf) -> bool:
    """α ≤ β ⟺ α = β∘ᾱ"""
    return alpha.components == nat_compose(beta, hom_restriction(alpha, p, q)).components


def nat_join(p: RestrictionPresheaf, q: JoinRestrictionPresheaf, members: Sequence[NatTrans]) -> NatTrans:
    """(⋁α)_a(x) = ⋁ α_a(x); пустое семейство дает наименьшее преобразование"""
    for i, j in combinations(range(len(members)), 2):
        if not nat_compatible(members[i], members[j], p, q):
            raise IncompatibleFamily(i, j)
    components = []
    for a in p.category.base.object_ids():
        row = []
        for x in p.sections(a):
            top = q.join(a, (alpha.at(a, x) for alpha in members))
            if top is None:
                raise InternalInvariantBreach("nat_join", f"no join of component values at {(a, x)}")
            row.append(top)
        components.append(tuple(row))
    result = NatTrans(source=p.presheaf, target=q.presheaf, components=tuple(components), name="⋁")
    if not check_natural(result).ok:
        raise InternalInvariantBreach("nat_join", "componentwise join is not natural")
    return result


def yoneda_jr(x: RestrictionCategory, a: int, max_family: Optional[int] = None) -> JoinRestrictionPresheaf:
    """X(-, a) с ограничением и joins из X"""
    c = x.base
    p = representable(c, a)
    joins: dict[tuple[int, tuple[int, ...]], int] = {}
    for b in c.object_ids():
        position = {h: i for i, h in enumerate(c.hom(b, a))}
        for members in compatible_families(x, b, a, max_family):
            top = join_of(x, b, a, members)
            if top is not None:
                joins[(b, tuple(sorted(position[h] for h in members)))] = position[top]
    return JoinRestrictionPresheaf(
        presheaf=p,
        category=x,
        element_bar=tuple(tuple(x.bar[h] for h in c.hom(b, a)) for b in c.object_ids()),
        joins=joins,
    )


def yoneda_map(x: RestrictionCategory, h: int) -> NatTrans:
    """y(h): X(-, a) => X(-, b) посткомпозицией"""
    return representable_map(x.base, h)


def restriction_isomorphism(
        p: RestrictionPresheaf, q: RestrictionPresheaf
) -> Optional[tuple[NatTrans, NatTrans]]:
    """Естественный изоморфизм, сохраняющий ограничения элементов (перебор с отсечением по x̄)"""
    return natural_isomorphism(p.presheaf, q.presheaf, allowed=lambda a, x, y: p.bar(a, x) == q.bar(a, y))


def check_hom_restriction_axioms(
        p: RestrictionPresheaf, q: RestrictionPresheaf, bound: Optional[int] = None, seed: int = 0
) -> LawReport:
    """
    R1–R4 для ограничения α ↦ ᾱ на Nat(P, Q) и Nat(P, P); индексы это позиции в переборе.
    PSHR-R1 α∘ᾱ = α; PSHR-R2 ᾱ∘β̄ = β̄∘ᾱ; PSHR-R3 (β∘ᾱ)‾ = β̄∘ᾱ; PSHR-R4 β̄∘γ = γ∘(β∘γ)‾
    """
    report = LawReport(subject=f"hom restriction {p.name} => {q.name}")
    arrows = natural_transformations(p.presheaf, q.presheaf, bound, seed)
    endos = natural_transformations(p.presheaf, p.presheaf, bound, seed)
    bars = [hom_restriction(alpha, p, q) for alpha in arrows]

    for i, alpha in enumerate(arrows):
        if nat_compose(alpha, bars[i]).components != alpha.components:
            report.add("PSHR-R1", i)
        for k, beta in enumerate(arrows):
            if nat_compose(bars[i], bars[k]).components != nat_compose(bars[k], bars[i]).components:
                report.add("PSHR-R2", i, k)
            restricted = hom_restriction(nat_compose(beta, bars[i]), p, q)
            if restricted.components != nat_compose(bars[k], bars[i]).components:
                report.add("PSHR-R3", i, k)
    for k, beta in enumerate(arrows):
        for g, gamma in enumerate(endos):
            restricted = hom_restriction(nat_compose(beta, gamma), p, q)
            if nat_compose(bars[k], gamma).components != nat_compose(gamma, restricted).components:
                report.add("PSHR-R4", k, g)
    logger.debug("checked hom restriction on %d x %d transformations", len(arrows), len(endos))
    return report
