from __future__ import annotations

import logging
from typing import Optional, Sequence

from pydantic import BaseModel, ConfigDict, PrivateAttr

from app.entities.category import (
    FinCategory,
    Functor,
    category_from_composition,
    check_functor,
    pullback,
    wide_subcategory,
)
from app.entities.mcategory import MCategory, matching_colimit
from app.entities.restriction import (
    RestrictionCategory,
    check_idempotents_split,
    is_total,
    restriction_idempotents,
    total_morphisms,
)
from app.exception.domain_error import InternalInvariantBreach, NotParallel, UnsplitIdempotent

logger = logging.getLogger(__name__)


class ParMorphism(BaseModel):
    """Канонический представитель класса спанов (m, f): source <-m- apex -f-> target"""
    model_config = ConfigDict(frozen=True)

    source: int
    target: int
    monic: int
    arrow: int


class ParCategory(RestrictionCategory):
    """Par(C, M): морфизм с id i соответствует спану spans[i]"""

    spans: tuple[ParMorphism, ...]
    mcategory: MCategory

    _index: dict[tuple[int, int], int] = PrivateAttr(default_factory=dict)

    def span_id(self, monic: int, arrow: int) -> int:
        """id морфизма Par для произвольного (не обязательно канонического) спана"""
        if not self._index:
            self._index.update({(s.monic, s.arrow): i for i, s in enumerate(self.spans)})
        m, f = canonical_span(self.mcategory, monic, arrow)
        return self._index[(m, f)]

    def span(self, i: int) -> ParMorphism:
        return self.spans[i]


class KaroubiCategory(RestrictionCategory):
    """K_r(X): объекты (A, e), e идемпотент ограничения; морфизм помнит исходный морфизм X"""

    carriers: tuple[tuple[int, int], ...]
    underlying: tuple[int, ...]
    source: RestrictionCategory


def canonical_span(mc: MCategory, m: int, f: int) -> tuple[int, int]:
    """Среди (m∘φ, f∘φ), φ изоморфизм, выбирается минимальный по (apex, m∘φ, f∘φ)"""
    c = mc.base

    def compute() -> tuple[int, int]:
        best = min((c.src(phi), c.compose(m, phi), c.compose(f, phi)) for phi in mc.isos_into(c.src(m)))
        return best[1], best[2]

    return mc.memo("canonical_span", (m, f), compute)


def par(mc: MCategory) -> ParCategory:
    """
    Категория частичных отображений: морфизмы X -> Y это классы спанов (m, f), m ∈ M.
    Композиция через пулбэк, ограничение (m, f) ↦ (m, m)
    """
    c = mc.base
    classes: set[tuple[int, int]] = set()
    for m in sorted(mc.monics):
        for f in c.out_of(c.src(m)):
            classes.add(canonical_span(mc, m, f))

    identity_spans = {canonical_span(mc, c.identity(a), c.identity(a)) for a in c.object_ids()}

    def order(span: tuple[int, int]) -> tuple:
        m, f = span
        return c.tgt(m), c.tgt(f), span not in identity_spans, c.src(m), m, f

    ordered = sorted(classes, key=order)
    position = {span: i for i, span in enumerate(ordered)}

    def compose(g: int, f: int) -> int:
        m, f_arrow = ordered[f]
        n, g_arrow = ordered[g]
        cone = pullback(c, f_arrow, n)
        if cone is None:
            raise InternalInvariantBreach("par", f"no pullback of monic {n} along {f_arrow}")
        p, q = cone.legs
        return position[canonical_span(mc, c.compose(m, p), c.compose(g_arrow, q))]

    morphisms = [(c.tgt(m), c.tgt(f), f"({m},{f})") for m, f in ordered]
    identities = [position[canonical_span(mc, c.identity(a), c.identity(a))] for a in c.object_ids()]
    base = category_from_composition(f"Par({mc.name})", c.objects, morphisms, identities, compose)
    bar = tuple(position[canonical_span(mc, m, m)] for m, _ in ordered)
    spans = tuple(ParMorphism(source=c.tgt(m), target=c.tgt(f), monic=m, arrow=f) for m, f in ordered)
    logger.debug("built %s with %d morphisms", base.name, len(spans))
    return ParCategory(base=base, bar=bar, spans=spans, mcategory=mc)


def par_leq_witnesses(mc: MCategory, s: ParMorphism, t: ParMorphism) -> list[int]:
    """Все φ с n∘φ = m и g∘φ = f для s = (m, f), t = (n, g)"""
    if s.source != t.source or s.target != t.target:
        raise NotParallel(s.monic, t.monic)
    c = mc.base
    return [
        phi for phi in c.hom(c.src(s.monic), c.src(t.monic))
        if c.compose(t.monic, phi) == s.monic and c.compose(t.arrow, phi) == s.arrow
    ]


def par_leq_oracle(mc: MCategory, s: ParMorphism, t: ParMorphism) -> bool:
    """(m, f) ≤ (n, g) ⟺ существует φ: n∘φ = m, g∘φ = f"""
    witnesses = par_leq_witnesses(mc, s, t)
    if len(witnesses) > 1:
        logger.warning("mediating arrow is not unique for %s <= %s: %s", s, t, witnesses)
    return bool(witnesses)


def par_join_construction(p: ParCategory, source: int, target: int, members: Sequence[int]) -> Optional[int]:
    """
    Join совместимого семейства {(m_i, f_i)}: X -> Y по копределу диаграммы согласования.
    (μ, γ), где μ индуцированное отображение копредела в X, γ единственное с γ∘a_i = f_i
    """
    mc = p.mcategory
    c = mc.base
    spans = [p.spans[i] for i in members]
    found = matching_colimit(mc, source, [s.monic for s in spans])
    if found is None:
        return None
    cocone, mu = found
    if mu not in mc.monics:
        return None
    legs = dict(zip(sorted({s.monic for s in spans}), cocone.legs))
    for gamma in c.hom(cocone.apex, target):
        if all(c.compose(gamma, legs[s.monic]) == s.arrow for s in spans):
            return p.span_id(mu, gamma)
    return None


def retraction(x: RestrictionCategory, m: int) -> Optional[int]:
    """r с r∘m = 1 и m∘r = r̄ (для монизма ограничения m)"""
    c = x.base
    for r in c.hom(c.tgt(m), c.src(m)):
        if c.compose(r, m) == c.identity(c.src(m)) and c.compose(m, r) == x.bar[r]:
            return r
    return None


def restriction_monics(x: RestrictionCategory) -> tuple[int, ...]:
    """Тотальные m, у которых есть r: r∘m = 1, m∘r = r̄"""
    return tuple(m for m in x.base.morphism_ids() if is_total(x, m) and retraction(x, m) is not None)


def mtotal(x: RestrictionCategory) -> MCategory:
    """MTotal(X) = (Total(X), монизмы ограничения); X обязана быть расщепленной"""
    split = check_idempotents_split(x)
    if not split.ok:
        raise UnsplitIdempotent(split.violations[0].ids[0])
    sub, kept = wide_subcategory(x.base, total_morphisms(x), f"Total({x.name})")
    monics = set(restriction_monics(x))
    return MCategory(base=sub, monics=frozenset(i for i, f in enumerate(kept) if f in monics))


def mtotal_embedding(x: RestrictionCategory, mc: MCategory) -> Functor:
    """Вложение Total(X) -> X для результата mtotal"""
    _, kept = wide_subcategory(x.base, total_morphisms(x), mc.name)
    return Functor(
        source=mc.base, target=x.base, on_objects=tuple(x.base.object_ids()), on_morphisms=kept, name="total"
    )


def par_comparison(x: RestrictionCategory, p: Optional[ParCategory] = None) -> Functor:
    """
    Φ: Par(MTotal(X)) -> X, (m, g) ↦ g∘r_m, где r_m ретракция монизма ограничения m.
    Для расщепленной X это изоморфизм restriction-категорий
    """
    mc = mtotal(x) if p is None else p.mcategory
    p = par(mc) if p is None else p
    embed = mtotal_embedding(x, mc)
    c = x.base
    on_morphisms = []
    for span in p.spans:
        m, g = embed.fmap(span.monic), embed.fmap(span.arrow)
        r = retraction(x, m)
        if r is None:
            raise InternalInvariantBreach("par_comparison", f"monic {m} has no retraction")
        on_morphisms.append(c.compose(g, r))
    return Functor(
        source=p.base,
        target=c,
        on_objects=tuple(c.object_ids()),
        on_morphisms=tuple(on_morphisms),
        name=f"Par(MTotal({x.name}))->{x.name}",
    )


def par_functor(functor: Functor, source: ParCategory, target: ParCategory) -> Functor:
    """Par(F): (m, f) ↦ (F m, F f)"""
    on_morphisms = tuple(
        target.span_id(functor.fmap(s.monic), functor.fmap(s.arrow)) for s in source.spans
    )
    return Functor(
        source=source.base,
        target=target.base,
        on_objects=functor.on_objects,
        on_morphisms=on_morphisms,
        name=f"Par({functor.name})",
    )


def karoubi_r(x: RestrictionCategory) -> KaroubiCategory:
    """
    Расщепление идемпотентов ограничения: объекты (A, e), морфизмы f: A -> A' с f∘e = f и e'∘f = f.
    Объект (A, 1_A) стоит на месте A
    """
    c = x.base
    carriers = [(a, c.identity(a)) for a in c.object_ids()]
    for a in c.object_ids():
        for e in restriction_idempotents(x, a):
            if e != c.identity(a):
                carriers.append((a, e))

    morphisms: list[tuple[int, int, str]] = []
    underlying: list[int] = []
    lookup: dict[tuple[int, int, int], int] = {}
    for i, (a, e) in enumerate(carriers):
        for j, (b, e2) in enumerate(carriers):
            for f in c.hom(a, b):
                if c.compose(f, e) == f and c.compose(e2, f) == f:
                    lookup[(i, j, f)] = len(morphisms)
                    morphisms.append((i, j, c.morphism(f).name or str(f)))
                    underlying.append(f)

    def compose(g: int, f: int) -> int:
        return lookup[(morphisms[f][0], morphisms[g][1], c.compose(underlying[g], underlying[f]))]

    names = [c.objects[a] if e == c.identity(a) else f"({c.objects[a]},{e})" for a, e in carriers]
    identities = [lookup[(i, i, e)] for i, (_, e) in enumerate(carriers)]
    base = category_from_composition(f"K_r({x.name})", names, morphisms, identities, compose)
    bar = tuple(lookup[(s, s, x.bar[f])] for (s, _, _), f in zip(morphisms, underlying))
    return KaroubiCategory(base=base, bar=bar, carriers=tuple(carriers), underlying=tuple(underlying), source=x)


def karoubi_embedding(k: KaroubiCategory) -> Functor:
    """X -> K_r(X): A ↦ (A, 1_A), f ↦ f"""
    x = k.source
    lookup = {(k.base.src(i), k.base.tgt(i), f): i for i, f in enumerate(k.underlying)}
    return Functor(
        source=x.base,
        target=k.base,
        on_objects=tuple(x.base.object_ids()),
        on_morphisms=tuple(lookup[(x.base.src(f), x.base.tgt(f), f)] for f in x.base.morphism_ids()),
        name="karoubi embedding",
    )


def is_fully_faithful(functor: Functor) -> bool:
    """Функтор биективен на каждом hom-множестве"""
    if not check_functor(functor).ok:
        return False
    c, d = functor.source, functor.target
    for a in c.object_ids():
        for b in c.object_ids():
            image = {functor.fmap(f) for f in c.hom(a, b)}
            if len(image) != len(c.hom(a, b)) or image != set(d.hom(functor.fobj(a), functor.fobj(b))):
                return False
    return True


def is_isomorphism_functor(functor: Functor) -> bool:
    """Функтор биективен на объектах и морфизмах"""
    return (
        check_functor(functor).ok
        and sorted(functor.on_objects) == list(functor.target.object_ids())
        and sorted(functor.on_morphisms) == list(functor.target.morphism_ids())
    )


def isomorphic_objects(c: FinCategory, a: int, b: int) -> bool:
    for f in c.hom(a, b):
        for g in c.hom(b, a):
            if c.compose(g, f) == c.identity(a) and c.compose(f, g) == c.identity(b):
                return True
    return False
