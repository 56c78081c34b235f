from __future__ import annotations

import logging
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr

from app.entities.category import inverse, pullback
from app.entities.law_report import LawReport
from app.entities.mcategory import MCategory, canonical, matching_colimit, sub_m
from app.entities.par import (
    ParCategory,
    karoubi_embedding,
    karoubi_r,
    mtotal,
    par,
    par_comparison,
)
from app.entities.presheaf import (
    NatTrans,
    Presheaf,
    check_natural,
    is_nat_iso,
    natural_isomorphism,
    representable,
    representable_map,
    restrict_along,
    subpresheaves,
)
from app.entities.restriction import RestrictionCategory, is_total
from app.entities.restriction_presheaf import (
    JoinRestrictionPresheaf,
    RestrictionPresheaf,
    check_jrp_axioms,
    compatible_element_families,
    restriction_isomorphism,
    yoneda_jr,
    yoneda_map,
)
from app.entities.site import (
    Topology,
    amalgamations,
    generate_topology,
    is_sheaf,
    m_psh_member,
    matching_families,
    require_sheaf,
    sheaf_report,
)
from app.exception.domain_error import IncompatibleFamily, InternalInvariantBreach, NotASheaf, UnsplitIdempotent

logger = logging.getLogger(__name__)

# сечение P̃(X): (канонический M-подобъект m, сечение P над dom m)
Span = tuple[int, int]


def _canonical_pair(mc: MCategory, p: Presheaf, monic: int, section: int) -> Span:
    """(monic, section) ~ (monic∘φ, section·φ) для изоморфизма φ; выбирается канонический monic"""
    c = mc.base
    m = canonical(mc, monic)
    for phi in mc.isos_into(c.src(monic)):
        if c.compose(monic, phi) == m:
            return m, p.act(section, phi)
    raise InternalInvariantBreach("span presheaf", f"monic {monic} does not reach its canonical class {m}")


class SpanPresheaf(JoinRestrictionPresheaf):
    """
    P̃ на Par(C, M) для предпучка P на C: P̃(X) = {(m, s) | m ∈ Sub_M(X), s ∈ P(dom m)},
    x̄ = (m, m). Пары хранятся с каноническим m, поэтому представитель класса единственный
    """

    source: Presheaf
    par: ParCategory
    spans: tuple[tuple[Span, ...], ...]

    _positions: dict[tuple[int, Span], int] = PrivateAttr(default_factory=dict)

    def index(self, a: int, monic: int, section: int) -> int:
        """Позиция класса пары (monic, section) в P̃(a) для произвольного monic ∈ M"""
        if not self._positions:
            self._positions.update({(b, span): i for b, row in enumerate(self.spans) for i, span in enumerate(row)})
        return self._positions[(a, _canonical_pair(self.par.mcategory, self.source, monic, section))]


def f_tilde(p: Presheaf, pc: ParCategory) -> SpanPresheaf:
    """
    P ↦ P̃. Действие морфизма Par (n, g): Y -> X на (m, s) ∈ P̃(X) через пулбэк m вдоль g:
    (m, s)·(n, g) = (n∘q, s·r), где g∘q = m∘r
    """
    mc = pc.mcategory
    c = mc.base
    if p.category.objects != c.objects or len(p.category.morphisms) != len(c.morphisms):
        raise ValueError(f"presheaf {p.name} does not live on {mc.name}")

    spans = tuple(
        tuple((m, s) for m in sub_m(mc, a).elements for s in p.sections(c.src(m))) for a in c.object_ids()
    )
    position = {(a, span): i for a, row in enumerate(spans) for i, span in enumerate(row)}

    action = []
    for span in pc.spans:
        n, g = span.monic, span.arrow
        row = []
        for m, s in spans[span.target]:
            cone = pullback(c, g, m)
            if cone is None:
                raise InternalInvariantBreach("f_tilde", f"no pullback of monic {m} along {g}")
            q, r = cone.legs
            row.append(position[(span.source, _canonical_pair(mc, p, c.compose(n, q), p.act(s, r)))])
        action.append(tuple(row))

    labels = tuple(
        tuple(f"({c.morphism(m).name or m},{p.label(c.src(m), s)})" for m, s in row) for row in spans
    )
    presheaf = Presheaf(
        category=pc.base,
        name=f"{p.name}~",
        sizes=tuple(len(row) for row in spans),
        action=tuple(action),
        labels=labels,
    )
    element_bar = tuple(tuple(pc.span_id(m, m) for m, _ in row) for row in spans)
    logger.debug("built %s with sizes %s", presheaf.name, presheaf.sizes)
    return SpanPresheaf(presheaf=presheaf, category=pc, element_bar=element_bar, source=p, par=pc, spans=spans)


def f_tilde_map(
        alpha: NatTrans, pc: ParCategory, source: Optional[SpanPresheaf] = None, target: Optional[SpanPresheaf] = None
) -> NatTrans:
    """α̃: P̃ => Q̃, (m, s) ↦ (m, α(s))"""
    source = source or f_tilde(alpha.source, pc)
    target = target or f_tilde(alpha.target, pc)
    components = tuple(
        tuple(target.index(a, m, alpha.at(pc.mcategory.base.src(m), s)) for m, s in row)
        for a, row in enumerate(source.spans)
    )
    return NatTrans(source=source.presheaf, target=target.presheaf, components=components, name=f"{alpha.name}~")


def _total_span(pc: ParCategory, f: int) -> int:
    c = pc.mcategory.base
    return pc.span_id(c.identity(c.src(f)), f)


def total_sections(q: RestrictionPresheaf, pc: ParCategory) -> tuple[tuple[int, ...], ...]:
    """Позиции сечений с x̄ = (1, 1) по объектам"""
    return tuple(
        tuple(x for x in q.sections(a) if q.bar(a, x) == pc.base.identity(a)) for a in pc.base.object_ids()
    )


def g_dot(q: RestrictionPresheaf, pc: ParCategory) -> Presheaf:
    """Q ↦ Q̇ на C: тотальные сечения, Q̇(f) = Q(1, f)"""
    c = pc.mcategory.base
    totals = total_sections(q, pc)
    position = [{x: i for i, x in enumerate(row)} for row in totals]
    action = []
    for f in c.morphism_ids():
        u = _total_span(pc, f)
        row = []
        for x in totals[c.tgt(f)]:
            y = q.act(x, u)
            if y not in position[c.src(f)]:
                raise InternalInvariantBreach("g_dot", f"total section {x} restricts to a partial one along {f}")
            row.append(position[c.src(f)][y])
        action.append(tuple(row))
    return Presheaf(
        category=c,
        name=f"{q.name}·",
        sizes=tuple(len(row) for row in totals),
        action=tuple(action),
        labels=tuple(tuple(q.presheaf.label(a, x) for x in row) for a, row in enumerate(totals)),
    )


def _recipe_join(
        p: Presheaf, q: SpanPresheaf, mc: MCategory, a: int, members: frozenset[int]
) -> int:
    """(μ, γ): μ индуцирован копределом диаграммы согласования, γ единственная склейка сечений"""
    pieces = {q.spans[a][i][0]: q.spans[a][i][1] for i in members}
    found = matching_colimit(mc, a, list(pieces))
    if found is None or found[1] not in mc.monics:
        raise InternalInvariantBreach("sheaf_to_jrp", f"no M-join of subobjects {sorted(pieces)} of {a}")
    cocone, mu = found
    legs = dict(zip(sorted(pieces), cocone.legs))
    glued = [
        gamma for gamma in p.sections(cocone.apex)
        if all(p.act(gamma, legs[m]) == s for m, s in pieces.items())
    ]
    if len(glued) != 1:
        raise InternalInvariantBreach(
            "sheaf_to_jrp", f"family {sorted(members)} over {a} has {len(glued)} amalgamations on the colimit"
        )
    return q.index(a, mu, glued[0])


def sheaf_to_jrp(
        p: Presheaf,
        pc: ParCategory,
        j: Optional[Topology] = None,
        max_family: Optional[int] = None,
        verify: bool = True,
) -> SpanPresheaf:
    """P̃ с joins по рецепту (μ, γ) для пучка P"""
    mc = pc.mcategory
    if verify:
        require_sheaf(p, j or generate_topology(mc, max_family))
    q = f_tilde(p, pc)
    joins: dict[tuple[int, tuple[int, ...]], int] = {}
    for a in mc.base.object_ids():
        for members in compatible_element_families(q, a, max_family):
            joins[(a, tuple(sorted(members)))] = _recipe_join(p, q, mc, a, members)
    logger.info("transferred sheaf %s with %d stored joins", p.name, len(joins))
    return q.model_copy(update={"joins": joins})


class Amalgamation(BaseModel):
    """Склейка семейства по формуле x = ⋁ x_i·(a_i, 1) и склейки, найденные перебором"""
    model_config = ConfigDict(frozen=True)

    object: int
    sieve: tuple[int, ...]
    family: tuple[int, ...]
    formula: Optional[int]
    searched: tuple[int, ...]


class SheafCertificate(BaseModel):
    model_config = ConfigDict(frozen=True)

    presheaf: Presheaf
    totals: tuple[tuple[int, ...], ...]
    amalgamations: tuple[Amalgamation, ...]
    report: LawReport


def jrp_to_sheaf(q: JoinRestrictionPresheaf, pc: ParCategory, j: Optional[Topology] = None) -> SheafCertificate:
    """
    Q ↦ Q̇ с проверкой пучковости: для каждого покрывающего решета и согласованного семейства
    склейка считается как join ограничений x_i·(a_i, 1) по M-стрелкам решета.
    SHEAF-FORMULA формула не дала единственную склейку
    """
    mc = pc.mcategory
    c = mc.base
    j = j or generate_topology(mc)
    totals = total_sections(q, pc)
    g = g_dot(q, pc)
    report = LawReport(subject=f"sheaf {g.name}")
    found = []
    for a in c.object_ids():
        for sieve in j.covering(a):
            arrows = sieve.key()
            for family in matching_families(g, sieve):
                pieces = [
                    q.act(totals[c.src(h)][family[i]], pc.span_id(h, c.identity(c.src(h))))
                    for i, h in enumerate(arrows) if h in mc.monics
                ]
                try:
                    top = q.join(a, pieces)
                except IncompatibleFamily:
                    top = None
                formula = totals[a].index(top) if top in totals[a] else None
                searched = tuple(amalgamations(g, sieve, family))
                if formula is None or searched != (formula,):
                    report.add("SHEAF-FORMULA", a, *arrows, note=f"family {list(family)}")
                found.append(
                    Amalgamation(object=a, sieve=arrows, family=family, formula=formula, searched=searched)
                )
    report.extend(sheaf_report(g, j))
    return SheafCertificate(presheaf=g, totals=totals, amalgamations=tuple(found), report=report)


class TransferReport(BaseModel):
    """Свидетельство переноса на одном предпучке; заявленный изоморфизм всегда с парой взаимно обратных"""

    direction: Literal["to-jrp", "to-sheaf"]
    presheaf: str
    checks: dict[str, bool] = Field(default_factory=dict)
    witness: Optional[tuple[NatTrans, NatTrans]] = None
    report: LawReport = Field(default_factory=LawReport)

    @property
    def ok(self) -> bool:
        return self.report.ok and all(self.checks.values())


def roundtrip_report(
        p: Union[Presheaf, JoinRestrictionPresheaf],
        pc: ParCategory,
        j: Optional[Topology] = None,
        max_family: Optional[int] = None,
) -> TransferReport:
    """
    Пучок: P -> P̃ -> Ṗ̃ ≅ P, плюс M_PSh-подобъекты пучка снова пучки.
    Join restriction предпучок: Q -> Q̇ -> Q̇̃ ≅ Q с сохранением ограничений
    """
    mc = pc.mcategory
    j = j or generate_topology(mc, max_family)
    if isinstance(p, Presheaf):
        return _roundtrip_sheaf(p, pc, j, max_family)

    result = TransferReport(direction="to-sheaf", presheaf=p.name)
    result.report.extend(check_jrp_axioms(p, max_family))
    result.checks["jrp_axioms"] = result.report.ok
    cert = jrp_to_sheaf(p, pc, j)
    result.report.extend(cert.report)
    result.checks["sheaf"] = cert.report.ok
    if not cert.report.ok:
        return result
    back = sheaf_to_jrp(cert.presheaf, pc, j, max_family, verify=False)
    result.witness = restriction_isomorphism(back, p)
    result.checks["roundtrip_iso"] = result.witness is not None
    if result.witness is None:
        result.report.add("ROUNDTRIP-ISO", note=p.name)
    return result


def _roundtrip_sheaf(p: Presheaf, pc: ParCategory, j: Topology, max_family: Optional[int]) -> TransferReport:
    result = TransferReport(direction="to-jrp", presheaf=p.name)
    try:
        q = sheaf_to_jrp(p, pc, j, max_family)
    except NotASheaf as e:
        logger.info("roundtrip stopped: %s", e)
        result.checks["sheaf"] = False
        result.report.add("SHEAF", e.object_id, *e.sieve, note=f"family {list(e.family)}")
        return result
    result.checks["sheaf"] = True
    jrp = check_jrp_axioms(q, max_family)
    result.report.extend(jrp)
    result.checks["jrp_axioms"] = jrp.ok
    result.witness = natural_isomorphism(g_dot(q, pc), p)
    result.checks["roundtrip_iso"] = result.witness is not None
    if result.witness is None:
        result.report.add("ROUNDTRIP-ISO", note=p.name)

    subsheaves = True
    for i, inclusion in enumerate(subpresheaves(p)):
        if m_psh_member(inclusion, pc.mcategory) and not is_sheaf(inclusion.source, j):
            result.report.add("SUB-SHEAF", i)
            subsheaves = False
    result.checks["m_subobjects_are_sheaves"] = subsheaves
    return result


class UnitWitness(BaseModel):
    """Сравнение маршрута через Par(Sh) с y_jr на одном объекте"""

    object: int
    route: JoinRestrictionPresheaf
    comparison: NatTrans
    searched: bool


class UnitReport(BaseModel):
    category: str
    witnesses: list[UnitWitness] = Field(default_factory=list)
    report: LawReport = Field(default_factory=LawReport)

    @property
    def ok(self) -> bool:
        return self.report.ok


class _Route(BaseModel):
    """X -> K_r(X) ≅ Par(MTotal(K_r(X))) и обратное отображение на hom-множествах"""

    pc: ParCategory
    on_objects: tuple[int, ...]
    on_morphisms: tuple[int, ...]
    # морфизм Par -> морфизм X (для образов объектов X)
    back: dict[int, int]


def _route(x: RestrictionCategory) -> _Route:
    k = karoubi_r(x)
    try:
        mc = mtotal(k)
    except UnsplitIdempotent as e:
        raise InternalInvariantBreach("cocompletion_unit", f"K_r({x.name}) is not split: {e}")
    pc = par(mc)
    phi = par_comparison(k, pc)
    from_k = {f: i for i, f in enumerate(phi.on_morphisms)}
    embed = karoubi_embedding(k)
    on_morphisms = tuple(from_k[embed.fmap(f)] for f in x.base.morphism_ids())
    back = {u: f for f, u in enumerate(on_morphisms)}
    return _Route(pc=pc, on_objects=embed.on_objects, on_morphisms=on_morphisms, back=back)


def _route_presheaf(route: _Route, x: RestrictionCategory, q: SpanPresheaf) -> JoinRestrictionPresheaf:
    """Ограничение P̃ вдоль X -> Par, с переносом x̄ и сохраненных joins"""
    objects = route.on_objects
    presheaf = restrict_along(q.presheaf, x.base, objects, route.on_morphisms)
    element_bar = tuple(
        tuple(route.back[q.bar(objects[a], s)] for s in q.sections(objects[a])) for a in x.base.object_ids()
    )
    joins = {
        (a, members): top
        for a in x.base.object_ids()
        for (b, members), top in q.joins.items() if b == objects[a]
    }
    return JoinRestrictionPresheaf(presheaf=presheaf, category=x, element_bar=element_bar, joins=joins)


def _comparison(route: _Route, x: RestrictionCategory, q: SpanPresheaf, r: Presheaf, a: int) -> NatTrans:
    """(m, s) ↦ спан (m, s) ↦ его образ в X ↦ позиция в X(b, a)"""
    c = x.base
    pc = route.pc
    base = pc.mcategory.base
    d = route.on_objects[a]
    components = []
    for b in c.object_ids():
        hom = c.hom(b, a)
        row = []
        for m, s in q.spans[route.on_objects[b]]:
            g = base.hom(base.src(m), d)[s]
            f = route.back.get(pc.span_id(m, g))
            if f is None or f not in hom:
                raise InternalInvariantBreach("cocompletion_unit", f"span ({m},{g}) is not the image of a map {b} -> {a}")
            row.append(hom.index(f))
        components.append(tuple(row))
    return NatTrans(source=r, target=representable(c, a), components=tuple(components), name=f"η({c.objects[a]})")


def cocompletion_unit(x: RestrictionCategory, max_family: Optional[int] = None) -> UnitReport:
    """
    Для каждого объекта A: y(A) в Sh(MTotal(K_r(X))) (без пучкования, представимые уже пучки),
    перенос в join restriction предпучок на Par и ограничение вдоль X -> Par.
    Результат сравнивается с y_jr(A): явное сравнение, поиск изоморфизма и естественность по тотальным f.
    UNIT-SUBCANONICAL, UNIT-ISO, UNIT-BAR, UNIT-SEARCH, UNIT-NATURAL
    """
    route = _route(x)
    pc = route.pc
    mc = pc.mcategory
    j = generate_topology(mc, max_family)
    c = x.base
    result = UnitReport(category=x.name)

    transfers: dict[int, SpanPresheaf] = {}
    comparisons: dict[int, NatTrans] = {}
    for a in c.object_ids():
        d = route.on_objects[a]
        y = representable(mc.base, d)
        if not is_sheaf(y, j):
            result.report.add("UNIT-SUBCANONICAL", a)
            continue
        q = sheaf_to_jrp(y, pc, j, max_family, verify=False)
        r = _route_presheaf(route, x, q)
        direct = yoneda_jr(x, a, max_family)
        comparison = _comparison(route, x, q, r.presheaf, a)
        if not (check_natural(comparison).ok and is_nat_iso(comparison)):
            result.report.add("UNIT-ISO", a)
        elif any(
                direct.bar(b, comparison.at(b, s)) != r.bar(b, s) for b in c.object_ids() for s in r.sections(b)
        ):
            result.report.add("UNIT-BAR", a)
        searched = restriction_isomorphism(r, direct) is not None
        if not searched:
            result.report.add("UNIT-SEARCH", a)
        transfers[a], comparisons[a] = q, comparison
        result.witnesses.append(UnitWitness(object=a, route=r, comparison=comparison, searched=searched))

    for h in c.morphism_ids():
        a, b = c.src(h), c.tgt(h)
        if not is_total(x, h) or a not in comparisons or b not in comparisons:
            continue
        u = pc.spans[route.on_morphisms[h]]
        g = mc.base.compose(u.arrow, inverse(mc.base, u.monic))
        moved = f_tilde_map(representable_map(mc.base, g), pc, transfers[a], transfers[b])
        # сравнения коммутируют с y(h) и с переносом y(E h)
        left = [tuple(comparisons[b].at(o, moved.at(route.on_objects[o], s)) for s in range(len(row)))
                for o, row in enumerate(comparisons[a].components)]
        right = [tuple(yoneda_map(x, h).at(o, comparisons[a].at(o, s)) for s in range(len(row)))
                 for o, row in enumerate(comparisons[a].components)]
        if left != right:
            result.report.add("UNIT-NATURAL", h)
    logger.info("cocompletion unit for %s: %d violations", x.name, len(result.report.violations))
    return result

