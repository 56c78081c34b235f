from __future__ import annotations

import logging
from typing import Optional, Sequence

from pydantic import BaseModel, ConfigDict, PrivateAttr

from app.entities.category import FinCategory
from app.entities.law_report import LawReport
from app.entities.mcategory import (
    MCategory,
    canonical,
    is_geometric,
    matching_join,
    pullback_subobject,
    sub_m,
    subfamilies,
)
from app.entities.presheaf import (
    NatTrans,
    Presheaf,
    closed_subsets,
    is_nat_iso,
    nat_compose,
    nat_inverse,
    natural_transformations,
    representable,
    representable_map,
    require_mono,
    terminal_presheaf,
)
from app.exception.domain_error import InternalInvariantBreach, NotASheaf, NotGeometric

logger = logging.getLogger(__name__)


class Sieve(BaseModel):
    """Решето на объекте target: множество морфизмов в target, замкнутое относительно предкомпозиции"""
    model_config = ConfigDict(frozen=True)

    target: int
    arrows: frozenset[int]

    def key(self) -> tuple[int, ...]:
        return tuple(sorted(self.arrows))


class Topology(BaseModel):
    """Топология Гротендика, заданная перечнем покрывающих решет каждого объекта"""
    model_config = ConfigDict(frozen=True)

    category: FinCategory
    name: str = ""
    # covers[a] - покрывающие решета a как отсортированные кортежи id морфизмов
    covers: tuple[tuple[tuple[int, ...], ...], ...]

    _sets: dict[int, frozenset[frozenset[int]]] = PrivateAttr(default_factory=dict)

    def covering_set(self, a: int) -> frozenset[frozenset[int]]:
        if a not in self._sets:
            self._sets[a] = frozenset(frozenset(s) for s in self.covers[a])
        return self._sets[a]

    def covering(self, a: int) -> list[Sieve]:
        """Покрывающие решета a, максимальное первым"""
        return [Sieve(target=a, arrows=frozenset(s)) for s in _ordered(self.covering_set(a))]

    def covers_sieve(self, a: int, arrows: frozenset[int]) -> bool:
        return arrows in self.covering_set(a)


def _ordered(sieves) -> list[tuple[int, ...]]:
    return sorted((tuple(sorted(s)) for s in sieves), key=lambda s: (-len(s), s))


def _topology(c: FinCategory, covers: dict[int, set[frozenset[int]]], name: str) -> Topology:
    return Topology(
        category=c, name=name, covers=tuple(tuple(_ordered(covers[a])) for a in c.object_ids())
    )


def generated_sieve(c: FinCategory, target: int, arrows: Sequence[int]) -> frozenset[int]:
    """Наименьшее решето на target, содержащее arrows"""
    return frozenset(c.compose(h, k) for h in arrows for k in c.into(c.src(h)))


def is_sieve(c: FinCategory, target: int, arrows: frozenset[int]) -> bool:
    return all(c.tgt(h) == target for h in arrows) and generated_sieve(c, target, list(arrows)) == arrows


def maximal_sieve(c: FinCategory, a: int) -> frozenset[int]:
    return frozenset(c.into(a))


def pullback_sieve(c: FinCategory, arrows: frozenset[int], f: int) -> frozenset[int]:
    """f*S = {h : f∘h ∈ S}"""
    return frozenset(h for h in c.into(c.src(f)) if c.compose(f, h) in arrows)


def all_sieves(c: FinCategory, a: int) -> list[frozenset[int]]:
    """Все решета на a, от пустого к максимальному"""
    def compute() -> list[frozenset[int]]:
        found = closed_subsets(list(c.into(a)), lambda h: generated_sieve(c, a, [h]))
        return sorted(found, key=lambda s: (len(s), sorted(s)))
    return c.memo("sieves", a, compute)


def maximal_topology(c: FinCategory) -> Topology:
    """Покрывают только максимальные решета; для нее каждый предпучок пучок"""
    return _topology(c, {a: {maximal_sieve(c, a)} for a in c.object_ids()}, f"max({c.name})")


def basis_covers(mc: MCategory, max_family: Optional[int] = None) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """
    Базисные покрытия: семейства M-подобъектов (канонические представители),
    join которых в Sub_M(C) равен 1_C
    """
    report = is_geometric(mc, max_family)
    if not report.ok:
        raise NotGeometric(report.lines())
    result = []
    for a in mc.base.object_ids():
        poset = sub_m(mc, a)
        result.append(tuple(
            family for family in subfamilies(poset.elements, max_family)
            if matching_join(mc, a, family) == poset.top
        ))
    return tuple(result)


def saturate(c: FinCategory, seeds: dict[int, set[frozenset[int]]]) -> dict[int, set[frozenset[int]]]:
    """
    Наименьшая топология, содержащая seeds: замыкание по максимальности, расширению,
    устойчивости к пулбэкам и транзитивности до неподвижной точки
    """
    covers = {a: set(seeds.get(a, ())) | {maximal_sieve(c, a)} for a in c.object_ids()}
    rounds = 0
    changed = True
    while changed:
        changed = False
        rounds += 1
        for a in c.object_ids():
            for s in all_sieves(c, a):
                if s in covers[a]:
                    continue
                if any(r <= s for r in covers[a]):
                    covers[a].add(s)
                    changed = True
        for b in c.object_ids():
            for s in list(covers[b]):
                for f in c.into(b):
                    pulled = pullback_sieve(c, s, f)
                    if pulled not in covers[c.src(f)]:
                        covers[c.src(f)].add(pulled)
                        changed = True
        for a in c.object_ids():
            for r in all_sieves(c, a):
                if r in covers[a]:
                    continue
                for s in list(covers[a]):
                    if all(pullback_sieve(c, r, f) in covers[c.src(f)] for f in s):
                        covers[a].add(r)
                        changed = True
                        break
    logger.debug("saturated topology on %s in %d rounds", c.name, rounds)
    return covers


def generate_topology(mc: MCategory, max_family: Optional[int] = None) -> Topology:
    """Топология, порожденная базисными покрытиями"""
    c = mc.base
    basis = basis_covers(mc, max_family)
    seeds = {a: {generated_sieve(c, a, family) for family in basis[a]} for a in c.object_ids()}
    return _topology(c, saturate(c, seeds), f"J({mc.name})")


def resaturate(j: Topology) -> Topology:
    c = j.category
    return _topology(c, saturate(c, {a: set(j.covering_set(a)) for a in c.object_ids()}), j.name)


def check_topology(j: Topology) -> LawReport:
    """
    T-SIEVE набор не решето; T-MAX максимальное решето не покрывает;
    T-STABLE f*S не покрывает; T-TRANS решето R должно покрывать по транзитивности
    """
    c = j.category
    report = LawReport(subject=f"topology {j.name}")
    for a in c.object_ids():
        for s in j.covering_set(a):
            if not is_sieve(c, a, s):
                report.add("T-SIEVE", a, *sorted(s))
        if not j.covers_sieve(a, maximal_sieve(c, a)):
            report.add("T-MAX", a)
    if not report.ok:
        return report
    for b in c.object_ids():
        for s in j.covering_set(b):
            for f in c.into(b):
                if not j.covers_sieve(c.src(f), pullback_sieve(c, s, f)):
                    report.add("T-STABLE", f, *sorted(s))
    for a in c.object_ids():
        for r in all_sieves(c, a):
            if j.covers_sieve(a, r):
                continue
            for s in j.covering_set(a):
                if all(j.covers_sieve(c.src(f), pullback_sieve(c, r, f)) for f in s):
                    report.add("T-TRANS", a, *sorted(r))
                    break
    return report


def sieve_presheaf(c: FinCategory, sieve: Sieve) -> Presheaf:
    """Решето как подпредпучок y(target): сечения над b это стрелки решета из b"""
    rows = [sorted(h for h in sieve.arrows if c.src(h) == b) for b in c.object_ids()]
    position = {h: i for row in rows for i, h in enumerate(row)}
    return Presheaf(
        category=c,
        name=f"S{list(sieve.key())}",
        sizes=tuple(len(row) for row in rows),
        action=tuple(tuple(position[c.compose(h, f)] for h in rows[c.tgt(f)]) for f in c.morphism_ids()),
        labels=tuple(tuple(c.morphism(h).name or str(h) for h in row) for row in rows),
    )


def sieve_inclusion(c: FinCategory, sieve: Sieve) -> NatTrans:
    """S >-> y(target)"""
    source = sieve_presheaf(c, sieve)
    target = representable(c, sieve.target)
    components = []
    for b in c.object_ids():
        position = {h: i for i, h in enumerate(c.hom(b, sieve.target))}
        components.append(tuple(position[h] for h in sorted(h for h in sieve.arrows if c.src(h) == b)))
    return NatTrans(source=source, target=target, components=tuple(components), name="incl")


def matching_families(p: Presheaf, sieve: Sieve) -> list[tuple[int, ...]]:
    """Согласованные семейства для решета: значения x_h в порядке sieve.key()"""
    c = p.category
    s = sieve_presheaf(c, sieve)
    rows = {b: sorted(h for h in sieve.arrows if c.src(h) == b) for b in c.object_ids()}
    position = {h: (b, i) for b, row in rows.items() for i, h in enumerate(row)}
    families = []
    for alpha in natural_transformations(s, p):
        families.append(tuple(alpha.at(*position[h]) for h in sieve.key()))
    return families


def restrictions(p: Presheaf, sieve: Sieve, x: int) -> tuple[int, ...]:
    """(x·h) для h из решета в порядке sieve.key()"""
    return tuple(p.act(x, h) for h in sieve.key())


def amalgamations(p: Presheaf, sieve: Sieve, family: tuple[int, ...]) -> list[int]:
    return [x for x in p.sections(sieve.target) if restrictions(p, sieve, x) == family]


class SheafFailure(BaseModel):
    """Покрывающее решето и согласованное семейство, у которого не ровно одна склейка"""
    model_config = ConfigDict(frozen=True)

    object: int
    sieve: tuple[int, ...]
    family: tuple[int, ...]
    amalgamations: int


def sheaf_failures(p: Presheaf, j: Topology, first_only: bool = False) -> list[SheafFailure]:
    failures = []
    for a in p.category.object_ids():
        for sieve in j.covering(a):
            counts: dict[tuple[int, ...], int] = {}
            for x in p.sections(a):
                image = restrictions(p, sieve, x)
                counts[image] = counts.get(image, 0) + 1
            for family in matching_families(p, sieve):
                count = counts.get(family, 0)
                if count != 1:
                    failures.append(SheafFailure(object=a, sieve=sieve.key(), family=family, amalgamations=count))
                    if first_only:
                        return failures
    return failures


def is_sheaf(p: Presheaf, j: Topology) -> bool:
    return not sheaf_failures(p, j, first_only=True)


def is_separated(p: Presheaf, j: Topology) -> bool:
    """Не больше одной склейки: x ↦ (x·h)_h инъективно для каждого покрывающего решета"""
    for a in p.category.object_ids():
        for sieve in j.covering(a):
            images = [restrictions(p, sieve, x) for x in p.sections(a)]
            if len(set(images)) != len(images):
                return False
    return True


def require_sheaf(p: Presheaf, j: Topology) -> None:
    failures = sheaf_failures(p, j, first_only=True)
    if failures:
        f = failures[0]
        raise NotASheaf(p.name, f.object, f.sieve, f.family, f.amalgamations)


def sheaf_report(p: Presheaf, j: Topology) -> LawReport:
    """SHEAF-SEPARATED больше одной склейки; SHEAF-GLUE ни одной"""
    report = LawReport(subject=f"sheaf {p.name}")
    for failure in sheaf_failures(p, j):
        tag = "SHEAF-GLUE" if failure.amalgamations == 0 else "SHEAF-SEPARATED"
        report.add(tag, failure.object, *failure.sieve, note=f"family {list(failure.family)}")
    return report


# Класс P⁺(a): представитель (решето, семейство)
Representative = tuple[tuple[int, ...], tuple[int, ...]]


class PlusStage(BaseModel):
    """Один шаг плюс-конструкции: source, source⁺ и представители классов семейств"""
    model_config = ConfigDict(frozen=True)

    source: Presheaf
    result: Presheaf
    representatives: tuple[tuple[Representative, ...], ...]
    unit: NatTrans


def _equivalent(c: FinCategory, j: Topology, a: int, first: Representative, second: Representative) -> bool:
    """Семейства эквивалентны, если совпадают на покрывающем решете"""
    values_1 = dict(zip(*first))
    values_2 = dict(zip(*second))
    agree = frozenset(h for h, x in values_1.items() if values_2.get(h, -1) == x)
    return j.covers_sieve(a, agree)


def _class_of(j: Topology, stage_reps: Sequence[Representative], a: int, rep: Representative) -> Optional[int]:
    for k, other in enumerate(stage_reps):
        if _equivalent(j.category, j, a, rep, other):
            return k
    return None


def plus(p: Presheaf, j: Topology) -> PlusStage:
    """
    P⁺(a) - классы согласованных семейств по покрывающим решетам a,
    два семейства эквивалентны, если совпадают на общем покрывающем подрешете
    """
    c = p.category
    reps: list[list[Representative]] = []
    unit: list[tuple[int, ...]] = []
    for a in c.object_ids():
        classes: list[Representative] = []
        maximal = Sieve(target=a, arrows=maximal_sieve(c, a))
        row = []
        for x in p.sections(a):
            rep = (maximal.key(), restrictions(p, maximal, x))
            k = _class_of(j, classes, a, rep)
            if k is None:
                classes.append(rep)
                k = len(classes) - 1
            row.append(k)
        unit.append(tuple(row))
        for sieve in j.covering(a):
            for family in matching_families(p, sieve):
                rep = (sieve.key(), family)
                if _class_of(j, classes, a, rep) is None:
                    classes.append(rep)
        reps.append(classes)

    action = []
    for f in c.morphism_ids():
        b, a = c.src(f), c.tgt(f)
        row = []
        for arrows, family in reps[a]:
            values = dict(zip(arrows, family))
            pulled = pullback_sieve(c, frozenset(arrows), f)
            key = tuple(sorted(pulled))
            rep = (key, tuple(values[c.compose(f, h)] for h in key))
            k = _class_of(j, reps[b], b, rep)
            if k is None:
                raise InternalInvariantBreach("plus", f"restriction along {f} leaves the matching families")
            row.append(k)
        action.append(tuple(row))

    result = Presheaf(
        category=c,
        name=f"{p.name}⁺",
        sizes=tuple(len(classes) for classes in reps),
        action=tuple(action),
    )
    eta = NatTrans(source=p, target=result, components=tuple(unit), name="η⁺")
    return PlusStage(source=p, result=result, representatives=tuple(tuple(r) for r in reps), unit=eta)


class Sheafification(BaseModel):
    """a(P) = P⁺⁺ с единицей P => a(P)"""
    model_config = ConfigDict(frozen=True)

    sheaf: Presheaf
    unit: NatTrans
    stages: tuple[PlusStage, PlusStage]


def sheafify(p: Presheaf, j: Topology) -> Sheafification:
    first = plus(p, j)
    second = plus(first.result, j)
    sheaf = second.result.model_copy(update={"name": f"a({p.name})"})
    unit = nat_compose(second.unit, first.unit).model_copy(update={"target": sheaf, "name": "η"})
    logger.debug("sheafified %s: sizes %s -> %s", p.name, p.sizes, sheaf.sizes)
    return Sheafification(sheaf=sheaf, unit=unit, stages=(first, second))


def _plus_map(alpha: NatTrans, j: Topology, source: PlusStage, target: PlusStage) -> NatTrans:
    c = j.category
    components = []
    for a in c.object_ids():
        row = []
        for arrows, family in source.representatives[a]:
            rep = (arrows, tuple(alpha.at(c.src(h), x) for h, x in zip(arrows, family)))
            k = _class_of(j, target.representatives[a], a, rep)
            if k is None:
                raise InternalInvariantBreach("plus map", f"image family at object {a} is not matching")
            row.append(k)
        components.append(tuple(row))
    return NatTrans(source=source.result, target=target.result, components=tuple(components), name=f"{alpha.name}⁺")


def sheafify_map(
        alpha: NatTrans,
        j: Topology,
        source: Optional[Sheafification] = None,
        target: Optional[Sheafification] = None,
) -> NatTrans:
    """a(α): a(P) => a(Q)"""
    source = source or sheafify(alpha.source, j)
    target = target or sheafify(alpha.target, j)
    once = _plus_map(alpha, j, source.stages[0], target.stages[0])
    twice = _plus_map(once, j, source.stages[1], target.stages[1])
    return twice.model_copy(update={"source": source.sheaf, "target": target.sheaf, "name": f"a({alpha.name})"})


def _image(alpha: NatTrans) -> list[set[int]]:
    return [set(row) for row in alpha.components]


def _m_generated(mc: MCategory, d: int) -> set[frozenset[int]]:
    c = mc.base
    return mc.memo(
        "m_sieves", d, lambda: {generated_sieve(c, d, [m]) for m in c.into(d) if m in mc.monics}
    )


def m_psh_member(mu: NatTrans, mc: MCategory) -> bool:
    """
    μ: R >-> Q лежит в M_PSh: для каждого x ∈ Q(D), то есть y(D) => Q, пулбэк μ вдоль x
    есть решето, порожденное одним m ∈ M
    """
    require_mono(mu)
    c = mc.base
    q = mu.target
    image = _image(mu)
    for d in c.object_ids():
        for x in q.sections(d):
            pulled = frozenset(h for h in c.into(d) if q.act(x, h) in image[c.src(h)])
            if pulled not in _m_generated(mc, d):
                logger.debug("pullback along section %s over %s is not generated by an M-map", x, d)
                return False
    return True


def _section_map(q: Presheaf, d: int, x: int) -> NatTrans:
    """x ∈ Q(D) как отображение y(D) => Q, h ↦ Q(h)(x)"""
    c = q.category
    components = tuple(tuple(q.act(x, h) for h in c.hom(a, d)) for a in c.object_ids())
    return NatTrans(source=representable(c, d), target=q, components=components, name=f"⌜{x}⌝")


def _elements(alpha: NatTrans) -> frozenset[tuple[int, int]]:
    return frozenset((a, y) for a, row in enumerate(alpha.components) for y in row)


def m_sh_member(mu: NatTrans, mc: MCategory, j: Topology) -> bool:
    """
    μ: R >-> Q лежит в M_Sh: R и Q пучки, и для каждого x ∈ Q(D) пулбэк μ вдоль
    продолжения x̂: a(y(D)) => Q совпадает с образом a(y(m)) для некоторого m ∈ M
    """
    require_mono(mu)
    c = mc.base
    if not (is_sheaf(mu.source, j) and is_sheaf(mu.target, j)):
        return False
    q = mu.target
    q_sheaf = sheafify(q, j)
    if not is_nat_iso(q_sheaf.unit):
        raise InternalInvariantBreach("m_sh", f"unit of sheaf {q.name} is not invertible")
    back = nat_inverse(q_sheaf.unit)
    image = _image(mu)
    member = True
    for d in c.object_ids():
        yd = sheafify(representable(c, d), j)
        candidates = {
            _elements(sheafify_map(representable_map(c, m), j, target=yd))
            for m in c.into(d) if m in mc.monics
        }
        for x in q.sections(d):
            x_hat = nat_compose(back, sheafify_map(_section_map(q, d, x), j, source=yd, target=q_sheaf))
            pulled = frozenset(
                (a, e) for a in c.object_ids() for e in yd.sheaf.sections(a) if x_hat.at(a, e) in image[a]
            )
            if pulled not in candidates:
                logger.debug("pullback along a(y(%s)) section %s is not an M-image", d, x)
                member = False
                break
        if not member:
            break
    if member != m_psh_member(mu, mc):
        logger.warning("M_Sh membership of %s differs from M_PSh on sheaves over %s", mu.name, j.name)
    return member


class SigmaClassifier(BaseModel):
    """Σ(C) = Sub_M(C), действие пулбэком, top: 1 => Σ выбирает 1_C"""
    model_config = ConfigDict(frozen=True)

    presheaf: Presheaf
    top: NatTrans


def sigma_classifier(mc: MCategory) -> SigmaClassifier:
    c = mc.base
    elements = [sub_m(mc, a).elements for a in c.object_ids()]
    position = [{m: i for i, m in enumerate(row)} for row in elements]
    action = []
    for f in c.morphism_ids():
        row = []
        for m in elements[c.tgt(f)]:
            pulled = pullback_subobject(mc, f, m)
            if pulled is None:
                raise InternalInvariantBreach("sigma_classifier", f"no pullback of {m} along {f}")
            row.append(position[c.src(f)][pulled])
        action.append(tuple(row))
    sigma = Presheaf(
        category=c,
        name="Σ",
        sizes=tuple(len(row) for row in elements),
        action=tuple(action),
        labels=tuple(tuple(c.morphism(m).name or str(m) for m in row) for row in elements),
    )
    top = NatTrans(
        source=terminal_presheaf(c),
        target=sigma,
        components=tuple((position[a][sub_m(mc, a).top],) for a in c.object_ids()),
        name="τ",
    )
    return SigmaClassifier(presheaf=sigma, top=top)


def characteristic_maps(sigma: SigmaClassifier, mu: NatTrans) -> list[NatTrans]:
    """Все χ: Q => Σ, для которых квадрат μ, τ, χ - пулбэк: χ(x) = top ⟺ x ∈ образ μ"""
    require_mono(mu)
    image = _image(mu)
    tops = [row[0] for row in sigma.top.components]
    return natural_transformations(
        mu.target,
        sigma.presheaf,
        allowed=lambda a, x, y: (y == tops[a]) == (x in image[a]),
    )


def sigma_amalgamate(mc: MCategory, target: int, cover: Sequence[int], family: Sequence[int]) -> Optional[int]:
    """Склейка семейства подобъектов m_i ∈ Sub_M(C_i) над покрытием a_i: C_i -> C: ⋁ a_i∘m_i в Sub_M(C)"""
    c = mc.base
    composites = sorted({canonical(mc, c.compose(a, m)) for a, m in zip(cover, family)})
    return matching_join(mc, target, composites)
