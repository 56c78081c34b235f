from __future__ import annotations

import logging
from itertools import combinations
from typing import Callable, Hashable, Iterator, Optional, Sequence

from pydantic import BaseModel, ConfigDict, PrivateAttr

from app.entities.category import (
    Cocone,
    Diagram,
    FinCategory,
    Functor,
    category_from_composition,
    check_functor,
    colimit,
    inverse,
    is_mono,
    pullback,
)
from app.entities.law_report import LawReport

logger = logging.getLogger(__name__)


class MCategory(BaseModel):
    """Конечная категория с выделенной стабильной системой мономорфизмов M"""
    model_config = ConfigDict(frozen=True)

    base: FinCategory
    monics: frozenset[int]

    _memo: dict[tuple, object] = PrivateAttr(default_factory=dict)

    @property
    def name(self) -> str:
        return self.base.name

    def is_m(self, f: int) -> bool:
        return f in self.monics

    def memo(self, kind: str, key: Hashable, compute: Callable[[], object]):
        slot = (kind, key)
        if slot not in self._memo:
            self._memo[slot] = compute()
        return self._memo[slot]

    def isos_into(self, a: int) -> tuple[int, ...]:
        """Изоморфизмы с кодоменом a, по возрастанию id"""
        return self.memo(
            "isos_into", a, lambda: tuple(f for f in self.base.into(a) if inverse(self.base, f) is not None)
        )


class SubMPoset(BaseModel):
    """Sub_M(C): канонические представители M-подобъектов C, top = класс 1_C"""
    model_config = ConfigDict(frozen=True)

    object: int
    elements: tuple[int, ...]
    top: int


class MatchingDiagram(BaseModel):
    """
    Диаграмма попарных пулбэков семейства M-подобъектов {m_i: A_i -> A}.
    Объекты формы: сначала A_i, затем пары A_iA_j (i < j) со стрелками в A_i и A_j
    """
    model_config = ConfigDict(frozen=True)

    target: int
    family: tuple[int, ...]
    diagram: Diagram


def check_m_system(mc: MCategory) -> LawReport:
    """
    M-MONO m не моно; M-ISO изоморфизм вне M; M-COMP композиция вне M;
    M-PULLBACK нет пулбэка m вдоль f; M-STABLE пулбэк m вдоль f вне M
    """
    c = mc.base
    report = LawReport(subject=f"M-system {mc.name}")
    for m in sorted(mc.monics):
        if not is_mono(c, m):
            report.add("M-MONO", m)
    for f in c.morphism_ids():
        if f not in mc.monics and inverse(c, f) is not None:
            report.add("M-ISO", f)
    for f in sorted(mc.monics):
        for g in c.out_of(c.tgt(f)):
            if g in mc.monics and c.compose(g, f) not in mc.monics:
                report.add("M-COMP", g, f)
    for m in sorted(mc.monics):
        for f in c.into(c.tgt(m)):
            cone = pullback(c, m, f)
            if cone is None:
                report.add("M-PULLBACK", m, f)
            elif cone.legs[1] not in mc.monics:
                report.add("M-STABLE", m, f)
    return report


def canonical(mc: MCategory, m: int) -> int:
    """Канонический представитель класса подобъекта m: наименьший id среди m∘φ, φ изоморфизм"""
    def compute() -> int:
        return min(mc.base.compose(m, phi) for phi in mc.isos_into(mc.base.src(m)))
    return mc.memo("canonical", m, compute)


def sub_leq(mc: MCategory, m: int, n: int) -> bool:
    """m ≤ n в Sub_M, если m пропускается через n"""
    c = mc.base
    return any(c.compose(n, phi) == m for phi in c.hom(c.src(m), c.src(n)))


def sub_m(mc: MCategory, a: int) -> SubMPoset:
    def compute() -> SubMPoset:
        elements = sorted({canonical(mc, m) for m in mc.base.into(a) if m in mc.monics})
        return SubMPoset(object=a, elements=tuple(elements), top=canonical(mc, mc.base.identity(a)))
    return mc.memo("sub_m", a, compute)


def pullback_subobject(mc: MCategory, f: int, m: int) -> Optional[int]:
    """f*(m): канонический класс ноги пулбэка m вдоль f, противоположной m"""
    cone = pullback(mc.base, m, f)
    if cone is None:
        return None
    return canonical(mc, cone.legs[1])


def meet(mc: MCategory, m: int, n: int) -> Optional[int]:
    """m ∧ n через пулбэк"""
    cone = pullback(mc.base, m, n)
    if cone is None:
        return None
    return canonical(mc, mc.base.compose(m, cone.legs[0]))


def subfamilies(elements: Sequence[int], max_size: Optional[int] = None) -> Iterator[tuple[int, ...]]:
    """Подсемейства по возрастанию размера, пустое первым"""
    top = len(elements) if max_size is None else min(max_size, len(elements))
    for size in range(top + 1):
        yield from combinations(elements, size)


def matching_diagram(mc: MCategory, target: int, family: Sequence[int]) -> MatchingDiagram:
    c = mc.base
    family = tuple(family)
    k = len(family)
    pairs = list(combinations(range(k), 2))
    names = [f"A{i}" for i in range(k)] + [f"A{i}A{j}" for i, j in pairs]
    shape_morphisms = [(j, j, f"1_{names[j]}") for j in range(len(names))]
    on_objects = [c.src(m) for m in family]
    on_morphisms = [c.identity(a) for a in on_objects]
    pair_identities = []
    pair_arrows = []
    for position, (i, j) in enumerate(pairs):
        cone = pullback(c, family[i], family[j])
        if cone is None:
            # M-система без пулбэка: check_m_system уже сообщает об этом
            raise ValueError(f"no pullback of {family[i]} and {family[j]}")
        pair = k + position
        on_objects.append(cone.apex)
        pair_identities.append(c.identity(cone.apex))
        pair_arrows.append((pair, i, cone.legs[0]))
        pair_arrows.append((pair, j, cone.legs[1]))
    on_morphisms.extend(pair_identities)
    for pair, single, leg in pair_arrows:
        shape_morphisms.append((pair, single, f"{names[pair]}>{names[single]}"))
        on_morphisms.append(leg)

    n_objects = len(names)

    def compose(g: int, f: int) -> int:
        # неединичные стрелки не компонуются друг с другом
        if g < n_objects:
            return f
        return g

    shape = category_from_composition("matching", names, shape_morphisms, list(range(n_objects)), compose)
    diagram = Diagram(
        source=shape, target=c, on_objects=tuple(on_objects), on_morphisms=tuple(on_morphisms), name="matching"
    )
    return MatchingDiagram(target=target, family=family, diagram=diagram)


def matching_colimit(mc: MCategory, target: int, family: Sequence[int]) -> Optional[tuple[Cocone, int]]:
    """
    Копредел диаграммы согласования и индуцированное отображение μ в target.
    None, если копредела нет
    """
    family = tuple(sorted(set(family)))

    def compute() -> Optional[tuple[Cocone, int]]:
        c = mc.base
        md = matching_diagram(mc, target, family)
        cocone = colimit(c, md.diagram)
        if cocone is None:
            return None
        for mu in c.hom(cocone.apex, target):
            if all(c.compose(mu, cocone.legs[i]) == m for i, m in enumerate(family)):
                return cocone, mu
        return None

    return mc.memo("matching_colimit", (target, family), compute)


def matching_join(mc: MCategory, target: int, family: Sequence[int]) -> Optional[int]:
    """Join в Sub_M(target) как индуцированное отображение копредела; None, если его нет или μ вне M"""
    found = matching_colimit(mc, target, family)
    if found is None or found[1] not in mc.monics:
        return None
    return canonical(mc, found[1])


def is_geometric(mc: MCategory, max_family: Optional[int] = None) -> LawReport:
    """
    Для каждого объекта A и каждого семейства из Sub_M(A):
    G-COLIMIT нет копредела; G-INDUCED μ вне M; G-STABLE пулбэк вдоль f не коммутирует с копределом.
    Для каждого объекта в отчет попадает только первое провальное семейство
    """
    c = mc.base
    report = LawReport(subject=f"geometric {mc.name}")
    for a in c.object_ids():
        for family in subfamilies(sub_m(mc, a).elements, max_family):
            failure = _geometric_failure(mc, a, family)
            if failure is not None:
                tag, extra = failure
                note = f"object {a}" if family else f"object {a}, empty family"
                report.add(tag, *extra, *family, note=note)
                logger.info("%s fails at object %s with family %s", mc.name, a, list(family))
                break
    return report


def _geometric_failure(mc: MCategory, a: int, family: tuple[int, ...]) -> Optional[tuple[str, tuple[int, ...]]]:
    c = mc.base
    found = matching_colimit(mc, a, family)
    if found is None:
        return "G-COLIMIT", ()
    _, mu = found
    if mu not in mc.monics:
        return "G-INDUCED", ()
    for f in c.into(a):
        pulled = sorted({pullback_subobject(mc, f, m) for m in family})
        expected = pullback_subobject(mc, f, mu)
        if None in pulled or expected is None or matching_join(mc, c.src(f), pulled) != expected:
            return "G-STABLE", (f,)
    return None


def heyting_check(mc: MCategory, a: int, max_family: Optional[int] = None) -> LawReport:
    """
    H-DISTRIB m ∧ ⋁N = ⋁(m ∧ n); H-IMPLIES k ≤ (m ⇒ n) ⟺ k ∧ m ≤ n,
    где m ⇒ n = ⋁{k : k ∧ m ≤ n}
    """
    report = LawReport(subject=f"heyting {mc.name} at {a}")
    elements = sub_m(mc, a).elements
    for m in elements:
        for family in subfamilies(elements, max_family):
            top = matching_join(mc, a, family)
            meets = [meet(mc, m, n) for n in family]
            rhs = None if None in meets else matching_join(mc, a, meets)
            lhs = None if top is None else meet(mc, m, top)
            if lhs is None or rhs is None or lhs != rhs:
                report.add("H-DISTRIB", m, *family)

    for m in elements:
        for n in elements:
            below = [k for k in elements if sub_leq(mc, meet(mc, k, m), n)]
            implication = matching_join(mc, a, below)
            if implication is None:
                report.add("H-IMPLIES", m, n, note="no implication")
                continue
            for k in elements:
                if sub_leq(mc, k, implication) != sub_leq(mc, meet(mc, k, m), n):
                    report.add("H-IMPLIES", m, n, k)
    return report


def heyting_implication(mc: MCategory, a: int, m: int, n: int) -> Optional[int]:
    elements = sub_m(mc, a).elements
    return matching_join(mc, a, [k for k in elements if sub_leq(mc, meet(mc, k, m), n)])


def pullback_preserves_joins(mc: MCategory, f: int, max_family: Optional[int] = None) -> LawReport:
    """H-PULLBACK: f*(⋁m_i) = ⋁f*(m_i) для всех семейств Sub_M(tgt f)"""
    c = mc.base
    report = LawReport(subject=f"pullback joins {mc.name} along {f}")
    for family in subfamilies(sub_m(mc, c.tgt(f)).elements, max_family):
        top = matching_join(mc, c.tgt(f), family)
        pulled = [pullback_subobject(mc, f, m) for m in family]
        lhs = None if top is None else pullback_subobject(mc, f, top)
        rhs = None if None in pulled else matching_join(mc, c.src(f), pulled)
        if lhs is None or rhs is None or lhs != rhs:
            report.add("H-PULLBACK", f, *family)
    return report


def is_m_functor(functor: Functor, mc: MCategory, nc: MCategory) -> bool:
    """Функтор переводит M в N и сохраняет пулбэки M-морфизмов"""
    if not check_functor(functor).ok:
        return False
    c = mc.base
    for m in sorted(mc.monics):
        if functor.fmap(m) not in nc.monics:
            return False
        for f in c.into(c.tgt(m)):
            cone = pullback(c, m, f)
            image = pullback_subobject(nc, functor.fmap(f), functor.fmap(m))
            if cone is None or image is None or canonical(nc, functor.fmap(cone.legs[1])) != image:
                return False
    return True


def is_geometric_functor(functor: Functor, mc: MCategory, nc: MCategory, max_family: Optional[int] = None) -> bool:
    """M-функтор, сохраняющий joins в Sub_M"""
    if not is_m_functor(functor, mc, nc):
        return False
    for a in mc.base.object_ids():
        for family in subfamilies(sub_m(mc, a).elements, max_family):
            top = matching_join(mc, a, family)
            if top is None:
                continue
            image = matching_join(nc, functor.fobj(a), [canonical(nc, functor.fmap(m)) for m in family])
            if image != canonical(nc, functor.fmap(top)):
                return False
    return True
