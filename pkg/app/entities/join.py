from __future__ import annotations

import logging
from itertools import combinations
from typing import Callable, Iterable, Iterator, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from app.entities.category import Functor, check_functor
from app.entities.law_report import LawReport
from app.entities.restriction import RestrictionCategory, compatible, is_restriction_functor, leq
from app.exception.domain_error import (
    IncompatibleFamily,
    NotAFunctor,
    NotARestrictionFunctor,
    NotParallel,
)

logger = logging.getLogger(__name__)


class CompatibleFamily(BaseModel):
    """Конечное семейство попарно совместимых морфизмов из hom(source, target)"""
    model_config = ConfigDict(frozen=True)

    source: int
    target: int
    members: frozenset[int]

    @classmethod
    def of(cls, x: RestrictionCategory, source: int, target: int, members: Iterable[int]) -> CompatibleFamily:
        members = frozenset(members)
        hom = set(x.base.hom(source, target))
        ordered = sorted(members)
        for f in ordered:
            if f not in hom:
                raise NotParallel(f, ordered[0])
        for f, g in combinations(sorted(members), 2):
            if not compatible(x, f, g):
                raise IncompatibleFamily(f, g)
        return cls(source=source, target=target, members=members)

    def sorted_members(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))


def upper_bounds(x: RestrictionCategory, family: CompatibleFamily) -> list[int]:
    return [
        g for g in x.base.hom(family.source, family.target)
        if all(leq(x, f, g) for f in family.members)
    ]


def join(x: RestrictionCategory, family: CompatibleFamily) -> Optional[int]:
    """Точная верхняя грань семейства в порядке hom-множества, поиском; None если ее нет"""
    bounds = upper_bounds(x, family)
    for u in bounds:
        if all(leq(x, u, v) for v in bounds):
            return u
    return None


def join_of(x: RestrictionCategory, source: int, target: int, members: Iterable[int]) -> Optional[int]:
    return join(x, CompatibleFamily.of(x, source, target, members))


def compatible_families(
        x: RestrictionCategory, source: int, target: int, max_size: Optional[int] = None
) -> Iterator[frozenset[int]]:
    """
    Все совместимые семейства hom(source, target), включая пустое, перебором клик
    графа совместимости. max_size ограничивает размер семейства
    """
    yield from cliques(x.base.hom(source, target), lambda f, g: compatible(x, f, g), max_size)


def cliques(
        items: Sequence[int], adjacent: Callable[[int, int], bool], max_size: Optional[int] = None
) -> Iterator[frozenset[int]]:
    """Все клики графа (включая пустую) в лексикографическом порядке по позициям items"""
    friends = {f: {g for g in items if g != f and adjacent(f, g)} for f in items}

    def extend(chosen: list[int], start: int) -> Iterator[frozenset[int]]:
        yield frozenset(chosen)
        if max_size is not None and len(chosen) >= max_size:
            return
        for i in range(start, len(items)):
            f = items[i]
            if all(f in friends[g] for g in chosen):
                chosen.append(f)
                yield from extend(chosen, i + 1)
                chosen.pop()

    yield from extend([], 0)


def check_join_axioms(x: RestrictionCategory, max_family: Optional[int] = None) -> LawReport:
    """
    Для каждого совместимого семейства S:
    JOIN S - существует ⋁S; J1 (⋁S)‾ = ⋁{s̄}; J2 (⋁S)∘g = ⋁{s∘g};
    PROP-POST f∘(⋁S) = ⋁{f∘s} (следствие J1/J2, проверяется только если они выполнены)
    """
    c = x.base
    report = LawReport(subject=f"joins {x.name}")
    for a in c.object_ids():
        for b in c.object_ids():
            for members in compatible_families(x, a, b, max_family):
                family = CompatibleFamily(source=a, target=b, members=members)
                ids = family.sorted_members()
                top = join(x, family)
                if top is None:
                    report.add("JOIN", *ids, note=f"hom({a},{b})")
                    continue
                clean = True

                bars = join_of(x, a, a, (x.bar[s] for s in members))
                if bars is None or x.bar[top] != bars:
                    report.add("J1", *ids, note=f"hom({a},{b})")
                    clean = False

                for g in c.into(a):
                    pre = join_of(x, c.src(g), b, (c.compose(s, g) for s in members))
                    if pre is None or c.compose(top, g) != pre:
                        report.add("J2", g, *ids, note=f"hom({a},{b})")
                        clean = False
                if not clean:
                    continue

                for f in c.out_of(b):
                    post = join_of(x, a, c.tgt(f), (c.compose(f, s) for s in members))
                    if post is None or c.compose(f, top) != post:
                        logger.warning("post-composition identity fails for %s in %s", ids, x.name)
                        report.add("PROP-POST", f, *ids, note=f"hom({a},{b})")
    return report


def is_join_restriction_functor(
        functor: Functor,
        x: RestrictionCategory,
        y: RestrictionCategory,
        include_empty: bool = True,
        max_family: Optional[int] = None,
) -> bool:
    """
    F(⋁S) = ⋁F(S) для каждого совместимого S, у которого есть join в x.
    include_empty=False пропускает пустые семейства
    """
    functoriality = check_functor(functor)
    if not functoriality.ok:
        raise NotAFunctor(functoriality.lines())
    if not is_restriction_functor(functor, x, y):
        broken = next(f for f in x.base.morphism_ids() if functor.fmap(x.bar[f]) != y.bar[functor.fmap(f)])
        raise NotARestrictionFunctor(broken)

    c = x.base
    for a in c.object_ids():
        for b in c.object_ids():
            for members in compatible_families(x, a, b, max_family):
                if not members and not include_empty:
                    continue
                top = join(x, CompatibleFamily(source=a, target=b, members=members))
                if top is None:
                    continue
                image = join_of(y, functor.fobj(a), functor.fobj(b), (functor.fmap(s) for s in members))
                if image is None or functor.fmap(top) != image:
                    logger.info("functor %s breaks the join of %s", functor.name, sorted(members))
                    return False
    return True
