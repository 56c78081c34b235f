from __future__ import annotations

import logging
from typing import Optional

from pydantic import BaseModel, ConfigDict, model_validator

from app.entities.category import FinCategory, Functor, check_functor, find_isomorphism, wide_subcategory
from app.entities.law_report import LawReport
from app.exception.domain_error import NotParallel

logger = logging.getLogger(__name__)


class RestrictionCategory(BaseModel):
    """Конечная категория с ограничением f ↦ f̄, хранится полной таблицей bar"""
    model_config = ConfigDict(frozen=True)

    base: FinCategory
    bar: tuple[int, ...]

    @model_validator(mode="after")
    def _check_bar_size(self) -> RestrictionCategory:
        if len(self.bar) != len(self.base.morphisms):
            raise ValueError("restriction map must be total on morphisms")
        return self

    @property
    def name(self) -> str:
        return self.base.name

    def restrict(self, f: int) -> int:
        """f̄"""
        self.base.morphism(f)
        return self.bar[f]


def trivial_restriction(c: FinCategory) -> RestrictionCategory:
    """Тривиальное ограничение: все морфизмы тотальны"""
    return RestrictionCategory(base=c, bar=tuple(c.identity(c.src(f)) for f in c.morphism_ids()))


def check_restriction_axioms(x: RestrictionCategory) -> LawReport:
    """
    Проверяет R1–R4 полным перебором:
    R1 f∘f̄ = f; R2 f̄∘ḡ = ḡ∘f̄; R3 (g∘f̄)‾ = ḡ∘f̄; R4 h̄∘f = f∘(h∘f)‾
    """
    c = x.base
    report = LawReport(subject=f"restriction {x.name}")
    for f in c.morphism_ids():
        b = x.bar[f]
        if not 0 <= b < len(c.morphisms) or c.src(b) != c.src(f) or c.tgt(b) != c.src(f):
            report.add("BAR-TYPE", f)
    if not report.ok:
        return report

    for f in c.morphism_ids():
        a = c.src(f)
        if c.compose(f, x.bar[f]) != f:
            report.add("R1", f)
        for g in c.out_of(a):
            if c.compose(x.bar[f], x.bar[g]) != c.compose(x.bar[g], x.bar[f]):
                report.add("R2", f, g)
            if x.bar[c.compose(g, x.bar[f])] != c.compose(x.bar[g], x.bar[f]):
                report.add("R3", f, g)
        for h in c.out_of(c.tgt(f)):
            if c.compose(x.bar[h], f) != c.compose(f, x.bar[c.compose(h, f)]):
                report.add("R4", f, h)
    logger.debug("restriction axioms for %s: %d violations", x.name, len(report.violations))
    return report


def _require_parallel(x: RestrictionCategory, f: int, g: int) -> None:
    if not x.base.parallel(f, g):
        raise NotParallel(f, g)


def leq(x: RestrictionCategory, f: int, g: int) -> bool:
    """f ≤ g ⟺ f = g∘f̄"""
    _require_parallel(x, f, g)
    return x.base.compose(g, x.bar[f]) == f


def compatible(x: RestrictionCategory, f: int, g: int) -> bool:
    """f ⌣ g ⟺ f∘ḡ = g∘f̄"""
    _require_parallel(x, f, g)
    return x.base.compose(f, x.bar[g]) == x.base.compose(g, x.bar[f])


def is_total(x: RestrictionCategory, f: int) -> bool:
    return x.bar[f] == x.base.identity(x.base.src(f))


def is_restriction_idempotent(x: RestrictionCategory, e: int) -> bool:
    return x.base.src(e) == x.base.tgt(e) and x.bar[e] == e


def restriction_idempotents(x: RestrictionCategory, a: int) -> tuple[int, ...]:
    return tuple(e for e in x.base.hom(a, a) if x.bar[e] == e)


def total_morphisms(x: RestrictionCategory) -> tuple[int, ...]:
    return tuple(f for f in x.base.morphism_ids() if is_total(x, f))


def total_subcategory(x: RestrictionCategory) -> FinCategory:
    """Total(X): широкая подкатегория тотальных морфизмов"""
    return wide_subcategory(x.base, total_morphisms(x), f"Total({x.name})")[0]


def total_inclusion(x: RestrictionCategory) -> Functor:
    """Вложение Total(X) -> X"""
    sub, kept = wide_subcategory(x.base, total_morphisms(x), f"Total({x.name})")
    return Functor(
        source=sub, target=x.base, on_objects=tuple(sub.object_ids()), on_morphisms=kept, name="total inclusion"
    )


def splitting(x: RestrictionCategory, e: int) -> Optional[tuple[int, int]]:
    """
    Расщепление идемпотента e: пара (m, r), r∘m = 1, m∘r = e.
    Канонически: наименьший объект расщепления, затем наименьшие m и r
    """
    c = x.base
    a = c.src(e)
    for b in c.object_ids():
        for m in c.hom(b, a):
            if c.compose(e, m) != m:
                continue
            for r in c.hom(a, b):
                if c.compose(r, m) == c.identity(b) and c.compose(m, r) == e:
                    return m, r
    return None


def check_idempotents_split(x: RestrictionCategory) -> LawReport:
    """Все идемпотенты ограничения расщепляются (SPLIT e для нерасщепленных)"""
    report = LawReport(subject=f"split {x.name}")
    for a in x.base.object_ids():
        for e in restriction_idempotents(x, a):
            if splitting(x, e) is None:
                report.add("SPLIT", e)
    return report


def is_restriction_functor(functor: Functor, x: RestrictionCategory, y: RestrictionCategory) -> bool:
    """Функтор сохраняет ограничение: F(f̄) = F(f)‾"""
    if not check_functor(functor).ok:
        return False
    return all(functor.fmap(x.bar[f]) == y.bar[functor.fmap(f)] for f in x.base.morphism_ids())


def find_restriction_isomorphism(x: RestrictionCategory, y: RestrictionCategory) -> Optional[Functor]:
    """Изоморфизм категорий, сохраняющий ограничение"""
    return find_isomorphism(x.base, y.base, unary_c=x.bar, unary_d=y.bar)
