from __future__ import annotations

import logging
import random
from math import prod
from typing import Callable, Hashable, Iterator, Optional, Sequence, TypeVar

from pydantic import BaseModel, ConfigDict, model_validator

from app.entities.category import FinCategory
from app.entities.law_report import LawReport
from app.exception.domain_error import NotAMono, NotNatural

logger = logging.getLogger(__name__)

T = TypeVar("T", bound=Hashable)

# фильтр кандидатов при поиске преобразований: (объект, сечение, образ) -> допустимо ли
Allowed = Callable[[int, int, int], bool]


class Presheaf(BaseModel):
    """
    Конечный предпучок на category. Сечения над объектом a нумеруются 0..sizes[a]-1.
    action[f][x] = x·f: для f: a -> b переводит сечение над b в сечение над a
    """
    model_config = ConfigDict(frozen=True)

    category: FinCategory
    name: str = ""
    sizes: tuple[int, ...]
    action: tuple[tuple[int, ...], ...]
    labels: Optional[tuple[tuple[str, ...], ...]] = None

    @model_validator(mode="after")
    def _check_tables(self) -> Presheaf:
        c = self.category
        if len(self.sizes) != len(c.objects):
            raise ValueError("section counts must be given for every object")
        if len(self.action) != len(c.morphisms):
            raise ValueError("action must be given for every morphism")
        for f, row in enumerate(self.action):
            if len(row) != self.sizes[c.tgt(f)]:
                raise ValueError(f"action of morphism {f} has {len(row)} entries, expected {self.sizes[c.tgt(f)]}")
            if any(not 0 <= y < self.sizes[c.src(f)] for y in row):
                raise ValueError(f"action of morphism {f} leaves the sections of object {c.src(f)}")
        if self.labels is not None and tuple(len(row) for row in self.labels) != self.sizes:
            raise ValueError("labels must match section counts")
        return self

    def sections(self, a: int) -> range:
        return range(self.sizes[a])

    def act(self, x: int, f: int) -> int:
        """x·f"""
        return self.action[f][x]

    def label(self, a: int, x: int) -> str:
        if self.labels is None:
            return str(x)
        return self.labels[a][x]

    def elements(self) -> Iterator[tuple[int, int]]:
        for a in self.category.object_ids():
            for x in self.sections(a):
                yield a, x


def check_functorial(p: Presheaf) -> LawReport:
    """PSH-ID a x: x·1 = x; PSH-COMP g f x: x·(g∘f) = (x·g)·f"""
    c = p.category
    report = LawReport(subject=f"presheaf {p.name}")
    for a in c.object_ids():
        for x in p.sections(a):
            if p.act(x, c.identity(a)) != x:
                report.add("PSH-ID", a, x)
    for f in c.morphism_ids():
        for g in c.out_of(c.tgt(f)):
            gf = c.compose(g, f)
            for x in p.sections(c.tgt(g)):
                if p.act(x, gf) != p.act(p.act(x, g), f):
                    report.add("PSH-COMP", g, f, x)
    return report


class NatTrans(BaseModel):
    """Преобразование source => target, components[a][x] = α_a(x)"""
    model_config = ConfigDict(frozen=True)

    source: Presheaf
    target: Presheaf
    components: tuple[tuple[int, ...], ...]
    name: str = ""

    @model_validator(mode="after")
    def _check_components(self) -> NatTrans:
        if len(self.source.sizes) != len(self.target.sizes):
            raise ValueError("transformation endpoints live over different categories")
        if len(self.components) != len(self.source.sizes):
            raise ValueError("a component is required for every object")
        for a, row in enumerate(self.components):
            if len(row) != self.source.sizes[a] or any(not 0 <= y < self.target.sizes[a] for y in row):
                raise ValueError(f"component at object {a} does not map sections to sections")
        return self

    def at(self, a: int, x: int) -> int:
        return self.components[a][x]


def check_natural(alpha: NatTrans) -> LawReport:
    """NAT f x: α_a(x·f) = α_b(x)·f для f: a -> b"""
    p, q = alpha.source, alpha.target
    c = p.category
    report = LawReport(subject=f"transformation {alpha.name}")
    for f in c.morphism_ids():
        a, b = c.src(f), c.tgt(f)
        for x in p.sections(b):
            if alpha.at(a, p.act(x, f)) != q.act(alpha.at(b, x), f):
                report.add("NAT", f, x)
    return report


def require_natural(alpha: NatTrans) -> None:
    report = check_natural(alpha)
    if not report.ok:
        first = report.of("NAT")[0]
        raise NotNatural(*first.ids)


def nat_identity(p: Presheaf) -> NatTrans:
    return NatTrans(
        source=p, target=p, components=tuple(tuple(p.sections(a)) for a in p.category.object_ids()), name="1"
    )


def nat_compose(beta: NatTrans, alpha: NatTrans) -> NatTrans:
    """β∘α"""
    return NatTrans(
        source=alpha.source,
        target=beta.target,
        components=tuple(
            tuple(beta.at(a, y) for y in row) for a, row in enumerate(alpha.components)
        ),
        name=f"{beta.name}∘{alpha.name}",
    )


def non_injective_object(alpha: NatTrans) -> Optional[int]:
    """Первый объект, где компонента не инъективна, или None"""
    for a, row in enumerate(alpha.components):
        if len(set(row)) != len(row):
            return a
    return None


def require_mono(alpha: NatTrans) -> None:
    a = non_injective_object(alpha)
    if a is not None:
        raise NotAMono(a)


def is_nat_iso(alpha: NatTrans) -> bool:
    if non_injective_object(alpha) is not None or alpha.source.sizes != alpha.target.sizes:
        return False
    return check_natural(alpha).ok


def nat_inverse(alpha: NatTrans) -> NatTrans:
    """Обратное к покомпонентно биективному преобразованию"""
    components = []
    for a, row in enumerate(alpha.components):
        inverse = [0] * alpha.target.sizes[a]
        for x, y in enumerate(row):
            inverse[y] = x
        components.append(tuple(inverse))
    return NatTrans(source=alpha.target, target=alpha.source, components=tuple(components), name=f"{alpha.name}⁻¹")


def representable(c: FinCategory, d: int, name: Optional[str] = None) -> Presheaf:
    """y(d) = hom(-, d), сечения над a это hom(a, d) в порядке id, действие предкомпозицией"""
    position = {h: i for a in c.object_ids() for i, h in enumerate(c.hom(a, d))}
    action = tuple(
        tuple(position[c.compose(h, f)] for h in c.hom(c.tgt(f), d)) for f in c.morphism_ids()
    )
    return Presheaf(
        category=c,
        name=name or f"y({c.objects[d]})",
        sizes=tuple(len(c.hom(a, d)) for a in c.object_ids()),
        action=action,
        labels=tuple(tuple(c.morphism(h).name or str(h) for h in c.hom(a, d)) for a in c.object_ids()),
    )


def representable_map(c: FinCategory, h: int) -> NatTrans:
    """y(h): y(a) => y(b) посткомпозицией с h: a -> b"""
    source, target = representable(c, c.src(h)), representable(c, c.tgt(h))
    components = []
    for a in c.object_ids():
        position = {g: i for i, g in enumerate(c.hom(a, c.tgt(h)))}
        components.append(tuple(position[c.compose(h, g)] for g in c.hom(a, c.src(h))))
    return NatTrans(source=source, target=target, components=tuple(components), name=f"y({h})")


def constant_presheaf(c: FinCategory, k: int, name: Optional[str] = None) -> Presheaf:
    """k сечений над каждым объектом, все морфизмы действуют тождественно"""
    return Presheaf(
        category=c,
        name=name or f"const{k}",
        sizes=tuple(k for _ in c.object_ids()),
        action=tuple(tuple(range(k)) for _ in c.morphism_ids()),
    )


def terminal_presheaf(c: FinCategory) -> Presheaf:
    return constant_presheaf(c, 1, name="1")


def empty_presheaf(c: FinCategory) -> Presheaf:
    return constant_presheaf(c, 0, name="0")


def _orbit_size(p: Presheaf, a: int, x: int) -> int:
    c = p.category
    return len({(c.src(f), p.act(x, f)) for f in c.into(a)})


def _search(
        p: Presheaf,
        q: Presheaf,
        allowed: Optional[Allowed] = None,
        injective: bool = False,
        rng: Optional[random.Random] = None,
) -> Iterator[tuple[tuple[int, ...], ...]]:
    """
    Перебор естественных преобразований с распространением: выбор α_a(x) = y
    сразу фиксирует α(x·f) = y·f для всех f в a
    """
    c = p.category
    variables = sorted(p.elements(), key=lambda v: (-_orbit_size(p, *v), v))
    assignment: dict[tuple[int, int], int] = {}
    used: dict[int, set[int]] = {a: set() for a in c.object_ids()}

    def propagate(a: int, x: int, y: int, trail: list[tuple[int, int]]) -> bool:
        stack = [(a, x, y)]
        while stack:
            a, x, y = stack.pop()
            current = assignment.get((a, x))
            if current is not None:
                if current != y:
                    return False
                continue
            if allowed is not None and not allowed(a, x, y):
                return False
            if injective:
                if y in used[a]:
                    return False
                used[a].add(y)
            assignment[(a, x)] = y
            trail.append((a, x))
            for f in c.into(a):
                stack.append((c.src(f), p.act(x, f), q.act(y, f)))
        return True

    def undo(trail: list[tuple[int, int]]) -> None:
        for key in trail:
            y = assignment.pop(key)
            if injective:
                used[key[0]].discard(y)

    def solve(i: int) -> Iterator[tuple[tuple[int, ...], ...]]:
        while i < len(variables) and variables[i] in assignment:
            i += 1
        if i == len(variables):
            yield tuple(tuple(assignment[(a, x)] for x in p.sections(a)) for a in c.object_ids())
            return
        a, x = variables[i]
        values = list(q.sections(a))
        if rng is not None:
            rng.shuffle(values)
        for y in values:
            trail: list[tuple[int, int]] = []
            if propagate(a, x, y, trail):
                yield from solve(i + 1)
            undo(trail)

    yield from solve(0)


def transformation_space(p: Presheaf, q: Presheaf) -> int:
    """Число всех семейств компонент, без учета естественности"""
    return prod(q.sizes[a] ** p.sizes[a] for a in p.category.object_ids())


def natural_transformations(
        p: Presheaf,
        q: Presheaf,
        bound: Optional[int] = None,
        seed: int = 0,
        allowed: Optional[Allowed] = None,
) -> list[NatTrans]:
    """
    Все естественные преобразования p => q, если пространство семейств не больше bound
    (или bound не задан). Иначе первые bound штук случайного по seed порядка перебора
    """
    if bound is None or transformation_space(p, q) <= bound:
        found = _search(p, q, allowed)
        limit = None
    else:
        logger.info("sampling %d transformations %s => %s with seed %d", bound, p.name, q.name, seed)
        found = _search(p, q, allowed, rng=random.Random(seed))
        limit = bound
    result = []
    for components in found:
        result.append(NatTrans(source=p, target=q, components=components))
        if limit is not None and len(result) >= limit:
            break
    return result


def natural_isomorphism(
        p: Presheaf, q: Presheaf, allowed: Optional[Allowed] = None
) -> Optional[tuple[NatTrans, NatTrans]]:
    """Пара взаимно обратных естественных изоморфизмов p => q, q => p или None"""
    if p.sizes != q.sizes:
        return None
    for components in _search(p, q, allowed, injective=True):
        alpha = NatTrans(source=p, target=q, components=components, name="iso")
        return alpha, nat_inverse(alpha)
    return None


def closed_subsets(universe: Sequence[T], closure: Callable[[T], frozenset[T]]) -> list[frozenset[T]]:
    """
    Все подмножества universe, замкнутые относительно closure (closure(e) содержит e).
    Каждое выдается ровно один раз
    """
    result: list[frozenset[T]] = []

    def visit(i: int, chosen: frozenset[T], excluded: frozenset[T]) -> None:
        if i == len(universe):
            result.append(chosen)
            return
        e = universe[i]
        if e in chosen:
            visit(i + 1, chosen, excluded)
            return
        visit(i + 1, chosen, excluded | {e})
        grown = chosen | closure(e)
        if not grown & excluded:
            visit(i + 1, grown, excluded)

    visit(0, frozenset(), frozenset())
    return result


def subpresheaf(p: Presheaf, keep: frozenset[tuple[int, int]], name: Optional[str] = None) -> NatTrans:
    """Включение подпредпучка на замкнутом множестве элементов keep"""
    c = p.category
    kept = [sorted(x for b, x in keep if b == a) for a in c.object_ids()]
    position = [{x: i for i, x in enumerate(row)} for row in kept]
    action = tuple(
        tuple(position[c.src(f)][p.act(x, f)] for x in kept[c.tgt(f)]) for f in c.morphism_ids()
    )
    labels = tuple(tuple(p.label(a, x) for x in kept[a]) for a in c.object_ids())
    sub = Presheaf(
        category=c,
        name=name or f"{p.name}|{sum(map(len, kept))}",
        sizes=tuple(len(row) for row in kept),
        action=action,
        labels=labels,
    )
    return NatTrans(source=sub, target=p, components=tuple(tuple(row) for row in kept), name="incl")


def subpresheaves(p: Presheaf) -> list[NatTrans]:
    """Включения всех подпредпучков p, от пустого"""
    c = p.category

    def closure(e: tuple[int, int]) -> frozenset[tuple[int, int]]:
        a, x = e
        return frozenset((c.src(f), p.act(x, f)) for f in c.into(a))

    closed = closed_subsets(list(p.elements()), closure)
    closed.sort(key=lambda s: (len(s), sorted(s)))
    return [subpresheaf(p, keep, name=f"{p.name}[{i}]") for i, keep in enumerate(closed)]


def restrict_along(p: Presheaf, source: FinCategory, on_objects: Sequence[int], on_morphisms: Sequence[int]) -> Presheaf:
    """P∘F для функтора F: source -> p.category, заданного таблицами"""
    return Presheaf(
        category=source,
        name=f"{p.name}∘F",
        sizes=tuple(p.sizes[on_objects[a]] for a in source.object_ids()),
        action=tuple(p.action[on_morphisms[f]] for f in source.morphism_ids()),
        labels=None if p.labels is None else tuple(p.labels[on_objects[a]] for a in source.object_ids()),
    )
