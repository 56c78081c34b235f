from __future__ import annotations

import logging
from typing import Callable, Hashable, Iterable, Optional, Sequence

from pydantic import BaseModel, ConfigDict, PrivateAttr, model_validator

from app.entities.law_report import LawReport
from app.exception.domain_error import (
    InternalInvariantBreach,
    InvalidDiagram,
    NotACospan,
    NotComposable,
    UnknownMorphism,
)

logger = logging.getLogger(__name__)


class Morphism(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: int
    src: int
    tgt: int
    # имя из бандла или построителя фикстуры
    name: str = ""


class FinCategory(BaseModel):
    """
    Конечная категория, заданная таблицами.
    Объекты и морфизмы нумеруются подряд с нуля, id объекта это его индекс в objects.
    Значение неизменяемо, кэши (hom-множества, пулбэки) заполняются лениво
    """
    model_config = ConfigDict(frozen=True)

    name: str = ""
    objects: tuple[str, ...]
    morphisms: tuple[Morphism, ...]
    # тождество каждого объекта (по индексу объекта)
    identities: tuple[int, ...]
    # таблица композиции (g, f) -> g∘f
    comp: dict[tuple[int, int], int]

    _hom: dict[tuple[int, int], tuple[int, ...]] = PrivateAttr(default_factory=dict)
    _into: dict[int, tuple[int, ...]] = PrivateAttr(default_factory=dict)
    _out_of: dict[int, tuple[int, ...]] = PrivateAttr(default_factory=dict)
    _memo: dict[tuple, object] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def _check_ids(self) -> FinCategory:
        n = len(self.objects)
        for i, m in enumerate(self.morphisms):
            if m.id != i:
                raise ValueError(f"morphism ids must be dense: position {i} holds id {m.id}")
            if not (0 <= m.src < n and 0 <= m.tgt < n):
                raise ValueError(f"morphism {i} has a dangling endpoint")
        if len(self.identities) != n:
            raise ValueError("identity map must be total on objects")
        for a, f in enumerate(self.identities):
            if not 0 <= f < len(self.morphisms):
                raise ValueError(f"identity of object {a} is a dangling morphism id {f}")
        return self

    def _index(self) -> None:
        if self._hom or not self.objects:
            return
        hom: dict[tuple[int, int], list[int]] = {(a, b): [] for a in self.object_ids() for b in self.object_ids()}
        into: dict[int, list[int]] = {a: [] for a in self.object_ids()}
        out_of: dict[int, list[int]] = {a: [] for a in self.object_ids()}
        for m in self.morphisms:
            hom[(m.src, m.tgt)].append(m.id)
            into[m.tgt].append(m.id)
            out_of[m.src].append(m.id)
        self._into.update({k: tuple(v) for k, v in into.items()})
        self._out_of.update({k: tuple(v) for k, v in out_of.items()})
        self._hom.update({k: tuple(v) for k, v in hom.items()})

    def object_ids(self) -> range:
        return range(len(self.objects))

    def morphism_ids(self) -> range:
        return range(len(self.morphisms))

    def object_id(self, name: str) -> int:
        try:
            return self.objects.index(name)
        except ValueError:
            raise KeyError(f"object '{name}' is not in category '{self.name}'")

    def morphism_id(self, name: str) -> int:
        by_name = self.memo("by_name", None, lambda: {m.name: m.id for m in self.morphisms})
        try:
            return by_name[name]
        except KeyError:
            raise KeyError(f"morphism '{name}' is not in category '{self.name}'")

    def morphism(self, f: int) -> Morphism:
        if not 0 <= f < len(self.morphisms):
            raise UnknownMorphism(f, self.name)
        return self.morphisms[f]

    def src(self, f: int) -> int:
        return self.morphism(f).src

    def tgt(self, f: int) -> int:
        return self.morphism(f).tgt

    def identity(self, a: int) -> int:
        return self.identities[a]

    def is_identity(self, f: int) -> bool:
        return self.identities[self.src(f)] == f

    def hom(self, a: int, b: int) -> tuple[int, ...]:
        self._index()
        return self._hom[(a, b)]

    def into(self, b: int) -> tuple[int, ...]:
        """Все морфизмы с кодоменом b"""
        self._index()
        return self._into[b]

    def out_of(self, a: int) -> tuple[int, ...]:
        """Все морфизмы с доменом a"""
        self._index()
        return self._out_of[a]

    def parallel(self, f: int, g: int) -> bool:
        return self.src(f) == self.src(g) and self.tgt(f) == self.tgt(g)

    def composable(self, g: int, f: int) -> bool:
        return self.tgt(f) == self.src(g)

    def compose(self, g: int, f: int) -> int:
        """g∘f"""
        if not self.composable(g, f):
            raise NotComposable(g, f)
        try:
            return self.comp[(g, f)]
        except KeyError:
            raise InternalInvariantBreach("FinCategory.compose", f"no table entry for ({g}, {f})")

    def compose_path(self, *arrows: int) -> int:
        """compose_path(h, g, f) = h∘g∘f"""
        result = arrows[-1]
        for g in reversed(arrows[:-1]):
            result = self.compose(g, result)
        return result

    def memo(self, kind: str, key: Hashable, compute: Callable[[], object]):
        """Кэш результатов поиска (пулбэки, копределы), значение категории от него не зависит"""
        slot = (kind, key)
        if slot not in self._memo:
            self._memo[slot] = compute()
        return self._memo[slot]


def category_from_composition(
        name: str,
        objects: Sequence[str],
        morphisms: Sequence[tuple[int, int, str]],
        identities: Sequence[int],
        compose: Callable[[int, int], int],
) -> FinCategory:
    """
    Собирает FinCategory по списку морфизмов (src, tgt, name) и функции композиции compose(g, f)
    """
    comp = {}
    for g, (g_src, _, _) in enumerate(morphisms):
        for f, (_, f_tgt, _) in enumerate(morphisms):
            if f_tgt == g_src:
                comp[(g, f)] = compose(g, f)
    return FinCategory(
        name=name,
        objects=tuple(objects),
        morphisms=tuple(Morphism(id=i, src=s, tgt=t, name=label) for i, (s, t, label) in enumerate(morphisms)),
        identities=tuple(identities),
        comp=comp,
    )


def wide_subcategory(c: FinCategory, keep: Iterable[int], name: str) -> tuple[FinCategory, tuple[int, ...]]:
    """
    Широкая подкатегория на выбранных морфизмах (все объекты сохраняются).
    Возвращает подкатегорию и исходные id ее морфизмов
    """
    kept = sorted(set(keep) | set(c.identities))
    position = {f: i for i, f in enumerate(kept)}

    def compose(g: int, f: int) -> int:
        gf = c.compose(kept[g], kept[f])
        if gf not in position:
            raise InternalInvariantBreach("wide_subcategory", f"{kept[g]}∘{kept[f]} leaves the subcategory")
        return position[gf]

    sub = category_from_composition(
        name,
        c.objects,
        [(c.src(f), c.tgt(f), c.morphism(f).name) for f in kept],
        [position[f] for f in c.identities],
        compose,
    )
    return sub, tuple(kept)


class Functor(BaseModel):
    """Функтор между конечными категориями, заданный таблицами на объектах и морфизмах"""
    model_config = ConfigDict(frozen=True)

    source: FinCategory
    target: FinCategory
    on_objects: tuple[int, ...]
    on_morphisms: tuple[int, ...]
    name: str = ""

    @model_validator(mode="after")
    def _check_sizes(self) -> Functor:
        if len(self.on_objects) != len(self.source.objects):
            raise ValueError("object assignment must be total")
        if len(self.on_morphisms) != len(self.source.morphisms):
            raise ValueError("morphism assignment must be total")
        return self

    def fobj(self, a: int) -> int:
        return self.on_objects[a]

    def fmap(self, f: int) -> int:
        return self.on_morphisms[f]


class Diagram(Functor):
    """Диаграмма формы shape в целевой категории"""

    @property
    def shape(self) -> FinCategory:
        return self.source


class Cone(BaseModel):
    """Конус над коспаном (f, g): legs = (p, q), f∘p = g∘q"""
    model_config = ConfigDict(frozen=True)

    apex: int
    legs: tuple[int, int]


class Cocone(BaseModel):
    """Коконус под диаграммой: по ноге на каждый объект формы"""
    model_config = ConfigDict(frozen=True)

    apex: int
    legs: tuple[int, ...]


def identity_functor(c: FinCategory) -> Functor:
    return Functor(
        source=c, target=c, on_objects=tuple(c.object_ids()), on_morphisms=tuple(c.morphism_ids()), name="id"
    )


def compose_functors(g: Functor, f: Functor) -> Functor:
    """G∘F"""
    return Functor(
        source=f.source,
        target=g.target,
        on_objects=tuple(g.fobj(f.fobj(a)) for a in f.source.object_ids()),
        on_morphisms=tuple(g.fmap(f.fmap(m)) for m in f.source.morphism_ids()),
        name=f"{g.name}∘{f.name}",
    )


def validate_category(c: FinCategory) -> LawReport:
    """
    Проверяет законы категории полным перебором.
    Пустой отчет тогда и только тогда, когда таблицы задают категорию
    """
    report = LawReport(subject=f"category {c.name}")
    for a in c.object_ids():
        ident = c.identity(a)
        if c.src(ident) != a or c.tgt(ident) != a:
            report.add("CAT-IDENTITY-TYPE", a)

    for (g, f), gf in c.comp.items():
        if not (0 <= g < len(c.morphisms) and 0 <= f < len(c.morphisms)) or c.tgt(f) != c.src(g):
            report.add("CAT-COMP-DOMAIN", g, f)
            continue
        if not 0 <= gf < len(c.morphisms) or c.src(gf) != c.src(f) or c.tgt(gf) != c.tgt(g):
            report.add("CAT-COMP-TYPE", g, f)

    for g in c.morphism_ids():
        for f in c.into(c.src(g)):
            if (g, f) not in c.comp:
                report.add("CAT-COMP-DOMAIN", g, f)
    if not report.ok:
        # дальше таблица не годится для поиска по ней
        return report

    for f in c.morphism_ids():
        if c.comp[(c.identity(c.tgt(f)), f)] != f:
            report.add("CAT-LEFT-ID", f)
        if c.comp[(f, c.identity(c.src(f)))] != f:
            report.add("CAT-RIGHT-ID", f)

    for f in c.morphism_ids():
        for g in c.out_of(c.tgt(f)):
            gf = c.comp[(g, f)]
            for h in c.out_of(c.tgt(g)):
                if c.comp[(h, gf)] != c.comp[(c.comp[(h, g)], f)]:
                    report.add("CAT-ASSOC", h, g, f)
    logger.debug("validated category %s: %d violations", c.name, len(report.violations))
    return report


def check_functor(functor: Functor) -> LawReport:
    """Проверяет, что таблицы функтора сохраняют типы, тождества и композицию"""
    c, d = functor.source, functor.target
    report = LawReport(subject=f"functor {functor.name}")
    for a in c.object_ids():
        if not 0 <= functor.fobj(a) < len(d.objects):
            report.add("FUN-OBJ", a)
    if not report.ok:
        return report
    for f in c.morphism_ids():
        image = functor.fmap(f)
        if (not 0 <= image < len(d.morphisms)
                or d.src(image) != functor.fobj(c.src(f))
                or d.tgt(image) != functor.fobj(c.tgt(f))):
            report.add("FUN-TYPE", f)
    if not report.ok:
        return report
    for a in c.object_ids():
        if functor.fmap(c.identity(a)) != d.identity(functor.fobj(a)):
            report.add("FUN-ID", a)
    for f in c.morphism_ids():
        for g in c.out_of(c.tgt(f)):
            if functor.fmap(c.compose(g, f)) != d.compose(functor.fmap(g), functor.fmap(f)):
                report.add("FUN-COMP", g, f)
    return report


def is_mono(c: FinCategory, m: int) -> bool:
    """m моно, если u ↦ m∘u инъективно на каждом hom(X, src m)"""
    a = c.src(m)
    for x in c.object_ids():
        seen = set()
        for u in c.hom(x, a):
            mu = c.compose(m, u)
            if mu in seen:
                return False
            seen.add(mu)
    return True


def inverse(c: FinCategory, f: int) -> Optional[int]:
    a, b = c.src(f), c.tgt(f)
    for g in c.hom(b, a):
        if c.compose(g, f) == c.identity(a) and c.compose(f, g) == c.identity(b):
            return g
    return None


def is_iso(c: FinCategory, f: int) -> bool:
    return inverse(c, f) is not None


def pullback(c: FinCategory, f: int, g: int) -> Optional[Cone]:
    """
    Пулбэк коспана (f, g) полным перебором конусов.
    Канонический выбор: наименьший id вершины, затем наименьшие ноги (p, q).
    None, если терминального конуса нет
    """
    if c.tgt(f) != c.tgt(g):
        raise NotACospan(f, g)
    return c.memo("pullback", (f, g), lambda: _search_pullback(c, f, g))


def _search_pullback(c: FinCategory, f: int, g: int) -> Optional[Cone]:
    a, b = c.src(f), c.src(g)
    cones: dict[int, list[tuple[int, int]]] = {}
    for x in c.object_ids():
        cones[x] = [
            (p, q) for p in c.hom(x, a) for q in c.hom(x, b) if c.compose(f, p) == c.compose(g, q)
        ]
    cone_sets = {x: set(v) for x, v in cones.items()}

    for apex in c.object_ids():
        for p, q in cones[apex]:
            if _is_terminal_cone(c, apex, p, q, cone_sets):
                return Cone(apex=apex, legs=(p, q))
    return None


def _is_terminal_cone(c: FinCategory, apex: int, p: int, q: int, cones: dict[int, set]) -> bool:
    for x in c.object_ids():
        arrows = c.hom(x, apex)
        if len(arrows) != len(cones[x]):
            return False
        images = {(c.compose(p, h), c.compose(q, h)) for h in arrows}
        if images != cones[x]:
            return False
    return True


def colimit(c: FinCategory, diagram: Diagram) -> Optional[Cocone]:
    """
    Копредел диаграммы полным перебором коконусов.
    Кандидат начальный, если для каждого Y стрелки apex -> Y биективно соответствуют коконусам в Y
    """
    functoriality = check_functor(diagram)
    if not functoriality.ok:
        raise InvalidDiagram(functoriality.lines())

    cocones = {y: cocones_into(c, diagram, y) for y in c.object_ids()}
    cocone_sets = {y: set(v) for y, v in cocones.items()}
    for apex in c.object_ids():
        for legs in cocones[apex]:
            if _is_initial_cocone(c, apex, legs, cocone_sets):
                return Cocone(apex=apex, legs=legs)
    return None


def _is_initial_cocone(c: FinCategory, apex: int, legs: tuple[int, ...], cocones: dict[int, set]) -> bool:
    for y in c.object_ids():
        arrows = c.hom(apex, y)
        if len(arrows) != len(cocones[y]):
            return False
        images = {tuple(c.compose(h, leg) for leg in legs) for h in arrows}
        if images != cocones[y]:
            return False
    return True


def cocones_into(c: FinCategory, diagram: Diagram, apex: int) -> list[tuple[int, ...]]:
    """Все коконусы с вершиной apex, ноги упорядочены по объектам формы, список отсортирован"""
    shape = diagram.shape
    arrows = [u for u in shape.morphism_ids() if not shape.is_identity(u)]
    outgoing = {j: [u for u in arrows if shape.src(u) == j] for j in shape.object_ids()}
    touching = {j: [u for u in arrows if shape.src(u) == j or shape.tgt(u) == j] for j in shape.object_ids()}
    # свободные ноги перебираются в порядке числа исходящих стрелок,
    # вынужденные (есть стрелка в уже назначенный объект) назначаются сразу
    order = sorted(shape.object_ids(), key=lambda j: (len(outgoing[j]), j))
    legs: dict[int, int] = {}
    found: list[tuple[int, ...]] = []

    def consistent(j: int) -> bool:
        for u in touching[j]:
            s, t = shape.src(u), shape.tgt(u)
            if s in legs and t in legs and c.compose(legs[t], diagram.fmap(u)) != legs[s]:
                return False
        return True

    def next_object() -> tuple[int, Sequence[int]]:
        for j in order:
            if j in legs:
                continue
            for u in outgoing[j]:
                if shape.tgt(u) in legs:
                    return j, (c.compose(legs[shape.tgt(u)], diagram.fmap(u)),)
        j = next(j for j in order if j not in legs)
        return j, c.hom(diagram.fobj(j), apex)

    def extend() -> None:
        if len(legs) == len(order):
            found.append(tuple(legs[j] for j in shape.object_ids()))
            return
        j, candidates = next_object()
        for leg in candidates:
            legs[j] = leg
            if consistent(j):
                extend()
            del legs[j]

    extend()
    return sorted(found)


def _object_signature(c: FinCategory, a: int) -> tuple:
    return (
        len(c.hom(a, a)),
        tuple(sorted((len(c.hom(a, b)), len(c.hom(b, a))) for b in c.object_ids())),
    )


def find_isomorphism(
        c: FinCategory,
        d: FinCategory,
        colors_c: Optional[Sequence[Hashable]] = None,
        colors_d: Optional[Sequence[Hashable]] = None,
        unary_c: Optional[Sequence[int]] = None,
        unary_d: Optional[Sequence[int]] = None,
) -> Optional[Functor]:
    """
    Ищет изоморфизм категорий c -> d перебором с распространением ограничений.

    :param colors_c: Цвета морфизмов c (изоморфизм обязан их сохранять)
    :param colors_d: Цвета морфизмов d
    :param unary_c: Унарная операция на морфизмах c, которую изоморфизм должен сохранять (например ограничение)
    :param unary_d: Та же операция в d
    """
    if len(c.objects) != len(d.objects) or len(c.morphisms) != len(d.morphisms):
        return None

    def colors(cat: FinCategory, user: Optional[Sequence[Hashable]], unary: Optional[Sequence[int]]) -> list:
        return [
            (cat.is_identity(f), user[f] if user is not None else None, unary[f] == f if unary is not None else None)
            for f in cat.morphism_ids()
        ]

    col_c, col_d = colors(c, colors_c, unary_c), colors(d, colors_d, unary_d)
    sig_c = [_object_signature(c, a) for a in c.object_ids()]
    sig_d = [_object_signature(d, b) for b in d.object_ids()]
    obj_map: dict[int, int] = {}

    def hom_sizes_agree(a: int) -> bool:
        for a2, b2 in obj_map.items():
            b = obj_map[a]
            if len(c.hom(a, a2)) != len(d.hom(b, b2)) or len(c.hom(a2, a)) != len(d.hom(b2, b)):
                return False
        return True

    def assign_objects(a: int) -> Optional[list[int]]:
        if a == len(c.objects):
            return _match_morphisms(c, d, obj_map, col_c, col_d, unary_c, unary_d)
        for b in d.object_ids():
            if b in obj_map.values() or sig_d[b] != sig_c[a]:
                continue
            obj_map[a] = b
            if hom_sizes_agree(a):
                result = assign_objects(a + 1)
                if result is not None:
                    return result
            del obj_map[a]
        return None

    on_morphisms = assign_objects(0)
    if on_morphisms is None:
        return None
    return Functor(
        source=c,
        target=d,
        on_objects=tuple(obj_map[a] for a in c.object_ids()),
        on_morphisms=tuple(on_morphisms),
        name=f"iso {c.name}->{d.name}",
    )


def _match_morphisms(
        c: FinCategory,
        d: FinCategory,
        obj_map: dict[int, int],
        col_c: list,
        col_d: list,
        unary_c: Optional[Sequence[int]],
        unary_d: Optional[Sequence[int]],
) -> Optional[list[int]]:
    candidates = {
        f: [g for g in d.hom(obj_map[c.src(f)], obj_map[c.tgt(f)]) if col_d[g] == col_c[f]]
        for f in c.morphism_ids()
    }
    if any(not v for v in candidates.values()):
        return None

    def assign(mapping: dict[int, int], used: set[int], f: int, g: int) -> bool:
        queue = [(f, g)]
        while queue:
            f, g = queue.pop()
            if f in mapping:
                if mapping[f] != g:
                    return False
                continue
            if g in used or col_d[g] != col_c[f]:
                return False
            if d.src(g) != obj_map[c.src(f)] or d.tgt(g) != obj_map[c.tgt(f)]:
                return False
            mapping[f] = g
            used.add(g)
            if unary_c is not None and unary_d is not None:
                queue.append((unary_c[f], unary_d[g]))
            for h in c.out_of(c.tgt(f)):
                if h in mapping:
                    queue.append((c.compose(h, f), d.compose(mapping[h], g)))
            for k in c.into(c.src(f)):
                if k in mapping:
                    queue.append((c.compose(f, k), d.compose(g, mapping[k])))
        return True

    start: dict[int, int] = {}
    used: set[int] = set()
    for a in c.object_ids():
        if not assign(start, used, c.identity(a), d.identity(obj_map[a])):
            return None

    def search(mapping: dict[int, int], used: set[int]) -> Optional[dict[int, int]]:
        if len(mapping) == len(c.morphisms):
            return mapping
        open_ = [f for f in c.morphism_ids() if f not in mapping]
        f = min(open_, key=lambda x: (sum(1 for g in candidates[x] if g not in used), x))
        for g in candidates[f]:
            if g in used:
                continue
            trial, trial_used = dict(mapping), set(used)
            if assign(trial, trial_used, f, g):
                result = search(trial, trial_used)
                if result is not None:
                    return result
        return None

    found = search(start, used)
    if found is None:
        return None
    return [found[f] for f in c.morphism_ids()]
