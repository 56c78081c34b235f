from __future__ import annotations

import logging
import re
from itertools import product
from typing import Literal, Optional, Sequence

from pydantic import BaseModel, Field

from app.entities.category import FinCategory, category_from_composition
from app.entities.mcategory import MCategory
from app.entities.restriction import RestrictionCategory

logger = logging.getLogger(__name__)

FixtureKind = Literal["finset_p", "finset_inj", "finset_iso", "nojoin", "custom"]

FIXTURE_NAME = re.compile(r"^(finset_p|finset_inj|finset_iso)_(\d+)$")


class FixtureSpec(BaseModel):
    kind: FixtureKind
    # наибольший размер множества
    size: int = Field(default=0, ge=0)
    seed: int = 0
    # путь к бандлу для kind == custom
    path: Optional[str] = None


def parse_fixture_name(name: str, seed: int = 0) -> Optional[FixtureSpec]:
    """'finset_p_2' -> FixtureSpec(kind='finset_p', size=2); None если имя не встроенное"""
    if name == "nojoin":
        return FixtureSpec(kind="nojoin", seed=seed)
    match = FIXTURE_NAME.match(name)
    if match is None:
        return None
    return FixtureSpec(kind=match.group(1), size=int(match.group(2)), seed=seed)


def finset_name(a: int, b: int, values: Sequence[Optional[int]]) -> str:
    """Имя (частичной) функции a -> b: '2>2:01', неопределенная точка пишется как '_'"""
    return f"{a}>{b}:" + "".join("_" if v is None else str(v) for v in values)


def _maps(a: int, b: int, partial: bool) -> list[tuple[Optional[int], ...]]:
    values: list[Optional[int]] = ([None] if partial else []) + list(range(b))
    identity = tuple(range(a)) if a == b else None
    # тождество первым в своем hom, остальные лексикографически
    return sorted(
        product(values, repeat=a),
        key=lambda t: (t != identity, tuple(-1 if v is None else v for v in t)),
    )


def _finset_category(n: int, partial: bool) -> tuple[FinCategory, list[tuple[Optional[int], ...]]]:
    graphs: list[tuple[Optional[int], ...]] = []
    morphisms: list[tuple[int, int, str]] = []
    lookup: dict[tuple[int, int, tuple], int] = {}
    for a in range(n + 1):
        for b in range(n + 1):
            for values in _maps(a, b, partial):
                lookup[(a, b, values)] = len(morphisms)
                morphisms.append((a, b, finset_name(a, b, values)))
                graphs.append(values)

    def compose(g: int, f: int) -> int:
        gf = tuple(None if v is None else graphs[g][v] for v in graphs[f])
        return lookup[(morphisms[f][0], morphisms[g][1], gf)]

    identities = [lookup[(a, a, tuple(range(a)))] for a in range(n + 1)]
    title = f"FinSet_p<={n}" if partial else f"FinSet<={n}"
    category = category_from_composition(title, [str(a) for a in range(n + 1)], morphisms, identities, compose)
    return category, graphs


def build_finset(n: int) -> FinCategory:
    """FinSet на множествах {0..k-1}, k = 0..n"""
    if n < 0:
        raise ValueError("size bound must be non-negative")
    return _finset_category(n, partial=False)[0]


def build_finset_p(n: int) -> RestrictionCategory:
    """FinSet_p: частичные функции, ограничение это частичное тождество на области определения"""
    if n < 0:
        raise ValueError("size bound must be non-negative")
    category, graphs = _finset_category(n, partial=True)
    bar = []
    for f, values in enumerate(graphs):
        a = category.src(f)
        domain = tuple(None if v is None else i for i, v in enumerate(values))
        bar.append(category.morphism_id(finset_name(a, a, domain)))
    logger.debug("built %s with %d morphisms", category.name, len(graphs))
    return RestrictionCategory(base=category, bar=tuple(bar))


def build_finset_mcat(n: int, monic_class: Literal["inj", "iso"]) -> MCategory:
    """(FinSet<=n, инъекции) или (FinSet<=n, изоморфизмы)"""
    category, graphs = _finset_category(n, partial=False)
    monics = set()
    for f, values in enumerate(graphs):
        injective = len(set(values)) == len(values)
        if monic_class == "inj" and injective:
            monics.add(f)
        elif monic_class == "iso" and injective and category.src(f) == category.tgt(f):
            monics.add(f)
    name = f"(FinSet<={n},{'Inj' if monic_class == 'inj' else 'Iso'})"
    return MCategory(base=category.model_copy(update={"name": name}), monics=frozenset(monics))


def build_nojoin_fixture() -> RestrictionCategory:
    """
    Ограничительная подкатегория частичных отображений с совместимой парой без верхней грани.
    A = {1, 2}, B = {0}; hom(A, A) = частичные тождества {1, e1, e2, z},
    hom(A, B) = {f (определено в 1), g (определено в 2), 0}: тотального отображения A -> B нет
    """
    a, b = 0, 1
    # (src, tgt, график)
    shapes = [
        (a, a, frozenset({(1, 1), (2, 2)})),
        (a, a, frozenset({(1, 1)})),
        (a, a, frozenset({(2, 2)})),
        (a, a, frozenset()),
        (a, b, frozenset({(1, 0)})),
        (a, b, frozenset({(2, 0)})),
        (a, b, frozenset()),
        (b, b, frozenset({(0, 0)})),
        (b, b, frozenset()),
        (b, a, frozenset()),
    ]
    names = ["1_A", "e1", "e2", "z", "f", "g", "0", "1_B", "z_B", "0_BA"]
    lookup = {shape: i for i, shape in enumerate(shapes)}

    def compose(g: int, f: int) -> int:
        f_src, _, f_graph = shapes[f]
        _, g_tgt, g_graph = shapes[g]
        graph = frozenset((x, z) for x, y in f_graph for y2, z in g_graph if y == y2)
        return lookup[(f_src, g_tgt, graph)]

    category = category_from_composition(
        "nojoin",
        ["A", "B"],
        [(s, t, label) for (s, t, _), label in zip(shapes, names)],
        [0, 7],
        compose,
    )
    bar = [lookup[(s, s, frozenset((x, x) for x, _ in graph))] for s, _, graph in shapes]
    return RestrictionCategory(base=category, bar=tuple(bar))
