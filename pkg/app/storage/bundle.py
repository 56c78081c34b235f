from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Iterable, Optional, Union

from pydantic import ValidationError

from app.entities.bundle import Bundle, MorphismRecord, PresheafRecord, Workspace
from app.entities.category import FinCategory, Morphism
from app.entities.fixtures import (
    FixtureSpec,
    build_finset_mcat,
    build_finset_p,
    build_nojoin_fixture,
    parse_fixture_name,
)
from app.entities.mcategory import MCategory
from app.entities.presheaf import (
    Presheaf,
    constant_presheaf,
    empty_presheaf,
    representable,
    terminal_presheaf,
)
from app.entities.restriction import RestrictionCategory
from app.entities.restriction_presheaf import RestrictionPresheaf
from app.exception.bundle_error import BundleError, UnknownFixture, UnknownPresheaf
from clients.bundle_file import BundleFile

logger = logging.getLogger(__name__)

CONSTANT_NAME = re.compile(r"^const(\d+)$")

# встроенные имена предпучков, доступные в любом бандле
BUILTIN_PRESHEAVES = ["y<obj>", "yD", "const<k>", "terminal", "empty"]


def _location(loc: Iterable) -> str:
    """('morphisms', 3, 'src') -> 'morphisms[3].src'"""
    text = ""
    for part in loc:
        if isinstance(part, int):
            text += f"[{part}]"
        else:
            text += f".{part}" if text else str(part)
    return text


class BundleRepository:

    def __init__(self, files: BundleFile):
        self.files = files

    def load(self, source: str, seed: int = 0) -> Workspace:
        """Имя встроенной фикстуры (finset_p_2, finset_inj_2, finset_iso_2, nojoin) или путь к JSON"""
        spec = parse_fixture_name(source, seed)
        if spec is not None:
            return self.from_fixture(source, spec)
        if not self.files.exists(source):
            raise UnknownFixture(source)
        workspace = self.parse(source, self.files.read(source))
        return workspace.model_copy(update={"spec": FixtureSpec(kind="custom", path=source, seed=seed)})

    def from_fixture(self, source: str, spec: FixtureSpec) -> Workspace:
        if spec.kind == "finset_p":
            x = build_finset_p(spec.size)
            return Workspace(source=source, category=x.base, spec=spec, restriction=x)
        if spec.kind in ("finset_inj", "finset_iso"):
            mc = build_finset_mcat(spec.size, "inj" if spec.kind == "finset_inj" else "iso")
            return Workspace(source=source, category=mc.base, spec=spec, mcategory=mc)
        if spec.kind == "nojoin":
            x = build_nojoin_fixture()
            return Workspace(source=source, category=x.base, spec=spec, restriction=x)
        raise UnknownFixture(source)

    def parse(self, path: str, text: str) -> Workspace:
        try:
            bundle = Bundle.model_validate_json(text)
        except ValidationError as e:
            first = e.errors()[0]
            raise BundleError(path, _location(first["loc"]), first["msg"])
        return self.to_workspace(path, bundle)

    def to_workspace(self, path: str, bundle: Bundle) -> Workspace:
        objects: dict[str, int] = {}
        for i, name in enumerate(bundle.objects):
            if name in objects:
                raise BundleError(path, f"objects[{i}]", f"объект '{name}' объявлен повторно")
            objects[name] = i

        morphisms: dict[str, int] = {}
        for i, record in enumerate(bundle.morphisms):
            if record.id in morphisms:
                raise BundleError(path, f"morphisms[{i}].id", f"морфизм '{record.id}' объявлен повторно")
            for field in ("src", "tgt"):
                if getattr(record, field) not in objects:
                    raise BundleError(path, f"morphisms[{i}].{field}", f"объект '{getattr(record, field)}' не объявлен")
            morphisms[record.id] = i

        for name in bundle.identities:
            if name not in objects:
                raise BundleError(path, f"identities.{name}", f"объект '{name}' не объявлен")
        identities = []
        for name in bundle.objects:
            if name not in bundle.identities:
                raise BundleError(path, f"identities.{name}", "у объекта нет тождества")
            f = bundle.identities[name]
            if f not in morphisms:
                raise BundleError(path, f"identities.{name}", f"морфизм '{f}' не объявлен")
            record = bundle.morphisms[morphisms[f]]
            if record.src != name or record.tgt != name:
                raise BundleError(path, f"identities.{name}", f"'{f}' не эндоморфизм объекта")
            identities.append(morphisms[f])

        comp: dict[tuple[int, int], int] = {}
        for i, triple in enumerate(bundle.comp):
            for k, m in enumerate(triple):
                if m not in morphisms:
                    raise BundleError(path, f"comp[{i}][{k}]", f"морфизм '{m}' не объявлен")
            g, f, gf = (morphisms[m] for m in triple)
            if comp.setdefault((g, f), gf) != gf:
                raise BundleError(path, f"comp[{i}]", f"композиция {triple[0]}∘{triple[1]} задана дважды по-разному")
        for record in bundle.morphisms:
            f = morphisms[record.id]
            comp.setdefault((identities[objects[record.tgt]], f), f)
            comp.setdefault((f, identities[objects[record.src]]), f)

        category = FinCategory(
            name=bundle.name or Path(path).stem,
            objects=tuple(bundle.objects),
            morphisms=tuple(
                Morphism(id=i, src=objects[r.src], tgt=objects[r.tgt], name=r.id) for i, r in enumerate(bundle.morphisms)
            ),
            identities=tuple(identities),
            comp=comp,
        )

        restriction = None
        if bundle.restriction is not None:
            restriction = RestrictionCategory(
                base=category, bar=self._restriction_table(path, bundle, morphisms, category)
            )

        mcategory = None
        if bundle.monics is not None:
            for i, m in enumerate(bundle.monics):
                if m not in morphisms:
                    raise BundleError(path, f"monics[{i}]", f"морфизм '{m}' не объявлен")
            mcategory = MCategory(base=category, monics=frozenset(morphisms[m] for m in bundle.monics))

        presheaves: dict[str, Presheaf] = {}
        restriction_presheaves: dict[str, RestrictionPresheaf] = {}
        for name, record in bundle.presheaves.items():
            p = self._presheaf(path, name, record, category, objects)
            presheaves[name] = p
            if record.element_bar is not None:
                if restriction is None:
                    raise BundleError(path, f"presheaves.{name}.element_bar", "нужна секция restriction")
                restriction_presheaves[name] = RestrictionPresheaf(
                    presheaf=p,
                    category=restriction,
                    element_bar=self._element_bar(path, name, record, p, objects, morphisms),
                )

        logger.info(
            "loaded bundle %s: %d objects, %d morphisms, %d presheaves",
            path, len(category.objects), len(category.morphisms), len(presheaves),
        )
        return Workspace(
            source=path,
            category=category,
            restriction=restriction,
            mcategory=mcategory,
            presheaves=presheaves,
            restriction_presheaves=restriction_presheaves,
        )

    def _restriction_table(
            self, path: str, bundle: Bundle, morphisms: dict[str, int], category: FinCategory
    ) -> tuple[int, ...]:
        for key, value in bundle.restriction.items():
            for m in (key, value):
                if m not in morphisms:
                    raise BundleError(path, f"restriction.{key}", f"морфизм '{m}' не объявлен")
        bar = []
        for record in bundle.morphisms:
            f = morphisms[record.id]
            if record.id in bundle.restriction:
                bar.append(morphisms[bundle.restriction[record.id]])
            elif category.is_identity(f):
                bar.append(f)
            else:
                raise BundleError(path, f"restriction.{record.id}", "ограничение морфизма не задано")
        return tuple(bar)

    def _presheaf(
            self, path: str, name: str, record: PresheafRecord, category: FinCategory, objects: dict[str, int]
    ) -> Presheaf:
        prefix = f"presheaves.{name}"
        labels: list[list[str]] = [[] for _ in category.objects]
        for obj, sections in record.sections.items():
            if obj not in objects:
                raise BundleError(path, f"{prefix}.sections.{obj}", f"объект '{obj}' не объявлен")
            if len(set(sections)) != len(sections):
                raise BundleError(path, f"{prefix}.sections.{obj}", "сечения повторяются")
            labels[objects[obj]] = list(sections)
        position = [{label: i for i, label in enumerate(row)} for row in labels]

        ids = {m.name: m.id for m in category.morphisms}
        for key in record.action:
            if key not in ids:
                raise BundleError(path, f"{prefix}.action.{key}", f"морфизм '{key}' не объявлен")
        action = []
        for m in category.morphisms:
            table = record.action.get(m.name)
            if table is None and (category.is_identity(m.id) or not labels[m.tgt]):
                table = {label: label for label in labels[m.tgt]}
            if table is None:
                raise BundleError(path, f"{prefix}.action.{m.name}", "действие морфизма не задано")
            row = []
            for y in labels[m.tgt]:
                x = table.get(y)
                if x is None:
                    raise BundleError(path, f"{prefix}.action.{m.name}.{y}", "образ сечения не задан")
                if x not in position[m.src]:
                    raise BundleError(path, f"{prefix}.action.{m.name}.{y}", f"'{x}' не сечение над '{category.objects[m.src]}'")
                row.append(position[m.src][x])
            extra = set(table) - set(labels[m.tgt])
            if extra:
                raise BundleError(path, f"{prefix}.action.{m.name}", f"лишние сечения {sorted(extra)}")
            action.append(tuple(row))

        return Presheaf(
            category=category,
            name=name,
            sizes=tuple(len(row) for row in labels),
            action=tuple(action),
            labels=tuple(tuple(row) for row in labels),
        )

    def _element_bar(
            self,
            path: str,
            name: str,
            record: PresheafRecord,
            p: Presheaf,
            objects: dict[str, int],
            morphisms: dict[str, int],
    ) -> tuple[tuple[int, ...], ...]:
        prefix = f"presheaves.{name}.element_bar"
        for obj in record.element_bar:
            if obj not in objects:
                raise BundleError(path, f"{prefix}.{obj}", f"объект '{obj}' не объявлен")
        rows = []
        for a, obj in enumerate(p.category.objects):
            table = record.element_bar.get(obj, {})
            row = []
            for x in p.sections(a):
                label = p.label(a, x)
                if label not in table:
                    raise BundleError(path, f"{prefix}.{obj}.{label}", "ограничение сечения не задано")
                if table[label] not in morphisms:
                    raise BundleError(path, f"{prefix}.{obj}.{label}", f"морфизм '{table[label]}' не объявлен")
                row.append(morphisms[table[label]])
            rows.append(tuple(row))
        return tuple(rows)

    def resolve_presheaf(self, workspace: Workspace, name: str, category: Optional[FinCategory] = None) -> Presheaf:
        """
        Предпучок бандла или встроенный: y<obj>, yD (последний объект), const<k>, terminal, empty.
        Встроенные строятся над category (по умолчанию над категорией бандла)
        """
        if name in workspace.presheaves:
            return workspace.presheaves[name]
        c = category or workspace.category
        d = self.representable_object(workspace, name)
        if d is not None:
            return representable(c, d, name=name)
        match = CONSTANT_NAME.match(name)
        if match is not None:
            return constant_presheaf(c, int(match.group(1)), name=name)
        if name == "terminal":
            return terminal_presheaf(c).model_copy(update={"name": name})
        if name == "empty":
            return empty_presheaf(c).model_copy(update={"name": name})
        raise UnknownPresheaf(name, sorted(workspace.presheaves) + BUILTIN_PRESHEAVES)

    def representable_object(self, workspace: Workspace, name: str) -> Optional[int]:
        """Объект, если name это встроенное имя представимого предпучка (и не имя из бандла)"""
        c = workspace.category
        if name in workspace.presheaves or not name.startswith("y") or not c.objects:
            return None
        if name == "yD" and "D" not in c.objects:
            return len(c.objects) - 1
        if name[1:] in c.objects:
            return c.object_id(name[1:])
        return None

    def to_bundle(
            self,
            category: FinCategory,
            restriction: Optional[RestrictionCategory] = None,
            mcategory: Optional[MCategory] = None,
            presheaves: Iterable[Union[Presheaf, RestrictionPresheaf]] = (),
    ) -> Bundle:
        """Бандл в каноническом порядке: объекты и морфизмы по id, композиции по (g, f) без тождеств"""
        names = [m.name for m in category.morphisms]
        if any(not n for n in names) or len(set(names)) != len(names):
            names = [f"{m.id}:{m.name}" for m in category.morphisms]
        comp = [
            (names[g], names[f], names[gf])
            for (g, f), gf in sorted(category.comp.items())
            if not category.is_identity(g) and not category.is_identity(f)
        ]
        records = {}
        for item in presheaves:
            p = item.presheaf if isinstance(item, RestrictionPresheaf) else item
            action = {}
            for m in category.morphisms:
                if category.is_identity(m.id) or not p.sizes[m.tgt]:
                    continue
                action[names[m.id]] = {p.label(m.tgt, y): p.label(m.src, x) for y, x in enumerate(p.action[m.id])}
            element_bar = None
            if isinstance(item, RestrictionPresheaf):
                element_bar = {
                    obj: {p.label(a, x): names[item.bar(a, x)] for x in p.sections(a)}
                    for a, obj in enumerate(category.objects)
                }
            records[p.name] = PresheafRecord(
                sections={obj: [p.label(a, x) for x in p.sections(a)] for a, obj in enumerate(category.objects)},
                action=action,
                element_bar=element_bar,
            )
        return Bundle(
            name=category.name,
            objects=list(category.objects),
            morphisms=[
                MorphismRecord(id=names[m.id], src=category.objects[m.src], tgt=category.objects[m.tgt])
                for m in category.morphisms
            ],
            identities={obj: names[category.identity(a)] for a, obj in enumerate(category.objects)},
            comp=comp,
            restriction=None if restriction is None else {
                names[f]: names[restriction.bar[f]] for f in category.morphism_ids() if not category.is_identity(f)
            },
            monics=None if mcategory is None else [names[m] for m in sorted(mcategory.monics)],
            presheaves=records,
        )

    def dump(self, bundle: Bundle) -> str:
        return bundle.model_dump_json(indent=2, exclude_none=True)

    def dump_workspace(self, workspace: Workspace) -> str:
        return self.dump(self.to_bundle(
            workspace.category,
            workspace.restriction,
            workspace.mcategory,
            [workspace.restriction_presheaves.get(name, p) for name, p in workspace.presheaves.items()],
        ))

    def save(self, path: str, bundle: Bundle) -> None:
        self.files.write(path, self.dump(bundle) + "\n")
