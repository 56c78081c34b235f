from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from app.entities.category import FinCategory
from app.entities.fixtures import FixtureSpec
from app.entities.mcategory import MCategory
from app.entities.presheaf import Presheaf
from app.entities.restriction import RestrictionCategory
from app.entities.restriction_presheaf import RestrictionPresheaf


class MorphismRecord(BaseModel):
    """
    {"id": "f", "src": "A", "tgt": "B"}
    """
    model_config = ConfigDict(extra="forbid")

    id: str
    src: str
    tgt: str


class PresheafRecord(BaseModel):
    """
    {
        "sections": {"A": ["x", "y"], "B": ["z"]},
        "action": {"f": {"z": "x"}},
        "element_bar": {"A": {"x": "1_A", "y": "e"}, "B": {"z": "1_B"}}
    }
    action[f][сечение над tgt f] = сечение над src f; строки тождеств можно опускать
    """
    model_config = ConfigDict(extra="forbid")

    sections: dict[str, list[str]]
    action: dict[str, dict[str, str]] = Field(default_factory=dict)
    element_bar: Optional[dict[str, dict[str, str]]] = None


class Bundle(BaseModel):
    """
    Файл бандла: категория и необязательные секции для следующих построений.
    {
        "name": "example",
        "objects": ["A", "B"],
        "morphisms": [{"id": "1_A", "src": "A", "tgt": "A"}, ...],
        "identities": {"A": "1_A", "B": "1_B"},
        "comp": [["g", "f", "gf"], ...],
        "restriction": {"f": "e"},
        "monics": ["m"],
        "presheaves": {"P": {...}}
    }
    Композиции с тождествами в comp можно опускать
    """
    model_config = ConfigDict(extra="forbid")

    name: str = ""
    objects: list[str]
    morphisms: list[MorphismRecord]
    identities: dict[str, str]
    comp: list[tuple[str, str, str]] = Field(default_factory=list)
    restriction: Optional[dict[str, str]] = None
    monics: Optional[list[str]] = None
    presheaves: dict[str, PresheafRecord] = Field(default_factory=dict)


class Workspace(BaseModel):
    """Загруженный бандл: id интернированы в целые, секции собраны в сущности"""
    model_config = ConfigDict(frozen=True)

    # путь к файлу или имя встроенной фикстуры
    source: str
    category: FinCategory
    spec: Optional[FixtureSpec] = None
    restriction: Optional[RestrictionCategory] = None
    mcategory: Optional[MCategory] = None
    presheaves: dict[str, Presheaf] = Field(default_factory=dict)
    # предпучки бандла с таблицей element_bar
    restriction_presheaves: dict[str, RestrictionPresheaf] = Field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.category.name or self.source
