from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class Violation(BaseModel):
    """Одно нарушение закона: тег аксиомы и кортеж id, на котором оно найдено"""
    model_config = ConfigDict(frozen=True)

    axiom: str
    ids: tuple[int, ...] = ()
    # необязательное пояснение, в строку отчета попадает в скобках
    note: str = ""

    def sort_key(self) -> tuple:
        return self.axiom, self.ids, self.note

    def line(self) -> str:
        parts = [self.axiom, *(str(i) for i in self.ids)]
        text = " ".join(parts)
        if self.note:
            text += f" ({self.note})"
        return text


class LawReport(BaseModel):
    """
    Отчет проверки законов. Нарушения законов никогда не бросаются исключениями,
    они копятся здесь. Пустой отчет означает, что все проверенные законы выполнены
    """

    subject: str = ""
    violations: list[Violation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, axiom: str, *ids: int, note: str = "") -> None:
        self.violations.append(Violation(axiom=axiom, ids=tuple(ids), note=note))

    def extend(self, other: LawReport) -> None:
        self.violations.extend(other.violations)

    def tags(self) -> set[str]:
        return {v.axiom for v in self.violations}

    def has(self, axiom: str, *ids: int) -> bool:
        """Есть ли нарушение с таким тегом (и, если переданы, с такими id)"""
        for v in self.violations:
            if v.axiom == axiom and (not ids or v.ids == tuple(ids)):
                return True
        return False

    def of(self, axiom: str) -> list[Violation]:
        return sorted((v for v in self.violations if v.axiom == axiom), key=Violation.sort_key)

    def lines(self) -> list[str]:
        """Строки отчета в детерминированном порядке, без повторов"""
        unique = {v.sort_key(): v for v in self.violations}
        return [unique[k].line() for k in sorted(unique)]
