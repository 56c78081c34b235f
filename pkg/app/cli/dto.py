from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from app.entities.law_report import LawReport


@dataclass
class RunOptions:
    # None - перебор всех семейств
    max_family: Optional[int]
    seed: int
    # порог, до которого естественные преобразования перебираются полностью
    transformation_bound: Optional[int]


@dataclass
class CommandResult:
    command: str
    subject: str
    report: LawReport = field(default_factory=LawReport)
    # имя проверки -> пройдена ли
    checks: dict[str, bool] = field(default_factory=dict)
    # сведения для сводки, значения сериализуются в JSON
    details: dict[str, Any] = field(default_factory=dict)
    # имя артефакта -> текст (бандл, дамп топологии)
    artifacts: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.report.ok and all(self.checks.values())

    def record(self, check: str, report: LawReport) -> bool:
        """Добавляет нарушения отчета и отмечает проверку"""
        self.checks[check] = report.ok
        self.report.extend(report)
        return report.ok
