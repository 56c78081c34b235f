from typing import Any

from pydantic import BaseModel, Field


class CommandSummary(BaseModel):
    """
    Машиночитаемая сводка запуска, тот же JSON, что и у бандлов
    {
        "command": "geometric",
        "subject": "(FinSet<=2,Iso)",
        "ok": false,
        "exit_code": 1,
        "checks": {"geometric": false},
        "violations": ["G-COLIMIT 0 (object 0)"],
        "details": {}
    }
    """

    command: str
    subject: str
    ok: bool
    exit_code: int
    checks: dict[str, bool] = Field(default_factory=dict)
    violations: list[str] = Field(default_factory=list)
    details: dict[str, Any] = Field(default_factory=dict)


class TopologyDump(BaseModel):
    """
    Покрывающие решета по объектам, решето это отсортированный список id морфизмов
    {
        "name": "J((FinSet<=1,Inj))",
        "covers": {"0": [["0>0:"], []], "1": [["0>1:", "1>1:0"]]}
    }
    """

    name: str
    covers: dict[str, list[list[str]]]


class TransferWitness(BaseModel):
    """Таблицы изоморфизма и обратного к нему: components[объект][сечение]"""

    forward: list[list[int]]
    backward: list[list[int]]
