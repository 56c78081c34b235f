from __future__ import annotations

import functools
import logging
from pathlib import Path
from typing import Callable, Optional, Sequence

import click

from app.cli.dto import CommandResult, RunOptions
from app.cli.serializers import CommandSummary
from app.exception.bundle_error import BundleError, UnknownFixture, UnknownPresheaf
from app.exception.domain_error import InternalInvariantBreach
from app.init_logic import report_writer, workbench_service
from config.config import app_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_LAW_FAILURE = 1
EXIT_UNREADABLE = 2
EXIT_INTERNAL = 3

DIRECTIONS = click.Choice(["to-jrp", "to-sheaf"])


def run_options(function: Callable) -> Callable:
    """Общие флаги подкоманд: --max-family, --seed, --out, --json"""

    @click.option("--max-family", type=click.IntRange(min=0), default=None,
                  help="Наибольший размер перебираемых семейств (по умолчанию из конфига)")
    @click.option("--seed", type=int, default=None, help="Зерно выборочных проверок")
    @click.option("--out", "out", type=click.Path(file_okay=False), default=None,
                  help="Каталог для отчета, сводки и построенных бандлов")
    @click.option("--json", "as_json", is_flag=True, help="Печатать сводку JSON вместо строк отчета")
    @functools.wraps(function)
    def wrapper(*args, max_family: Optional[int], seed: Optional[int], out: Optional[str], as_json: bool, **kwargs):
        limits = app_config.limits
        options = RunOptions(
            max_family=limits.max_family if max_family is None else max_family,
            seed=limits.seed if seed is None else seed,
            transformation_bound=limits.transformation_bound,
        )
        return function(*args, options=options, out=out or app_config.output.directory, as_json=as_json, **kwargs)

    return wrapper


def summary_of(result: CommandResult, exit_code: int) -> CommandSummary:
    return CommandSummary(
        command=result.command,
        subject=result.subject,
        ok=result.ok,
        exit_code=exit_code,
        checks=dict(sorted(result.checks.items())),
        violations=result.report.lines(),
        details=result.details,
    )


def emit(result: CommandResult, out: Optional[str], as_json: bool) -> int:
    """Печатает отчет и сохраняет файлы в out; возвращает код выхода"""
    exit_code = EXIT_OK if result.ok else EXIT_LAW_FAILURE
    lines = result.report.lines()
    failed = sorted(name for name, passed in result.checks.items() if not passed)
    summary = summary_of(result, exit_code).model_dump_json(indent=2)

    if as_json:
        report_writer.echo(summary)
    else:
        for line in lines:
            report_writer.echo(line)
        status = "ok" if result.ok else f"FAILED {', '.join(failed) or len(lines)}"
        report_writer.echo(f"# {result.command} {result.subject}: {status}")

    report_writer.save(out, f"{result.command}.report.txt", "\n".join(lines))
    report_writer.save(out, f"{result.command}.summary.json", summary)
    for name, text in sorted(result.artifacts.items()):
        report_writer.save(out, f"{result.command}.{name}.json", text)
    return exit_code


def execute(action: Callable[[], CommandResult], out: Optional[str], as_json: bool) -> None:
    ctx = click.get_current_context()
    try:
        result = action()
    except (BundleError, UnknownFixture, UnknownPresheaf) as e:
        report_writer.echo(f"error: {e}", err=True)
        ctx.exit(EXIT_UNREADABLE)
    except InternalInvariantBreach as e:
        logger.exception("internal invariant breach")
        report_writer.echo(f"internal invariant breach: {e}", err=True)
        ctx.exit(EXIT_INTERNAL)
    ctx.exit(emit(result, out, as_json))


@click.group()
def cli():
    """Проверка законов restriction-категорий, пучков и join restriction предпучков на конечных фикстурах"""


@cli.command("check-laws")
@click.argument("bundle")
@run_options
def check_laws(bundle: str, options: RunOptions, out: Optional[str], as_json: bool):
    """Законы категории, R1–R4, J1–J2, M-системы и предпучков бандла"""
    execute(lambda: workbench_service.check_laws(bundle, options), out, as_json)


@cli.command("build-par")
@click.argument("bundle")
@run_options
def build_par(bundle: str, options: RunOptions, out: Optional[str], as_json: bool):
    """Par(C, M) с проверкой законов; бандл результата пишется в --out"""
    execute(lambda: workbench_service.build_par(bundle, options), out, as_json)


@cli.command("karoubi")
@click.argument("bundle")
@run_options
def karoubi(bundle: str, options: RunOptions, out: Optional[str], as_json: bool):
    """Расщепление идемпотентов ограничения K_r"""
    execute(lambda: workbench_service.karoubi(bundle, options), out, as_json)


@cli.command("geometric")
@click.argument("bundle")
@run_options
def geometric(bundle: str, options: RunOptions, out: Optional[str], as_json: bool):
    """Геометричность M-категории, гейтинговость Sub_M и joins в Par"""
    execute(lambda: workbench_service.geometric(bundle, options), out, as_json)


@cli.command("topology")
@click.argument("bundle")
@run_options
def topology(bundle: str, options: RunOptions, out: Optional[str], as_json: bool):
    """Топология, порожденная базисными покрытиями, и ее субканоничность"""
    execute(lambda: workbench_service.topology(bundle, options), out, as_json)


@cli.command("sheaf-check")
@click.argument("bundle")
@click.argument("presheaf")
@run_options
def sheaf_check(bundle: str, presheaf: str, options: RunOptions, out: Optional[str], as_json: bool):
    """Условие пучка для предпучка бандла или встроенного (y<obj>, yD, const<k>, terminal, empty)"""
    execute(lambda: workbench_service.sheaf_check(bundle, presheaf, options), out, as_json)


@cli.command("sheafify")
@click.argument("bundle")
@click.argument("presheaf")
@run_options
def sheafify(bundle: str, presheaf: str, options: RunOptions, out: Optional[str], as_json: bool):
    """Пучкование P⁺⁺ и проверка единицы"""
    execute(lambda: workbench_service.sheafify(bundle, presheaf, options), out, as_json)


@cli.command("transfer")
@click.argument("bundle")
@click.argument("presheaf")
@click.option("--direction", type=DIRECTIONS, required=True)
@run_options
def transfer(bundle: str, presheaf: str, direction: str, options: RunOptions, out: Optional[str], as_json: bool):
    """Перенос пучок -> join restriction предпучок на Par или обратно"""
    execute(lambda: workbench_service.transfer(bundle, presheaf, direction, options), out, as_json)


@cli.command("roundtrip")
@click.argument("bundle")
@click.argument("presheaf")
@click.option("--direction", type=DIRECTIONS, default="to-jrp", show_default=True)
@run_options
def roundtrip(bundle: str, presheaf: str, direction: str, options: RunOptions, out: Optional[str], as_json: bool):
    """Перенос туда и обратно со свидетелем изоморфизма"""
    execute(lambda: workbench_service.roundtrip(bundle, presheaf, direction, options), out, as_json)


@cli.command("unit")
@click.argument("bundle")
@run_options
def unit(bundle: str, options: RunOptions, out: Optional[str], as_json: bool):
    """Единица свободного пополнения: маршрут через Par(Sh) против y_jr"""
    execute(lambda: workbench_service.unit(bundle, options), out, as_json)


@cli.command("dump")
@click.argument("bundle")
@run_options
def dump(bundle: str, options: RunOptions, out: Optional[str], as_json: bool):
    """Канонический JSON бандла (фикстуры и файлы)"""
    ctx = click.get_current_context()
    try:
        result = workbench_service.dump(bundle, options)
    except (BundleError, UnknownFixture) as e:
        report_writer.echo(f"error: {e}", err=True)
        ctx.exit(EXIT_UNREADABLE)
    report_writer.echo(result.artifacts["bundle"])
    report_writer.save(out, f"{Path(bundle).stem}.bundle.json", result.artifacts["bundle"])


def cli_main(args: Optional[Sequence[str]] = None) -> int:
    """Запуск без sys.exit: код 0 все проверки прошли, 1 нарушен закон, 2 бандл не прочитан, 3 внутренняя ошибка"""
    try:
        code = cli.main(args=list(args) if args is not None else None, prog_name="workbench", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_UNREADABLE
    except click.ClickException as e:
        e.show()
        return EXIT_LAW_FAILURE
    return code or EXIT_OK
