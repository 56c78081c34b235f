import json

import pytest
from click.testing import CliRunner

from app.cli import commands
from app.cli.commands import EXIT_INTERNAL, EXIT_LAW_FAILURE, EXIT_OK, EXIT_UNREADABLE, cli, cli_main
from app.exception.domain_error import InternalInvariantBreach


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


def test_check_laws_passes(runner):
    result = runner.invoke(cli, ["check-laws", "finset_p_1"])
    assert result.exit_code == EXIT_OK
    assert result.output.strip().endswith(": ok")


def test_law_failure_exits_with_one(runner):
    result = runner.invoke(cli, ["check-laws", "nojoin"])
    assert result.exit_code == EXIT_LAW_FAILURE
    assert any(line.startswith("JOIN ") for line in result.output.splitlines())
    assert "FAILED join" in result.output


def test_report_lines_are_sorted(runner):
    result = runner.invoke(cli, ["geometric", "finset_iso_2"])
    assert result.exit_code == EXIT_LAW_FAILURE
    lines = [line for line in result.output.splitlines() if not line.startswith("#")]
    assert lines == sorted(lines)
    assert all(line.startswith("G-") for line in lines)
    assert any(line.endswith("(object 1, empty family)") for line in lines)


@pytest.mark.parametrize("args", [
    ["check-laws", "no_such_bundle.json"],
    ["sheaf-check", "finset_inj_2", "Q"],
    ["topology", "nojoin"],
])
def test_unreadable_input_exits_with_two(runner, args):
    result = runner.invoke(cli, args)
    assert result.exit_code == EXIT_UNREADABLE
    assert result.stderr.startswith("error: ")


def test_broken_bundle_reports_location(runner, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps({"objects": ["A"], "morphisms": [], "identities": {"A": "1_A"}}))
    result = runner.invoke(cli, ["check-laws", str(path)])
    assert result.exit_code == EXIT_UNREADABLE
    assert "identities.A" in result.stderr


def test_internal_breach_exits_with_three(runner, monkeypatch):
    def breach(source, options):
        raise InternalInvariantBreach("check_laws", "таблица композиции повреждена")

    monkeypatch.setattr(commands.workbench_service, "check_laws", breach)
    result = runner.invoke(cli, ["check-laws", "finset_p_1"])
    assert result.exit_code == EXIT_INTERNAL
    assert "internal invariant breach" in result.stderr


def test_json_summary(runner):
    result = runner.invoke(cli, ["sheaf-check", "finset_inj_2", "const2", "--json"])
    assert result.exit_code == EXIT_LAW_FAILURE
    summary = json.loads(result.output)
    assert summary["command"] == "sheaf-check"
    assert summary["ok"] is False
    assert summary["exit_code"] == EXIT_LAW_FAILURE
    assert summary["checks"]["sheaf"] is False
    assert summary["violations"]


def test_out_directory_gets_report_summary_and_artifact(runner, tmp_path):
    result = runner.invoke(cli, ["build-par", "finset_inj_1", "--out", str(tmp_path)])
    assert result.exit_code == EXIT_OK
    assert (tmp_path / "build-par.report.txt").read_text() == "\n"
    assert json.loads((tmp_path / "build-par.summary.json").read_text())["ok"] is True
    par = json.loads((tmp_path / "build-par.par.json").read_text())
    assert "restriction" in par


def test_transfer_requires_direction(runner):
    result = runner.invoke(cli, ["transfer", "finset_inj_2", "y2"])
    assert result.exit_code == EXIT_UNREADABLE


@pytest.mark.parametrize("direction", ["to-jrp", "to-sheaf"])
def test_roundtrip_directions(runner, direction):
    result = runner.invoke(cli, ["roundtrip", "finset_inj_1", "y1", "--direction", direction, "--json"])
    assert result.exit_code == EXIT_OK
    assert json.loads(result.output)["details"]["direction"] == direction


def test_max_family_must_be_non_negative(runner):
    result = runner.invoke(cli, ["check-laws", "finset_p_1", "--max-family", "-1"])
    assert result.exit_code == EXIT_UNREADABLE


def test_dump_is_byte_identical(runner, tmp_path):
    first = runner.invoke(cli, ["dump", "finset_p_1", "--out", str(tmp_path)])
    second = runner.invoke(cli, ["dump", "finset_p_1"])
    assert first.exit_code == EXIT_OK
    assert first.output == second.output
    assert (tmp_path / "finset_p_1.bundle.json").read_text() == first.output


def test_cli_main_returns_codes(capsys):
    assert cli_main(["check-laws", "finset_p_1"]) == EXIT_OK
    assert cli_main(["check-laws", "nojoin"]) == EXIT_LAW_FAILURE
    assert cli_main(["check-laws", "finset_q_1"]) == EXIT_UNREADABLE
    assert cli_main(["no-such-command"]) == EXIT_UNREADABLE
    assert "no-such-command" in capsys.readouterr().err
