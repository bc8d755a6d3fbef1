import csv
import json

import pytest
from click.testing import CliRunner

import qoffload.cli as cli
from qoffload._diagnostics import GradcheckReport
from qoffload.codes import ExitCode


@pytest.fixture(name="config_path")
def fixture_config_path(tmp_path):
    payload = {
        "system": {"num_wds": 2, "step_tau0": 50.0},
        "policy": "proposed",
        "horizon_blocks": 15,
        "master_seed": 3,
        "output_dir": str(tmp_path / "out"),
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload))
    return path


def test_help_lists_commands():
    result = CliRunner().invoke(cli.main, ["--help"])
    assert result.exit_code == 0
    for command in ("run", "sweep", "gradcheck", "oracle-compare", "plotdata"):
        assert command in result.output


def test_unknown_flag_is_a_usage_error(config_path):
    assert cli.dispatch(["run", "--config", str(config_path), "--bogus"]) == ExitCode.USAGE_ERROR


def test_missing_config_file_is_a_usage_error(tmp_path):
    assert cli.dispatch(["run", "--config", str(tmp_path / "missing.json")]) == ExitCode.USAGE_ERROR


def test_unknown_config_field_is_a_usage_error(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"horizon_blocks": 5, "bogus": 1}))
    assert cli.dispatch(["run", "--config", str(path)]) == ExitCode.USAGE_ERROR


def test_run_is_byte_identical(tmp_path, config_path):
    out = tmp_path / "out"
    assert cli.dispatch(["run", "--config", str(config_path)]) == ExitCode.SUCCESS
    first = {name: (out / name).read_bytes() for name in ("wd_trace.csv", "system_trace.csv")}
    assert cli.dispatch(["run", "--config", str(config_path)]) == ExitCode.SUCCESS
    for name, content in first.items():
        assert (out / name).read_bytes() == content


def test_run_overrides(tmp_path, config_path):
    out = tmp_path / "baseline"
    args = ["run", "--config", str(config_path), "--policy", "binary", "--blocks", "7", "--out", str(out)]
    assert cli.dispatch(args) == ExitCode.SUCCESS
    summary = json.loads((out / "summary.json").read_text())
    assert summary["blocks_completed"] == 7
    assert summary["config"]["policy"] == "binary"
    with open(out / "wd_trace.csv", encoding="utf-8") as handle:
        rows = [line for line in handle if not line.startswith("# ")]
    assert len(list(csv.DictReader(rows))) == 7 * 2


def test_divergence_exits_with_code_3(tmp_path):
    path = tmp_path / "config.json"
    out = tmp_path / "out"
    path.write_text(
        json.dumps(
            {
                "system": {"num_wds": 2, "step_alpha0": 1e8},
                "horizon_blocks": 200,
                "output_dir": str(out),
            }
        )
    )
    assert cli.dispatch(["run", "--config", str(path)]) == ExitCode.LEARNER_DIVERGENCE
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "diverged"


def test_sweep_and_plotdata(tmp_path, config_path):
    out = tmp_path / "sweep"
    args = [
        "sweep", "--config", str(config_path), "--axis", "b", "--values", "0.2,0.5",
        "--seeds", "2", "--policies", "even,random", "--blocks", "10", "--out", str(out),
    ]
    assert cli.dispatch(args) == ExitCode.SUCCESS
    series = tmp_path / "vs_b.csv"
    args = ["plotdata", "--trace", str(out / "sweep.csv"), "--figure", "vs-b", "--out", str(series)]
    assert cli.dispatch(args) == ExitCode.SUCCESS
    with open(series, encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert {row["series"] for row in rows} == {"even", "random"}
    assert {float(row["x"]) for row in rows} == {0.2, 0.5}


def test_sweep_rejects_unknown_policy(config_path):
    args = ["sweep", "--config", str(config_path), "--values", "0.2", "--policies", "greedy"]
    assert cli.dispatch(args) == ExitCode.USAGE_ERROR


def test_plotdata_to_stdout(tmp_path, config_path):
    assert cli.dispatch(["run", "--config", str(config_path)]) == ExitCode.SUCCESS
    trace = tmp_path / "out" / "system_trace.csv"
    result = CliRunner().invoke(cli.main, ["plotdata", "--trace", str(trace), "--figure", "per-block", "--window", "3"])
    assert result.exit_code == 0
    assert "series,x,y" in result.output
    assert "cost_ma3" in result.output


def test_gradcheck_writes_report(tmp_path):
    out = tmp_path / "gradcheck.json"
    assert cli.dispatch(["gradcheck", "--trials", "2", "--out", str(out)]) == ExitCode.SUCCESS
    report = json.loads(out.read_text())
    assert report["trials"] == 2
    assert report["passed"]


def test_failed_gradcheck_exits_with_code_2(tmp_path, monkeypatch):
    def failing(**kwargs):
        return GradcheckReport(trials=1, tolerance=1e-5, h_fd=1e-6, max_errors={"grad_power": 1.0})

    monkeypatch.setattr(cli, "gradcheck", failing)
    out = tmp_path / "gradcheck.json"
    assert cli.dispatch(["gradcheck", "--out", str(out)]) == ExitCode.VERIFICATION_FAILURE
    assert not json.loads(out.read_text())["passed"]
