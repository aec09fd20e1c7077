import json

from typer.testing import CliRunner

from fermichain.cli import app
from fermichain.experiments import ExperimentConfig
from fermichain.utils.io import read_csv, read_summary

runner = CliRunner()


def test_bands_to_stdout():
    result = runner.invoke(app, ["--no-timestamp", "bands", "--points", "5"])
    assert result.exit_code == 0, result.output
    assert "# fermichain" in result.output
    assert "# created" not in result.output
    assert "eps_plus" in result.output


def test_gap_scan_to_file(tmp_path):
    out = tmp_path / "gap.csv"
    result = runner.invoke(
        app, ["--out", str(out), "gap-scan", "--L", "32", "--h", "0:0.5:2"]
    )
    assert result.exit_code == 0, result.output
    frame = read_csv(out)
    assert frame["h"].tolist() == [0.0, 0.5, 1.0, 1.5, 2.0]
    assert set(frame["L"]) == {32}
    assert read_summary(out) == {"L": 32}


def test_json_output(tmp_path):
    out = tmp_path / "winding.json"
    result = runner.invoke(
        app,
        ["--format", "json", "--out", str(out), "winding", "--h", "0.5,2"],
    )
    assert result.exit_code == 0, result.output
    document = json.loads(out.read_text())
    assert [row["winding"] for row in document["rows"]] == [1, 0]


def test_odd_length_is_a_usage_error():
    result = runner.invoke(app, ["gap-scan", "--L", "7", "--h", "0.5"])
    assert result.exit_code == 2


def test_bad_range_is_a_usage_error():
    result = runner.invoke(
        app, ["spectrum", "--L", "8", "--J-range", "1.0,0.5"]
    )
    assert result.exit_code == 2


def test_workers_must_be_positive():
    result = runner.invoke(app, ["--workers", "0", "bands"])
    assert result.exit_code == 2


def test_config_file_replay(tmp_path):
    config = ExperimentConfig(
        command="spectrum",
        params={"L": 8, "h": 0.3, "bc": "obc"},
        timestamp=False,
    )
    path = tmp_path / "config.json"
    path.write_text(config.to_json())
    out = tmp_path / "spectrum.csv"
    result = runner.invoke(
        app,
        ["--config", str(path), "--out", str(out), "spectrum", "--h", "0.6"],
    )
    assert result.exit_code == 0, result.output
    header = out.read_text().splitlines()[2]
    replayed = ExperimentConfig.from_json(header[len("# config "):])
    assert replayed.params == {"L": 8, "h": "0.6", "bc": "obc"}
    frame = read_csv(out)
    assert frame["h"].unique().tolist() == [0.6]
    assert len(frame) == 8
    assert replayed.out == out


def test_config_for_another_command(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(ExperimentConfig(command="bands").to_json())
    result = runner.invoke(app, ["--config", str(path), "winding"])
    assert result.exit_code == 2


def test_self_test_flag():
    result = runner.invoke(app, ["--no-timestamp", "winding", "--self-test"])
    assert result.exit_code == 0, result.output
    assert "check,value,threshold,passed" in result.output


def test_list_commands():
    result = runner.invoke(app, ["list"])
    assert result.exit_code == 0
    assert "kibble-zurek" in result.output
