import json

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from fermichain.errors import (
    InvalidInputError,
    InvalidRangeError,
    NoBoundStateError,
    ValidationBreachError,
)
from fermichain.experiments import (
    ExperimentConfig,
    ExperimentRegistry,
    OutputFormat,
    run_experiment,
)
from fermichain.experiments.base import CheckList
from fermichain.experiments.spectral import impurity_bound_states
from fermichain.utils.io import read_csv, read_summary

FAST_SELF_TESTS = [
    "bands",
    "gap-scan",
    "spectrum",
    "winding",
    "impurity",
    "anneal",
    "floquet",
    "overlap",
    "thermal",
    "correlate",
    "entropy",
    "validate",
]


def _run(command, **params):
    config = ExperimentConfig(command=command, params=params)
    return ExperimentRegistry.get_experiment(command, config).execute()


def test_registry_lists_every_command():
    assert ExperimentRegistry.names() == sorted(
        FAST_SELF_TESTS + ["kibble-zurek", "localization"]
    )
    with pytest.raises(InvalidInputError):
        ExperimentRegistry.get_experiment("nope", ExperimentConfig(command="nope"))


def test_config_round_trip(tmp_path):
    config = ExperimentConfig(
        command="anneal", params={"L": 16, "tau": 4.0}, seed=3, timestamp=False
    )
    path = tmp_path / "config.json"
    path.write_text(config.to_json())
    assert ExperimentConfig.from_file(path) == config


def test_config_merge_keeps_unset_values():
    base = ExperimentConfig(command="anneal", params={"L": 16, "tau": 4.0}, seed=3)
    merged = base.merged(params={"tau": 8.0, "L": None}, seed=None, workers=2)
    assert merged.params == {"L": 16, "tau": 8.0}
    assert merged.seed == 3
    assert merged.workers == 2
    with pytest.raises(ValidationError):
        base.merged(workers=0)


def test_config_rejects_unknown_fields():
    with pytest.raises(ValidationError):
        ExperimentConfig(command="bands", colour="red")


def test_checklist():
    checks = CheckList()
    checks.add("small", 1e-12, 1e-10)
    checks.add("large", 1.0, 1e-10)
    checks.add("nan", np.nan, 1.0)
    checks.require("flag", True)
    result = checks.result()
    assert result.breaches == ["large", "nan"]
    assert not result.passed
    assert list(result.frame.columns) == ["check", "value", "threshold", "passed"]


@pytest.mark.parametrize("command", FAST_SELF_TESTS)
def test_self_tests_pass(command):
    config = ExperimentConfig(command=command, self_test=True)
    result = ExperimentRegistry.get_experiment(command, config).execute()
    assert result.passed, result.frame[~result.frame["passed"]]


def test_gap_scan_columns():
    frame = _run("gap-scan", L=32, h="0.5,1.5").frame
    assert list(frame.columns) == ["h", "gap", "L", "E0_even", "E0_odd"]
    assert frame["L"].tolist() == [32, 32]
    assert frame["gap"].iloc[1] == pytest.approx(1.0, abs=1e-6)


def test_spectrum_scans_the_field():
    hs = [0.0, 0.5, 1.0, 1.5]
    result = _run("spectrum", L=10, h="0,0.5,1,1.5")
    frame = result.frame
    assert list(frame.columns)[:3] == ["h", "mu", "eps_mu"]
    assert len(frame) == len(hs) * 10
    assert sorted(frame["h"].unique()) == hs
    assert frame.groupby("h")["mu"].apply(list).tolist() == [
        list(range(10))
    ] * len(hs)
    assert result.summary["bc"] == "obc"
    # open chain at h = 0: two decoupled Majorana ends
    at_zero = frame[frame["h"] == 0.0]["eps_mu"]
    assert at_zero.iloc[0] == pytest.approx(0.0, abs=1e-12)
    assert at_zero.iloc[1:].tolist() == pytest.approx([1.0] * 9)


def test_winding_marks_critical_field_as_missing():
    frame = _run("winding", h="0.5,1,2").frame
    assert frame["winding"].iloc[0] == 1
    assert np.isnan(frame["winding"].iloc[1])
    assert frame["winding"].iloc[2] == 0


def test_disordered_spectrum_uses_seed():
    config = ExperimentConfig(
        command="spectrum",
        params={"L": 16, "J_range": [0.5, 1.0], "h_range": [0.0, 1.0]},
        seed=11,
    )
    a = ExperimentRegistry.get_experiment("spectrum", config).run().frame
    b = ExperimentRegistry.get_experiment("spectrum", config).run().frame
    pd.testing.assert_frame_equal(a, b)
    assert len(a) == 16
    assert (a["eps_mu"].diff().dropna() >= 0).all()


def test_lower_bound_state_matches_second_order_shift():
    states = {s.edge: s for s in impurity_bound_states(512, 1.0, 0.5, 0.02)}
    assert set(states) == {"lower", "upper"}
    assert states["lower"].shift < 0
    assert states["lower"].deviation < 0.1
    assert states["upper"].shift > 0


def test_paramagnet_keeps_only_upper_bound_state():
    states = impurity_bound_states(256, 1.0, 1.5, 0.3)
    assert [s.edge for s in states] == ["upper"]


def test_impurity_input_checks():
    with pytest.raises(InvalidRangeError):
        impurity_bound_states(64, 1.0, 0.5, -0.1)
    with pytest.raises(InvalidRangeError):
        impurity_bound_states(64, 1.0, 1.0, 0.1)


def test_tiny_impurity_on_short_chain_binds_nothing():
    with pytest.raises(NoBoundStateError):
        impurity_bound_states(16, 1.0, 0.5, 1e-6)


def test_clean_ring_has_no_bound_state():
    with pytest.raises(NoBoundStateError):
        impurity_bound_states(32, 1.0, 0.5, 0.0)


def test_thermal_validate_column():
    frame = _run("thermal", L=6, h=0.7, beta="0.5,2", validate=True).frame
    assert list(frame.columns) == ["beta", "energy_density", "log_Z", "ed_delta"]
    assert frame["ed_delta"].max() < 1e-8


def test_correlate_summary():
    result = _run("correlate", L=32, h=0.5)
    assert result.summary["cxx_half"] == pytest.approx(
        result.summary["plateau_target"], abs=1e-4
    )
    assert list(result.frame.columns) == ["r", "C_xx", "C_zz", "sz"]


def test_overlap_completeness():
    result = _run("overlap", L=6, h0=2.0, h1=0.5)
    assert result.summary["completeness"] == pytest.approx(1.0, abs=1e-10)
    assert len(result.frame) == 1 + 15
    assert list(result.frame.columns)[:4] == ["h_pre", "h_post", "L", "overlap_sq"]
    assert result.frame["overlap_sq"].iloc[0] == result.summary["onishi"]


def test_run_experiment_writes_csv(tmp_path):
    out = tmp_path / "bands.csv"
    config = ExperimentConfig(
        command="bands", params={"points": 5}, out=out, timestamp=False
    )
    assert run_experiment(config) == 0
    header = out.read_text().splitlines()[:3]
    assert header[2] == f"# config {config.to_json()}"
    frame = read_csv(out)
    assert len(frame) == 5
    replay = ExperimentConfig.from_json(header[2][len("# config "):])
    assert replay == config
    summary = read_summary(out)
    assert summary["eps_max"] == pytest.approx(3.0)
    assert summary["eps_min"] == pytest.approx(1.0)


def test_floquet_columns_and_summary():
    result = _run("floquet", L=6, h=0.6, tau=2.0, dh=0.4, samples=32)
    assert list(result.frame.columns) == ["mu", "quasi_energy"]
    assert result.frame["mu"].tolist() == list(range(6))
    assert set(result.summary) == {"tau", "residual", "unitarity_defect"}
    assert result.summary["tau"] == 2.0
    assert result.summary["residual"] < 1e-8
    assert result.summary["unitarity_defect"] < 1e-10


def test_localization_rows_per_size():
    result = _run("localization", L="16,24", samples=3)
    frame = result.frame
    assert list(frame.columns)[:5] == [
        "L", "mean_ipr", "std_ipr", "n_realizations", "seed",
    ]
    assert frame["L"].tolist() == [16, 24]
    assert frame["n_realizations"].tolist() == [3, 3]
    assert frame["seed"].tolist() == [0, 0]
    assert np.all(frame["std_ipr"] >= 0)
    assert result.summary["n_realizations"] == 3


def test_csv_output_keeps_the_fit(tmp_path):
    out = tmp_path / "kz.csv"
    config = ExperimentConfig(
        command="kibble-zurek",
        params={"L": 64, "tau_min": 2.0, "tau_max": 16.0, "count": 3},
        out=out,
        timestamp=False,
    )
    assert run_experiment(config) == 0
    assert list(read_csv(out).columns)[:2] == ["tau", "rho_def"]
    fit = read_summary(out)["fit"]
    assert fit["slope"] < 0
    assert (fit["x_min"], fit["x_max"]) == (2.0, 16.0)


def test_run_experiment_writes_json(tmp_path):
    out = tmp_path / "kz.json"
    config = ExperimentConfig(
        command="kibble-zurek",
        params={"L": 64, "tau_min": 2.0, "tau_max": 16.0, "count": 3},
        out=out,
        format=OutputFormat.JSON,
    )
    assert run_experiment(config) == 0
    document = json.loads(out.read_text())
    assert len(document["rows"]) == 3
    assert document["summary"]["fit"]["slope"] < 0


def test_run_experiment_reports_breaches(tmp_path, monkeypatch):
    from fermichain.experiments import validation

    monkeypatch.setattr(validation, "TOLERANCE", -1.0)
    config = ExperimentConfig(
        command="validate", params={"L": 4}, out=tmp_path / "v.csv"
    )
    assert run_experiment(config) == ValidationBreachError.exit_code


# #################
# Acceptance-scale runs
# #################


@pytest.mark.slow
def test_kibble_zurek_exponent():
    result = _run("kibble-zurek", L=512, tau_min=8.0, tau_max=512.0, count=7)
    assert result.summary["fit"]["slope"] == pytest.approx(-0.5, abs=0.05)
    assert np.all(np.diff(result.frame["rho_def"]) < 0)


@pytest.mark.slow
def test_localization_ipr_is_size_independent():
    result = _run("localization", L="128,256", samples=200)
    assert result.summary["ipr_ratio"] == pytest.approx(1.0, abs=0.1)
    assert result.summary["negative_slope_fraction"] >= 0.95


@pytest.mark.slow
def test_critical_entropy_coefficient():
    result = _run("entropy", sizes="32,64,128,256", h=1.0)
    assert 0.14 <= result.summary["fit"]["coefficient"] <= 0.20


@pytest.mark.slow
def test_critical_correlator_exponent():
    result = _run("correlate", L=128, h=1.0)
    assert result.summary["power_law"]["slope"] == pytest.approx(-0.25, abs=0.1)


@pytest.mark.slow
def test_localization_self_test():
    config = ExperimentConfig(command="localization", self_test=True)
    assert ExperimentRegistry.get_experiment("localization", config).execute().passed


@pytest.mark.slow
def test_kibble_zurek_self_test():
    config = ExperimentConfig(command="kibble-zurek", self_test=True)
    assert ExperimentRegistry.get_experiment("kibble-zurek", config).execute().passed
