import dataclasses
import json
import math

import numpy as np
import pytest

from curveflow import experiments
from curveflow.experiments import (
    ConfigError,
    parse_batch_config,
    parse_config,
    config_to_json,
    preset_config,
    preset_names,
    run_batch,
    run_experiment,
)

MINIMAL = {
    "initial": {"kind": "perturbed_circle", "L0": 2 * math.pi, "omega": 1, "N": 64,
                "modes": [[2, 1e-3, 0.0]]},
    "dt": 1e-4,
    "t_max": 0.005,
    "output_stride": 1,
}


def issue_index(err, code, key_suffix):
    return [
        (i.code, i.key) for i in err.issues
        if i.code == code and i.key.endswith(key_suffix)
    ]


# -------------------------------------------------------------------- parsing

def test_preset_expands_to_documented_values():
    cfg = preset_config("theorem1-demo")
    assert cfg.initial.kind == "perturbed_circle"
    assert cfg.initial.L0 == pytest.approx(2 * math.pi)
    assert cfg.initial.omega == 1
    assert cfg.initial.n_nodes == 256
    assert cfg.initial.modes == ((2, 1e-3, 0.0),)
    assert cfg.scheme == "imex_bdf2"
    assert cfg.dt == 1e-4


def test_unknown_preset_lists_options():
    with pytest.raises(ValueError, match="theorem1-demo"):
        preset_config("nope")
    assert "circle" in preset_names()


def test_zero_winding_is_out_of_range():
    doc = json.loads(json.dumps(MINIMAL))
    doc["initial"]["omega"] = 0
    with pytest.raises(ConfigError) as err:
        parse_config(json.dumps(doc))
    assert issue_index(err.value, "OutOfRange", "omega")


def test_all_errors_are_collected():
    doc = {
        "initial": {"kind": "perturbed_circle", "omega": 0, "N": 17, "modes": "x"},
        "dt": -1.0,
        "typo_key": 1,
    }
    with pytest.raises(ConfigError) as err:
        parse_config(json.dumps(doc))
    assert issue_index(err.value, "MissingRequired", "L0")
    assert issue_index(err.value, "OutOfRange", "omega")
    assert issue_index(err.value, "OutOfRange", "N")
    assert issue_index(err.value, "OutOfRange", "modes")
    assert issue_index(err.value, "OutOfRange", "dt")
    assert issue_index(err.value, "UnknownKey", "typo_key")


def test_config_round_trip():
    cfg = parse_config(json.dumps(MINIMAL))
    again = parse_config(config_to_json(cfg))
    assert cfg == again


def test_batch_document_forms():
    single = json.dumps([MINIMAL])
    wrapped = json.dumps({"runs": [MINIMAL, MINIMAL]})
    assert len(parse_batch_config(single)) == 1
    assert len(parse_batch_config(wrapped)) == 2
    with pytest.raises(ConfigError):
        parse_batch_config("[]")


# ------------------------------------------------------------------ execution

def test_run_experiment_writes_artifacts(tmp_path):
    cfg = parse_config(json.dumps(MINIMAL))
    result = run_experiment(cfg, tmp_path)
    assert result.passed
    for name in ("timeseries.csv", "summary.json", "final_curve.csv"):
        assert (tmp_path / name).exists()
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["config"]["initial"]["N"] == 64
    assert summary["status"] == "reached_t_max"
    assert summary["passed"] is True


def test_timeseries_round_trips_doubles(tmp_path):
    cfg = parse_config(json.dumps(MINIMAL))
    result = run_experiment(cfg, tmp_path)
    text = (tmp_path / "timeseries.csv").read_text().splitlines()
    assert text[0] == "t,E,h,winding_integral,constraint_integral,k_sup,sup_deviation,kss_l2sq,closure_defect"
    parsed = np.array([[float(v) for v in line.split(",")] for line in text[1:]])
    assert parsed.shape == result.record.rows.shape
    assert np.array_equal(parsed, result.record.rows)  # 17 significant digits round-trip


def test_final_curve_has_closing_row(tmp_path):
    cfg = parse_config(json.dumps(MINIMAL))
    run_experiment(cfg, tmp_path)
    lines = (tmp_path / "final_curve.csv").read_text().splitlines()
    assert lines[0] == "s,x,y,theta,k"
    assert len(lines) == 1 + 64 + 1
    first = [float(v) for v in lines[1].split(",")]
    last = [float(v) for v in lines[-1].split(",")]
    assert last[0] == pytest.approx(2 * math.pi)
    # total turning of one winding
    assert last[3] - first[3] == pytest.approx(2 * math.pi, abs=1e-8)


def test_circle_preset_energy_floor(tmp_path):
    cfg = preset_config("circle")
    # shorten the run for test time; stationarity is scheme-exact
    cfg = dataclasses.replace(cfg, t_max=0.05)
    result = run_experiment(cfg, tmp_path)
    assert result.passed
    assert result.record.column("E").max() <= 1e-20


def test_unwritable_output_raises_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = parse_config(json.dumps(MINIMAL))
    with pytest.raises(OSError):
        run_experiment(cfg, blocker / "sub")
    assert not (blocker / "sub").exists()


def test_samples_file_initial(tmp_path):
    n = 64
    s = np.arange(n) * 2 * math.pi / n
    doc = {"L0": 2 * math.pi, "omega": 1, "samples": list(1 + 0.01 * np.cos(2 * s))}
    curve_file = tmp_path / "curve.json"
    curve_file.write_text(json.dumps(doc))
    cfg = parse_config(json.dumps({
        "initial": {"kind": "samples_file", "path": str(curve_file)},
        "t_max": 0.001, "output_stride": 1,
    }))
    result = run_experiment(cfg, tmp_path / "out")
    assert result.passed
    assert result.record.steps_taken == 10


# ---------------------------------------------------------------- determinism

def test_rerun_is_byte_identical(tmp_path):
    cfg = parse_config(json.dumps(MINIMAL))
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    for name in ("timeseries.csv", "summary.json", "final_curve.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_batch_parallelism_does_not_change_bytes(tmp_path):
    docs = []
    for m in (2, 3):
        doc = json.loads(json.dumps(MINIMAL))
        doc["initial"]["modes"] = [[m, 1e-3, 0.0]]
        doc["label"] = f"mode{m}"
        docs.append(doc)
    configs = parse_batch_config(json.dumps(docs))
    serial = run_batch(configs, tmp_path / "serial", parallelism=1)
    parallel = run_batch(configs, tmp_path / "parallel", parallelism=2)
    assert serial.passed and parallel.passed
    for name in ("mode2", "mode3"):
        for artifact in ("timeseries.csv", "summary.json", "final_curve.csv"):
            a = (tmp_path / "serial" / name / artifact).read_bytes()
            b = (tmp_path / "parallel" / name / artifact).read_bytes()
            assert a == b
    agg_a = (tmp_path / "serial" / "batch_summary.csv").read_bytes()
    agg_b = (tmp_path / "parallel" / "batch_summary.csv").read_bytes()
    assert agg_a == agg_b


def test_batch_of_one_matches_single_run(tmp_path):
    configs = parse_batch_config(json.dumps([MINIMAL]))
    run_experiment(configs[0], tmp_path / "single")
    batch = run_batch(configs, tmp_path / "batch", parallelism=1)
    assert batch.passed
    for artifact in ("timeseries.csv", "summary.json", "final_curve.csv"):
        a = (tmp_path / "single" / artifact).read_bytes()
        b = (tmp_path / "batch" / "run_000" / artifact).read_bytes()
        assert a == b
