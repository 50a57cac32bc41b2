import csv
import json

import pytest

from src.errors import EXIT_CONFIG, EXIT_INVARIANT, EXIT_NUMERICAL, EXIT_OK
from src.experiments.records import Assertion, BlowupRecord
from src.runner.dispatch import RunReport
from src.runner.main import run
from src.runner.reports import CSV_SCHEMAS, format_value, write_outputs


def _write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def _read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


# --- CLI ---

def test_counterexample_run_succeeds(tmp_path):
    out = tmp_path / "out"
    assert run(["counterexample", "--out", str(out), "--no-plots"]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is True
    assert report["records"]["counterexample"][0]["lip_formula"] > 1.0
    assert "durations" not in report
    assert "durations" in json.loads((out / "timings.json").read_text())


def test_report_is_byte_identical_across_runs(tmp_path):
    out = tmp_path / "cap"
    config = _write_config(tmp_path, {"experiment": "cap", "grid_size": 1024})
    assert run(["cap", "--config", config, "--out", str(out)]) == EXIT_OK
    first = {name: (out / name).read_bytes() for name in ("report.json", "cap.csv", "cap.svg")}
    assert run(["cap", "--config", config, "--out", str(out)]) == EXIT_OK
    for name, content in first.items():
        assert (out / name).read_bytes() == content, name


def test_cap_csv_schema(tmp_path):
    out = tmp_path / "cap"
    config = _write_config(tmp_path, {"experiment": "cap", "radii": [0.5, 1.0, 1.5], "grid_size": 512})
    assert run(["cap", "--config", config, "--out", str(out), "--no-plots"]) == EXIT_OK
    rows = _read_csv(out / "cap.csv")
    assert rows[0] == CSV_SCHEMAS["cap"]
    assert len(rows) == 4
    assert float(rows[1][0]) == 0.5
    assert not (out / "cap.svg").exists()


def test_rigidity_run_with_explicit_candidate(tmp_path):
    out = tmp_path / "rigidity"
    config = _write_config(tmp_path, {"experiment": "rigidity", "candidate": "reflection"})
    assert run(["rigidity", "--config", config, "--out", str(out)]) == EXIT_OK
    rows = _read_csv(out / "rigidity.csv")
    assert rows[0] == CSV_SCHEMAS["rigidity"]
    assert rows[1][:3] == ["reflection", "", "1"]


def test_seed_flag_overrides_config(tmp_path):
    out = tmp_path / "metric"
    config = _write_config(tmp_path, {"experiment": "metric", "count": 1000, "seed": 1})
    assert run(["metric", "--config", config, "--out", str(out), "--seed", "9"]) == EXIT_OK
    assert json.loads((out / "report.json").read_text())["config"]["seed"] == 9


def test_failed_assertion_exits_with_invariant_code(tmp_path):
    config = _write_config(tmp_path, {"experiment": "blowup", "epsilons": [1.0, 0.1], "threshold": 1e6})
    out = tmp_path / "blowup"
    assert run(["blowup", "--config", config, "--out", str(out), "--no-plots"]) == EXIT_INVARIANT
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is False


@pytest.mark.parametrize(
    "payload",
    [
        {"experiment": "counterexample", "colour": "red"},
        {"experiment": "cap"},
        {"experiment": "counterexample", "grid_size": 8},
    ],
)
def test_config_errors_exit_with_config_code(tmp_path, payload):
    config = _write_config(tmp_path, payload)
    assert run(["counterexample", "--config", config, "--out", str(tmp_path / "x")]) == EXIT_CONFIG


def test_malformed_json_exits_with_config_code(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(["metric", "--config", str(path)]) == EXIT_CONFIG


def test_unknown_experiment_is_rejected_by_parser():
    with pytest.raises(SystemExit) as err:
        run(["unknown"])
    assert err.value.code == 2


def test_sinkhorn_divergence_exits_with_numerical_code(tmp_path):
    config = _write_config(
        tmp_path,
        {"experiment": "sinkhorn-crosscheck", "count": 64, "reg_final": 1e-3, "tol": 1e-12, "max_iter": 1},
    )
    code = run(["sinkhorn-crosscheck", "--config", config, "--out", str(tmp_path / "x")])
    assert code == EXIT_NUMERICAL


def test_unwritable_output_exits_with_numerical_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run(["counterexample", "--out", str(blocker / "sub")]) == EXIT_NUMERICAL


# --- report writer ---

def test_format_value():
    assert format_value(None) == ""
    assert format_value(True) == "true"
    assert format_value(0.1) == "1.0000000000000001e-01"
    assert format_value(3) == "3"


def test_flagged_blowup_rows_leave_empty_fields(tmp_path):
    records = [
        BlowupRecord(epsilon=1.0, m=1.5, flagged=True),
        BlowupRecord(epsilon=0.1, m=0.3, r_eps=0.2, R_eps=0.9, lower_bound=2.0, lip_formula=2.5),
    ]
    report = RunReport(
        experiment="blowup",
        config={"experiment": "blowup"},
        records={"blowup": [r.to_row() for r in records]},
        assertions=[Assertion(name="ok", passed=True)],
        durations={"blowup sweep": 0.5},
    )
    written = write_outputs(report, tmp_path)
    assert {p.name for p in written} == {"report.json", "timings.json", "blowup.csv", "blowup.svg"}
    rows = _read_csv(tmp_path / "blowup.csv")
    assert rows[1][2:] == ["", "", "", ""]
    assert rows[2][4] == format_value(2.0)
