import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from weylheat.cli import UsageError, parse_grid, run_command
from weylheat.errors import InvalidParameter
from weylheat.reports import Record, Report, emit_report, load_report, to_json

RECORD_KEYS = ["name", "paper_anchor", "status", "values", "witnesses", "runtime"]


def _run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = run_command([*argv, "--out", str(out)])
    return code, (out.read_bytes() if out.exists() else b"")


# ------------------------------------------------------------------ reports

def test_record_validation():
    with pytest.raises(InvalidParameter):
        Record("x", "plumbing", "maybe")
    with pytest.raises(InvalidParameter):
        Record("x", "", "pass")


def test_json_layout_and_key_order():
    rep = Report("verify", {"suite": "core"})
    rep.add(Record.check("a", "first", True, {"v": np.float64(0.1), "n": np.int64(3), "ok": np.bool_(True)}))
    doc = json.loads(to_json(rep))
    assert list(doc) == ["schema_version", "command", "config", "records"]
    assert list(doc["records"][0]) == RECORD_KEYS
    assert doc["records"][0]["values"] == {"v": 0.1, "n": 3, "ok": True}


def test_non_finite_becomes_null():
    rep = Report("x", {}, [Record("r", "plumbing", "measured", {"a": math.inf, "b": math.nan, "c": 1.0})])
    text = to_json(rep)
    assert '"a": null' in text and '"b": null' in text and '"c": 1.0' in text


json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-10 ** 12, 10 ** 12)
    | st.floats(allow_nan=False, allow_infinity=False) | st.text(max_size=8),
    lambda kids: st.lists(kids, max_size=4) | st.dictionaries(st.text(max_size=5), kids, max_size=4),
    max_leaves=12)


@given(st.dictionaries(st.text(max_size=6), json_values, max_size=5))
def test_json_round_trip(values):
    rep = Report("scan", {"seed": 1}, [Record("r", "plumbing", "measured", values)])
    assert load_report(to_json(rep))["records"][0]["values"] == values


def test_emit_rejects_unknown_format():
    with pytest.raises(InvalidParameter):
        emit_report(Report("x"), "xml")


@given(st.text(alphabet="abc=,:0123456789", max_size=20))
def test_parse_grid_never_crashes_unexpectedly(text):
    try:
        parse_grid(text)
    except UsageError:
        pass


def test_parse_grid_values():
    assert parse_grid("n=2e4,rho=1e-3:1e3,points=11") == {"n": 20000, "rho": [1e-3, 1e3], "points": 11}
    assert parse_grid("samples=5") == {"n": 5}
    for bad in ("n", "q=1", "rho=3:1", "n=abc"):
        with pytest.raises(UsageError):
            parse_grid(bad)


# ------------------------------------------------------------------ CLI

def test_eval_half_line(tmp_path):
    code, data = _run(tmp_path, "eval", "--system", "orth", "--params", "1,1", "--eta", "1",
                      "--x", "1", "--y", "1", "--t", "0.25")
    assert code == 0
    rec = json.loads(data)["records"][0]
    assert rec["status"] == "measured" and rec["paper_anchor"] == "orto"
    assert rec["values"]["kernel"] == pytest.approx((1 - math.exp(-4)) / math.sqrt(math.pi), rel=1e-14)
    assert rec["runtime"] is None


def test_eval_square(tmp_path):
    code, data = _run(tmp_path, "eval", "--system", "i2", "--params", "4", "--eta", "det",
                      "--x", "2,1", "--y", "2,1", "--t", "0.5")
    rec = json.loads(data)["records"][0]
    assert code == 0 and rec["values"]["kernel"] > 0 and rec["paper_anchor"] == "sgn"


def test_scan_csv_rows(tmp_path):
    code, data = _run(tmp_path, "scan", "--check", "i4-triv", "--grid", "n=1500", "--format", "csv",
                      name="scan.csv")
    rows = list(csv.reader(io.StringIO(data.decode())))
    assert code == 0
    assert rows[0][-5:] == ["kernel", "bound", "ratio", "log_kernel", "log_bound"]
    assert len(rows) == 1 + 1500
    r = [float(row[rows[0].index("ratio")]) for row in rows[1:]]
    assert min(r) > 0


def test_determinism(tmp_path):
    argv = ("scan", "--check", "g4-near", "--grid", "n=2000", "--seed", "3")
    _, a = _run(tmp_path, *argv, name="a.json")
    _, b = _run(tmp_path, *argv, name="b.json")
    assert a == b and a


def test_seed_changes_samples(tmp_path):
    _, a = _run(tmp_path, "scan", "--check", "g4-near", "--grid", "n=2000", "--seed", "1", name="a.json")
    _, b = _run(tmp_path, "scan", "--check", "g4-near", "--grid", "n=2000", "--seed", "2", name="b.json")
    assert a != b


def test_timings_flag(tmp_path):
    _, data = _run(tmp_path, "scan", "--check", "ass", "--timings")
    assert json.loads(data)["records"][0]["runtime"] is not None


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\ncheck = g4-far\ngrid = n=1000\nseed = 5\n")
    _, data = _run(tmp_path, "scan", "--config", str(cfg))
    doc = json.loads(data)
    assert doc["config"]["check"] == "g4-far" and doc["config"]["seed"] == 5
    _, data = _run(tmp_path, "scan", "--config", str(cfg), "--check", "g4-mid", name="b.json")
    assert json.loads(data)["config"]["check"] == "g4-mid"


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    assert run_command(["scan", "--config", str(cfg)]) == 2


def test_usage_errors():
    assert run_command([]) == 2
    assert run_command(["scan", "--check", "nonsense"]) == 2
    assert run_command(["eval", "--system", "i2", "--params", "5", "--eta", "det",
                        "--x", "2,1", "--y", "2,1", "--t", "1"]) == 2
    assert run_command(["scan", "--check", "i4-sgn", "--grid", "n=oops"]) == 2


def test_failing_check_exits_one(tmp_path):
    # far too coarse a lattice for the 2% target
    code, data = _run(tmp_path, "pde", "--system", "i2", "--eta", "sgn", "--h", "0.25", "--t", "3",
                      "--y", "4,2")
    rec = json.loads(data)["records"][0]
    assert code == 1 and rec["status"] == "fail" and rec["values"]["max_rel_error"] > 0.02


def test_text_format(tmp_path):
    code, data = _run(tmp_path, "scan", "--check", "slope-i4-sgn", "--format", "text", name="o.txt")
    assert code == 0 and data.startswith(b"[PASS")


def test_check_list(tmp_path):
    _, data = _run(tmp_path, "scan", "--check", "list")
    names = json.loads(data)["records"][0]["values"]["checks"]
    assert "ort4-inconsistency" in names and "i4-sgn" in names and "slope-i4-sgn" in names


def test_conjecture_is_measured(tmp_path):
    code, data = _run(tmp_path, "conjecture", "--m", "5", "--grid", "n=200")
    rec = json.loads(data)["records"][0]
    assert code == 0 and rec["status"] == "measured"
    assert rec["values"]["conjectural"] is True
    assert rec["values"]["meta"]["grid_extent"] == [0.01, 100.0]


def test_ort4_command(tmp_path):
    code, data = _run(tmp_path, "scan", "--check", "ort4-inconsistency")
    rec = json.loads(data)["records"][0]
    assert code == 0 and rec["values"]["discrepancy_at_probe"] > 50


def test_figures_optional(tmp_path):
    pytest.importorskip("matplotlib")
    code, _ = _run(tmp_path, "scan", "--check", "i4-n1", "--grid", "n=1000", "--figures", str(tmp_path / "fig"))
    assert code == 0 and (tmp_path / "fig" / "i4-n1.png").exists()
