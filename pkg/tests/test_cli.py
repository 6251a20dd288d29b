import csv
import json

import pytest

from qg3.cli import main
from qg3.schemas import example_schedule_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_basis_counts(capsys):
    code, out, _ = run(capsys, "basis", "--n", "3")
    obj = json.loads(out)
    assert code == 0
    assert (obj["total"], obj["upto2body"]) == (728, 216)
    assert obj["version"] == "qg3-v1" and obj["config"]["n"] == 3


def test_basis_list_csv(capsys):
    code, out, _ = run(capsys, "basis", "--n", "1", "--list", "--format", "csv")
    rows = [r for r in csv.reader(out.splitlines()) if not r[0].startswith("#")]
    assert code == 0 and len(rows) == 1 + 8


def test_basis_capacity_guard(capsys):
    code, _, err = run(capsys, "basis", "--n", "5")
    assert code == 1 and "range" in err


def test_unknown_campaign_is_usage_error(capsys):
    code, _, _ = run(capsys, "verify", "lemma9")
    assert code == 1


def test_verify_closure(capsys):
    code, out, _ = run(capsys, "verify", "closure", "--n", "2")
    rep = json.loads(out)["report"]
    assert code == 0 and rep["all_passed"] and rep["trials"][0]["achieved_rank"] == 80


def test_verify_power_gap_global_seed_before_command(tmp_path, capsys):
    out = tmp_path / "p.json"
    code, stdout, _ = run(capsys, "--seed", "7", "verify", "prop1", "--trials", "40", "--out", str(out))
    obj = json.loads(out.read_text())
    assert code == 0 and obj["config"]["seed"] == 7 and obj["report"]["passed"] == 40
    assert "40/40" in stdout


def test_verify_zero_trials(capsys):
    code, _, _ = run(capsys, "verify", "prop1", "--trials", "0")
    assert code == 1


def test_geodesic_analytic_requires_three_qutrits(capsys):
    code, _, _ = run(capsys, "geodesic", "--n", "2", "--mode", "analytic")
    assert code == 1


def test_geodesic_compare(tmp_path, capsys):
    out = tmp_path / "g.csv"
    code, stdout, _ = run(capsys, "geodesic", "--mode", "compare", "--seed", "11", "--steps", "200",
                          "--record-every", "50", "--out", str(out))
    text = out.read_text()
    assert code == 0
    assert text.startswith("# version: qg3-v1\n# config: ")
    disc = [l for l in text.splitlines() if l.startswith("# max_discrepancy")]
    assert float(disc[0].split(":")[1]) <= 1e-6


def test_geodesic_isotropic_momentum_constant(capsys):
    code, out, _ = run(capsys, "geodesic", "--n", "2", "--p", "1", "--s", "1", "--steps", "40",
                       "--record-every", "20", "--format", "json")
    rows = json.loads(out)["rows"]
    assert code == 0
    assert all(r[1:5] == rows[0][1:5] for r in rows)


def test_geodesic_analytic_first_row_is_initial_data(capsys):
    code, out, _ = run(capsys, "geodesic", "--mode", "analytic", "--steps", "4", "--format", "json")
    rows = json.loads(out)["rows"]
    code2, out2, _ = run(capsys, "geodesic", "--mode", "numeric", "--steps", "4", "--format", "json")
    assert code == code2 == 0
    assert rows[0][:5] == pytest.approx(json.loads(out2)["rows"][0][:5], rel=1e-12)


def test_synthesize_example(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "synthesize", str(example_schedule_path()), "--out", str(out), "--no-gates")
    rep = json.loads(out.read_text())
    assert code == 0
    assert stdout.startswith("gates=") and "a_priori_total=" in stdout and "measured_error=" in stdout
    assert rep["budget"]["measured_error"] <= 0.1
    assert rep["config"]["p"] == 81.0 and rep["version"] == "qg3-v1"


def test_synthesize_schema_violation_pointer(tmp_path, capsys):
    obj = json.loads(example_schedule_path().read_text())
    obj["segments"][2]["dt"] = -1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(obj))
    code, _, err = run(capsys, "synthesize", str(bad))
    assert code == 2 and "/segments/2/dt" in err


def test_synthesize_unnormalized_names_segment(tmp_path, capsys):
    obj = json.loads(example_schedule_path().read_text())
    for t in obj["segments"][5]["terms"]:
        t["h"] *= 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(obj))
    code, _, err = run(capsys, "synthesize", str(bad))
    assert code == 2 and "segment 5" in err


def test_synthesize_missing_file(capsys):
    code, _, _ = run(capsys, "synthesize", "/nonexistent/schedule.json")
    assert code == 1


def test_determinism_byte_identical(tmp_path, capsys):
    outs = []
    for _ in range(2):
        out = tmp_path / "same.json"
        assert run(capsys, "--seed", "3", "verify", "lemma4", "--trials", "4", "--out", str(out))[0] == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_sweep_delta_single_point_matches_synthesize(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep", "delta", "--values", "0.1", "--format", "json")
    rows = json.loads(out)["rows"]
    code2, out2, _ = run(capsys, "synthesize", "--example", "--delta", "0.1", "--no-gates")
    assert code == code2 == 0 and len(rows) == 1
    assert rows[0][7] == json.loads(out2)["budget"]["measured_error"]


def test_sweep_p_monotone_length(capsys):
    code, out, _ = run(capsys, "sweep", "p", "--values", "1,10,100", "--n", "2", "--delta", "0.25")
    assert code == 0 and "# path_length_nondecreasing: True" in out


def test_sweep_empty_range(capsys):
    code, _, _ = run(capsys, "sweep", "p", "--values", ",")
    assert code == 1
