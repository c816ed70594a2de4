"""CLI behaviour: golden reports, determinism and exit codes.

Regenerate the golden files with ``python3 tests/test_cli.py --regen`` after
an intentional change of the report format.
"""
import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from qam2qcfa.cli import SWEEP_COLUMNS, main
from qam2qcfa.machine import dump_machine
from qam2qcfa.protocols import build_verifier

GOLDEN = Path(__file__).parent / "golden"

CASES = {
    "analyze_middle_member": ["analyze", "--protocol", "middle", "--input", "aaa", "--epsilon", "0.25"],
    "analyze_middle_nonmember": ["analyze", "--protocol", "middle", "--input", "aba", "--epsilon", "0.25"],
    "analyze_knapsack_nonmember": ["analyze", "--protocol", "knapsack", "--input", "101#10#110"],
    "analyze_mpal_mc": ["analyze", "--protocol", "mpal", "--input", "aaa", "--engine", "mc", "--trials", "5000",
                        "--seed", "4"],
    "sweep_middle_csv": ["sweep", "--protocol", "middle", "--n", "11:31:10", "--format", "csv"],
    "sweep_mpal": ["sweep", "--protocol", "mpal", "--n", "3,5"],
    "sweep_middle_single": ["sweep", "--protocol", "middle", "--n", "11"],
    "simulate_middle": ["simulate", "--protocol", "middle", "--input", "aaa", "--trials", "20000", "--seed", "7"],
    "simulate_knapsack_member": ["simulate", "--protocol", "knapsack", "--input", "101#10#11", "--trials", "10000",
                                 "--seed", "1"],
    "verify_unitarity": ["verify", "unitarity"],
    "verify_xy": ["verify", "xy", "--max-len", "4"],
}


def run(argv):
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


def _suffix(name):
    return ".csv" if name.endswith("_csv") else ".json"


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name):
    code, text = run(CASES[name])
    assert code == 0
    assert text == (GOLDEN / (name + _suffix(name))).read_text(encoding="utf-8")


def test_member_report_values():
    doc = json.loads(run(CASES["analyze_middle_member"])[1])
    assert doc["schema_version"] == 1 and doc["k"] == 3 and doc["member"]
    [rep] = doc["reports"]
    assert rep["outcome"]["p_accept"] == 1 / 128
    assert rep["outcome"]["p_reject"] == 0
    assert rep["overall_acceptance"] == 1


def test_nonmember_reports_cover_adversaries():
    doc = json.loads(run(CASES["analyze_middle_nonmember"])[1])
    assert [r["prover"] for r in doc["reports"]] == [0, 1, 2, None]
    rej = min(r["outcome"]["p_reject"] / (r["outcome"]["p_reject"] + r["outcome"]["p_accept"])
              for r in doc["reports"])
    assert rej > 0.75 and doc["passed"]


def test_knapsack_nonmember():
    doc = json.loads(run(CASES["analyze_knapsack_nonmember"])[1])
    assert not doc["member"] and len(doc["reports"]) == 4
    assert all(c["passed"] for c in doc["checks"])


def test_probabilities_have_twelve_significant_digits():
    doc = json.loads(run(CASES["analyze_middle_nonmember"])[1])
    for r in doc["reports"]:
        for v in r["outcome"].values():
            assert len(repr(v).replace(".", "").lstrip("0").split("e")[0]) <= 13


def test_sweep_csv_columns():
    _, text = run(CASES["sweep_middle_csv"])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert tuple(rows[0]) == SWEEP_COLUMNS
    assert [int(r["n"]) for r in rows] == [11, 21, 31]
    assert all(float(r["overall_acceptance"]) == 1 for r in rows)


def test_single_sweep_has_no_fit():
    doc = json.loads(run(CASES["sweep_middle_single"])[1])
    assert len(doc["rows"]) == 1 and "loglog_slope" not in doc


def test_simulate_is_reproducible():
    assert run(CASES["simulate_middle"]) == run(CASES["simulate_middle"])


def test_simulate_member_never_rejects():
    doc = json.loads(run(CASES["simulate_knapsack_member"])[1])
    assert doc["estimate"]["rejects"] == 0 and doc["passed"]


def test_usage_errors(capsys):
    assert run(["analyze", "--protocol", "middle", "--input", "ab#"])[0] == 2
    assert run(["analyze", "--protocol", "middle", "--input", "aa", "--epsilon", "0.5"])[0] == 2
    assert run(["verify", "bogus"])[0] == 2
    assert run(["sweep", "--protocol", "middle", "--n", "4"])[0] == 2
    assert run(["simulate", "--protocol", "middle", "--input", "a", "--trials", "0"])[0] == 2
    assert run([])[0] == 2
    capsys.readouterr()


def test_budget_exceeded():
    assert run(["analyze", "--protocol", "middle", "--input", "aaaaa", "--max-nodes", "20"])[0] == 3
    code, text = run(["sweep", "--protocol", "middle", "--n", "3,61", "--max-nodes", "300"])
    assert code == 3 and json.loads(text)["complete"] is False


def test_failed_check_exit_status(tmp_path):
    spec = build_verifier("middle", 0.25)[0]
    doc = json.loads(dump_machine(spec))
    for e in doc["theta"]:
        if e["state"] == "check" and e["symbol"] == "a":
            e["delta"] = ["rej", 0]  # sabotage: refuse the correct middle symbol
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    code, text = run(["analyze", "--protocol", "middle", "--input", "aaa", "--machine-file", str(path)])
    assert code == 1 and json.loads(text)["passed"] is False


def test_machine_file_round_trip_through_cli(tmp_path):
    spec = build_verifier("mpal", 0.25)[0]
    path = tmp_path / "mpal.json"
    path.write_text(dump_machine(spec), encoding="utf-8")
    base = ["analyze", "--protocol", "mpal", "--input", "aba"]
    a, b = json.loads(run(base)[1]), json.loads(run(base + ["--machine-file", str(path)])[1])
    assert a["reports"] == b["reports"]


def test_bad_machine_file(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("", encoding="utf-8")
    assert run(["analyze", "--protocol", "middle", "--input", "a", "--machine-file", str(path)])[0] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qam2qcfa.cli", "verify", "sin2", "--max-j", "100"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["passed"] is True


def _regen():
    GOLDEN.mkdir(exist_ok=True)
    for name, argv in CASES.items():
        code, text = run(argv)
        assert code == 0, name
        (GOLDEN / (name + _suffix(name))).write_text(text, encoding="utf-8")


if __name__ == "__main__" and "--regen" in sys.argv:
    _regen()
