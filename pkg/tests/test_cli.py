import csv
import io
import json
import sys

import pytest

from claimstable.cli import alpha_grid, load_problem, run, solve_report

SMALL = {"claims": [2, 6, 22], "endowment": 15, "theta": 2}
FIVE = {"claims": [2, 6, 22, 30, 34], "endowment": 47, "theta": 2}
ES_TABLE = {
    "peaks": [2, 7, 18],
    "theta": 1,
    "rule": "cel-es",
    "endowments": [
        {"coalition": [1], "value": 7},
        {"coalition": [2], "value": 0},
        {"coalition": [3], "value": 0},
        {"coalition": [1, 2], "value": 15},
        {"coalition": [1, 3], "value": 10},
        {"coalition": [2, 3], "value": 13},
        {"coalition": [1, 2, 3], "value": 54},
    ],
}


def write(tmp_path, data, name="p.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_solve_theta_cea_verified(tmp_path):
    code, out, _ = cli("solve", "--input", write(tmp_path, FIVE), "--algorithm", "theta-cea", "--verify")
    report = json.loads(out)
    assert code == 0
    assert report["partition"] == [[1, 3], [2], [4, 5]]
    assert report["stable"] is True and report["blocking"] is None
    assert [s["case"] for s in report["trace"] if s["kind"] == "block"] == ["i", "ii"]
    assert report["payoffs"]["3"] == "10"


def test_solve_without_verify_leaves_stability_open(tmp_path):
    code, out, _ = cli("solve", "--input", write(tmp_path, FIVE), "--algorithm", "theta-cel")
    report = json.loads(out)
    assert code == 0 and report["stable"] is None
    assert report["partition"] == [[1, 2], [3, 4], [5]]


def test_report_round_trips(tmp_path):
    loaded = load_problem(write(tmp_path, FIVE))
    report = solve_report(loaded, "cea", verify=True)
    assert json.loads(json.dumps(report)) == report
    _, out, _ = cli("solve", "--input", write(tmp_path, FIVE), "--algorithm", "cea", "--verify")
    assert json.loads(out) == report


def test_reports_are_deterministic(tmp_path):
    path = write(tmp_path, FIVE)
    first = cli("solve", "--input", path, "--algorithm", "top-coalition", "--verify", "--exhaustive")
    assert first == cli("solve", "--input", path, "--algorithm", "top-coalition", "--verify", "--exhaustive")
    a = cli("axioms", "--input", path, "--rule", "cel", "--samples", "20", "--seed", "7")
    assert a == cli("axioms", "--input", path, "--rule", "cel", "--samples", "20", "--seed", "7")


def test_decimals_are_exact(tmp_path):
    path = write(tmp_path, {"claims": ["2", "6", "22", "30", "34"], "endowment": "9.4", "theta": 2})
    _, out, _ = cli("solve", "--input", path, "--algorithm", "cea")
    report = json.loads(out)
    assert report["problem"]["endowment"] == "47/5"
    assert report["partition"] == [[1], [2, 3], [4, 5]]
    path = tmp_path / "raw.json"
    path.write_text('{"claims": [1, 2], "alpha": 0.1, "theta": 1}')
    _, out, _ = cli("solve", "--input", str(path), "--algorithm", "theta-cel")
    assert json.loads(out)["problem"]["alpha"] == "1/10"


def test_stdin_input(monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO(json.dumps(SMALL)))
    code, out, _ = cli("enumerate", "--input", "-")
    assert code == 0 and len(json.loads(out)["stable_partitions"]) == 2


def test_exhaustive_table_has_no_stable_partition(tmp_path):
    code, out, _ = cli("solve", "--input", write(tmp_path, ES_TABLE), "--algorithm", "equal-surplus",
                       "--verify", "--exhaustive")
    report = json.loads(out)
    assert report["stable_partitions"] == [] and report["rule"] == "cel-es"
    assert code == 1


def test_table_needs_exhaustive(tmp_path):
    code, _, err = cli("solve", "--input", write(tmp_path, ES_TABLE), "--algorithm", "uniform")
    assert code == 2 and "exhaustive" in err


@pytest.mark.parametrize(
    "data,algorithm",
    [
        ({"claims": [], "endowment": 1, "theta": 1}, "cea"),
        ({"claims": [1, 2], "theta": 1}, "cea"),
        ({"claims": [1, 2], "endowment": 1, "alpha": "1/3", "theta": 1}, "cea"),
        ({"claims": [1, 2], "peaks": [1, 2], "alpha": 2, "theta": 1}, "cea"),
        ({"claims": [1, 2], "endowment": 1, "theta": 0}, "cea"),
        ({"claims": [1, "x"], "endowment": 1, "theta": 1}, "cea"),
        ({"claims": [1, 2], "endowment": 1, "theta": 1, "rule": "median"}, "cea"),
        ({"claims": [1, 2, 3], "alpha": 2, "theta": 2}, "theta-cea"),
        ({"claims": [1, 2, 3], "alpha": "1/2", "theta": 2}, "uniform"),
        ({"peaks": [1, 2, 3], "alpha": "1/2", "theta": 2}, "monotonic-supply"),
    ],
)
def test_input_errors_exit_two(tmp_path, data, algorithm):
    code, _, err = cli("solve", "--input", write(tmp_path, data), "--algorithm", algorithm)
    assert code == 2 and err.startswith("claimstable: error")


def test_regime_mismatch_names_alpha(tmp_path):
    _, _, err = cli("solve", "--input", write(tmp_path, {"claims": [1, 2, 3], "alpha": 2, "theta": 2}),
                    "--algorithm", "theta-cea")
    assert "2" in err and "supply" in err


def test_unreadable_input_exits_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli("enumerate", "--input", str(bad))[0] == 2
    assert cli("enumerate", "--input", str(tmp_path / "missing.json"))[0] == 2


def test_supply_algorithms(tmp_path):
    path = write(tmp_path, {"claims": [1, 2, 3, 4, 5], "alpha": 2, "theta": 2})
    code, out, _ = cli("solve", "--input", path, "--algorithm", "monotonic-supply", "--verify")
    assert code == 0 and json.loads(out)["partition"] == [[1], [2, 3], [4, 5]]
    path = write(tmp_path, {"peaks": [1, 1, 1], "alpha": 3, "theta": 2}, "sp.json")
    code, out, _ = cli("solve", "--input", path, "--algorithm", "uniform", "--verify")
    assert code == 1 and json.loads(out)["blocking"] == [1]


def test_verify(tmp_path):
    path = write(tmp_path, SMALL)
    code, out, _ = cli("verify", "--input", path, "--partition", "[[1,3],[2]]")
    assert code == 0 and json.loads(out)["stable"]
    code, out, err = cli("verify", "--input", path, "--partition", "[[1,2],[3]]")
    assert code == 1 and json.loads(out)["blocking"] == [2, 3] and "blocked" in err
    part = tmp_path / "part.json"
    part.write_text("[[1], [2], [3]]")
    code, _, _ = cli("verify", "--input", write(tmp_path, {"claims": [3, 5, 8], "endowment": 4, "theta": 1,
                                                           "rule": "proportional"}, "q.json"),
                     "--partition", str(part))
    assert code == 0


@pytest.mark.parametrize("partition", ["[[1,2],[2,3]]", "[[1,2]]", "[[1,2,3,4]]", "[[1,", "{\"a\": 1}"])
def test_malformed_partition(tmp_path, partition):
    assert cli("verify", "--input", write(tmp_path, SMALL), "--partition", partition)[0] == 2


def test_enumerate(tmp_path):
    path = write(tmp_path, SMALL)
    code, out, _ = cli("enumerate", "--input", path)
    assert code == 0
    assert json.loads(out)["stable_partitions"] == [[[1, 2, 3]], [[1, 3], [2]]]
    _, out, _ = cli("enumerate", "--input", path, "--rule", "cel")
    assert len(json.loads(out)["stable_partitions"]) == 5
    code, out, _ = cli("enumerate", "--input", write(tmp_path, {"claims": [4], "endowment": 1}, "one.json"))
    assert code == 0 and json.loads(out)["stable_partitions"] == [[[1]]]


def test_enumerate_guard_and_force(tmp_path, monkeypatch):
    path = write(tmp_path, {"claims": list(range(1, 14)), "endowment": 10, "theta": 2})
    code, _, err = cli("enumerate", "--input", path)
    assert code == 2 and "13" in err
    monkeypatch.setenv("CLAIMSTABLE_MAX_N", "3")
    assert cli("enumerate", "--input", write(tmp_path, FIVE, "five.json"))[0] == 2
    code, out, _ = cli("enumerate", "--input", write(tmp_path, FIVE, "five.json"), "--force")
    assert code == 0 and json.loads(out)["stable_partitions"]


@pytest.mark.parametrize("rule", ["cea", "cel", "proportional"])
def test_axioms(tmp_path, rule):
    code, out, _ = cli("axioms", "--input", write(tmp_path, SMALL), "--rule", rule, "--samples", "25", "--seed", "3")
    audit = json.loads(out)["axioms"]
    assert code == 0
    assert audit["rm"]["holds"] and audit["consistency"]["holds"]
    assert audit["strict_rm"]["holds"] == (rule == "proportional")
    if rule != "proportional":
        assert audit["strict_rm"]["first_witness"] is not None


def test_axioms_workers_match(tmp_path):
    path = write(tmp_path, SMALL)
    one = cli("axioms", "--input", path, "--rule", "cea", "--samples", "12", "--seed", "9")
    two = cli("axioms", "--input", path, "--rule", "cea", "--samples", "12", "--seed", "9", "--workers", "2")
    assert one == two
    assert cli("axioms", "--input", path, "--samples", "0")[0] == 2


def test_alpha_grid():
    assert alpha_grid(0, 1, 4)[1] == pytest.approx(0.25)
    assert len(alpha_grid(0, 1, 4)) == 5


def test_sweep_csv(tmp_path):
    path = write(tmp_path, FIVE)
    out_csv = tmp_path / "sweep.csv"
    code, _, _ = cli("sweep", "--input", path, "--alpha-from", "1/10", "--alpha-to", "1/2", "--steps", "1",
                     "--out", str(out_csv))
    assert code == 0
    rows = list(csv.DictReader(out_csv.open()))
    assert list(rows[0]) == ["alpha", "alpha_float", "partition", "cases", "assortativity", "all_positive",
                             "all_negative", "beta1", "delta1", "gamma1"]
    assert [r["alpha"] for r in rows] == ["1/10", "1/2"]
    assert json.loads(rows[0]["partition"]) == [[1], [2, 3], [4, 5]]
    assert json.loads(rows[1]["partition"]) == [[1, 3], [2], [4, 5]]
    assert rows[0]["all_positive"] == "true" and rows[0]["delta1"] == "1/2"


def test_sweep_workers_and_stdout(tmp_path):
    path = write(tmp_path, FIVE)
    args = ("sweep", "--input", path, "--alpha-from", "0.1", "--alpha-to", "0.9", "--steps", "8")
    assert cli(*args) == cli(*args, "--workers", "3")


def test_sweep_rejects_bad_grids(tmp_path):
    path = write(tmp_path, FIVE)
    assert cli("sweep", "--input", path, "--alpha-from", "1/2", "--alpha-to", "3/2", "--steps", "2")[0] == 2
    assert cli("sweep", "--input", path, "--alpha-from", "1/2", "--alpha-to", "1", "--steps", "0")[0] == 2
