"""
End-to-end tests for the proxcert command line
"""

import json

import pytest

import hunt as hunt_module
from cli import EXIT_INVALID, EXIT_INVARIANT, EXIT_OK, main
from hunt import HuntRecord
from instance_io import load_instance, read_jsonl


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_validate_flat4(capsys, fixtures_dir):
    code, out = run(capsys, "validate", str(fixtures_dir / "flat4.json"))
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["metric_violations"] == []
    assert payload["preconditions"]["t_maps_a0_into_b0"]


def test_validate_triangle_violation(capsys, fixtures_dir):
    code, out = run(capsys, "validate", str(fixtures_dir / "triangle_violation.json"))
    assert code == EXIT_INVALID
    violation = json.loads(out)["metric_violations"][0]
    assert violation["kind"] == "triangle"
    assert violation["witness"] == [0, 1, 2]


def test_bad_index_exits_invalid(capsys, fixtures_dir):
    code, _ = run(capsys, "analyze", str(fixtures_dir / "bad_index.json"))
    assert code == EXIT_INVALID


def test_analyze_flat4(capsys, tmp_path, fixtures_dir):
    out_path = tmp_path / "flat4.report.json"
    code, out = run(capsys, "analyze", str(fixtures_dir / "flat4.json"), "--out", str(out_path))
    assert code == EXIT_OK
    assert '"k_min": 0.0' in out_path.read_text()
    report = json.loads(out)
    assert report["dAB"] == 1.0
    assert report["A0"] == [0, 1]
    assert report["B0"] == [2, 3]
    assert report["lipschitz"]["L"] == 0.0


def test_analyze_swap4(capsys, fixtures_dir):
    code, out = run(capsys, "analyze", str(fixtures_dir / "swap4.json"))
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["admissibility"]["k_min"] == 1.0
    assert report["admissibility"]["witness"] == [0, 1, 1, 0]
    assert report["classification"] == "inadmissible"


def test_oracle_outputs(capsys, fixtures_dir):
    _, out = run(capsys, "oracle", str(fixtures_dir / "flat4.json"))
    oracle = json.loads(out)
    assert oracle["argmin_set"] == [0]
    assert oracle["argmin_labels"] == ["a1"]
    _, out = run(capsys, "oracle", str(fixtures_dir / "swap4.json"))
    assert json.loads(out)["is_best_proximity"] is False


def test_solve_writes_trace(capsys, tmp_path, fixtures_dir):
    trace = tmp_path / "trace.csv"
    code, out = run(capsys, "solve", str(fixtures_dir / "flat4.json"), "--start", "1", "--out", str(trace))
    assert code == EXIT_OK
    assert json.loads(out)["trace"] == [1, 0]
    assert len(trace.read_text().splitlines()) == 3


def test_solve_all_starts(capsys, tmp_path, fixtures_dir):
    trace = tmp_path / "trace.csv"
    code, out = run(capsys, "solve", str(fixtures_dir / "flat4.json"), "--all-starts", "--out", str(trace))
    assert code == EXIT_OK
    assert [r["z"] for r in json.loads(out)["results"]] == [0, 0]
    assert (tmp_path / "trace_start0.csv").exists()
    assert (tmp_path / "trace_start1.csv").exists()


def test_solve_needs_a_start(fixtures_dir):
    with pytest.raises(SystemExit):
        main(["solve", str(fixtures_dir / "flat4.json")])


def test_solve_outside_a0(capsys, fixtures_dir):
    code, _ = run(capsys, "solve", str(fixtures_dir / "flat4.json"), "--start", "3")
    assert code == EXIT_INVALID


def test_gen_strip_round_trip(capsys, tmp_path):
    path = tmp_path / "strip.json"
    code, _ = run(capsys, "gen-strip", "--n", "8", "--c", "2", "--out", str(path))
    assert code == EXIT_OK
    instance = load_instance(path)
    assert instance.space.n == 18
    code, out = run(capsys, "solve", str(path), "--start", "8")
    assert json.loads(out)["trace"] == [8, 4, 2, 1, 0]


def test_gen_geometric_strip(capsys, tmp_path):
    path = tmp_path / "geo.json"
    code, _ = run(capsys, "gen-strip", "--n", "4", "--c", "8", "--geometric", "--out", str(path))
    assert code == EXIT_OK
    _, out = run(capsys, "analyze", str(path))
    assert json.loads(out)["classification"] == "admissible_lt_third"


def test_hunt_writes_records_and_summary(capsys, tmp_path):
    out_path = tmp_path / "hunt.jsonl"
    code, out = run(
        capsys, "hunt", "--seed", "4", "--trials", "20", "--n-min", "3", "--n-max", "6",
        "--out", str(out_path), "--levels", "4", "--verify",
    )
    assert code == EXIT_OK
    summary = json.loads(out)
    assert summary["records"] == 20
    assert summary["inconsistent"] == 0
    assert len(read_jsonl(out_path)) == 20


def test_hunt_with_no_matches_writes_empty_file(capsys, tmp_path):
    out_path = tmp_path / "hunt.jsonl"
    code, out = run(
        capsys, "hunt", "--seed", "0", "--trials", "1", "--n-min", "2", "--n-max", "2",
        "--filter", "admissible_third_to_one", "--out", str(out_path),
    )
    assert code == EXIT_OK
    assert out_path.read_text() == ""
    assert json.loads(out)["records"] == 0


def test_hunt_invariant_violation_writes_repro(capsys, tmp_path, monkeypatch):
    def broken(instance, seed, trial):
        return HuntRecord(
            seed=seed, trial=trial, n=instance.space.n, a0_size=1, k_min=0.0, L=0.0, q=0.0,
            preimage_unique=True, picard_all_converge=False, oracle_agrees=False,
            classification="admissible_lt_third",
        )

    monkeypatch.setattr(hunt_module, "evaluate_trial", broken)
    out_path = tmp_path / "hunt.jsonl"
    code, _ = run(
        capsys, "hunt", "--seed", "1", "--trials", "1", "--n-min", "3", "--n-max", "4",
        "--out", str(out_path),
    )
    assert code == EXIT_INVARIANT
    repro = load_instance(tmp_path / "hunt.repro.json")
    assert 3 <= repro.space.n <= 4


def test_middle_regime_hunt_is_always_verified(capsys, tmp_path):
    out_path = tmp_path / "hunt.jsonl"
    code, out = run(
        capsys, "hunt", "--seed", "7", "--trials", "60", "--n-min", "4", "--n-max", "12",
        "--family", "strip", "--filter", "admissible_third_to_one", "--out", str(out_path),
    )
    assert code == EXIT_OK
    summary = json.loads(out)
    assert summary["records"] > 0
    assert summary["verified"] == summary["records"]
    assert summary["inconsistent"] == 0
    assert all(1 / 3 <= row["k_min"] < 1 for row in read_jsonl(out_path))


def test_unverified_hunt_has_no_verification_summary(capsys, tmp_path):
    code, out = run(
        capsys, "hunt", "--seed", "7", "--trials", "5", "--n-min", "4", "--n-max", "6",
        "--family", "strip", "--out", str(tmp_path / "hunt.jsonl"),
    )
    assert code == EXIT_OK
    assert "verified" not in json.loads(out)


def test_unknown_family_is_rejected(tmp_path):
    with pytest.raises(SystemExit):
        main(["hunt", "--seed", "0", "--trials", "1", "--n-min", "3", "--n-max", "4",
              "--family", "lattice", "--out", str(tmp_path / "hunt.jsonl")])
