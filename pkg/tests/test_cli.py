import json
import os

import pytest

from circumfeas.cli import main
from circumfeas.instances import load_instance
from circumfeas.methods import GapToFirstSet, MethodKind, ProjectionBudget, run


def test_usage_error_exit_code():
    assert main(["bench", "--suite", "warp"]) == 2
    assert main(["nonsense"]) == 2
    assert main([]) == 2


def test_gen_writes_instances_and_manifest(tmp_path):
    out = tmp_path / "suite"
    code = main(["gen", "--seed", "7", "--dim", "8", "--count", "3",
                 "--lambda", "1.1", "--out", str(out)])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 7
    assert len(manifest["files"]) == 3
    for name in manifest["files"]:
        assert (out / name).exists()


def test_gen_then_solve_matches_in_process(tmp_path, capsys):
    out = tmp_path / "suite"
    main(["gen", "--seed", "11", "--dim", "8", "--count", "1", "--out", str(out)])
    manifest = json.loads((out / "manifest.json").read_text())
    inst_path = out / manifest["files"][0]

    code = main(["solve", "--method", "ccrm", "--instance", str(inst_path),
                 "--eps", "1e-6", "--budget", "10000"])
    assert code == 0
    line = capsys.readouterr().out.strip().splitlines()[-1]
    assert "method=ccrm" in line

    inst = load_instance(inst_path)
    direct = run(MethodKind.CCRM, inst.e1, inst.e2, inst.z0,
                 [GapToFirstSet(1e-6), ProjectionBudget(10_000)])
    assert f"projections={direct.total_projections}" in line
    assert f"iterations={direct.iterations}" in line


def test_solve_writes_trajectory_csv_and_json(tmp_path):
    out = tmp_path / "suite"
    main(["gen", "--seed", "11", "--dim", "8", "--count", "1", "--out", str(out)])
    manifest = json.loads((out / "manifest.json").read_text())
    inst_path = str(out / manifest["files"][0])

    traj = tmp_path / "traj.csv"
    assert main(["solve", "--method", "map", "--instance", inst_path,
                 "--out", str(traj)]) == 0
    lines = traj.read_text().splitlines()
    assert lines[0] == "iteration,gap,cumulative_projections"
    assert len(lines) > 2
    assert not os.path.exists(str(traj) + ".tmp")

    summary = tmp_path / "run.json"
    assert main(["solve", "--method", "map", "--instance", inst_path,
                 "--format", "json", "--out", str(summary)]) == 0
    doc = json.loads(summary.read_text())
    assert doc["method"] == "map"
    assert doc["stop_reason"] in ("gap", "budget")


def test_bench_writes_all_csvs(tmp_path, capsys):
    out = tmp_path / "results"
    code = main(["bench", "--suite", "interior", "--count", "2", "--dim", "8",
                 "--seed", "5", "--out", str(out)])
    assert code == 0
    for name in ("records.csv", "stats.csv", "profile.csv", "timings.csv"):
        assert (out / name).exists()
    printed = capsys.readouterr().out
    assert "bench[interior]" in printed


def test_bench_determinism_byte_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        assert main(["bench", "--suite", "interior", "--count", "2", "--dim", "8",
                     "--seed", "5", "--out", str(out)]) == 0
    assert (a / "records.csv").read_bytes() == (b / "records.csv").read_bytes()
    assert (a / "stats.csv").read_bytes() == (b / "stats.csv").read_bytes()
    assert (a / "profile.csv").read_bytes() == (b / "profile.csv").read_bytes()


def test_profile_subcommand_from_records(tmp_path, capsys):
    out = tmp_path / "results"
    main(["bench", "--suite", "interior", "--count", "2", "--dim", "8",
          "--seed", "5", "--out", str(out)])
    prof = tmp_path / "prof.csv"
    code = main(["profile", "--records", str(out / "records.csv"), "--out", str(prof)])
    assert code == 0
    regenerated = prof.read_text()
    original = (out / "profile.csv").read_text()
    assert regenerated == original


def test_profile_rejects_bad_schema(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("method,cost\nmap,3\n")
    assert main(["profile", "--records", str(bad)]) == 2


def test_solve_missing_instance_is_io_error(tmp_path):
    assert main(["solve", "--method", "map", "--instance",
                 str(tmp_path / "nope.json")]) == 4


def test_audit_quick_pass(tmp_path, capsys):
    report_path = tmp_path / "audit.json"
    code = main(["audit", "--checks", "centralized,qne", "--seed", "7",
                 "--draws", "60", "--out", str(report_path)])
    assert code == 0
    doc = json.loads(report_path.read_text())
    assert doc["passed"] is True
    assert "invariants" in doc


def test_audit_unknown_check_is_usage_error():
    assert main(["audit", "--checks", "nonsense"]) == 2


def test_solver_abort_exit_code(tmp_path, monkeypatch):
    import circumfeas.cli as cli_mod
    from circumfeas.methods import RankDeficientError

    out = tmp_path / "suite"
    main(["gen", "--seed", "11", "--dim", "8", "--count", "1", "--out", str(out)])
    manifest = json.loads((out / "manifest.json").read_text())
    inst_path = str(out / manifest["files"][0])

    def explode(*args, **kwargs):
        raise RankDeficientError("collinear reflections")

    monkeypatch.setattr(cli_mod, "run", explode)
    assert main(["solve", "--method", "crm", "--instance", inst_path]) == 3


def test_env_thread_override(tmp_path, monkeypatch):
    monkeypatch.setenv("CIRCUMFEAS_THREADS", "2")
    out = tmp_path / "results"
    assert main(["bench", "--suite", "interior", "--count", "2", "--dim", "8",
                 "--seed", "5", "--out", str(out)]) == 0
    monkeypatch.setenv("CIRCUMFEAS_THREADS", "zebra")
    with pytest.raises(SystemExit):
        main(["bench", "--suite", "interior", "--count", "1", "--dim", "8",
              "--seed", "5", "--out", str(tmp_path / "x")])
