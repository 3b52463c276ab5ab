"""CLI behavior: record formats, exit codes, determinism."""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from binopt.cli import main
from binopt.instances import gen_qubo_synthetic, load_instance, write_orlib


def run_cli(args):
    return main([str(a) for a in args])


class TestSolveCommand:
    def test_qubo_synthetic_records(self, tmp_path, capsys):
        out = tmp_path / "q.jsonl"
        code = run_cli(["solve", "qubo", "--n", 10, "--case", 2,
                        "--trials", 3, "--seed", 4, "--output", out])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 3
        rec = json.loads(lines[0])
        assert rec["schema"] == "binopt.trial.v1"
        assert rec["task"] == "qubo"
        assert rec["result"]["binary"] is True
        assert rec["result"]["terminated_by"] == "stopping_rule"
        assert rec["config"]["preset"] == "qubo"
        assert "lambda" in rec["traces"]
        assert "wall_time" not in json.dumps(rec)
        summary = capsys.readouterr().out
        assert "objective" in summary and "wall time" in summary

    def test_recovery_metrics_present(self, tmp_path):
        out = tmp_path / "r.jsonl"
        code = run_cli(["solve", "recovery", "--m", 40, "--n", 80, "--s", 8,
                        "--trials", 2, "--seed", 0, "--output", out])
        assert code == 0
        recs = [json.loads(l) for l in out.read_text().splitlines()]
        assert all(r["metrics"]["acc"] == 1.0 for r in recs)

    def test_onebit_ber_present(self, tmp_path):
        out = tmp_path / "o.jsonl"
        code = run_cli(["solve", "onebit", "--m", 40, "--n", 20, "--snr-db", 15,
                        "--trials", 2, "--seed", 0, "--output", out])
        assert code == 0
        recs = [json.loads(l) for l in out.read_text().splitlines()]
        assert all(r["metrics"]["ber"] is not None for r in recs)

    def test_batch_gap_for_synthetic(self, tmp_path):
        out = tmp_path / "g.jsonl"
        code = run_cli(["solve", "qubo", "--n", 12, "--case", 1, "--trials", 4,
                        "--seed", 2, "--output", out])
        assert code == 0
        recs = [json.loads(l) for l in out.read_text().splitlines()]
        gaps = [r["metrics"]["gap_percent"] for r in recs]
        assert all(g is not None and g >= 0.0 for g in gaps)
        assert min(gaps) == 0.0

    def test_shared_instance(self, tmp_path):
        out = tmp_path / "s.jsonl"
        code = run_cli(["solve", "qubo", "--n", 10, "--case", 1, "--trials", 3,
                        "--seed", 7, "--shared-instance", "--output", out])
        assert code == 0
        recs = [json.loads(l) for l in out.read_text().splitlines()]
        hashes = {r["result"]["x_sha256"] for r in recs}
        assert len(hashes) == 1  # same instance, deterministic solver

    def test_emit_x(self, tmp_path):
        out = tmp_path / "x.jsonl"
        run_cli(["solve", "qubo", "--n", 8, "--case", 1, "--trials", 1,
                 "--seed", 0, "--emit-x", "--output", out])
        rec = json.loads(out.read_text().splitlines()[0])
        assert len(rec["x"]) == 8
        assert set(rec["x"]) <= {0.0, 1.0}

    def test_config_override(self, tmp_path):
        out = tmp_path / "c.jsonl"
        run_cli(["solve", "qubo", "--n", 8, "--case", 1, "--trials", 1,
                 "--seed", 0, "--k0", 7, "--pi", 2.5, "--output", out])
        rec = json.loads(out.read_text().splitlines()[0])
        assert rec["config"]["k0"] == 7
        assert rec["config"]["pi"] == 2.5

    def test_file_instance(self, tmp_path):
        inst_path = tmp_path / "inst.json"
        run_cli(["generate", "qubo", "--n", 10, "--case", 3, "--seed", 5,
                 "--output", inst_path])
        out = tmp_path / "f.jsonl"
        code = run_cli(["solve", "qubo", "--file", inst_path, "--output", out])
        assert code == 0
        rec = json.loads(out.read_text().splitlines()[0])
        assert rec["instance"]["source"] == "file"

    def test_missing_benchmark_exits_3(self, tmp_path, capsys):
        code = run_cli(["solve", "qubo", "--beasley", "bqp100-1",
                        "--beasley-dir", tmp_path, "--output", tmp_path / "b.jsonl"])
        assert code == 3
        assert "not found" in capsys.readouterr().err

    def test_missing_params_exit_2(self, tmp_path, capsys):
        code = run_cli(["solve", "recovery", "--m", 10, "--output", tmp_path / "m.jsonl"])
        assert code == 2


class TestDeterminism:
    def test_solve_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        args = ["solve", "recovery", "--m", 40, "--n", 80, "--s", 10,
                "--trials", 4, "--seed", 3]
        run_cli(args + ["--output", a])
        run_cli(args + ["--output", b])
        assert a.read_bytes() == b.read_bytes()

    def test_sweep_byte_identical(self, tmp_path):
        args = ["sweep", "onebit", "--m", 30, "--n", 15, "--axis", "snr_db",
                "--values", "0,10", "--trials", 2, "--seed", 5]
        run_cli(args + ["--output", tmp_path / "s1"])
        run_cli(args + ["--output", tmp_path / "s2"])
        assert (tmp_path / "s1.csv").read_bytes() == (tmp_path / "s2.csv").read_bytes()
        assert (tmp_path / "s1_median.csv").read_bytes() == (tmp_path / "s2_median.csv").read_bytes()


class TestSweepCommand:
    def test_axis_csv_layout(self, tmp_path):
        code = run_cli(["sweep", "recovery", "--n", 60, "--s", 6, "--q", 2,
                        "--nf", 0, "--axis", "m", "--values", "30,40",
                        "--trials", 3, "--seed", 1, "--output", tmp_path / "sw"])
        assert code == 0
        with open(tmp_path / "sw.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 6
        assert {r["axis_value"] for r in rows} == {"30", "40"}
        with open(tmp_path / "sw_median.csv") as fh:
            med = list(csv.DictReader(fh))
        assert len(med) == 2
        assert all(r["axis"] == "m" for r in med)
        # aggregate equals the recomputed median of per-trial rows
        for m_row in med:
            accs = [float(r["acc"]) for r in rows if r["axis_value"] == m_row["axis_value"]]
            assert float(m_row["median_acc"]) == pytest.approx(float(np.median(accs)))

    def test_bad_axis_exits_2(self, tmp_path, capsys):
        code = run_cli(["sweep", "recovery", "--n", 60, "--s", 6, "--axis", "zz",
                        "--values", "1,2", "--seed", 1, "--output", tmp_path / "sw"])
        assert code == 2

    def test_seed_required(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run_cli(["sweep", "recovery", "--n", 60, "--s", 6, "--axis", "m",
                     "--values", "30"])
        assert exc.value.code == 2


class TestGenerateValidate:
    def test_round_trip_all_tasks(self, tmp_path):
        specs = [
            (["generate", "qubo", "--n", 12, "--case", 2], "q.json"),
            (["generate", "recovery", "--m", 10, "--n", 20, "--s", 4], "r.json"),
            (["generate", "mimo", "--m", 5, "--n", 4, "--snr-db", 10], "m.json"),
            (["generate", "onebit", "--m", 8, "--n", 4, "--snr-db", 10], "o.json"),
        ]
        paths = []
        for args, name in specs:
            path = tmp_path / name
            assert run_cli(args + ["--seed", 3, "--output", path]) == 0
            paths.append(path)
        assert run_cli(["validate", *paths]) == 0

    def test_orlib_export_reparses_equal(self, tmp_path):
        path = tmp_path / "e.sparse"
        assert run_cli(["generate", "qubo", "--n", 15, "--case", 4, "--seed", 6,
                        "--format", "orlib", "--output", path]) == 0
        from binopt.instances import parse_beasley

        reparsed = parse_beasley(path)
        reference = gen_qubo_synthetic(15, 4, seed=6)
        np.testing.assert_allclose(
            np.asarray(reparsed.Q), np.asarray(reference.Q), atol=0
        )

    def test_validate_flags_corruption(self, tmp_path, capsys):
        good = tmp_path / "good.sparse"
        inst = gen_qubo_synthetic(10, 1, seed=1)
        write_orlib(inst, good)
        bad = tmp_path / "bad.sparse"
        lines = good.read_text().splitlines()
        lines[3] = "1 oops 3"
        bad.write_text("\n".join(lines) + "\n")
        code = run_cli(["validate", bad])
        assert code == 3
        assert "line 4" in capsys.readouterr().out

    def test_validate_accepts_orlib(self, tmp_path):
        path = tmp_path / "ok.sparse"
        write_orlib(gen_qubo_synthetic(10, 1, seed=2), path)
        assert run_cli(["validate", path]) == 0


class TestConsoleEntryPoint:
    def test_subprocess_invocation(self, tmp_path):
        out = tmp_path / "sp.jsonl"
        proc = subprocess.run(
            [sys.executable, "-m", "binopt.cli", "solve", "qubo", "--n", "8",
             "--case", "1", "--seed", "0", "--output", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert out.exists()

    def test_usage_error_code(self):
        proc = subprocess.run(
            [sys.executable, "-m", "binopt.cli", "solve"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 2
