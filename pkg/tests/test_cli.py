import json
import os
import subprocess
import sys

import pytest

from ncgl.cli import (
    ExperimentConfig,
    ReportRow,
    emit,
    main,
    rows_from_json,
    run,
)
from ncgl.errors import NCGLError


def small(suite, **kw):
    defaults = dict(trials=4, seed=11)
    defaults.update(kw)
    return ExperimentConfig(suite=suite, **defaults)


class TestConfig:
    def test_unknown_suite(self):
        with pytest.raises(NCGLError):
            ExperimentConfig(suite="nope")

    def test_zero_trials(self):
        with pytest.raises(NCGLError):
            ExperimentConfig(suite="bg", trials=0)

    def test_out_of_domain_p(self):
        with pytest.raises(NCGLError):
            ExperimentConfig(suite="moment", p_grid=(1.5,))
        with pytest.raises(NCGLError):
            ExperimentConfig(suite="bg", p_grid=(1.0,))

    def test_default_p_grid(self):
        cfg = ExperimentConfig(suite="bg", trials=1)
        assert cfg.p_grid == (3.0, 4.0, 8.0)


class TestRun:
    def test_core_suite_passes(self):
        rows, summary = run(small("goodlambda-core", trials=6))
        assert summary["failures"] == 0
        assert len(rows) == 6
        assert all(r.passed for r in rows)

    def test_tail_suite_beta_grid(self):
        rows, _ = run(small("goodlambda-tail", trials=2,
                            beta_grid=(1.5, 2.0)))
        assert len(rows) == 4

    def test_counterexample_row_values(self):
        cfg = ExperimentConfig(suite="tangent-counterexample", trials=1,
                               seed=0, p_grid=(1.5,),
                               dims={"N_list": (9,)})
        rows, _ = run(cfg)
        tau_row = [r for r in rows if r.instance == "N=9:tau"][0]
        assert tau_row.lhs == pytest.approx(10.0)
        assert tau_row.rhs == pytest.approx(6.0)
        assert tau_row.passed

    def test_moment_suite_has_fubini_rows(self):
        cfg = small("moment", trials=2, p_grid=(3.0,))
        rows, summary = run(cfg)
        assert any("fubini" in r.instance for r in rows)
        assert summary["failures"] == 0

    def test_rows_deterministic_across_pool_sizes(self):
        cfg = small("bg", trials=4, p_grid=(3.0,))
        old = os.environ.get("NCGL_THREADS")
        try:
            os.environ["NCGL_THREADS"] = "1"
            rows1, _ = run(cfg)
            os.environ["NCGL_THREADS"] = "4"
            rows2, _ = run(cfg)
        finally:
            if old is None:
                os.environ.pop("NCGL_THREADS", None)
            else:
                os.environ["NCGL_THREADS"] = old
        assert rows1 == rows2


class TestEmit:
    def test_header_only_for_empty(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit([], "csv", str(path))
        assert path.read_text() == \
            "suite,instance,seed,lhs,rhs,constant,margin,pass,ms\n"

    def test_single_row_two_lines(self, tmp_path):
        row = ReportRow("bg", "t0", 1, 1.0, 2.0, 3.0, 1.0, True, 0)
        path = tmp_path / "one.csv"
        emit([row], "csv", str(path))
        assert len(path.read_text().strip().splitlines()) == 2

    def test_json_round_trip(self, tmp_path):
        rows, _ = run(small("goodlambda-core", trials=3))
        path = tmp_path / "r.json"
        emit(rows, "json", str(path))
        back = rows_from_json(str(path))
        assert back == rows

    def test_seventeen_digit_floats(self, tmp_path):
        row = ReportRow("bg", "t0", 1, 1.0 / 3.0, 2.0, 3.0, 1.0, True, 0)
        path = tmp_path / "d.csv"
        emit([row], "csv", str(path))
        assert "0.33333333333333331" in path.read_text()

    def test_unwritable_path(self):
        with pytest.raises(OSError):
            emit([], "csv", "/nonexistent-dir/x.csv")


class TestDeterminism:
    def test_byte_identical_reruns(self, tmp_path):
        cfg = small("goodlambda-core", trials=5, seed=21)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit(run(cfg)[0], "csv", str(a))
        emit(run(cfg)[0], "csv", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_different_seed_changes_output(self, tmp_path):
        rows1, _ = run(small("goodlambda-core", trials=3, seed=1))
        rows2, _ = run(small("goodlambda-core", trials=3, seed=2))
        assert rows1 != rows2


class TestMainEntry:
    def test_exit_zero_on_pass(self, tmp_path):
        out = tmp_path / "r.csv"
        code = main(["--suite", "goodlambda-core", "--trials", "3",
                     "--seed", "5", "--out", str(out)])
        assert code == 0
        assert out.exists()

    def test_exit_two_on_bad_config(self):
        assert main(["--suite", "moment", "--p", "1.5"]) == 2

    def test_exit_two_on_missing_suite(self):
        assert main([]) == 2

    def test_exit_two_on_bad_out(self):
        code = main(["--suite", "goodlambda-core", "--trials", "1",
                     "--out", "/nonexistent-dir/x.csv"])
        assert code == 2

    def test_exit_one_on_failed_rows(self, tmp_path):
        # an unreachable tolerance forces a failing verification row
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(
            {"suite": "moment", "trials": 1, "seed": 4, "p_grid": [3.0],
             "tolerances": {"fubini": 1e-30}}))
        assert main([str(cfg_path)]) == 1

    def test_config_file_with_overrides(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(
            {"suite": "bg", "trials": 2, "seed": 3, "p_grid": [3.0]}))
        out = tmp_path / "out.csv"
        code = main([str(cfg_path), "--trials", "1", "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 1 + 3  # three rows per (trial, p)

    def test_unknown_config_field(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"suite": "bg", "bogus": 1}))
        assert main([str(cfg_path)]) == 2

    def test_console_script_runs(self, tmp_path):
        out = tmp_path / "cli.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "ncgl.cli", "--suite", "transform",
             "--trials", "2", "--seed", "9", "--p", "3", "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert "suite transform" in proc.stdout
        assert out.exists()
