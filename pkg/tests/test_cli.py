"""End-to-end command line checks."""

import csv
import io
import json

import numpy as np
import pytest

from lda_rlct.cli import main
from lda_rlct.io import write_true_model
from lda_rlct.model import sample_true_model


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    return list(csv.reader(io.StringIO(text)))


class TestRlctCommand:
    def test_reference_range(self, capsys):
        code, out, _ = run_cli(
            capsys, "rlct", "--m", "10", "--n", "5",
            "--h-min", "2", "--h-max", "5", "--r", "1",
        )
        assert code == 0
        rows = parse_csv(out)
        assert rows[0] == ["H", "lambda", "multiplicity", "half_dim"]
        assert [r[1] for r in rows[1:]] == ["21/2", "12", "27/2", "15"]
        assert [r[2] for r in rows[1:]] == ["1", "1", "1", "1"]
        assert [r[3] for r in rows[1:]] == ["23/2", "37/2", "51/2", "65/2"]

    def test_rank_from_truth_file(self, capsys, tmp_path):
        model = sample_true_model(10, 5, 2, np.random.default_rng(0))
        path = tmp_path / "truth.txt"
        write_true_model(model, path)
        code, out, _ = run_cli(
            capsys, "rlct", "--m", "10", "--n", "5",
            "--h-min", "2", "--h-max", "2", "--truth", str(path),
        )
        assert code == 0
        assert parse_csv(out)[1] == ["2", "21/2", "1", "23/2"]

    def test_needs_exactly_one_rank_source(self, capsys):
        code, _, err = run_cli(
            capsys, "rlct", "--m", "10", "--n", "5", "--h-min", "2", "--h-max", "3",
        )
        assert code == 2
        assert "exactly one" in err

    def test_invalid_shape_is_reported(self, capsys):
        code, _, err = run_cli(
            capsys, "rlct", "--m", "1", "--n", "5",
            "--h-min", "2", "--h-max", "3", "--r", "0",
        )
        assert code == 1
        assert "M >= 2" in err


class TestCurveCommand:
    def test_reference_row(self, capsys):
        code, out, _ = run_cli(
            capsys, "curve", "--lam", "21/2", "--mult", "1",
            "--n-min", "1000", "--n-max", "1000", "--n-points", "2",
            "--dim", "23",
        )
        assert code == 0
        rows = parse_csv(out)
        assert rows[0] == ["n", "e_gen_lda", "e_gen_regular"]
        assert rows[1][0] == "1000"
        assert float(rows[1][1]) == 0.0105
        assert float(rows[1][2]) == 0.0115

    def test_grid_is_sorted_and_bounded(self, capsys):
        code, out, _ = run_cli(
            capsys, "curve", "--lam", "12", "--n-min", "16",
            "--n-max", "10000", "--n-points", "12",
        )
        assert code == 0
        rows = parse_csv(out)[1:]
        ns = [int(r[0]) for r in rows]
        assert ns == sorted(ns)
        assert ns[0] == 16 and ns[-1] == 10000

    def test_rejects_small_n(self, capsys):
        code, _, err = run_cli(capsys, "curve", "--lam", "12", "--n-min", "8")
        assert code == 2
        assert ">= 16" in err


class TestSimulateAndReport:
    def write_config(self, tmp_path):
        config = {
            "M": 5, "N": 4, "H0": 2, "n": 120, "D": 3, "H_list": [2],
            "master_seed": 3,
            "gibbs": {"burn_in": 30, "thinning": 2, "num_draws": 60},
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        return path

    def test_simulate_then_report(self, capsys, tmp_path):
        config_path = self.write_config(tmp_path)
        code, out, _ = run_cli(
            capsys, "simulate", "--config", str(config_path),
            "--out-dir", str(tmp_path / "out"),
        )
        assert code == 0
        assert "H=2" in out
        replicates = tmp_path / "out" / "replicates.csv"
        assert replicates.exists()

        code, out, _ = run_cli(
            capsys, "report", str(replicates),
            "--m", "5", "--n", "4", "--r", "1",
            "--out-dir", str(tmp_path / "rep"),
        )
        assert code == 0
        report_rows = parse_csv((tmp_path / "rep" / "report.csv").read_text())
        simulate_rows = parse_csv((tmp_path / "out" / "report.csv").read_text())
        assert report_rows == simulate_rows

    def test_seed_override_changes_rows(self, capsys, tmp_path):
        config_path = self.write_config(tmp_path)
        run_cli(capsys, "simulate", "--config", str(config_path),
                "--out-dir", str(tmp_path / "a"))
        run_cli(capsys, "simulate", "--config", str(config_path),
                "--seed", "99", "--out-dir", str(tmp_path / "b"))
        assert (tmp_path / "a" / "replicates.csv").read_text() != (
            tmp_path / "b" / "replicates.csv"
        ).read_text()

    def test_missing_config_is_clean_error(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "simulate", "--config", str(tmp_path / "nope.json"),
            "--out-dir", str(tmp_path),
        )
        assert code == 1
        assert "error" in err

    def test_report_malformed_csv(self, capsys, tmp_path):
        bad = tmp_path / "replicates.csv"
        bad.write_text("replicate,H,n,G_n,S_n,T_n,V_n,W_n,lambda_sample,seed\n"
                       "0,2,100,x,0,0,0,0,1.0,1\n")
        code, _, err = run_cli(
            capsys, "report", str(bad), "--m", "5", "--n", "4", "--r", "1",
            "--out-dir", str(tmp_path / "rep"),
        )
        assert code == 1
        assert "replicates.csv:2" in err
