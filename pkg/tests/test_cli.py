import json
import os

import numpy as np
import pytest

from equimax.cli import run
from equimax.optimizer import read_surface_csv
from equimax.probmat import EXAMPLES_4X2, read_matrix_csv, write_matrix_csv


@pytest.fixture
def p3_path(tmp_path):
    path = tmp_path / "p3.csv"
    write_matrix_csv(path, EXAMPLES_4X2["P3"])
    return str(path)


class TestEval:
    def test_p3_values(self, p3_path, capsys):
        assert run(["eval", "--input", p3_path]) == 0
        out = capsys.readouterr().out
        assert "nuclear_norm: 2.82843" in out
        assert "cws(r=0.5): 1.41421" in out
        assert "ns(r=0.5, alpha=1, epsilon=0): 0.5" in out
        assert "ms: -1" in out
        assert "equity: 1" in out
        assert "discriminability: 1" in out

    def test_stdin(self, capsys, monkeypatch):
        import io

        monkeypatch.setattr("sys.stdin", io.StringIO("1,0\n0,1\n"))
        assert run(["eval", "--input", "-"]) == 0
        assert "ms: -1" in capsys.readouterr().out

    def test_invalid_matrix_exit_1(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("0.6,0.6\n0.5,0.5\n")
        assert run(["eval", "--input", str(path)]) == 1
        assert "row 0 sums to 1.2" in capsys.readouterr().err

    def test_renormalize(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("0.6,0.6\n2.0,2.0\n")
        assert run(["eval", "--input", str(path), "--renormalize"]) == 0
        assert "ms: -0.5" in capsys.readouterr().out

    def test_missing_file_exit_1(self, capsys):
        assert run(["eval", "--input", "no/such/file.csv"]) == 1

    def test_unknown_flag_rejected(self, p3_path):
        with pytest.raises(SystemExit):
            run(["eval", "--input", p3_path, "--bogus"])


class TestGrad:
    def test_writes_gradient(self, p3_path, tmp_path, capsys):
        out_path = tmp_path / "g.csv"
        assert run(["grad", "--input", p3_path, "--loss", "ms", "--out", str(out_path)]) == 0
        grad = np.array(
            [[float(t) for t in line.split(",")] for line in out_path.read_text().splitlines()[1:]]
        )
        assert np.allclose(grad, -0.5 * np.asarray(EXAMPLES_4X2["P3"]))
        assert "exact: True" in capsys.readouterr().out

    def test_bad_epsilon_rejected(self, p3_path, tmp_path):
        with pytest.raises(SystemExit):
            run(["grad", "--input", p3_path, "--loss", "nsm", "--epsilon", "huh", "--out", str(tmp_path / "g.csv")])


class TestVerify:
    def test_theorem_1(self, tmp_path, capsys):
        out = tmp_path / "t1.json"
        assert run(["verify", "--theorem", "1", "--b", "4", "--c", "2", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["verdict"] == "pass"
        assert doc["argmax"] == [[2, 2]]
        assert "theorem 1: PASS" in capsys.readouterr().out

    def test_theorem_all_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["verify", "--theorem", "all", "--b", "2", "--c", "3", "--out"]
        assert run(args + [str(a)]) == 0
        assert run(args + [str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        docs = json.loads(a.read_text())
        assert [d["theorem"] for d in docs] == [1, 2, 3, 4, 5, 6]
        assert all(d["verdict"] == "pass" for d in docs)

    def test_theorem_6_requires_b_le_c(self, tmp_path, capsys):
        assert run(["verify", "--theorem", "6", "--b", "4", "--c", "2", "--out", str(tmp_path / "x.json")]) == 1
        assert "B <= C" in capsys.readouterr().err

    def test_failed_verdict_nonzero_exit(self, tmp_path, monkeypatch):
        import equimax.cli as cli

        real = cli.oracle.verify_theorem_1

        def fake(*args, **kwargs):
            rep = real(2, 2)
            rep.verdict = "fail"
            return rep

        monkeypatch.setattr(cli.oracle, "verify_theorem_1", fake)
        assert run(["verify", "--theorem", "1", "--b", "2", "--c", "2", "--out", str(tmp_path / "f.json")]) == 1


class TestSurface:
    def test_bnm_csv_and_sidecar(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run(["surface", "--loss", "bnm", "--grid", "41", "--out", str(out)]) == 0
        rows = read_surface_csv(str(out))
        assert rows.shape == (41 * 41, 3)
        doc = json.loads((tmp_path / "s.csv.argmax.json").read_text())
        assert doc["argmax"] == [[0.0, 1.0], [1.0, 0.0]]

    def test_full_grid_row_count(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run(["surface", "--loss", "ms", "--grid", "201", "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 1 + 40401


class TestOptimize:
    def test_cwsm(self, capsys):
        code = run(
            ["optimize", "--loss", "cwsm", "--b", "4", "--c", "2", "--inits", "12", "--steps", "300"]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "best value (negated loss): 1.41421" in out
        assert "class sizes: [2.0, 2.0]" in out


class TestToyuda:
    def test_writes_trajectories(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = {"epochs": 5, "source_per_class": 20, "target_counts": [12, 6, 3], "batch_size": 7}
        (tmp_path / "cfg.json").write_text(json.dumps(cfg))
        code = run(
            [
                "toyuda",
                "--loss",
                "cwsm",
                "--lambda",
                "1.0",
                "--config",
                "cfg.json",
                "--out-prefix",
                "run",
            ]
        )
        assert code == 0
        doc = json.loads((tmp_path / "run.json").read_text())
        assert len(doc["trajectory"]["ce"]) == 5
        lines = (tmp_path / "run.csv").read_text().splitlines()
        assert lines[0] == "# epoch,ce,lt,acc,equity,disc"
        assert len(lines) == 6
        assert "final accuracy:" in capsys.readouterr().out

    def test_round_trip_csv_matches_json(self, tmp_path):
        code = run(
            [
                "toyuda",
                "--loss",
                "ms",
                "--lambda",
                "0.0",
                "--out-prefix",
                str(tmp_path / "r"),
                "--config",
                "-",
            ]
        )
        assert code == 1  # '-' is not a readable config path


class TestExamples:
    def test_writes_all_canonical_files(self, tmp_path, capsys):
        out_dir = tmp_path / "mats"
        assert run(["examples", "--out-dir", str(out_dir)]) == 0
        names = sorted(os.listdir(out_dir))
        assert names == [
            "p1_2x2.csv",
            "p1_4x2.csv",
            "p2_2x2.csv",
            "p2_4x2.csv",
            "p3_2x2.csv",
            "p3_4x2.csv",
            "p4_2x2.csv",
        ]
        mat = read_matrix_csv(str(out_dir / "p2_4x2.csv"))
        assert np.array_equal(mat, EXAMPLES_4X2["P2"])


def test_machine_outputs_round_trip(tmp_path):
    # gradient CSV written by the CLI parses back with full precision
    from equimax.probmat import read_array_csv

    path = tmp_path / "m.csv"
    write_matrix_csv(path, np.asarray(EXAMPLES_4X2["P2"]))
    out = tmp_path / "g.csv"
    assert run(["grad", "--input", str(path), "--loss", "cwsm", "--r", "0.5", "--out", str(out)]) == 0
    grad = read_array_csv(str(out))
    from equimax.losses import LossConfig, gradient

    expect = gradient(np.asarray(EXAMPLES_4X2["P2"]), LossConfig("cwsm", r=0.5)).grad
    assert np.array_equal(grad, expect)


def test_toyuda_csv_round_trips_through_reader(tmp_path):
    from equimax.toyuda import read_trajectory_csv

    code = run(
        [
            "toyuda",
            "--loss",
            "ms",
            "--lambda",
            "0.5",
            "--out-prefix",
            str(tmp_path / "run"),
            "--config",
            str(tmp_path / "cfg.json"),
        ]
    )
    assert code == 1  # config file missing
    (tmp_path / "cfg.json").write_text(
        '{"epochs": 4, "source_per_class": 15, "target_counts": [9, 6, 3], "batch_size": 6}'
    )
    code = run(
        [
            "toyuda",
            "--loss",
            "ms",
            "--lambda",
            "0.5",
            "--out-prefix",
            str(tmp_path / "run"),
            "--config",
            str(tmp_path / "cfg.json"),
        ]
    )
    assert code == 0
    rows = read_trajectory_csv(str(tmp_path / "run.csv"))
    assert rows.shape == (4, 6)
    assert np.array_equal(rows[:, 0], np.arange(4))
