import json
import math

import pytest

from levybandit.cli import main
from levybandit.levy_core import ArmType, BanditProblem, JumpMeasure, krc

from conftest import mixed_problem


@pytest.fixture
def krc_config(write_config):
    return write_config(krc().to_dict(), "krc.json")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = text.splitlines()
    body = [line for line in lines if not line.startswith("#")]
    comments = dict(line[2:].split("=", 1) for line in lines if line.startswith("# ") and "=" in line
                    and not line.startswith("# manifest"))
    return body[0].split(","), [line.split(",") for line in body[1:]], comments


class TestCheck:
    def test_valid(self, capsys, krc_config):
        code, out, _ = run(capsys, "check", krc_config)
        assert code == 0
        assert json.loads(out)["report"]["ok"] is True

    def test_assumption_failure_names_a5(self, capsys, write_config):
        code, out, err = run(capsys, "check", write_config(krc(rho=2.0).to_dict()))
        assert code == 2
        assert "A5" in err
        assert "A5" in json.dumps(json.loads(out)["report"])

    def test_missing_field(self, capsys, write_config):
        data = krc().to_dict()
        del data["high"]["sigma"]
        code, _, err = run(capsys, "check", write_config(data))
        assert code == 3
        assert "high.sigma" in err

    def test_malformed_json(self, capsys, write_config):
        code, _, _ = run(capsys, "check", write_config("{oops"))
        assert code == 3

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "check", tmp_path / "nope.json")[0] == 3

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["check"])
        assert exc.value.code == 1


class TestSolve:
    def test_krc(self, capsys, krc_config):
        code, out, _ = run(capsys, "solve", krc_config)
        assert code == 0
        result = json.loads(out)["result"]
        assert result["alphaStar"] == pytest.approx(1.0, abs=1e-12)
        assert result["pStar"] == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert result["pMyopic"] == 0.5
        assert result["cAlpha"] == pytest.approx(0.125, abs=1e-12)

    def test_round_trip(self, capsys, write_config):
        from levybandit.solver import solve

        code, out, _ = run(capsys, "solve", write_config(mixed_problem().to_dict()))
        assert code == 0
        sol = solve(mixed_problem())
        assert json.loads(out)["result"]["pStar"] == sol.p_star
        assert json.loads(out)["result"]["alphaStar"] == sol.alpha_star

    def test_general_payoffs(self, capsys, krc_config):
        code, out, _ = run(capsys, "solve", krc_config, "--g1", 2, "--g0", 0)
        assert code == 0
        assert json.loads(out)["result"]["pStar"] == pytest.approx(1.0 / 7.0, abs=1e-12)

    def test_value_table(self, capsys, krc_config):
        _, out, _ = run(capsys, "solve", krc_config, "--grid", 4)
        table = json.loads(out)["result"]["valueTable"]
        assert len(table) == 4 and table[0] == [0.0, 0.5] and table[-1] == [1.0, 1.0]

    def test_no_signal(self, capsys, write_config):
        arm = ArmType(0.5, 0.0, JumpMeasure(((1.0, 0.5),)))
        code, _, err = run(capsys, "solve", write_config(BanditProblem(arm, arm, 0.5, 1.0).to_dict()))
        assert code == 4
        assert "NoSignal" in err

    def test_out_file_and_manifest(self, capsys, krc_config, tmp_path):
        target = tmp_path / "sol.json"
        code, out, _ = run(capsys, "solve", krc_config, "--out", target)
        assert code == 0 and out == ""
        assert json.loads(target.read_text())["manifest"]["command"] == "solve"
        side = json.loads((tmp_path / "sol.json.manifest.json").read_text())
        assert "timestamp" in side and side["version"]


class TestHjbGrid:
    def test_krc_residual(self, capsys, krc_config):
        code, out, _ = run(capsys, "hjb-grid", krc_config, "--points", 1000)
        assert code == 0
        header, rows, comments = csv_rows(out)
        assert header == ["p", "residual_k0", "residual_k1", "branch"]
        assert len(rows) == 1000
        assert float(comments["max_active_residual"]) <= 1e-8
        assert all(float(r[2]) <= 0.0 for r in rows if r[3] == "safe")

    def test_single_point(self, capsys, krc_config):
        _, out, _ = run(capsys, "hjb-grid", krc_config, "--points", 1)
        _, rows, _ = csv_rows(out)
        assert len(rows) == 1 and float(rows[0][0]) == 0.5

    def test_excludes_cutoff(self, capsys, write_config):
        # with 6 points the grid contains 1/12, 3/12, ...; p* = 1/4 for this instance
        problem = krc(lam=1.0, r=1.0, rho=0.4)
        _, out, _ = run(capsys, "hjb-grid", write_config(problem.to_dict()), "--points", 6)
        _, rows, comments = csv_rows(out)
        assert float(comments["pStar"]) == pytest.approx(0.25, abs=1e-12)
        assert len(rows) == 5

    def test_bad_points(self, capsys, krc_config):
        assert run(capsys, "hjb-grid", krc_config, "--points", 0)[0] == 1


class TestSimulate:
    def test_always_safe_exact(self, capsys, krc_config):
        code, out, _ = run(capsys, "simulate", krc_config, "--strategy", "always-safe", "--paths", 100)
        result = json.loads(out)["result"]
        assert code == 0
        assert result["mean"] == pytest.approx(0.5 * (1 - math.exp(-result["horizon"])), rel=1e-13)
        assert result["stderr"] == 0.0
        assert "tailBound" in result and set(result["perEstimator"]) == {"payoff", "belief", "difference"}

    def test_deterministic_bytes(self, capsys, krc_config):
        args = ("simulate", krc_config, "--paths", 500, "--seed", 3, "--dt", 1e-2)
        assert run(capsys, *args)[1] == run(capsys, *args)[1]

    def test_resolved_strategy(self, capsys, krc_config):
        _, out, _ = run(capsys, "simulate", krc_config, "--paths", 50, "--dt", 1e-2)
        resolved = json.loads(out)["manifest"]["parameters"]["resolvedStrategy"]
        assert resolved["edges"] == [pytest.approx(1.0 / 3.0, abs=1e-12)]

    def test_invalid_strategy(self, capsys, krc_config):
        assert run(capsys, "simulate", krc_config, "--strategy", "sometimes")[0] == 1

    def test_per_path_csv(self, capsys, krc_config, tmp_path):
        target = tmp_path / "paths.csv"
        run(capsys, "simulate", krc_config, "--paths", 10, "--dt", 1e-2, "--per-path", target)
        lines = target.read_text().splitlines()
        assert lines[0] == "path,high,payoff,belief,final_belief" and len(lines) == 11


class TestSweep:
    def test_krc_discount_sweep(self, capsys, krc_config):
        code, out, _ = run(capsys, "sweep", krc_config, "--param", "r", "--from", 0.5, "--to", 2, "--steps", 4)
        assert code == 0
        _, rows, comments = csv_rows(out)
        assert len(rows) == 4
        for row in rows:
            assert float(row[1]) == pytest.approx(float(row[0]), abs=1e-10)
        assert comments["alphaStar_strictly_increasing"] == "true"
        assert comments["pStar_strictly_increasing"] == "true"
        assert comments["pStar_below_pMyopic"] == "true"

    def test_single_step(self, capsys, krc_config):
        _, out, _ = run(capsys, "sweep", krc_config, "--param", "r", "--from", 1, "--to", 1, "--steps", 1)
        assert len(csv_rows(out)[1]) == 1

    def test_invalid_grid_point(self, capsys, krc_config):
        code, _, err = run(capsys, "sweep", krc_config, "--param", "rho", "--from", 0.2, "--to", 1.2, "--steps", 3)
        assert code == 2
        assert "grid point 2" in err
