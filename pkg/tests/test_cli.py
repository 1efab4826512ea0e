import json
import os
import subprocess
import sys

import pytest

from fracblow import ExperimentConfig
from fracblow.cli import Writer, aggregate, main
from fracblow.errors import ConfigError


def run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path)])


def test_ctau_bracket(tmp_path, capsys):
    assert run(tmp_path, "ctau", "--alpha", "0.5") == 0
    data = json.load(open(tmp_path / "ctau.json"))
    lo, hi = data["result"]["sign_change"][0]
    assert lo <= -0.5 <= hi
    assert abs(data["result"]["tau0"] + 0.5) <= 1e-6


def test_solve_zero_is_potential(tmp_path):
    assert run(tmp_path / "s", "solve", "--p", "0", "--k", "2") == 0
    assert run(tmp_path / "p", "potential") == 0
    s = [l.split(",") for l in open(tmp_path / "s" / "solution.csv").read().splitlines()[2:]]
    p = [l.split(",") for l in open(tmp_path / "p" / "potential.csv").read().splitlines()[2:]]
    assert len(s) == len(p)
    for a, b in zip(s, p):
        assert float(a[-1]) == pytest.approx(2 * float(b[-1]), rel=1e-12)


def test_csv_deterministic(tmp_path):
    for d in ("a", "b"):
        assert run(tmp_path / d, "solve", "--k", "1", "--seed", "7") == 0
    assert (tmp_path / "a" / "solution.csv").read_bytes() == (tmp_path / "b" / "solution.csv").read_bytes()


def test_exit_codes(tmp_path, capsys):
    assert run(tmp_path, "solve", "--alpha", "1.5") == 2
    assert json.loads(capsys.readouterr().out.strip())["error"] == "ConfigError"
    assert run(tmp_path, "solve", "--p", "3.0") == 1
    err = json.loads(capsys.readouterr().out.strip())
    assert err["error"] == "SubcriticalityViolated" and "config_hash" in err


def test_config_file_and_overrides(tmp_path):
    cfg = ExperimentConfig(alpha=0.3, output=str(tmp_path))
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    assert main(["ctau", "--config", str(path)]) == 0
    data = json.load(open(tmp_path / "ctau.json"))
    assert data["config"]["alpha"] == 0.3
    assert data["meta"]["config_hash"] == cfg.config_hash()


def test_aggregate_refuses_mixed_hashes(tmp_path):
    a = ExperimentConfig(output=str(tmp_path))
    b = ExperimentConfig(output=str(tmp_path), seed=1)
    Writer(a, "verify-all").json("criterion_1.json", {"number": 1, "passed": True})
    Writer(b, "verify-all").json("criterion_2.json", {"number": 2, "passed": True})
    with pytest.raises(ConfigError):
        aggregate(str(tmp_path), a.config_hash())


@pytest.mark.slow
def test_verify_all_quick_prints_nine_lines(tmp_path):
    out = subprocess.run([sys.executable, "-m", "fracblow.cli", "verify-all", "--quick",
                          "--out", str(tmp_path)], capture_output=True, text=True, timeout=600)
    lines = [l for l in out.stdout.splitlines() if l.startswith("criterion ")]
    assert len(lines) == 9
    assert sorted(os.listdir(tmp_path))[:9] == sorted(f"criterion_{i}.json" for i in range(1, 10))
    assert out.returncode == 0


@pytest.mark.parametrize("cmd", [["green", "--n", "5"], ["green", "--kind", "martin", "--n", "5"],
                                 ["rates"], ["weaknorm"], ["residual", "--n-points", "3"]])
def test_other_subcommands(tmp_path, cmd):
    assert run(tmp_path, *cmd) == 0
    assert any(n.endswith((".csv", ".json")) for n in os.listdir(tmp_path))
