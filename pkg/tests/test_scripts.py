import json
import subprocess
import sys
from pathlib import Path

import pytest

SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"


def run(name, *args):
    proc = subprocess.run([sys.executable, str(SCRIPTS / name), *args], capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_soundness_sweep_small():
    doc = json.loads(run("soundness_sweep.py", "--count", "5", "--seed", "1"))
    assert doc["conclusions"] == {"consensus": 5}
    assert doc["classes"]["root"] == 5


def test_pinning_counterexample():
    cases = [json.loads(line) for line in run("pinning_counterexample.py").splitlines()]
    assert [c["hurwitz"] for c in cases] == [False, True]
    assert cases[0]["final_state"][2] == pytest.approx(1.0)


def test_isp_survey():
    out = run("isp_survey.py", "--grids", "32")
    assert "tanh" in out and out.count("\n") == 6
