import json
import re
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from structcons.cli import SEED_ENV, build_parser, main
from structcons.dynamics import Trajectory

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def path_json(tmp_path):
    p = tmp_path / "path2.json"
    p.write_text('{"n":2,"edges":[{"src":1,"dst":2,"w":1.0}]}')
    return p


# -- exit-code matrix


@pytest.mark.parametrize(
    "argv, code",
    [
        (["decompose", DATA / "path3.dot"], 0),
        (["decompose", DATA / "isolated2.json"], 2),
        (["analyze", DATA / "pair.json", "--x0", "0,2"], 0),
        (["analyze", DATA / "isolated2.json"], 2),
        (["analyze", DATA / "pair.json", "--horizon", "0.01"], 2),
        (["simulate", DATA / "pair.json", "--horizon", "1"], 0),
        (["simulate", DATA / "pair.json", "--x0", "1,2,3"], 1),
        (["spectrum", DATA / "isolated2.json"], 0),
        (["check-isp", "--candidate", "tanh"], 0),
        (["check-isp", "--candidate", "nope"], 1),
        (["decompose", DATA / "missing.json"], 1),
        (["analyze", DATA / "pair.json", "--dt", "0"], 1),
        (["analyze", DATA / "pair.json", "--dt", "0.1", "--horizon", "0.05"], 1),
        (["simulate", DATA / "pair.json", "--x0", "a,b"], 1),
        (["bogus"], 1),
        ([], 1),
    ],
)
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_malformed_json_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, out, err = run(capsys, "decompose", bad)
    assert code == 1 and out == "" and "invalid JSON" in err


def test_self_loop_exit_1(capsys, tmp_path):
    bad = tmp_path / "loop.json"
    bad.write_text('{"n":1,"edges":[{"src":1,"dst":1}]}')
    assert run(capsys, "analyze", bad)[0] == 1


def test_divergence_exit_1(monkeypatch, capsys):
    from structcons import cli
    from structcons.dynamics import DivergenceError

    def boom(*args, **kwargs):
        raise DivergenceError("state magnitude exceeded 1e12")

    monkeypatch.setattr(cli, "simulate_linear", boom)
    code, _, err = run(capsys, "simulate", DATA / "pair.json")
    assert code == 1 and "exceeded" in err


# -- outputs


def test_decompose_path_output(capsys):
    code, out, err = run(capsys, "decompose", DATA / "path3.dot")
    assert code == 0
    doc = json.loads(out)
    assert [s["class"] for s in doc["steps"]] == ["root", "cascade", "cascade"]
    assert "classes:" in err


def test_decompose_no_tree_diagnostic(capsys):
    code, out, err = run(capsys, "decompose", DATA / "isolated2.json")
    assert json.loads(out)["error"] == "no_spanning_tree"
    assert "no spanning tree" in err


def test_decompose_out_file(capsys, tmp_path):
    target = tmp_path / "d.json"
    code, out, _ = run(capsys, "decompose", DATA / "example_five.json", "--out", target)
    assert code == 0 and out == ""
    assert json.loads(target.read_text()) == json.loads((DATA / "example_five_decomposition.json").read_text())


def test_analyze_pair(capsys):
    code, out, _ = run(capsys, "analyze", DATA / "pair.json", "--x0", "0,2", "--seed", "7")
    doc = json.loads(out)
    assert code == 0 and doc["conclusion"] == "consensus" and doc["seed"] == 7
    assert doc["simulated_value"] == pytest.approx(1.0, abs=1e-5)


def test_analyze_example_five_sequence(capsys):
    code, out, _ = run(capsys, "analyze", DATA / "example_five.json")
    classes = [s["class"] for s in json.loads(out)["steps"]]
    assert code == 0 and classes[1:] == ["cascade", "cascade", "blended", "interconnected"]


def test_analyze_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for target in (a, b):
        assert run(capsys, "analyze", DATA / "example_five.json", "--seed", "11", "--out", target)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_seed_env_override(capsys, monkeypatch):
    monkeypatch.setenv(SEED_ENV, "5")
    _, out, _ = run(capsys, "analyze", DATA / "pair.json")
    assert json.loads(out)["seed"] == 5
    _, out, _ = run(capsys, "analyze", DATA / "pair.json", "--seed", "9")
    assert json.loads(out)["seed"] == 9
    monkeypatch.setenv(SEED_ENV, "x")
    assert run(capsys, "analyze", DATA / "pair.json")[0] == 1


def test_simulate_cascade_pair(capsys, path_json):
    code, out, _ = run(capsys, "simulate", path_json, "--x0", "1,0", "--horizon", "20")
    csv_text, verdict_line = out.rsplit("\n", 2)[0], out.strip().splitlines()[-1]
    traj = Trajectory.from_csv(csv_text)
    assert code == 0
    np.testing.assert_allclose(traj.final, [1.0, 1.0], atol=1e-8)
    assert json.loads(verdict_line)["achieved"] is True


def test_simulate_constant_csv(capsys, tmp_path):
    target = tmp_path / "t.csv"
    code, out, _ = run(capsys, "simulate", DATA / "example_five.json", "--x0", "0.25,0.25,0.25,0.25,0.25", "--horizon", "2", "--out", target)
    traj = Trajectory.from_csv(target.read_text())
    # constant up to integrator roundoff
    assert code == 0 and np.max(np.abs(traj.states - 0.25)) <= 1e-12
    assert json.loads(out)["final_spread"] <= 1e-12


def test_spectrum_pair(capsys):
    code, out, _ = run(capsys, "spectrum", DATA / "pair.json")
    eig = json.loads(out)["eigenvalues"]
    np.testing.assert_allclose(eig, [[2, 0], [0, 0]], atol=1e-12)


def test_check_isp_outputs(capsys, tmp_path):
    _, out, _ = run(capsys, "check-isp", "--candidate", "linear")
    assert json.loads(out)["passed"] is True
    _, out, _ = run(capsys, "check-isp", "--candidate", "tanh")
    doc = json.loads(out)
    assert doc["properties"]["4"]["passed"] is False and doc["properties"]["4"]["witness"]
    table = tmp_path / "lin.csv"
    grid = np.linspace(-1, 1, 9)
    table.write_text("v,r,phi\n" + "".join(f"{v},{r},{r - v}\n" for v in grid for r in grid))
    code, out, _ = run(capsys, "check-isp", "--table", table)
    assert code == 0 and json.loads(out)["candidate"] == "lin"


# -- self-description


def _subparsers():
    parser = build_parser()
    action = next(a for a in parser._actions if a.__class__.__name__ == "_SubParsersAction")
    return action.choices


@pytest.mark.parametrize("name", ["decompose", "analyze", "simulate", "spectrum", "check-isp"])
def test_help_documents_every_flag(capsys, name):
    sub = _subparsers()[name]
    code = main([name, "--help"])
    text = capsys.readouterr().out
    assert code == 0
    for action in sub._actions:
        for flag in action.option_strings:
            assert re.search(re.escape(flag) + r"\b", text), flag
        if action.option_strings and action.dest != "help":
            assert action.help, f"{name} {action.option_strings} lacks help text"


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "structcons", "spectrum", str(DATA / "pair.json")],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["zero_multiplicity"] == 1
