from __future__ import annotations

import json
import subprocess
import sys

import pytest

from halfflat.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, "--json", *argv)
    return code, json.loads(out)


def test_halfflat_pass(capsys):
    code, rep = run_json(capsys, "halfflat", "heavenly2", "--mode", "sampled", "--seed", "7")
    assert code == 0
    assert rep["verdict"] and rep["details"]["W_minus_zero"] and rep["seed"] == 7
    assert set(rep) == {"check", "equation", "verdict", "details", "mode", "seed", "samples",
                        "failure_bound", "elapsed_ms", "version"}


def test_halfflat_refuted(capsys, tmp_path):
    p = tmp_path / "x1x2.eq"
    p.write_text("name = f_x1x2\ndim = 4\nF = u[1,3] + u[2,4] + x1*x2*(u[1,1]*u[2,2] - u[1,2]^2)\n"
                 "solved: u[1,3] = -u[2,4] - x1*x2*(u[1,1]*u[2,2] - u[1,2]^2)\n")
    code, rep = run_json(capsys, "halfflat", str(p))
    assert code == 2 and not rep["verdict"]


def test_lax_expected_fail_fixture(capsys):
    code, rep = run_json(capsys, "lax", "verify", "heavenly2_lax_sec13")
    assert code == 2
    assert rep["details"]["null_check"]["values"]["g(X,X)"] == "-1/4*u[1,1] + 1/4*u[2,2]"


def test_ma_span_param_override(capsys):
    assert run(capsys, "ma", "span", "genheavenly", "--param", "a=1", "--param", "b=1",
               "--param", "g=1")[0] == 2
    assert run(capsys, "ma", "span", "genheavenly")[0] == 0


def test_ma_relations_pivot_and_frame(capsys, tmp_path):
    assert run(capsys, "ma", "relations", "heavenly2", "--pivot", "u[2,2]")[0] == 0
    assert run(capsys, "ma", "relations", "ma_counterexample")[0] == 2
    f = tmp_path / "frame.txt"
    f.write_text("1 0 0 0\n0 1 0 0\n-1 0 1 0\n0 0 0 1\n")
    assert run(capsys, "ma", "relations", "heavenly2", "--frame", str(f))[0] == 0


def test_equiv_symmetry_reduce(capsys, tmp_path):
    assert run(capsys, "equiv", "verify", "eq34", "heavenly2_f_x3", "heavenly2")[0] == 0
    assert run(capsys, "equiv", "verify", "eq34", "heavenly2", "heavenly2_f_x3")[0] == 2
    assert run(capsys, "symmetry", "verify", "veronese3d", "Y0")[0] == 0
    assert run(capsys, "symmetry", "verify", "veronese4d", "veronese3d", "Y0")[0] == 1
    m = tmp_path / "B.txt"
    m.write_text("1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n2 0 1 0\n0 1 0 3\n")
    out = tmp_path / "red.eq"
    assert run(capsys, "reduce", "heavenly6d", "--matrix", str(m), "--out", str(out))[0] == 0
    assert run(capsys, "analyze", str(out))[0] == 0


def test_constraints(capsys, tmp_path):
    j = tmp_path / "jet.txt"
    j.write_text("u[1,4] = 1\nu[2,3] = 1\n")
    code, rep = run_json(capsys, "constraints", "derive", "--jet", str(j))
    assert code == 0 and rep["details"]["rank"] == 30
    code, rep = run_json(capsys, "constraints", "contains-ma")
    assert code == 0 and rep["details"]["complement"] == 5


def test_catalog_list(capsys):
    code, out, _ = run(capsys, "catalog", "list")
    assert code == 0 and "heavenly2_lax_sec13" in out and "eq12" in out


@pytest.mark.parametrize("argv", [
    ["halfflat", "no_such_equation"],
    ["halfflat", "veronese3d"],
    ["analyze", "heavenly2", "--param", "a"],
    ["ma", "span", "genheavenly", "--param", "zz=1"],
    ["ma", "relations", "heavenly2", "--pivot", "u[1,2]"],
    ["constraints", "derive", "--jet", "/nonexistent"],
    ["bogus"],
    ["halfflat"],
])
def test_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and err


def test_json_is_deterministic(capsys):
    reps = []
    for _ in range(2):
        _, rep = run_json(capsys, "halfflat", "heavenly1", "--seed", "3")
        rep.pop("elapsed_ms")
        reps.append(json.dumps(rep, sort_keys=True))
    assert reps[0] == reps[1]


def test_flags_after_subcommand_and_env_seed(capsys, monkeypatch):
    monkeypatch.setenv("HALFFLAT_SEED", "11")
    _, rep = run_json(capsys, "ma", "span", "genheavenly")
    assert rep["seed"] == 11
    code, out, _ = run(capsys, "ma", "span", "genheavenly", "--seed", "4", "--json")
    assert json.loads(out)["seed"] == 4


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "halfflat.cli", "--json", "analyze", "heavenly2"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["details"]["rank"] == 4
