import json
import subprocess
import sys

import pytest

from gradedvar.cli import main
from gradedvar.report import Report, parse_kv

from conftest import GOLDEN, MODELS

GOLDENS = sorted(p.name for p in GOLDEN.iterdir())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(autouse=True)
def in_models(monkeypatch):
    monkeypatch.chdir(MODELS)


def report_of(out):
    return dict(line.split(": ", 1) for line in out.splitlines())


@pytest.mark.parametrize("name", GOLDENS)
def test_golden(capsys, name):
    model, command, fmt = name.split(".")
    argv = [command, f"{model}.model"] + (["--format", "kv"] if fmt == "kv" else [])
    code, out, _ = run(capsys, *argv)
    assert out == (GOLDEN / name).read_text()
    assert code == (1 if model in ("broken", "scaling") else 0)


def test_maxwell_euler_lagrange(capsys):
    code, out, _ = run(capsys, "euler-lagrange", "maxwell.model")
    rep = report_of(out)
    assert code == 0
    assert rep["E[A_t]"] == "-d(A_t,x,x) + d(A_x,t,x)"
    assert rep["E[A_x]"] == "d(A_t,t,x) - d(A_x,t,t)"


def test_check_noether_outcomes(capsys):
    code, out, _ = run(capsys, "check-noether", "maxwell.model")
    assert code == 0 and report_of(out)["result"] == "holds"
    code, out, _ = run(capsys, "check-noether", "broken.model")
    rep = report_of(out)
    assert code == 1 and rep["result"] == "fails"
    assert rep["witness"] == "-2*d(A_t,t,x,x) + 2*d(A_x,t,t,x)"


@pytest.mark.parametrize(
    "argv, key, value",
    [
        (["lepage", "maxwell.model"], "identity.holds", "true"),
        (["build-kt", "twoform.model"], "nilpotent", "true"),
        (["build-kt", "twoform_h.model"], "certificate.holds", "true"),
        (["gauge-symmetry", "twoform_h.model"], "stage[1].gauge_condition", "true"),
        (["check-symmetry", "translation.model"], "current", "d(u,x)"),
        (["homotopy", "exact_density.model"], "xi", "-u*d(u,x)*dx(t) - b*c*dx(x)"),
        (["homotopy", "exact_density.model", "--operator", "olver"], "d_H(xi) == form", "true"),
        (["check-noether", "twoform.model"], "identity[chi].status", "holds"),
    ],
)
def test_commands_ok(capsys, argv, key, value):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert report_of(out)[key] == value


@pytest.mark.parametrize(
    "argv",
    [
        ["check-symmetry", "scaling.model"],
        ["homotopy", "not_closed.model"],
        ["check-noether", "broken.model"],
    ],
)
def test_failures_carry_witness(capsys, argv):
    code, out, _ = run(capsys, *argv)
    rep = report_of(out)
    assert code == 1
    assert rep["result"] == "fails"
    assert rep["witness"] not in ("", "0")


def test_input_errors(capsys, tmp_path):
    code, out, err = run(capsys, "euler-lagrange", "missing.model")
    assert code == 2 and not out and "no such file" in err
    bad = tmp_path / "bad.model"
    bad.write_text("base x\nfield u even\nlagrangian: u * * u\n")
    code, out, err = run(capsys, "euler-lagrange", str(bad))
    assert code == 2 and ":3:" in err
    code, _, err = run(capsys, "check-noether", "translation.model")
    assert code == 2 and "no identities" in err
    code, out, _ = run(capsys, "build-kt", "broken.model")
    assert code == 1 and report_of(out)["reason"] == "tower is not verified"
    code, _, err = run(capsys, "euler-lagrange", "maxwell.model", "--max-jet-order", "0")
    assert code == 2 and "max-jet-order" in err


def test_report_file_and_kv(capsys, tmp_path):
    path = tmp_path / "r.kv"
    code, out, _ = run(capsys, "gauge-symmetry", "maxwell.model", "--format", "kv", "--report", str(path))
    assert code == 0
    pairs = dict(parse_kv(path.read_text()))
    assert pairs["u[A_t]"] == "-d(xi,t)"
    assert pairs["symmetry.holds"] == "true"


def test_kv_roundtrips_awkward_values():
    rep = Report("x")
    rep.add("quote", 'a "b" = c')
    rep.add("flag", False)
    assert dict(parse_kv(rep.render("kv"))) == {"command": "x", "quote": 'a "b" = c', "flag": "false"}
    with pytest.raises(ValueError):
        rep.add("bad", "two\nlines")


def test_repeated_runs_are_byte_identical(tmp_path):
    outs = []
    for _ in range(2):
        proc = subprocess.run(
            [sys.executable, "-m", "gradedvar", "build-kt", "twoform_h.model"],
            capture_output=True, cwd=MODELS,
        )
        assert proc.returncode == 0
        outs.append(proc.stdout)
    assert outs[0] == outs[1]


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest", "--count", "5", "--seed", "7")
    rep = report_of(out)
    assert code == 0
    assert rep["check[roundtrip]"] == "5/5"
    code, out, _ = run(capsys, "selftest", "--count", "2", "--check", "eta-involution")
    assert report_of(out)["check[eta-involution]"] == "2/2"
