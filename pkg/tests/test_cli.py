import json

import pytest

from sandwich_lab.cli import ReportEnvelope, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, ReportEnvelope.loads(out)


def test_sandwich_example1(capsys):
    code, env = run_json(capsys, "sandwich", "--surface", "p2", "--p", "3", "--delta", "x dx + y dy")
    assert code == 0
    pts = env.payload["singular_points"]
    assert [pt["type"] for pt in pts] == ["1/3(1,1)"]
    assert env.payload["verdict"]["gfr"] is True


def test_sandwich_example3(capsys):
    code, env = run_json(capsys, "sandwich", "--surface", "p2", "--p", "2", "--delta", "x^2 dx + y^2 dy")
    types = sorted(pt["type"] for pt in env.payload["singular_points"])
    assert types == ["1/2(1,1)"] * 3 + ["D_4^0"]
    assert env.payload["verdict"]["gfr"] is False


def test_sandwich_dx_on_h1(capsys):
    code, env = run_json(capsys, "sandwich", "--surface", "hirzebruch:1", "--p", "2", "--delta", "dx")
    assert code == 0
    assert env.payload["verdict"]["canonical"]["label"] == "Diagonal(0)"


def test_envelope_roundtrip(capsys):
    _, env = run_json(capsys, "classify", "--surface", "hirzebruch:1", "--p", "3")
    again = ReportEnvelope.loads(env.dumps())
    assert again == env
    assert "seconds" not in json.dumps(env.payload)


def test_payload_is_deterministic(capsys):
    _, a = run_json(capsys, "classify", "--surface", "hirzebruch:2", "--p", "3")
    _, b = run_json(capsys, "classify", "--surface", "hirzebruch:2", "--p", "3", "--threads", "3")
    assert a.payload == b.payload


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("SANDWICH_LAB_THREADS", "2")
    code, out, _ = run(capsys, "classify", "--surface", "p2", "--p", "3")
    assert code == 0 and "fan-isomorphism classes: 2" in out
    monkeypatch.setenv("SANDWICH_LAB_THREADS", "many")
    assert run(capsys, "classify", "--surface", "p2", "--p", "3")[0] == 2


def test_reduce_command(capsys):
    code, out, _ = run(capsys, "reduce", "--surface", "hirzebruch:1", "--p", "3", "--coeffs", "0,1,0,1", "--F", "1,0")
    assert code == 0
    assert "canonical form: Diagonal(1)" in out and "replay: ok" in out


def test_reduce_reports_obstruction(capsys):
    code, out, _ = run(capsys, "reduce", "--surface", "hirzebruch:2", "--p", "2", "--coeffs", "1,0,0,0", "--F", "1,0,0")
    assert code == 1 and "NilpotentAtSingularPoint" in out


def test_verdict_command(capsys):
    code, out, _ = run(capsys, "verdict", "--p", "2", "--delta", "x*y^2 dx + (x^2 + y^3) dy")
    assert code == 0 and "NoGlobalSection" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["verdict", "--p", "4", "--delta", "dx"],
        ["verdict", "--surface", "torus", "--delta", "dx"],
        ["verdict", "--delta", "x dx + * dy"],
        ["reduce", "--surface", "p2", "--coeffs", "0,1,0,1"],
        ["reduce", "--surface", "hirzebruch:1", "--coeffs", "0,1"],
        ["classify", "--surface", "p2", "--p", "17"],
        ["verify-paper", "--only", "nonsense"],
        ["frobnicate"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_verify_paper_filter(capsys):
    code, out, _ = run(capsys, "verify-paper", "--only", "example3")
    assert code == 0
    assert "example3" in out and "example4" not in out


def test_verify_paper_negative_control(capsys, tmp_path):
    catalog = tmp_path / "catalog.json"
    catalog.write_text(json.dumps({"D_4^0": [2, "Z^2 + X^3*Y + X*Y^2"], "E_7^0": [2, "Z^2 + X^3 + X*Y^3"]}))
    code, out, _ = run(capsys, "verify-paper", "--only", "example3", "--catalog", str(catalog))
    assert code == 1
    assert "FAIL" in out and "expected" in out and "Unrecognized" in out


def test_verify_paper_seeded_random_replay(capsys):
    code, out, _ = run(capsys, "verify-paper", "--only", "random-replay", "--seed", "7")
    assert code == 0 and "random-replay[seed=7]" in out
