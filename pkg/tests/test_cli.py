import json

import numpy as np
import pytest

from pilms import cli
from pilms.pidecomp import pi_target_library


def run(*args):
    return cli.main([str(a) for a in args])


def load(path):
    with open(path) as fh:
        return json.load(fh)


@pytest.mark.parametrize("target, n, count", [("ghz", 5, 6), ("dicke:1", 4, 21), ("general", 4, 15), ("w", 10, 51)])
def test_plan_counts(tmp_path, capsys, target, n, count):
    out = tmp_path / "plan.json"
    assert run("plan", "--target", target, "--n", n, "--out", out) == 0
    doc = load(out)
    assert doc["schema_version"] == 1
    assert len(doc["settings"]) == count
    assert f"settings={count}" in capsys.readouterr().out


def test_plan_from_coords_file(tmp_path):
    coords = tmp_path / "coords.json"
    doc = pi_target_library("ghz", 3).to_dict()
    doc["schema_version"] = 1
    coords.write_text(json.dumps(doc))
    out = tmp_path / "plan.json"
    assert run("plan", "--target", coords, "--out", out, "--scheme", "integer") == 0
    plan = load(out)
    assert len(plan["settings"]) == 10
    assert plan["residual"] < 1e-8
    assert plan["meta"]["scheme"] == "integer-grid"


def test_plan_to_stdout(capsys):
    assert run("plan", "--target", "ghz", "--n", 3) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["n"] == 3
    assert "settings=4" in captured.err


@pytest.mark.parametrize(
    "args",
    [
        ("plan", "--target", "bogus", "--n", 3),
        ("plan", "--target", "ghz"),
        ("plan", "--target", "ghz", "--n", 0),
        ("plan", "--target", "ghz", "--n", 3, "--tol-residual", -1),
    ],
)
def test_plan_validation_exit_code(args, capsys):
    assert run(*args) == cli.EXIT_VALIDATION


def test_plan_numerical_exit_code(capsys):
    assert run("plan", "--target", "ghz", "--n", 4, "--tol-residual", 1e-30) == cli.EXIT_NUMERICAL


@pytest.fixture
def ghz3_plan(tmp_path):
    path = tmp_path / "ghz3.json"
    assert run("plan", "--target", "ghz", "--n", 3, "--out", path) == 0
    return path


def test_estimate_examples(tmp_path, ghz3_plan, capsys):
    out = tmp_path / "est.json"
    assert run("estimate", "--plan", ghz3_plan, "--out", out) == 0
    assert load(out)["value"] == pytest.approx(1.0, abs=1e-12)
    assert run("estimate", "--plan", ghz3_plan, "--noise", "global_depolarizing:0.2", "--out", out) == 0
    assert load(out)["value"] == pytest.approx(0.825, abs=1e-12)
    w4 = tmp_path / "w4.json"
    run("plan", "--target", "w", "--n", 4, "--out", w4)
    assert run("estimate", "--plan", w4, "--state-name", "mixed", "--out", out) == 0
    assert load(out)["value"] == pytest.approx(0.0625, abs=1e-12)


def test_estimate_state_files(tmp_path, ghz3_plan):
    rho = np.zeros((8, 8), dtype=complex)
    rho[0, 0] = 1.0
    npy = tmp_path / "rho.npy"
    np.save(npy, rho)
    out = tmp_path / "est.json"
    assert run("estimate", "--plan", ghz3_plan, "--state", npy, "--out", out) == 0
    assert load(out)["value"] == pytest.approx(0.5)
    js = tmp_path / "rho.json"
    js.write_text(json.dumps({"schema_version": 1, "real": rho.real.tolist(), "imag": rho.imag.tolist()}))
    assert run("estimate", "--plan", ghz3_plan, "--state", js, "--out", out) == 0
    assert load(out)["value"] == pytest.approx(0.5)


def test_estimate_sampled_deterministic(tmp_path, ghz3_plan):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["estimate", "--plan", ghz3_plan, "--mode", "sampled", "--shots", 2000, "--seed", 5,
            "--noise", "depolarizing:0.1"]
    assert run(*args, "--out", a) == 0
    assert run(*args, "--out", b) == 0
    assert a.read_text() == b.read_text()
    doc = load(a)
    assert doc["mode"] == "sampled" and doc["std_error"] > 0


@pytest.mark.parametrize(
    "extra",
    [
        ("--n", 4),
        ("--state-name", "dicke:9"),
        ("--noise", "depolarizing"),
        ("--noise", "depolarizing:2"),
        ("--state", "missing.npy"),
    ],
)
def test_estimate_validation(ghz3_plan, extra, capsys):
    assert run("estimate", "--plan", ghz3_plan, *extra) == cli.EXIT_VALIDATION


def test_estimate_schema_violation(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 3}))
    assert run("estimate", "--plan", bad) == cli.EXIT_VALIDATION
    bad.write_text("{not json")
    assert run("estimate", "--plan", bad) == cli.EXIT_VALIDATION


def test_audit(tmp_path, capsys):
    plan = tmp_path / "g7.json"
    run("plan", "--target", "ghz", "--n", 7, "--out", plan)
    cert = tmp_path / "cert.json"
    assert run("audit", "--plan", plan, "--out", cert) == 0
    doc = load(cert)
    assert doc["verdict"] == "pass" and doc["lower_bound"] == 4

    truncated = load(plan)
    truncated["settings"] = truncated["settings"][:3]
    truncated["coeffs"] = [c for c in truncated["coeffs"] if c["setting"] < 3]
    tplan = tmp_path / "trunc.json"
    tplan.write_text(json.dumps(truncated))
    assert run("audit", "--plan", tplan, "--out", cert) == cli.EXIT_NUMERICAL
    doc = load(cert)
    assert doc["verdict"] == "fail" and "residual" in doc["witness"]

    d92 = tmp_path / "d92.json"
    run("plan", "--target", "dicke:2", "--n", 9, "--out", d92)
    assert run("audit", "--plan", d92, "--out", cert) == 0
    assert load(cert)["lower_bound"] == 6


def test_audit_unknown_target(tmp_path, capsys):
    plan = tmp_path / "g.json"
    run("plan", "--target", "ghz", "--n", 4, "--out", plan)
    doc = load(plan)
    doc["target"] = "cluster"
    plan.write_text(json.dumps(doc))
    cert = tmp_path / "cert.json"
    assert run("audit", "--plan", plan, "--out", cert) == 0
    assert load(cert)["verdict"] == "no known bound"


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 4, "target": "w", "scheme": "integer"}))
    out = tmp_path / "p.json"
    assert run("plan", "--config", cfg, "--out", out) == 0
    assert load(out)["target"] == "w" and load(out)["n"] == 4
    assert run("plan", "--config", cfg, "--target", "ghz", "--out", out) == 0
    assert load(out)["target"] == "ghz" and load(out)["n"] == 4
    cfg.write_text(json.dumps({"n": 4, "colour": "red"}))
    assert run("plan", "--config", cfg) == cli.EXIT_VALIDATION


def test_rerun_is_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run("plan", "--target", "general", "--n", 5, "--out", a)
    run("plan", "--target", "general", "--n", 5, "--out", b)
    assert a.read_text() == b.read_text()


def test_atomic_write_leaves_no_temp_files(tmp_path):
    out = tmp_path / "sub" / "x.json"
    cli.write_json(out, {"schema_version": 1})
    assert [p.name for p in out.parent.iterdir()] == ["x.json"]


def test_selftest_clean(capsys):
    assert run("selftest") == 0
    out = capsys.readouterr().out
    assert "Theorem 1" in out and "FAIL" not in out


@pytest.mark.parametrize("fault, claim", [("norm-const", "Normalization"), ("ghz-angle", "GHZ plan")])
def test_selftest_fault_injection(fault, claim, capsys):
    assert run("selftest", "--inject-fault", fault) == cli.EXIT_NUMERICAL
    lines = capsys.readouterr().out.splitlines()
    failed = [line for line in lines if "  FAIL  " in line]
    assert len(failed) == 1 and failed[0].startswith(claim)


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit):
        run("plan", "--help")
    assert "default: tangent" in capsys.readouterr().out
