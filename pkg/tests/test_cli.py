import json

import pytest

from greenlab import cli

FAST = {
    "name": "fast",
    "seed": 3,
    "domain": {"kind": "halfspace", "n": 3},
    "kinds": "both",
    "checks": [
        {"name": "pointwise", "alpha": 1, "beta": 0},
        {"name": "cancellation", "mode": "tangent"},
        {"name": "kernel-bounds"},
        {"name": "appendix.caccioppoli", "solutions": ["coordinate"]},
        {"name": "appendix.embedding", "functions": ["sine"], "deltas": [0.2, 0.1, 0.05]},
    ],
}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_list_checks_table(capsys):
    assert cli.main(["list-checks"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == len(cli.CHECKS)
    row = next(line for line in lines if line.startswith("cancellation "))
    assert "tangential cancellation" in row


def test_list_checks_json(capsys):
    assert cli.main(["list-checks", "--json"]) == 0
    table = json.loads(capsys.readouterr().out)
    assert [r["name"] for r in table] == list(cli.CHECKS)
    assert cli.main(["list-checks", "--json"]) == 0
    assert json.loads(capsys.readouterr().out) == table


def test_run_writes_outputs(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", _write(tmp_path, FAST), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["schema_version"] == cli.SCHEMA_VERSION
    assert summary["all_pass"]
    for r in summary["results"]:
        assert {"check", "params", "pass"} <= set(r)
    assert (out / "pointwise_a1_b0_dirichlet.csv").exists()
    assert (out / "appendix.caccioppoli.csv").read_text().startswith("id,check,delta")


def test_identical_seeds_identical_bytes(tmp_path):
    cfg = _write(tmp_path, FAST)
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", cfg, "--out", str(a), "--workers", "1"]) == 0
    assert cli.main(["run", cfg, "--out", str(b), "--workers", "3"]) == 0
    files = sorted(p.name for p in a.glob("*.csv"))
    assert files == sorted(p.name for p in b.glob("*.csv"))
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_seed_flag_overrides_config(tmp_path):
    out = tmp_path / "o"
    cli.main(["run", _write(tmp_path, FAST), "--out", str(out), "--seed", "11"])
    assert json.loads((out / "summary.json").read_text())["seed"] == 11


def test_env_output_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("GREENLAB_OUT", str(tmp_path / "env"))
    cfg = dict(FAST, checks=[{"name": "kernel-bounds"}])
    assert cli.main(["run", _write(tmp_path, cfg)]) == 0
    assert (tmp_path / "env" / "summary.json").exists()


@pytest.mark.parametrize(
    "patch, needle",
    [
        ({"checks": [{"name": "foo"}]}, "foo"),
        ({"colour": "red"}, "colour"),
        ({"ladder": {"fractions": [0.02, 0.04]}}, "fractions"),
        ({"solver": {"mm": 3}}, "mm"),
        ({"kinds": ["robin"]}, "robin"),
        ({"domain": {"kind": "torus"}}, "torus"),
        ({"checks": [{"name": "pointwise", "gamma": 1}]}, "gamma"),
        ({"checks": [{"name": "appendix.cutoff", "deltas": [0.1, 0.2]}]}, "deltas"),
    ],
)
def test_config_errors_exit_one(tmp_path, capsys, patch, needle):
    cfg = dict(FAST, **patch)
    assert cli.main(["run", _write(tmp_path, cfg), "--out", str(tmp_path / "x")]) == 1
    assert needle in capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "missing.json")]) == 1
    (tmp_path / "bad.json").write_text("{not json")
    assert cli.main(["run", str(tmp_path / "bad.json")]) == 1


def test_failing_check_exit_two(tmp_path):
    # an impossible slope tolerance makes the ladder check fail
    cfg = dict(FAST, tolerances={"slope_tol": -1.0}, checks=[{"name": "pointwise", "alpha": 1, "beta": 0}])
    out = tmp_path / "f"
    assert cli.main(["run", _write(tmp_path, cfg), "--out", str(out)]) == 2
    assert not json.loads((out / "summary.json").read_text())["all_pass"]


def test_plan_expands_kinds():
    cfg = cli.ExperimentConfig.from_dict(FAST)
    tasks = cli.plan(cfg)
    assert [k for c, k in tasks if c["name"] == "pointwise"] == ["dirichlet", "neumann"]
    assert [k for c, k in tasks if c["name"] == "kernel-bounds"] == [None]


def test_csv_is_deterministic_text():
    rows = [{"a": 0.1, "b": 1}, {"a": 1 / 3, "c": "x"}]
    assert cli.to_csv(rows) == "a,b,c\n0.1,1,\n0.3333333333333333,,x\n"


def test_solver_residual_failure_marks_invalid(tmp_path):
    cfg = {
        "name": "strict",
        "domain": {"kind": "ball", "n": 3},
        "solver": {"m": 150, "residual_tol": 1e-30},
        "ladder": {"fractions": [0.16, 0.08, 0.04]},
        "checks": [{"name": "pointwise", "alpha": 0, "beta": 0}],
    }
    out = tmp_path / "s"
    assert cli.main(["run", _write(tmp_path, cfg), "--out", str(out)]) == 2
    rows = (out / "pointwise_a0_b0_dirichlet.csv").read_text().splitlines()
    assert all(line.endswith("False") for line in rows[1:])
