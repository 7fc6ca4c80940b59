import json
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from confschwarz.harness import REGISTRY, ScenarioError, load_scenario, parse_scenario, run_checks
from confschwarz.harness.cli import OUTDIR_ENV, main
from confschwarz.harness.report import render

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def scenario(body: str, n: int = 3, extra: str = "") -> str:
    return f"[scenario]\nname = \"t\"\ndimension = {n}\n{extra}\n{body}"


def test_minimal_scenario_defaults():
    s = load_scenario(SCENARIOS / "minimal-2d.toml")
    assert (s.n, s.order, s.seed, s.signature) == (2, 6, 0, (2, 0))


def test_resonant_weight_rejected_at_load_time():
    with pytest.raises(ScenarioError) as exc:
        load_scenario(SCENARIOS / "resonant-weight.toml")
    assert exc.value.excluded == 0.5


def test_malformed_expression_names_field_and_offset():
    text = scenario('[metric]\ncomponents = [["1", "0", "0"], ["0", "1 +", "0"], ["0", "0", "1"]]')
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    assert exc.value.where == "metric.components[1][1]"
    assert "byte offset 3" in str(exc.value)


def test_unknown_check_rejected():
    with pytest.raises(ScenarioError):
        parse_scenario(scenario('[checks]\nnames = ["kernel.Z"]'))


def test_dimension_conflict_rejected():
    with pytest.raises(ScenarioError):
        parse_scenario(scenario('[checks]\nnames = ["kernel.B"]', n=2))


def test_bad_toml_rejected():
    with pytest.raises(ScenarioError):
        parse_scenario("[scenario\n")


def test_registry_covers_every_module():
    modules = {spec.module for spec in REGISTRY.values()}
    assert modules == {"geometry", "actions", "cocycles", "quantization", "flatmodel", "jets"}
    assert all(spec.invariant for spec in REGISTRY.values())


def test_identity_scenario_has_zero_residuals():
    r = run_checks(load_scenario(SCENARIOS / "identity.toml"))
    assert r.passed and all(rec.measured == 0 for rec in r.records)


@pytest.mark.parametrize("name", ["flat-kernel-3d.toml", "flat-kernel-4d.toml"])
def test_flat_kernel_scenarios_pass(name):
    r = run_checks(load_scenario(SCENARIOS / name))
    assert r.passed and r.records


def test_audit_override_makes_kernel_fail():
    r = run_checks(load_scenario(SCENARIOS / "audit-mutation.toml"))
    assert not r.passed and r.exit_code == 1
    assert any("audit override" in w for w in r.warnings)
    for fmt in ("json", "csv", "text"):
        assert "kernel.A" in render(r, fmt) and ("FAIL" in render(r, fmt) or fmt == "json")


def test_empty_check_list_is_a_valid_report():
    r = run_checks(parse_scenario(scenario("", n=2)))
    assert r.records == [] and r.exit_code == 0
    json.loads(render(r, "json"))


def test_order_budget_failure_reports_needed_order():
    s = parse_scenario(scenario('[checks]\nnames = ["cocycle.B"]', extra="order = 2"))
    rec = run_checks(s).records[0]
    assert not rec.passed and "K >= 3" in rec.error


@given(st.integers(0, 1000))
def test_json_report_is_deterministic(seed):
    text = scenario('[metric]\ncatalog = "random"\n[checks]\nnames = ["cocycle.A", "rescaling.A"]')
    a = render(run_checks(parse_scenario(text, {"seed": seed})), "json")
    b = render(run_checks(parse_scenario(text, {"seed": seed})), "json")
    assert a == b


def test_records_sorted_by_check_then_probe():
    s = parse_scenario(scenario('[probes]\ncount = 3\n[checks]\nnames = ["kernel.A", "cocycle.A"]'))
    keys = [(r.check, r.probe) for r in run_checks(s).records]
    assert keys == sorted(keys)


# -- CLI ------------------------------------------------------------------------------

def test_cli_exit_codes(capsys):
    assert main([str(SCENARIOS / "flat-kernel-3d.toml")]) == 0
    assert main([str(SCENARIOS / "audit-mutation.toml")]) == 1
    assert main([str(SCENARIOS / "resonant-weight.toml")]) == 2
    assert main(["does-not-exist.toml"]) == 2
    err = capsys.readouterr().err
    assert "excluded value 1/2" in err


def test_cli_writes_report_files(tmp_path):
    out = tmp_path / "r.csv"
    assert main([str(SCENARIOS / "identity.toml"), "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("check,probe") and len(lines) == 5


def test_cli_default_output_directory(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTDIR_ENV, str(tmp_path))
    assert main([str(SCENARIOS / "identity.toml"), "--format", "json"]) == 0
    data = json.loads((tmp_path / "identity.json").read_text())
    assert data["summary"]["passed"] and "wall_clock" not in data


def test_cli_seed_and_order_overrides(capsys):
    assert main([str(SCENARIOS / "minimal-2d.toml"), "--seed", "5", "--order", "4"]) == 0
    assert "K=4, seed=5" in capsys.readouterr().out


def test_cli_list_checks(capsys):
    assert main(["--list-checks"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in REGISTRY)
