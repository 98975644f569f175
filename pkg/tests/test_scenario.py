import json
from pathlib import Path

import numpy as np
import pytest

from opalg.cli import main
from opalg.scenario import (DEFAULT_TOLERANCES, Report, ScenarioParseError,
                            UnknownCheckError, available_checks, emit_report,
                            load_scenario, run_scenario, series_from_json,
                            series_to_json)
from opalg.series import FormalSeries

REPO = Path(__file__).resolve().parent.parent
SMOKE = str(REPO / "scenarios" / "smoke.json")
FULL = str(REPO / "scenarios" / "full_suite.json")


def write_scenario(tmp_path, body):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(body))
    return str(path)


class TestSerialization:
    def test_scalar_series_roundtrip(self):
        s = FormalSeries([1 + 2j, -0.5, 3j])
        back = series_from_json(series_to_json(s))
        assert back.isclose(s, tol=0)

    def test_matrix_series_roundtrip(self):
        rng = np.random.default_rng(0)
        s = FormalSeries([rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
                          for _ in range(3)])
        back = series_from_json(series_to_json(s))
        assert back.isclose(s, tol=0)


class TestLoading:
    def test_smoke_scenario_loads(self):
        scenario = load_scenario(SMOKE)
        assert scenario.name == "smoke"
        assert scenario.checks

    def test_unknown_check_rejected(self, tmp_path):
        path = write_scenario(tmp_path, {
            "name": "bad", "seed": 1,
            "checks": [{"check": "nope.never"}]})
        with pytest.raises(UnknownCheckError):
            load_scenario(path)

    def test_parse_error_carries_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"name": "x",\n  "seed": }')
        with pytest.raises(ScenarioParseError) as err:
            load_scenario(str(path))
        assert "line 2" in str(err.value)

    def test_missing_keys_rejected(self, tmp_path):
        path = write_scenario(tmp_path, {"name": "x"})
        with pytest.raises(ScenarioParseError):
            load_scenario(path)

    def test_env_tolerance_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("OPALG_TOL_PARSEVAL", "1e-5")
        path = write_scenario(tmp_path, {
            "name": "env", "seed": 1,
            "checks": [{"check": "galilei.clifford"}]})
        scenario = load_scenario(path)
        assert scenario.tolerances["parseval"] == 1e-5
        # a scenario value still wins over the environment
        path2 = write_scenario(tmp_path, {
            "name": "env2", "seed": 1, "tolerances": {"parseval": 1e-7},
            "checks": [{"check": "galilei.clifford"}]})
        assert load_scenario(path2).tolerances["parseval"] == 1e-7


class TestRunning:
    def test_smoke_all_pass(self):
        report = run_scenario(SMOKE)
        assert report.all_passed
        assert len(report.records) == len(load_scenario(SMOKE).checks)

    def test_failing_check_does_not_stop_the_run(self, tmp_path):
        path = write_scenario(tmp_path, {
            "name": "mixed", "seed": 5,
            "checks": [
                {"check": "series.is_positive",
                 "params": {"b": [[-1, 0]], "expect": "positive"}},
                {"check": "galilei.clifford"},
            ]})
        report = run_scenario(path)
        assert [r.status for r in report.records] == ["fail", "pass"]

    def test_check_error_is_captured(self, tmp_path):
        path = write_scenario(tmp_path, {
            "name": "erroring", "seed": 5,
            "checks": [
                {"check": "wigner.parseval", "params": {"kind": "bogus"}},
                {"check": "galilei.clifford"},
            ]})
        report = run_scenario(path)
        assert report.records[0].status == "error"
        assert "ValueError" in report.records[0].value
        assert report.records[1].status == "pass"

    def test_deterministic_csv_bytes(self):
        first = emit_report(run_scenario(SMOKE), "csv")
        second = emit_report(run_scenario(SMOKE), "csv")
        assert first == second

    def test_seed_override_changes_sampled_values(self):
        base = emit_report(run_scenario(SMOKE), "csv")
        other = emit_report(run_scenario(SMOKE, seed_override=99), "csv")
        assert base != other

    def test_jobs_preserve_order_and_results(self):
        serial = run_scenario(SMOKE)
        parallel = run_scenario(SMOKE, jobs=4)
        assert [r.name for r in serial.records] == [r.name for r in parallel.records]
        assert [r.value for r in serial.records] == [r.value for r in parallel.records]

    def test_dependent_check_acts_as_barrier(self, tmp_path):
        path = write_scenario(tmp_path, {
            "name": "barrier", "seed": 2,
            "checks": [
                {"check": "galilei.clifford", "independent": True},
                {"check": "series.is_positive", "params": {"b": [[1, 0]]},
                 "independent": False},
                {"check": "galilei.clifford", "independent": True},
            ]})
        report = run_scenario(path, jobs=3)
        assert [r.status for r in report.records] == ["pass"] * 3


class TestEmission:
    def test_csv_schema(self):
        report = Report(scenario="s", seed=1)
        assert emit_report(report, "csv") == "check,status,value,tolerance,ms\n"

    def test_csv_line_count(self, tmp_path):
        path = write_scenario(tmp_path, {
            "name": "two", "seed": 9,
            "checks": [{"check": "galilei.clifford"},
                       {"check": "series.is_positive", "params": {"b": [[1, 0]]}}]})
        text = emit_report(run_scenario(path), "csv")
        assert len(text.strip().splitlines()) == 3

    def test_text_format_summary(self):
        rendered = emit_report(run_scenario(SMOKE), "text")
        assert "summary:" in rendered
        assert "0 failed" in rendered

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError):
            emit_report(Report(scenario="s", seed=1), "yaml")


class TestCli:
    def test_run_smoke_exit_zero(self, capsys):
        assert main(["run", SMOKE, "--format", "csv"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("check,status,value,tolerance,ms")

    def test_exit_one_on_failure(self, tmp_path, capsys):
        path = write_scenario(tmp_path, {
            "name": "failing", "seed": 5,
            "checks": [{"check": "series.is_positive",
                        "params": {"b": [[-1, 0]], "expect": "positive"}}]})
        assert main(["run", path]) == 1

    def test_exit_two_on_unknown_check(self, tmp_path, capsys):
        path = write_scenario(tmp_path, {
            "name": "bad", "seed": 1, "checks": [{"check": "nope.never"}]})
        assert main(["run", path]) == 2

    def test_exit_two_on_parse_error(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{")
        assert main(["run", str(path)]) == 2

    def test_out_file_and_rerun_identical(self, tmp_path, capsys):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        assert main(["run", SMOKE, "--format", "csv", "--out", str(out1)]) == 0
        assert main(["run", SMOKE, "--format", "csv", "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_checks_listing(self, capsys):
        assert main(["checks"]) == 0
        out = capsys.readouterr().out
        assert "series.is_positive" in out
        assert "brst.deform_stability" in out

    def test_field_dump(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        path = write_scenario(tmp_path, {
            "name": "dump", "seed": 4,
            "checks": [{"check": "wigner.parseval",
                        "params": {"kind": "galilean", "points": 4,
                                   "dump_field": "field.csv"}}]})
        assert main(["run", path]) == 0
        lines = (tmp_path / "field.csv").read_text().strip().splitlines()
        assert lines[0] == "x1,x2,x3,re_psi,im_psi"
        assert len(lines) == 4 ** 3 + 1


class TestRegistry:
    def test_full_suite_checks_exist(self):
        names = set(available_checks())
        for spec in load_scenario(FULL).checks:
            assert spec.check in names

    def test_default_tolerances_present(self):
        assert "default" in DEFAULT_TOLERANCES
