"""Report schema, determinism, and the command-line surface."""

import json

import pytest
from click.testing import CliRunner

from hkt4.cli import main, parse_form_spec
from hkt4.report import (
    CheckResult,
    VerificationReport,
    convention_ledger_hash,
    emit_report,
)


def make_report():
    return VerificationReport(checks=[
        CheckResult("a.first", "pass", "exact-zero", "claim one", 1.0),
        CheckResult("b.second", "fail", 0.25, "claim two", 2.0),
        CheckResult("c.third", "pass", 1e-12, "plumbing", 3.0),
    ], seed=7)


def test_report_json_schema():
    rep = make_report()
    doc = json.loads(rep.to_json())
    assert doc["schema"] == "report-v1"
    assert doc["status"] == "fail"
    assert doc["seed"] == 7
    assert doc["convention_ledger_hash"] == convention_ledger_hash()
    # failing checks come first
    assert doc["checks"][0]["name"] == "b.second"
    names = {c["name"] for c in doc["checks"]}
    assert names == {"a.first", "b.second", "c.third"}
    for c in doc["checks"]:
        assert set(c) == {"name", "status", "defect", "paper_ref", "ms"}
    # exact-zero stays a string, floats stay numbers
    by_name = {c["name"]: c for c in doc["checks"]}
    assert by_name["a.first"]["defect"] == "exact-zero"
    assert isinstance(by_name["c.third"]["defect"], float)


def test_report_markdown():
    md = make_report().to_markdown()
    assert md.startswith("# verification report (FAIL)")
    assert "| b.second | fail |" in md
    assert "exact-zero" in md


def test_report_pass_status():
    rep = VerificationReport(checks=[
        CheckResult("x", "pass", "exact-zero"),
        CheckResult("y", "skipped", 0.0),
    ])
    assert rep.passed
    assert json.loads(rep.to_json())["status"] == "pass"


def test_emit_report_writes_file(tmp_path):
    path = tmp_path / "rep.json"
    doc = emit_report(make_report(), "json", path)
    assert path.read_text() == doc
    with pytest.raises(ValueError):
        emit_report(make_report(), "yaml")


def test_emit_report_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        emit_report(make_report(), "json", tmp_path / "no" / "dir" / "rep.json")


def test_parse_form_spec():
    terms = parse_form_spec("-2*pi*i*dx0^dx1 + dx2^dx3")
    assert set(terms) == {(0, 1), (2, 3)}
    assert abs(terms[(0, 1)] + 2j * 3.141592653589793) < 1e-12
    assert terms[(2, 3)] == 1.0
    # reversed indices flip the sign
    assert parse_form_spec("dx1^dx0")[(0, 1)] == -1.0
    with pytest.raises(ValueError):
        parse_form_spec("dx0^dx0")
    with pytest.raises(ValueError):
        parse_form_spec("2*pi")


class TestCli:
    def setup_method(self):
        self.runner = CliRunner()

    def test_verify_hopf_passes(self):
        result = self.runner.invoke(main, ["verify-hopf", "--q", "2"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["status"] == "pass"
        names = {c["name"] for c in doc["checks"]}
        assert "hopf.torsion-opposition" in names
        assert "frames.independence" in names

    def test_verify_hopf_rejects_q_one(self):
        result = self.runner.invoke(main, ["verify-hopf", "--q", "1"])
        assert result.exit_code == 2

    def test_verify_hopf_rational_q(self):
        result = self.runner.invoke(main, ["verify-hopf", "--q", "3/2"])
        assert result.exit_code == 0

    def test_unknown_flag_exits_2(self):
        result = self.runner.invoke(main, ["verify-flat", "--bogus"])
        assert result.exit_code == 2

    def test_verify_flat(self):
        result = self.runner.invoke(main, ["verify-flat"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        names = {c["name"] for c in doc["checks"]}
        assert "flat.hyperkahler-degenerate" in names

    def test_moduli_small(self):
        result = self.runner.invoke(
            main, ["moduli", "--grid", "3", "--rank", "2", "--tol", "1e-10"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        by_name = {c["name"]: c for c in doc["checks"]}
        assert by_name["moduli.kernel-dimension"]["status"] == "pass"
        assert by_name["moduli.hermitian-form-sign"]["status"] == "pass"

    def test_moduli_usage_errors(self):
        assert self.runner.invoke(main, ["moduli", "--grid", "2"]).exit_code == 2
        assert self.runner.invoke(main, ["moduli", "--rank", "1"]).exit_code == 2

    def test_moduli_with_flow(self):
        result = self.runner.invoke(
            main, ["moduli", "--grid", "3", "--rank", "2", "--flow", "1e-2"])
        assert result.exit_code == 0
        names = {c["name"] for c in json.loads(result.output)["checks"]}
        assert "moduli.flow-monotone" in names
        assert "moduli.flow-reduction" in names

    def test_unwritable_out_is_clean_failure(self, tmp_path):
        result = self.runner.invoke(
            main, ["verify-flat", "--out", str(tmp_path / "no" / "x.json")])
        assert result.exit_code == 1
        assert "cannot write report" in result.output

    def test_degree_command(self):
        result = self.runner.invoke(
            main, ["degree", "--f", "-2*pi*i*dx0^dx1",
                   "--omega", "dx0^dx1+dx2^dx3"])
        assert result.exit_code == 0
        assert abs(json.loads(result.output)["degree"] - 1.0) < 1e-12

    def test_degree_bad_spec(self):
        result = self.runner.invoke(
            main, ["degree", "--f", "wat", "--omega", "dx0^dx1"])
        assert result.exit_code == 2

    def test_report_markdown_format(self):
        result = self.runner.invoke(main, ["report", "--format", "markdown",
                                           "--grid", "3"])
        assert result.exit_code == 0
        assert result.output.startswith("# verification report (pass)")

    def test_out_file_and_env_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HKT4_OUT_DIR", str(tmp_path))
        result = self.runner.invoke(main, ["verify-flat", "--out", "r.json"])
        assert result.exit_code == 0
        assert (tmp_path / "r.json").exists()
        doc = json.loads((tmp_path / "r.json").read_text())
        assert doc["status"] == "pass"

    def test_out_explicit_dir_wins_over_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HKT4_OUT_DIR", str(tmp_path / "unused"))
        target = tmp_path / "direct.json"
        result = self.runner.invoke(main, ["verify-flat", "--out", str(target)])
        assert result.exit_code == 0
        assert target.exists()

    def test_config_file_flags_win(self, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("q = 3\nformat = markdown\n")
        result = self.runner.invoke(main, ["verify-hopf", "--config", str(cfg)])
        assert result.exit_code == 0
        assert result.output.startswith("# verification report")
        result = self.runner.invoke(
            main, ["verify-hopf", "--config", str(cfg), "--format", "json"])
        assert result.exit_code == 0
        json.loads(result.output)

    def test_reports_deterministic_modulo_timing(self):
        out = []
        for _ in range(2):
            result = self.runner.invoke(
                main, ["verify-hopf", "--q", "2", "--seed", "5"])
            doc = json.loads(result.output)
            for c in doc["checks"]:
                c.pop("ms")
            out.append(doc)
        assert out[0] == out[1]

    def test_different_seed_changes_axis_checks(self):
        docs = []
        for seed in ("1", "2"):
            result = self.runner.invoke(
                main, ["verify-hopf", "--q", "2", "--seed", seed])
            docs.append(json.loads(result.output))
        names = [sorted(c["name"] for c in d["checks"]
                        if c["name"].startswith("hopf.axis-metric"))
                 for d in docs]
        assert names[0] != names[1]
