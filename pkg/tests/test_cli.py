import csv
import json
from pathlib import Path

import pytest

import privamp.cli as cli


def run_cli(args):
    return cli.main(args)


class TestCertifyCommand:
    def test_certify_quick_passes(self, tmp_path, capsys):
        rc = run_cli(["certify", "--profile", "micro-aka", "--quick",
                      "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "PASS strong_ext" in out
        assert (tmp_path / "registry_manifest.json").exists()
        cert = json.loads((tmp_path / "cert_strong_ext.json").read_text())
        assert cert["ok"] is True

    def test_claim_below_measurement_fails_with_witness(self, tmp_path, monkeypatch, capsys):
        from privamp.certify import load_baselines
        doctored = load_baselines()
        doctored["strong_ext"]["bound"] = "1/1000000"
        monkeypatch.setattr("privamp.certify.load_baselines", lambda: doctored)
        rc = run_cli(["certify", "--profile", "micro-aka", "--quick",
                      "--out", str(tmp_path)])
        assert rc == 1
        out = capsys.readouterr().out
        assert "FAIL strong_ext" in out and "witness" in out

    def test_unknown_profile_usage_error(self, tmp_path, capsys):
        rc = run_cli(["certify", "--profile", "nope", "--out", str(tmp_path)])
        assert rc == 2


class TestRunCommand:
    def test_honest_runs_agree(self, tmp_path, capsys):
        rc = run_cli(["run", "--profile", "micro-aka", "--runs", "5",
                      "--seed", "beef", "--out", str(tmp_path)])
        assert rc == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["agreements"] == 5 and summary["rejects"] == 0
        lines = (tmp_path / "transcripts.jsonl").read_text().splitlines()
        assert all(json.loads(ln)["schema"] == "privamp.transcript/1" for ln in lines)

    def test_same_seed_byte_identical(self, tmp_path):
        for sub in ("a", "b"):
            rc = run_cli(["run", "--profile", "micro-aka", "--runs", "3",
                          "--seed", "0102", "--out", str(tmp_path / sub)])
            assert rc == 0
        assert (tmp_path / "a" / "transcripts.jsonl").read_bytes() == \
            (tmp_path / "b" / "transcripts.jsonl").read_bytes()

    def test_attack_config_populates_report(self, tmp_path):
        rc = run_cli(["run", "--profile", "micro-aka", "--script", "aka-tag-replay",
                      "--exact", "--out", str(tmp_path)])
        assert rc == 0
        rec = json.loads((tmp_path / "attack_aka-tag-replay.json").read_text())
        assert rec["schema"] == "privamp.attack/1"
        assert rec["success"] == "1/4"

    def test_unknown_script(self, tmp_path, capsys):
        rc = run_cli(["run", "--profile", "micro-aka", "--script", "nope",
                      "--out", str(tmp_path)])
        assert rc == 2

    def test_config_file_defaults(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"profile": "micro-aka", "runs": 2, "seed": "77",
                                   "out": str(tmp_path / "out")}))
        rc = run_cli(["run", "--config", str(cfg)])
        assert rc == 0
        assert (tmp_path / "out" / "summary.json").exists()


class TestAttackSuite:
    def test_suite_matches_baselines(self, tmp_path):
        rc = run_cli(["attack-suite", "--profile", "micro-aka", "--exact",
                      "--out", str(tmp_path)])
        assert rc == 0
        table = json.loads((tmp_path / "suite.json").read_text())
        assert {r["script"] for r in table} >= {"aka-passive", "aka-tag-replay"}

    def test_empty_suite_ok(self, tmp_path):
        # a condenser-only profile has no protocol scripts
        rc = run_cli(["attack-suite", "--profile", "micro-cond", "--exact",
                      "--out", str(tmp_path)])
        assert rc == 0
        assert json.loads((tmp_path / "suite.json").read_text()) == []

    def test_baseline_drift_fails_naming_script(self, tmp_path, monkeypatch, capsys):
        from privamp.cli import load_baselines as real
        doctored = real()
        doctored["attacks"]["aka-tag-replay"]["success"] = "1/31"
        monkeypatch.setattr("privamp.cli.load_baselines", lambda: doctored)
        rc = run_cli(["attack-suite", "--profile", "micro-aka", "--exact",
                      "--out", str(tmp_path)])
        assert rc == 1
        err = capsys.readouterr().err
        assert "aka-tag-replay" in err
        rec = json.loads((tmp_path / "attack_aka-tag-replay.json").read_text())
        assert rec["baseline_drift"]["committed"] == "1/31"

    def test_strict_requires_baseline(self, tmp_path, monkeypatch, capsys):
        from privamp.cli import load_baselines as real
        doctored = real()
        doctored["attacks"].pop("aka-passive")
        monkeypatch.setattr("privamp.cli.load_baselines", lambda: doctored)
        rc = run_cli(["attack-suite", "--profile", "micro-aka", "--exact",
                      "--strict-baselines", "--out", str(tmp_path)])
        assert rc == 1
        assert "aka-passive" in capsys.readouterr().err


class TestOracleCommand:
    def test_min_entropy(self, capsys):
        rc = run_cli(["oracle", "min-entropy", "--dist", '{"00":"1/4","01":"1/4","10":"1/4","11":"1/4"}'])
        assert rc == 0
        assert capsys.readouterr().out.strip() == "2.0"

    def test_stat_distance(self, capsys):
        rc = run_cli(["oracle", "stat-distance", "--dist", '{"0":"1/2","1":"1/2"}',
                      "--other", '{"0":"1"}'])
        assert rc == 0
        assert capsys.readouterr().out.strip() == "1/2"

    def test_mac_advantage(self, capsys):
        rc = run_cli(["oracle", "mac-advantage", "--tag-bits", "2", "--chunks", "2"])
        assert rc == 0
        assert capsys.readouterr().out.strip() == "1/2"

    def test_nm_sweep(self, capsys):
        rc = run_cli(["oracle", "nm-sweep", "--source-bits", "2", "--seed-bits", "2",
                      "--out-bits", "1"])
        assert rc == 0
        rec = json.loads(capsys.readouterr().out)
        assert rec["worst_distance"] == "1/8"

    def test_bad_dist_usage_error(self, capsys):
        rc = run_cli(["oracle", "min-entropy", "--dist", '{"0":"1/2","11":"1/2"}'])
        assert rc == 2


class TestReportCommand:
    def test_renders_tables_and_figures(self, tmp_path):
        art = tmp_path / "artifacts"
        art.mkdir()
        rc = run_cli(["run", "--profile", "micro-aka", "--script", "aka-tag-replay",
                      "--exact", "--out", str(art)])
        assert rc == 0
        rc = run_cli(["certify", "--profile", "micro-aka", "--quick", "--out", str(art)])
        assert rc == 0
        out = tmp_path / "rendered"
        rc = run_cli(["report", "--in", str(art), "--out", str(out)])
        assert rc == 0
        assert (out / "attacks.csv").exists()
        assert (out / "attacks.png").exists()
        assert (out / "certification.csv").exists()
        assert (out / "certification.png").exists()
        with (out / "attacks.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert rows[0]["script"] == "aka-tag-replay"
        assert rows[0]["success"] == "1/4"

    def test_report_roundtrips_schema(self, tmp_path):
        # the reader consumes exactly what the writer emitted
        art = tmp_path / "a"
        art.mkdir()
        run_cli(["run", "--profile", "micro-aka", "--runs", "2", "--out", str(art)])
        out = tmp_path / "r"
        rc = run_cli(["report", "--in", str(art), "--out", str(out)])
        assert rc == 0
        with (out / "runs.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert rows[0]["agreements"] == "2"

    def test_empty_dir_usage_error(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        rc = run_cli(["report", "--in", str(empty), "--out", str(tmp_path / "o")])
        assert rc == 2
