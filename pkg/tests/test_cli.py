import json
import pathlib

from click.testing import CliRunner

from trialflow.cli import main


FIXTURE = pathlib.Path(__file__).resolve().parent.parent / "demos" / "withdrawal_trial.jsonl"


def run(args):
    return CliRunner().invoke(main, args)


class TestAnalyze:
    def test_fixture_script(self, tmp_path):
        out = tmp_path / "report.json"
        result = run(
            ["analyze", "--script", str(FIXTURE), "--out", str(out),
             "--data", str(tmp_path / "data")]
        )
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert report["converged"]
        assert report["expected_utility"]["recommended"] == "experimental"

    def test_parse_error_exits_1(self, tmp_path):
        script = tmp_path / "bad.jsonl"
        script.write_text("this is not json\n")
        result = run(["analyze", "--script", str(script), "--out",
                      str(tmp_path / "r.json"), "--data", str(tmp_path / "d")])
        assert result.exit_code == 1

    def test_denied_exits_2(self, tmp_path):
        lines = [ln for ln in FIXTURE.read_text().splitlines() if not ln.startswith("#")]
        lines.insert(-1, json.dumps({
            "kind": "AttachEvidence",
            "target_name": "assigned experimental",
            "payload": {"successes": 1, "trials": 2},
        }))
        script = tmp_path / "denied.jsonl"
        script.write_text("\n".join(lines) + "\n")
        result = run(["analyze", "--script", str(script), "--out",
                      str(tmp_path / "r.json"), "--data", str(tmp_path / "d")])
        assert result.exit_code == 2
        assert "denied at line" in result.output

    def test_seed_recorded_in_session_config(self, tmp_path):
        data = tmp_path / "data"
        out = tmp_path / "report.json"
        result = run(["analyze", "--script", str(FIXTURE), "--out", str(out),
                      "--seed", "7", "--data", str(data)])
        assert result.exit_code == 0
        (config_file,) = data.glob("*/config.json")
        assert json.loads(config_file.read_text())["seed"] == 7


class TestValidate:
    def test_ok(self):
        result = run(["validate", "--script", str(FIXTURE)])
        assert result.exit_code == 0
        assert result.output.strip() == "ok"

    def test_bad_script(self, tmp_path):
        script = tmp_path / "bad.jsonl"
        script.write_text('{"kind": "Finish"}\n')
        assert run(["validate", "--script", str(script)]).exit_code == 1


class TestExport:
    def test_round_trip_after_analyze(self, tmp_path):
        data = tmp_path / "data"
        out = tmp_path / "report.json"
        result = run(["analyze", "--script", str(FIXTURE), "--out", str(out),
                      "--data", str(data)])
        assert result.exit_code == 0
        session_id = result.output.split()[-1]
        exported = run(["export", "--session", session_id, "--kind", "report-json",
                        "--data", str(data)])
        assert exported.exit_code == 0
        assert exported.output == out.read_text()
        dot = run(["export", "--session", session_id, "--kind", "dot", "--data", str(data)])
        assert dot.output.startswith("digraph")

    def test_unknown_session_exits_1(self, tmp_path):
        result = run(["export", "--session", "nope", "--kind", "dot",
                      "--data", str(tmp_path)])
        assert result.exit_code == 1
