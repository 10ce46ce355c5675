import json
import pathlib

import pytest
from fastapi.testclient import TestClient

from trialflow.http_api import create_app
from trialflow.service import ScriptDenied, ScriptError, SessionService, parse_script, run_script
from trialflow.store import SessionStore


FIXTURE = pathlib.Path(__file__).resolve().parent.parent / "demos" / "withdrawal_trial.jsonl"


@pytest.fixture
def client(tmp_path):
    app = create_app(tmp_path)
    with TestClient(app) as c:
        yield c


def create(client, **overrides):
    config = {"trial_name": "trial", "exp_count": 50, "ctl_count": 50, **overrides}
    r = client.post("/sessions", json=config)
    assert r.status_code == 200, r.text
    return r.json()["session_id"]


def set_all_priors(client, sid, a=2.0, b=2.0):
    pending = client.get(f"/sessions/{sid}/pending-priors").json()
    body = [{"param": p["param"], "a": a, "b": b} for p in pending]
    r = client.post(f"/sessions/{sid}/priors", json=body)
    assert r.status_code == 200, r.text
    return r.json()


class TestSessions:
    def test_create_and_snapshot(self, client):
        sid = create(client)
        snap = client.get(f"/sessions/{sid}").json()
        assert snap["status"] == "awaiting_priors"
        assert len(snap["pending_priors"]) == 3
        assert len(snap["pfd"]["cohorts"]) == 3

    def test_create_rejects_bad_counts(self, client):
        r = client.post("/sessions", json={"trial_name": "t", "exp_count": -1, "ctl_count": 5})
        assert r.status_code == 422
        r = client.post("/sessions", json={"exp_count": 5, "ctl_count": 5})
        assert r.status_code == 422

    def test_unknown_session_is_404(self, client):
        assert client.get("/sessions/deadbeef").status_code == 404


class TestDirectives:
    def test_withdraw_then_priors(self, client):
        sid = create(client)
        set_all_priors(client, sid)
        r = client.post(
            f"/sessions/{sid}/directives",
            json={"kind": "Withdraw", "target_name": "assigned experimental",
                  "payload": {"yes_count": 10}},
        )
        body = r.json()
        assert r.status_code == 200 and body["applied"]
        assert body["status"] == "awaiting_priors"
        assert [p["name"] for p in body["prior_requests"]] == [
            "withdrawal rate in assigned experimental"
        ]
        r = client.post(
            f"/sessions/{sid}/priors",
            json=[{"param_name": "withdrawal rate in assigned experimental",
                   "mean": 0.2, "ess": 10}],
        )
        assert r.json()["status"] == "modeling"

    def test_denied_directive_is_409(self, client):
        sid = create(client)
        set_all_priors(client, sid)
        client.post(
            f"/sessions/{sid}/directives",
            json={"kind": "LoseToFollowup", "target_name": "assigned control", "payload": {}},
        )
        set_all_priors(client, sid)
        r = client.post(
            f"/sessions/{sid}/directives",
            json={"kind": "AttachEvidence",
                  "target_name": "patients lost to followup in assigned control",
                  "payload": {"successes": 1, "trials": 2}},
        )
        assert r.status_code == 409
        assert "lost to followup" in r.json()["reason"]

    def test_unknown_cohort_is_404(self, client):
        sid = create(client)
        set_all_priors(client, sid)
        r = client.post(
            f"/sessions/{sid}/directives",
            json={"kind": "Withdraw", "target_name": "no such cohort", "payload": {}},
        )
        assert r.status_code == 404

    def test_directive_while_awaiting_priors_is_409(self, client):
        sid = create(client)
        r = client.post(
            f"/sessions/{sid}/directives",
            json={"kind": "Withdraw", "target_name": "assigned experimental", "payload": {}},
        )
        assert r.status_code == 409

    def test_invalid_counts_are_422(self, client):
        sid = create(client)
        set_all_priors(client, sid)
        r = client.post(
            f"/sessions/{sid}/directives",
            json={"kind": "AttachEvidence", "target_name": "assigned control",
                  "payload": {"successes": 60, "trials": 70}},
        )
        assert r.status_code == 422


class TestInferenceEndpoint:
    def _run(self, client):
        sid = create(client, utility={"lifespan": 1.0})
        set_all_priors(client, sid)
        client.post(
            f"/sessions/{sid}/directives",
            json={"kind": "AttachEvidence", "target_name": "assigned experimental",
                  "payload": {"successes": 7, "trials": 10}},
        )
        client.post(
            f"/sessions/{sid}/directives",
            json={"kind": "AttachEvidence", "target_name": "assigned control",
                  "payload": {"successes": 2, "trials": 10}},
        )
        client.post(f"/sessions/{sid}/directives", json={"kind": "Finish"})
        return sid

    def test_infer_is_deterministic_and_exported(self, client):
        sid = self._run(client)
        t1 = client.post(f"/sessions/{sid}/infer").text
        t2 = client.post(f"/sessions/{sid}/infer").text
        assert t1 == t2
        report = json.loads(t1)
        assert report["converged"] and report["m"] == 3
        export = client.get(f"/sessions/{sid}/export", params={"kind": "report-json"}).text
        assert export == t1

    def test_infer_refused_with_pending_priors(self, client):
        sid = create(client)
        assert client.post(f"/sessions/{sid}/infer").status_code == 409

    def test_report_export_before_infer_is_404(self, client):
        sid = self._run(client)
        r = client.get(f"/sessions/{sid}/export", params={"kind": "report-json"})
        assert r.status_code == 404


class TestExports:
    def test_model_json_round_trip(self, client):
        from trialflow.diagram import InfluenceDiagram

        sid = create(client)
        set_all_priors(client, sid)
        text = client.get(f"/sessions/{sid}/export", params={"kind": "model-json"}).text
        d = InfluenceDiagram.from_json(text)
        assert d.to_json() == text

    def test_dot_kinds(self, client):
        sid = create(client)
        set_all_priors(client, sid)
        for kind in ("dot", "pfd-dot"):
            text = client.get(f"/sessions/{sid}/export", params={"kind": kind}).text
            assert text.startswith("digraph")

    def test_unknown_kind_is_422(self, client):
        sid = create(client)
        r = client.get(f"/sessions/{sid}/export", params={"kind": "nope"})
        assert r.status_code == 422


class TestTransitions:
    def test_table_covers_all_states(self, client):
        table = client.get("/transitions").json()
        assert set(table) == {
            "active", "withdrawn", "subdivided", "lost_to_followup", "evidenced",
        }
        for entries in table.values():
            assert set(entries) == {
                "Withdraw", "LoseToFollowup", "AttachEvidence",
                "ApplyMeasurementError", "Finish",
            }
        assert table["lost_to_followup"]["AttachEvidence"]["allowed"] is False


class TestReplay:
    def test_replay_from_log_matches_live_session(self, tmp_path):
        store = SessionStore(tmp_path)
        service = SessionService(store)
        sid, report = run_script(service, FIXTURE.read_text())
        before = {k: service.export(sid, k) for k in ("model-json", "pfd-json")}
        store.drop_caches(sid)
        after = {k: service.export(sid, k) for k in ("model-json", "pfd-json")}
        assert before == after
        store.drop_caches(sid)
        assert service.run_inference(sid) == report


class TestScripts:
    def test_parse_requires_create_first(self):
        with pytest.raises(ScriptError):
            parse_script('{"kind": "Finish"}')
        with pytest.raises(ScriptError):
            parse_script("")
        with pytest.raises(ScriptError):
            parse_script('{"kind": "Create", "trial_name": "t"}\nnot json')

    def test_comments_and_blanks_skipped(self):
        lines = parse_script('# hi\n\n{"kind": "Create", "trial_name": "t"}\n')
        assert len(lines) == 1

    def test_fixture_script_runs(self, tmp_path):
        service = SessionService(SessionStore(tmp_path))
        sid, report = run_script(service, FIXTURE.read_text())
        doc = json.loads(report)
        assert doc["converged"]
        assert doc["m"] == 4
        assert doc["expected_utility"]["recommended"] == "experimental"

    def test_denied_script_reports_line(self, tmp_path):
        service = SessionService(SessionStore(tmp_path))
        text = (
            '{"kind": "Create", "trial_name": "t", "exp_count": 10, "ctl_count": 10}\n'
            '{"kind": "SetPrior", "param_name": "population mortality rate for experimental therapy", "a": 2, "b": 2}\n'
            '{"kind": "SetPrior", "param_name": "population mortality rate for control therapy", "a": 2, "b": 2}\n'
            '{"kind": "SetPrior", "param_name": "baseline population mortality rate", "a": 2, "b": 2}\n'
            '{"kind": "LoseToFollowup", "target_name": "assigned control", "payload": {}}\n'
            '{"kind": "SetPrior", "param_name": "loss-to-followup rate in assigned control", "a": 2, "b": 2}\n'
            '{"kind": "SetPrior", "param_name": "study mortality rate for patients lost to followup in assigned control", "a": 2, "b": 2}\n'
            '{"kind": "AttachEvidence", "target_name": "patients lost to followup in assigned control", "payload": {"successes": 1, "trials": 2}}\n'
        )
        with pytest.raises(ScriptDenied) as exc_info:
            run_script(SessionService(SessionStore(tmp_path / "x")), text)
        assert exc_info.value.line_no == 8
