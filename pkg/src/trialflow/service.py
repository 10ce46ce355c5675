"""Session lifecycle service: the API the UI and CLI both consume."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass

from . import errors
from .inference import ModeOptions, UtilitySpec, inference_report
from .session import Directive, Session, shapes_from_mean_ess
from .states import TABLE, Denial, DirectiveKind


@dataclass
class ApiError(Exception):
    code: str  # NotFound | Denied | WrongStatus | Invalid
    reason: str

    def __str__(self) -> str:
        return f"{self.code}: {self.reason}"


class SessionService:
    """Store-backed session operations with per-session write locks."""

    def __init__(self, store):
        self.store = store
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def _lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _session(self, session_id: str) -> Session:
        if not self.store.exists(session_id):
            raise ApiError("NotFound", f"no session {session_id}")
        return self.store.get(session_id)

    # ------------------------------------------------------------------

    def create_session(self, config: dict) -> str:
        for key in ("exp_count", "ctl_count"):
            value = config.get(key)
            if value is not None and (not isinstance(value, int) or value < 0):
                raise ApiError("Invalid", f"{key} must be a nonnegative integer")
        if not config.get("trial_name"):
            raise ApiError("Invalid", "trial_name is required")
        return self.store.create(config)

    def snapshot(self, session_id: str) -> dict:
        session = self._session(session_id)
        return {
            "status": session.status.value,
            "model": session.diagram.to_json_dict(),
            "pfd": session.pfd.to_json_dict(),
            "pending_priors": self.pending_priors(session_id),
        }

    def pending_priors(self, session_id: str) -> list[dict]:
        session = self._session(session_id)
        return [
            {
                "param": r.param,
                "name": r.constructed_name,
                "default": list(r.default),
            }
            for r in session.pending_priors
        ]

    def post_directive(self, session_id: str, payload: dict) -> dict:
        with self._lock(session_id):
            session = self._session(session_id)
            try:
                kind = DirectiveKind(payload["kind"])
            except (KeyError, ValueError) as exc:
                raise ApiError("Invalid", f"bad directive kind: {exc}") from exc
            if kind is DirectiveKind.FINISH:
                target = session.pfd.root
            elif "target_id" in payload:
                target = payload["target_id"]
            else:
                try:
                    target = session.pfd.cohort_by_name(payload.get("target_name", "")).id
                except errors.UnknownCohort as exc:
                    raise ApiError("NotFound", str(exc)) from exc
            try:
                result = session.apply_directive(
                    Directive(kind, target, payload.get("payload", {}))
                )
            except errors.WrongStatus as exc:
                raise ApiError("WrongStatus", str(exc)) from exc
            except errors.UnknownCohort as exc:
                raise ApiError("NotFound", str(exc)) from exc
            except (
                errors.InvalidCounts,
                errors.TrialsExceedCohort,
                errors.CountExceedsParent,
                errors.NotALeaf,
            ) as exc:
                raise ApiError("Invalid", str(exc)) from exc
            if isinstance(result, Denial):
                raise ApiError("Denied", result.reason)
            self.store.persist(session_id)
            return {
                "applied": True,
                "created": result.created,
                "prior_requests": [
                    {"param": r.param, "name": r.constructed_name, "default": list(r.default)}
                    for r in result.prior_requests
                ],
                "status": session.status.value,
            }

    def post_priors(self, session_id: str, assignments: list[dict]) -> dict:
        with self._lock(session_id):
            session = self._session(session_id)
            triples = []
            override = False
            for entry in assignments:
                if "param_name" in entry:
                    try:
                        param = session.diagram.node_by_name(entry["param_name"])
                    except KeyError as exc:
                        raise ApiError("NotFound", str(exc)) from exc
                else:
                    param = entry["param"]
                if "mean" in entry:
                    try:
                        a, b = shapes_from_mean_ess(entry["mean"], entry["ess"])
                    except errors.InvalidShapes as exc:
                        raise ApiError("Invalid", str(exc)) from exc
                else:
                    a, b = entry["a"], entry["b"]
                override = override or bool(entry.get("override"))
                triples.append((param, a, b))
            try:
                status = session.set_priors(triples, override=override)
            except (errors.NotPending, errors.InvalidShapes) as exc:
                raise ApiError("Invalid", str(exc)) from exc
            self.store.persist(session_id)
            return {"status": status.value}

    def run_inference(self, session_id: str) -> str:
        """Run inference and persist the report; returns canonical JSON."""
        with self._lock(session_id):
            session = self._session(session_id)
            if session.pending_priors:
                raise ApiError("WrongStatus", "priors still pending elicitation")
            try:
                report = inference_report(
                    session.diagram,
                    UtilitySpec.from_config(session.config.get("utility")),
                    ModeOptions(seed=int(session.config.get("seed", 0))),
                )
            except (errors.PendingPriors, errors.EmptyModel) as exc:
                raise ApiError("WrongStatus", str(exc)) from exc
            text = json.dumps(report, sort_keys=True, separators=(",", ":"))
            self.store.save_report(session_id, text)
            return text

    def export(self, session_id: str, kind: str) -> str:
        session = self._session(session_id)
        if kind == "model-json":
            return session.diagram.to_json()
        if kind == "pfd-json":
            return session.pfd.to_json()
        if kind == "dot":
            return session.diagram.to_dot()
        if kind == "pfd-dot":
            return session.pfd.to_dot()
        if kind == "report-json":
            report = self.store.load_report(session_id)
            if report is None:
                raise ApiError("NotFound", "no inference report for this session yet")
            return report
        raise ApiError("Invalid", f"unknown export kind {kind!r}")

    def transitions(self) -> dict:
        return TABLE.to_json_dict()


# ----------------------------------------------------------------------
# script execution (batch form of the modeling loop)


class ScriptError(Exception):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class ScriptDenied(Exception):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: denied: {reason}")


def parse_script(text: str) -> list[tuple[int, dict]]:
    """Parse a JSON-lines directive script; first line must create."""
    lines: list[tuple[int, dict]] = []
    for i, raw in enumerate(text.split("\n"), start=1):
        raw = raw.strip()
        if not raw or raw.startswith("#"):
            continue
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ScriptError(i, f"invalid JSON: {exc}") from exc
        if not isinstance(doc, dict) or "kind" not in doc:
            raise ScriptError(i, "each line must be an object with a 'kind'")
        known = {k.value for k in DirectiveKind} | {"Create", "SetPrior"}
        if doc["kind"] not in known:
            raise ScriptError(i, f"unknown kind {doc['kind']!r}")
        lines.append((i, doc))
    if not lines or lines[0][1]["kind"] != "Create":
        raise ScriptError(lines[0][0] if lines else 1, "script must start with a Create line")
    for line_no, doc in lines[1:]:
        if doc["kind"] == "Create":
            raise ScriptError(line_no, "only one Create line is allowed")
    return lines


def run_script(service: SessionService, text: str, infer: bool = True) -> tuple[str, str | None]:
    """Execute a script: create, directives, priors, then inference.

    Returns (session id, report JSON or None). Raises ScriptError on
    malformed input and ScriptDenied when a directive is refused.
    """
    lines = parse_script(text)
    create_line, rest = lines[0], lines[1:]
    config = {k: v for k, v in create_line[1].items() if k != "kind"}
    try:
        session_id = service.create_session(config)
    except ApiError as exc:
        raise ScriptError(create_line[0], exc.reason) from exc

    finished = False
    for line_no, doc in rest:
        try:
            if doc["kind"] == "SetPrior":
                service.post_priors(session_id, [doc])
            else:
                service.post_directive(session_id, doc)
                finished = finished or doc["kind"] == "Finish"
        except ApiError as exc:
            if exc.code == "Denied":
                raise ScriptDenied(line_no, exc.reason) from exc
            raise ScriptError(line_no, str(exc)) from exc

    report = None
    if infer:
        if not finished:
            service.post_directive(session_id, {"kind": "Finish"})
        report = service.run_inference(session_id)
    return session_id, report
