"""Event-sourced session persistence.

The append-only directive log is the source of truth; the snapshot is
only a cache. Deleting everything but ``config.json`` and
``log.jsonl`` loses nothing: a session is rebuilt by replay.
"""

from __future__ import annotations

import json
import os
import uuid
from pathlib import Path

from .session import Session


class SessionStore:
    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, Session] = {}
        self._persisted: dict[str, int] = {}  # log entries already on disk

    def _dir(self, session_id: str) -> Path:
        return self.root / session_id

    def exists(self, session_id: str) -> bool:
        return (self._dir(session_id) / "config.json").exists()

    def list_sessions(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir() if (p / "config.json").exists())

    # ------------------------------------------------------------------

    def create(self, config: dict) -> str:
        session_id = uuid.uuid4().hex
        sdir = self._dir(session_id)
        sdir.mkdir(parents=True)
        tmp = sdir / "config.json.tmp"
        tmp.write_text(json.dumps(config, sort_keys=True, separators=(",", ":")))
        tmp.rename(sdir / "config.json")
        (sdir / "log.jsonl").touch()
        self._cache[session_id] = Session.create(config)
        self._persisted[session_id] = 0
        return session_id

    def get(self, session_id: str) -> Session:
        if session_id in self._cache:
            return self._cache[session_id]
        sdir = self._dir(session_id)
        config = json.loads((sdir / "config.json").read_text())
        log = self.read_log(session_id)
        session = Session.replay(config, log)
        self._cache[session_id] = session
        self._persisted[session_id] = len(log)
        self._write_snapshot(session_id, session)
        return session

    def read_log(self, session_id: str) -> list[dict]:
        path = self._dir(session_id) / "log.jsonl"
        entries: list[dict] = []
        if not path.exists():
            return entries
        lines = path.read_text().split("\n")
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                entries.append(json.loads(line))
            except json.JSONDecodeError:
                # A torn final line from an interrupted append is dropped;
                # anything earlier is corruption worth surfacing.
                if i == len(lines) - 1 or (i == len(lines) - 2 and not lines[-1].strip()):
                    break
                raise
        return entries

    def persist(self, session_id: str) -> None:
        """Append any log entries not yet on disk, one fsynced write."""
        session = self._cache[session_id]
        done = self._persisted.get(session_id, 0)
        new = session.log[done:]
        if not new:
            return
        payload = "".join(
            json.dumps(entry, sort_keys=True, separators=(",", ":")) + "\n" for entry in new
        )
        path = self._dir(session_id) / "log.jsonl"
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        self._persisted[session_id] = len(session.log)
        self._write_snapshot(session_id, session)

    def _write_snapshot(self, session_id: str, session: Session) -> None:
        doc = {
            "status": session.status.value,
            "model": session.diagram.to_json_dict(),
            "pfd": session.pfd.to_json_dict(),
        }
        tmp = self._dir(session_id) / "snapshot.json.tmp"
        tmp.write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")))
        tmp.rename(self._dir(session_id) / "snapshot.json")

    # ------------------------------------------------------------------

    def save_report(self, session_id: str, report_json: str) -> None:
        tmp = self._dir(session_id) / "report.json.tmp"
        tmp.write_text(report_json)
        tmp.rename(self._dir(session_id) / "report.json")

    def load_report(self, session_id: str) -> str | None:
        path = self._dir(session_id) / "report.json"
        return path.read_text() if path.exists() else None

    def drop_caches(self, session_id: str) -> None:
        """Forget the in-memory session and delete the snapshot cache."""
        self._cache.pop(session_id, None)
        self._persisted.pop(session_id, None)
        snap = self._dir(session_id) / "snapshot.json"
        if snap.exists():
            snap.unlink()
