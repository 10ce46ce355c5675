"""Batch command line: script execution, validation, service, exports."""

from __future__ import annotations

import json
import os
import sys
import tempfile
from pathlib import Path

import click

from .service import ApiError, ScriptDenied, ScriptError, SessionService, run_script
from .store import SessionStore

_DATA_ENV = "TRIALFLOW_DATA"


def _store(data: str | None) -> SessionStore:
    root = data or os.environ.get(_DATA_ENV) or os.path.join(os.getcwd(), "trialflow-data")
    return SessionStore(root)


@click.group()
def main() -> None:
    """Bayesian modeling workbench for two-arm randomized trials."""


@main.command()
@click.option("--script", "script_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--data", default=None, type=click.Path())
def analyze(script_path: str, out_path: str, seed: int, data: str | None) -> None:
    """Run a directive script end to end and write the inference report."""
    service = SessionService(_store(data))
    text = Path(script_path).read_text()
    if seed:
        # Seed goes into the session config so replay reproduces it.
        text = _inject_seed(text, seed)
    try:
        session_id, report = run_script(service, text)
    except ScriptDenied as exc:
        click.echo(f"denied at line {exc.line_no}: {exc.reason}", err=True)
        sys.exit(2)
    except ScriptError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    Path(out_path).write_text(report)
    click.echo(f"session {session_id}")
    if not json.loads(report)["converged"]:
        click.echo("mode search did not converge", err=True)
        sys.exit(3)


def _inject_seed(text: str, seed: int) -> str:
    lines = text.split("\n")
    for i, line in enumerate(lines):
        if line.strip() and not line.strip().startswith("#"):
            doc = json.loads(line)
            doc["seed"] = seed
            lines[i] = json.dumps(doc, sort_keys=True, separators=(",", ":"))
            break
    return "\n".join(lines)


@main.command()
@click.option("--script", "script_path", required=True, type=click.Path(exists=True))
def validate(script_path: str) -> None:
    """Dry-run a script (no inference) against a throwaway store."""
    with tempfile.TemporaryDirectory() as tmp:
        service = SessionService(SessionStore(tmp))
        try:
            run_script(service, Path(script_path).read_text(), infer=False)
        except ScriptDenied as exc:
            click.echo(f"denied at line {exc.line_no}: {exc.reason}", err=True)
            sys.exit(2)
        except ScriptError as exc:
            click.echo(str(exc), err=True)
            sys.exit(1)
    click.echo("ok")


@main.command()
@click.option("--port", default=8711, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data", default=None, type=click.Path())
def serve(port: int, host: str, data: str | None) -> None:
    """Serve the HTTP+JSON session API."""
    import uvicorn

    from .http_api import create_app

    root = data or os.environ.get(_DATA_ENV) or os.path.join(os.getcwd(), "trialflow-data")
    uvicorn.run(create_app(root), host=host, port=port, log_level="warning")


@main.command()
@click.option("--session", "session_id", required=True)
@click.option(
    "--kind",
    required=True,
    type=click.Choice(["model-json", "pfd-json", "dot", "pfd-dot", "report-json"]),
)
@click.option("--data", default=None, type=click.Path())
def export(session_id: str, kind: str, data: str | None) -> None:
    """Print a session export to stdout."""
    service = SessionService(_store(data))
    try:
        click.echo(service.export(session_id, kind), nl=False)
    except ApiError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
