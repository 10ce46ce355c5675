"""HTTP+JSON surface over the session service."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .service import ApiError, SessionService
from .store import SessionStore

_STATUS = {"NotFound": 404, "Denied": 409, "WrongStatus": 409, "Invalid": 422}


def create_app(data_dir: str) -> FastAPI:
    service = SessionService(SessionStore(data_dir))
    app = FastAPI(title="trialflow")

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=_STATUS.get(exc.code, 500),
            content={"code": exc.code, "reason": exc.reason},
        )

    @app.post("/sessions")
    async def create_session(config: dict):
        session_id = service.create_session(config)
        return {"session_id": session_id, **service.snapshot(session_id)}

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        return service.snapshot(session_id)

    @app.post("/sessions/{session_id}/directives")
    async def post_directive(session_id: str, directive: dict):
        return service.post_directive(session_id, directive)

    @app.get("/sessions/{session_id}/pending-priors")
    async def pending_priors(session_id: str):
        return service.pending_priors(session_id)

    @app.post("/sessions/{session_id}/priors")
    async def post_priors(session_id: str, assignments: list[dict]):
        return service.post_priors(session_id, assignments)

    @app.post("/sessions/{session_id}/infer")
    async def infer(session_id: str):
        return PlainTextResponse(
            service.run_inference(session_id), media_type="application/json"
        )

    @app.get("/sessions/{session_id}/export")
    async def export(session_id: str, kind: str):
        text = service.export(session_id, kind)
        media = "text/vnd.graphviz" if kind.endswith("dot") else "application/json"
        return PlainTextResponse(text, media_type=media)

    @app.get("/transitions")
    async def transitions():
        return service.transitions()

    return app
