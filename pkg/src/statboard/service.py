"""HTTP face of the system: auth, submission, reports, datasets, static UI.

Session model: POST /api/auth exchanges a raw access token for a session
id. Level-0 (respondent) tokens are single-use; authenticating consumes
the token and the session allows exactly one successful submission.
Level>=1 (viewer) tokens are read-only credentials and stay reusable, so
any number of sessions can be minted from them. Sessions expire after a
configurable TTL and are held in memory only.

All mutation funnels through the store's per-questionnaire writer lock;
nothing is persisted on any non-2xx response. The confirmation
notification is enqueued by the append's on-commit hook, after fsync and
in commit order, and its delivery can never change an HTTP status.

Access log format (logger "statboard.access"):
    <RFC3339 UTC> <method> <path> <status> <millis>ms
"""

from __future__ import annotations

import logging
import secrets
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import __version__
from .notify import CaptureTransport, GatewayTransport, Notifier
from .report import (
    BlockSpec,
    ReportEngine,
    ReportSpec,
    SourceData,
    compose_report,
    filter_by_role,
)
from .store import DatasetFormatError, Store, StoreError, parse_dataset_csv
from .survey import (
    REVOKED,
    UNUSED,
    ResponseValidationError,
    TokenError,
    utc_now_rfc3339,
    validate_response,
)

access_log = logging.getLogger("statboard.access")

TRANSPORTS = ("disabled", "capture", "gateway")


@dataclass
class ServiceConfig:
    store_root: Path
    host: str = "127.0.0.1"
    port: int = 8080
    static_path: Path | None = None
    transport: str = "capture"
    gateway_url: str | None = None
    session_ttl: float = 7200.0
    admin_min_level: int = 3

    def __post_init__(self):
        self.store_root = Path(self.store_root)
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port {self.port} out of range 1..65535")
        if self.transport not in TRANSPORTS:
            raise ValueError(f"transport must be one of {TRANSPORTS}")
        if self.transport == "gateway" and not self.gateway_url:
            raise ValueError("gateway transport requires gateway_url")


@dataclass
class Session:
    id: str
    questionnaire_id: str
    level: int
    single_use: bool
    token_fingerprint: str
    expires_at: float
    used: bool = False


class SessionManager:
    def __init__(self, ttl: float):
        self.ttl = ttl
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, questionnaire_id: str, level: int, single_use: bool,
               token_fingerprint: str) -> Session:
        session = Session(
            id=secrets.token_urlsafe(32),  # 256 bits
            questionnaire_id=questionnaire_id,
            level=level,
            single_use=single_use,
            token_fingerprint=token_fingerprint,
            expires_at=time.monotonic() + self.ttl,
        )
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                return None
            if time.monotonic() > session.expires_at:
                del self._sessions[session.id]
                return None
            return session

    def reserve_submission(self, session_id: str) -> bool:
        """Atomically claim the session's single submission slot."""
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None or session.used:
                return False
            session.used = True
            return True

    def release_submission(self, session_id: str):
        with self._lock:
            session = self._sessions.get(session_id)
            if session is not None:
                session.used = False


class AuthRequest(BaseModel):
    token: str


class SubmitRequest(BaseModel):
    answers: dict
    contact: str | None = None


def _error(status: int, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message, **extra})


def build_notifier(config: ServiceConfig) -> Notifier | None:
    if config.transport == "disabled":
        return None
    if config.transport == "gateway":
        return Notifier(GatewayTransport(config.gateway_url))
    return Notifier(CaptureTransport())


def create_app(config: ServiceConfig, *, store: Store | None = None,
               notifier: Notifier | None = None) -> FastAPI:
    store = store or Store(config.store_root)
    engine = ReportEngine(store)
    sessions = SessionManager(config.session_ttl)
    if notifier is None and config.transport != "disabled":
        notifier = build_notifier(config)

    app = FastAPI(title="statboard", version=__version__)
    app.state.store = store
    app.state.engine = engine
    app.state.sessions = sessions
    app.state.notifier = notifier
    app.state.config = config

    @app.middleware("http")
    async def log_access(request: Request, call_next):
        started = time.monotonic()
        response = await call_next(request)
        access_log.info(
            "%s %s %s %d %.0fms",
            utc_now_rfc3339(), request.method, request.url.path,
            response.status_code, (time.monotonic() - started) * 1000.0,
        )
        return response

    def session_of(request: Request) -> Session | None:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            return None
        return sessions.get(header[7:].strip())

    @app.get("/api/ping")
    def ping():
        return {"ok": True, "version": __version__}

    @app.post("/api/auth")
    def auth(body: AuthRequest):
        found = store.find_token(body.token)
        if found is None:
            return _error(401, "unknown token")
        qid, record = found
        if record.state == REVOKED:
            return _error(401, "token revoked")
        if record.level == 0:
            # respondent: single-use, consumed now; one winner under races
            if record.state != UNUSED:
                return _error(401, "token already redeemed")
            try:
                principal = store.redeem_token(body.token, qid)
            except TokenError as exc:
                return _error(401, str(exc))
            session = sessions.create(qid, principal.level, True, principal.token_fingerprint)
        else:
            # viewer: read-only credential, reusable
            session = sessions.create(qid, record.level, False, record.digest)
        return {
            "session": session.id,
            "level": session.level,
            "questionnaire_id": qid,
            "single_use": session.single_use,
        }

    @app.get("/api/questionnaires/{qid}")
    def get_questionnaire(qid: str, request: Request):
        session = session_of(request)
        if session is None:
            return _error(401, "missing or expired session")
        if session.questionnaire_id != qid:
            return _error(403, "session not valid for this questionnaire")
        try:
            q = store.load_questionnaire(qid)
        except StoreError:
            return _error(404, "unknown questionnaire")
        return q.as_dict()

    @app.post("/api/questionnaires/{qid}/responses", status_code=201)
    def submit_response(qid: str, body: SubmitRequest, request: Request):
        session = session_of(request)
        if session is None:
            return _error(401, "missing or expired session")
        if session.questionnaire_id != qid:
            return _error(403, "session not valid for this questionnaire")
        if not session.single_use:
            return _error(403, "viewer sessions cannot submit responses")
        if session.used:
            return _error(409, "already submitted under this session")
        try:
            q = store.load_questionnaire(qid)
        except StoreError:
            return _error(404, "unknown questionnaire")
        try:
            record = validate_response(
                q, body.answers, token_fingerprint=session.token_fingerprint
            )
        except ResponseValidationError as exc:
            return JSONResponse(
                status_code=400,
                content={"error": "validation failed",
                         "violations": [v.as_dict() for v in exc.violations]},
            )
        if not sessions.reserve_submission(session.id):
            return _error(409, "already submitted under this session")

        def on_commit(version: int):
            if notifier is not None:
                notifier.enqueue(body.contact or "", q.title, record.submitted_at)

        try:
            version = store.append_response(qid, record, on_commit=on_commit)
        except StoreError as exc:
            sessions.release_submission(session.id)
            return _error(500, f"storage failure: {exc}")
        return {"version": version}

    @app.get("/api/questionnaires/{qid}/report")
    def get_questionnaire_report(qid: str, request: Request):
        session = session_of(request)
        if session is None:
            return _error(401, "missing or expired session")
        try:
            q = store.load_questionnaire(qid)
        except StoreError:
            return _error(404, "unknown questionnaire")
        if session.questionnaire_id != qid and session.level < config.admin_min_level:
            return _error(403, "session not valid for this questionnaire")
        if session.level < q.min_level_to_view_report:
            return _error(403, "insufficient hierarchy level for this report")
        spec_ids = engine.specs_for_questionnaire(qid)
        if not spec_ids:
            return _error(404, "no report spec for this questionnaire")
        report = engine.get_report(sorted(spec_ids)[0])
        return filter_by_role(report, session.level).as_dict()

    @app.get("/api/reports/{spec_id}")
    def get_report(spec_id: str, request: Request):
        session = session_of(request)
        if session is None:
            return _error(401, "missing or expired session")
        try:
            spec = engine.load_spec(spec_id)
        except StoreError:
            return _error(404, "unknown report spec")
        if spec.source_type == "questionnaire":
            q = store.load_questionnaire(spec.source_id)
            if session.questionnaire_id != spec.source_id and session.level < config.admin_min_level:
                return _error(403, "session not valid for this report")
            if session.level < q.min_level_to_view_report:
                return _error(403, "insufficient hierarchy level for this report")
        report = engine.get_report(spec_id)
        return filter_by_role(report, session.level).as_dict()

    @app.post("/api/datasets", status_code=201)
    async def upload_dataset(request: Request,
                             name: str = Query(..., min_length=1),
                             overwrite: bool = Query(False)):
        session = session_of(request)
        if session is None:
            return _error(401, "missing or expired session")
        if session.level < config.admin_min_level:
            return _error(403, "dataset upload requires an admin-level session")
        text = (await request.body()).decode("utf-8", errors="replace")
        try:
            columns, rows = parse_dataset_csv(text)
            dsid = store.store_dataset(name, columns, rows, overwrite=overwrite)
        except (DatasetFormatError, StoreError) as exc:
            return _error(400, str(exc))
        return {"dataset_id": dsid}

    @app.get("/api/datasets/{dsid}/analysis")
    def analyze_dataset(dsid: str, request: Request,
                        kind: str = Query(...), mode: str = Query("correlation")):
        session = session_of(request)
        if session is None:
            return _error(401, "missing or expired session")
        try:
            dataset = store.load_dataset(dsid)
        except StoreError:
            return _error(404, "unknown dataset")
        if kind not in ("xbar_r", "pca"):
            return _error(400, f"unsupported analysis kind {kind!r}")
        params = {"mode": mode} if kind == "pca" else {}
        spec = ReportSpec(
            id="adhoc", source_type="dataset", source_id=dsid,
            blocks=(BlockSpec(kind=kind, params=params),),
        )
        report = compose_report(spec, SourceData(dataset=dataset))
        block = report.blocks[0]
        if block["status"] == "error":
            return _error(400, block["detail"])
        return dict(block)

    if config.static_path is not None:
        app.mount("/", StaticFiles(directory=str(config.static_path), html=True), name="ui")

    return app


def serve(config: ServiceConfig):
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
