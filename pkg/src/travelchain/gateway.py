"""Web-facing gateway: sessions, role-gated invokes/queries, block explorer.

The HTTP layer (FastAPI) is a thin translation over GatewayService so the
CLI scenario driver and the tests can exercise identical logic without a
socket.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import errors as err
from .clocks import SystemRng, WallClock
from .codec import compute_digest, to_jsonable
from .contract import (
    ROLE_ADMIN,
    ROLE_CITIZEN,
    ROLE_PASSPORT_AGENT,
    ROLE_VISA_AGENT,
)
from .errors import ContractError, PlatformError
from .network import Network

DEFAULT_SESSION_TTL_MICROS = 30 * 60 * 1_000_000

# Which chaincode functions each session role may call. Anything outside
# this table is rejected before the ledger is touched.
ROLE_TABLE = {
    None: {"applyPassport"},
    ROLE_CITIZEN: {"getCitizenDocuments", "applyVisa", "getPassport"},
    ROLE_PASSPORT_AGENT: {"listPassportApplications", "reviewPassportApplication",
                          "getPassport"},
    ROLE_VISA_AGENT: {"listVisaApplications", "verifyVisaApplication",
                      "reviewVisaApplication", "getPassport"},
    ROLE_ADMIN: {"registerAgent", "exploreBlocks"},
}

ALL_FUNCTIONS = set().union(*ROLE_TABLE.values())


@dataclass
class Session:
    token: str
    subject_id: str
    role: str
    country: str | None
    expires_at: int


class GatewayService:
    def __init__(self, network: Network, clock=None, rng=None,
                 session_ttl_micros: int = DEFAULT_SESSION_TTL_MICROS):
        self.network = network
        self.clock = clock or network.clock
        self.rng = rng or SystemRng()
        self.session_ttl = session_ttl_micros
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        # the gateway acts on the channel as the orderer admin
        self.client_identity = network.orderer_identity

    # --- sessions -------------------------------------------------------

    def login(self, subject_id: str, password: str) -> Session:
        result = self._query("authenticate", [subject_id, password])
        token = self.rng.bytes(32).hex()
        session = Session(token, subject_id, result["role"],
                          result.get("country"), self.clock.now() + self.session_ttl)
        with self._lock:
            self._sessions[token] = session
        return session

    def session(self, token: str | None) -> Session | None:
        if token is None:
            return None
        with self._lock:
            session = self._sessions.get(token)
        if session is None or self.clock.now() > session.expires_at:
            raise PlatformError(err.SESSION_EXPIRED, "session missing or expired")
        return session

    def logout(self, token: str) -> None:
        with self._lock:
            self._sessions.pop(token, None)

    # --- authorization --------------------------------------------------

    def _authorize(self, session: Session | None, function: str) -> None:
        role = session.role if session else None
        if function not in ROLE_TABLE.get(role, set()):
            raise PlatformError(err.FORBIDDEN_FUNCTION,
                                f"role {role} may not call {function}")

    def _salted(self, password: str) -> tuple[str, str]:
        if not password:
            raise PlatformError(err.VALIDATION, "password must be non-empty")
        salt = self.rng.bytes(16)
        return salt.hex(), compute_digest(salt + password.encode("utf-8")).hex()

    def _invoke(self, function: str, args) -> dict:
        receipt = self.network.submit(self.client_identity, function, args)
        return receipt.to_dict()

    def _query(self, function: str, args) -> dict:
        return to_jsonable(self.network.query(self.client_identity, function, args))

    # --- citizen flows --------------------------------------------------

    def apply_passport(self, user_id: str, name: str, email: str,
                       phone_number, address: str, aadhaar_number,
                       password: str) -> dict:
        self._authorize(None, "applyPassport")
        salt_hex, digest_hex = self._salted(password)
        return self._invoke("applyPassport", [
            user_id, name, email, str(phone_number), address,
            str(aadhaar_number), salt_hex, digest_hex])

    def citizen_documents(self, session: Session) -> dict:
        self._authorize(session, "getCitizenDocuments")
        return self._query("getCitizenDocuments",
                           [session.subject_id, session.subject_id])

    def apply_visa(self, session: Session, passport_id: str, country: str,
                   visa_type: str, duration_days) -> dict:
        self._authorize(session, "applyVisa")
        return self._invoke("applyVisa", [
            session.subject_id, passport_id, country, visa_type,
            str(duration_days)])

    # --- agent flows ----------------------------------------------------

    def pending_passport_applications(self, session: Session) -> dict:
        self._authorize(session, "listPassportApplications")
        return self._query("listPassportApplications", [session.subject_id])

    def decide_passport_application(self, session: Session, application_id: str,
                                    decision: str) -> dict:
        self._authorize(session, "reviewPassportApplication")
        return self._invoke("reviewPassportApplication",
                            [session.subject_id, application_id, decision])

    def pending_visa_applications(self, session: Session) -> dict:
        self._authorize(session, "listVisaApplications")
        return self._query("listVisaApplications", [session.subject_id])

    def verify_visa_application(self, session: Session, application_id: str) -> dict:
        self._authorize(session, "verifyVisaApplication")
        return self._invoke("verifyVisaApplication",
                            [session.subject_id, application_id])

    def decide_visa_application(self, session: Session, application_id: str,
                                decision: str) -> dict:
        self._authorize(session, "reviewVisaApplication")
        return self._invoke("reviewVisaApplication",
                            [session.subject_id, application_id, decision])

    # --- administration -------------------------------------------------

    def register_agent(self, session: Session, subject_id: str, role: str,
                       country: str, password: str) -> dict:
        self._authorize(session, "registerAgent")
        salt_hex, digest_hex = self._salted(password)
        return self._invoke("registerAgent", [
            session.subject_id, subject_id, role, country, salt_hex, digest_hex])

    def explore_blocks(self, session: Session, start: int, stop: int) -> list[dict]:
        self._authorize(session, "exploreBlocks")
        return self.network.block_summaries(start, stop)


# --- HTTP layer ---------------------------------------------------------

_STATUS_BY_CODE = {
    err.DENIED: 401,
    err.SESSION_EXPIRED: 401,
    err.FORBIDDEN: 403,
    err.FORBIDDEN_FUNCTION: 403,
    err.NOT_FOUND: 404,
    err.OUT_OF_RANGE: 404,
    err.LEDGER_UNAVAILABLE: 503,
    err.BUSY: 503,
}


def create_app(service: GatewayService) -> FastAPI:
    app = FastAPI(title="travelchain gateway")

    def error_response(e: PlatformError):
        status = _STATUS_BY_CODE.get(e.code, 400)
        return JSONResponse(
            {"code": e.code, "message": e.message, "retryable": e.retryable},
            status_code=status)

    @app.exception_handler(PlatformError)
    async def handle_platform_error(request: Request, e: PlatformError):
        return error_response(e)

    def bearer(request: Request) -> Session | None:
        auth = request.headers.get("authorization", "")
        if not auth.lower().startswith("bearer "):
            return None
        return service.session(auth[7:].strip())

    def require_session(request: Request) -> Session:
        session = bearer(request)
        if session is None:
            raise PlatformError(err.SESSION_EXPIRED, "missing bearer token")
        return session

    @app.post("/api/login")
    async def login(request: Request):
        body = await request.json()
        session = service.login(body["subjectId"], body["password"])
        return {"token": session.token, "role": session.role,
                "country": session.country, "expiresAt": session.expires_at}

    @app.post("/api/citizen/passport-applications")
    async def apply_passport(request: Request):
        b = await request.json()
        return service.apply_passport(
            b["userId"], b["name"], b["email"], b["phoneNumber"],
            b["address"], b["aadhaarNumber"], b["password"])

    @app.get("/api/citizen/documents")
    async def citizen_documents(request: Request):
        return service.citizen_documents(require_session(request))

    @app.post("/api/citizen/visa-applications")
    async def apply_visa(request: Request):
        b = await request.json()
        return service.apply_visa(require_session(request), b["passportId"],
                                  b["country"], b["visaType"], b["durationDays"])

    @app.get("/api/agent/passport/pending")
    async def passport_pending(request: Request):
        return service.pending_passport_applications(require_session(request))

    @app.post("/api/agent/passport/{application_id}/decision")
    async def passport_decision(application_id: str, request: Request):
        b = await request.json()
        return service.decide_passport_application(
            require_session(request), application_id, b["decision"])

    @app.get("/api/agent/visa/pending")
    async def visa_pending(request: Request):
        return service.pending_visa_applications(require_session(request))

    @app.post("/api/agent/visa/{application_id}/verify")
    async def visa_verify(application_id: str, request: Request):
        return service.verify_visa_application(require_session(request),
                                               application_id)

    @app.post("/api/agent/visa/{application_id}/decision")
    async def visa_decision(application_id: str, request: Request):
        b = await request.json()
        return service.decide_visa_application(
            require_session(request), application_id, b["decision"])

    @app.post("/api/admin/agents")
    async def register_agent(request: Request):
        b = await request.json()
        return service.register_agent(
            require_session(request), b["subjectId"], b["role"],
            b.get("country", ""), b["password"])

    @app.get("/api/admin/blocks")
    async def blocks(request: Request):
        session = require_session(request)
        params = request.query_params
        start = int(params.get("from", 0))
        height = service.network.orderer.ledger.log.height
        stop = int(params.get("to", height - 1))
        return {"blocks": service.explore_blocks(session, start, stop),
                "height": height}

    return app
