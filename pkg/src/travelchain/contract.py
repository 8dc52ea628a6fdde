"""The travel-document smart contract.

Pure, deterministic functions over a world-state snapshot: every state
access goes through the ChaincodeStub, which records the read set (with
versions) and buffers the write set for the enclosing transaction.
Timestamps come from the transaction envelope, never from a clock.

Reserved world-state key prefixes:
  PASSAPP_   pending passport (user) applications, keyed by userId
  PASSPORT_  issued passports, keyed by passportId
  VISAAPP_   visa applications, keyed by applicationId
  VISA_      issued visas, keyed by visaId
  CRED_      credential records, keyed by subjectId
  SEQ_       id sequence counters
"""

from __future__ import annotations

from datetime import timedelta

from . import errors as err
from .codec import canonical_encode, compute_digest, decode
from .errors import ContractError
from .clocks import to_date
from .ledger import ReadEntry, WorldState, WriteEntry

INVOKE = "INVOKE"
QUERY = "QUERY"

ROLE_CITIZEN = "CITIZEN"
ROLE_PASSPORT_AGENT = "PASSPORT_AGENT"
ROLE_VISA_AGENT = "VISA_AGENT"
ROLE_ADMIN = "ADMIN"

DEFAULT_VISA_TYPES = ("TOURIST", "BUSINESS", "STUDENT", "WORK")

PREFIX_PASSAPP = "PASSAPP_"
PREFIX_PASSPORT = "PASSPORT_"
PREFIX_VISAAPP = "VISAAPP_"
PREFIX_VISA = "VISA_"
PREFIX_CRED = "CRED_"
SEQ_PASSPORT = "SEQ_PASSPORT"
SEQ_VISAAPP = "SEQ_VISAAPP"
SEQ_VISA = "SEQ_VISA"


class ChaincodeStub:
    """Records reads (with versions) and buffers writes for one invocation."""

    def __init__(self, snapshot: WorldState, caller, timestamp: int,
                 mode: str = INVOKE, caller_is_channel_admin: bool = False):
        self.snapshot = snapshot
        self.caller = caller
        self.timestamp = timestamp
        self.mode = mode
        self.caller_is_channel_admin = caller_is_channel_admin
        self.reads: dict[str, object] = {}
        self.writes: dict[str, bytes | None] = {}

    def get_state(self, key: str) -> bytes | None:
        if key in self.writes:
            return self.writes[key]
        entry = self.snapshot.get(key)
        self.reads.setdefault(key, entry[1] if entry else None)
        return entry[0] if entry else None

    def put_state(self, key: str, value: bytes) -> None:
        if self.mode == QUERY:
            raise ContractError(err.QUERY_WROTE, f"query attempted to write {key}")
        self.writes[key] = value

    def delete_state(self, key: str) -> None:
        if self.mode == QUERY:
            raise ContractError(err.QUERY_WROTE, f"query attempted to delete {key}")
        self.writes[key] = None

    def scan(self, prefix: str) -> list[tuple[str, bytes]]:
        """All live entries under a key prefix, sorted by key; records reads."""
        keys = sorted(k for k in self.snapshot.entries if k.startswith(prefix))
        out = []
        for k in keys:
            if k in self.writes:
                if self.writes[k] is not None:
                    out.append((k, self.writes[k]))
                continue
            value, version = self.snapshot.entries[k]
            self.reads.setdefault(k, version)
            out.append((k, value))
        for k, v in self.writes.items():
            if k.startswith(prefix) and v is not None and k not in keys:
                out.append((k, v))
        out.sort()
        return out

    def read_set(self) -> tuple:
        return tuple(ReadEntry(k, self.reads[k]) for k in sorted(self.reads))

    def write_set(self) -> tuple:
        return tuple(WriteEntry(k, self.writes[k]) for k in self.writes)

    # record helpers
    def get_record(self, key: str) -> dict | None:
        raw = self.get_state(key)
        return None if raw is None else decode(raw)

    def put_record(self, key: str, record: dict) -> None:
        self.put_state(key, canonical_encode(record))


class TravelContract:
    """Passport and visa lifecycle over the shared channel."""

    name = "travel"
    version = "1"

    def __init__(self, visa_types=DEFAULT_VISA_TYPES):
        self.visa_types = tuple(visa_types)
        self.functions = {
            "authenticate": (self._authenticate, QUERY),
            "applyPassport": (self._apply_passport, INVOKE),
            "listPassportApplications": (self._list_passport_applications, QUERY),
            "reviewPassportApplication": (self._review_passport_application, INVOKE),
            "applyVisa": (self._apply_visa, INVOKE),
            "listVisaApplications": (self._list_visa_applications, QUERY),
            "verifyVisaApplication": (self._verify_visa_application, INVOKE),
            "reviewVisaApplication": (self._review_visa_application, INVOKE),
            "getCitizenDocuments": (self._get_citizen_documents, QUERY),
            "getPassport": (self._get_passport, QUERY),
            "registerAgent": (self._register_agent, INVOKE),
        }

    def dispatch(self, function: str, args, stub: ChaincodeStub, mode: str) -> bytes:
        if function not in self.functions:
            raise ContractError(err.UNKNOWN_FUNCTION, function)
        handler, natural_mode = self.functions[function]
        if mode == QUERY and natural_mode == INVOKE:
            # routed anyway; the stub raises QUERY_WROTE on the first write
            pass
        result = handler(stub, list(args))
        if mode == QUERY and stub.writes:
            raise ContractError(err.QUERY_WROTE, function)
        return canonical_encode(result)

    def query_mode_of(self, function: str) -> str:
        if function not in self.functions:
            raise ContractError(err.UNKNOWN_FUNCTION, function)
        return self.functions[function][1]

    # --- credentials ----------------------------------------------------

    def _credential(self, stub, subject_id: str) -> dict | None:
        return stub.get_record(PREFIX_CRED + subject_id)

    def _require_role(self, stub, subject_id: str, role: str, country: str | None = None) -> dict:
        cred = self._credential(stub, subject_id)
        if cred is None or cred["role"] != role:
            raise ContractError(err.FORBIDDEN, f"caller is not a {role}")
        if country is not None and cred.get("country") != country:
            raise ContractError(err.FORBIDDEN, "agent of the wrong country")
        return cred

    def _authenticate(self, stub, args):
        subject_id, password = args
        cred = self._credential(stub, subject_id)
        # same failure shape for unknown subject and wrong password
        salt = cred["salt"] if cred else bytes(16)
        expected = cred["passwordDigest"] if cred else bytes(32)
        actual = compute_digest(salt + password.encode("utf-8"))
        if cred is None or actual != expected:
            raise ContractError(err.DENIED, "bad credentials")
        out = {"subjectId": subject_id, "role": cred["role"]}
        if "country" in cred:
            out["country"] = cred["country"]
        return out

    def _store_credential(self, stub, subject_id: str, role: str,
                          salt: bytes, password_digest: bytes, *,
                          country: str | None = None,
                          aadhaar: int | None = None) -> None:
        if len(salt) != 16:
            raise ContractError(err.VALIDATION, "salt must be 16 bytes")
        if password_digest == compute_digest(salt):
            raise ContractError(err.VALIDATION, "empty password rejected")
        rec = {"subjectId": subject_id, "role": role, "salt": salt,
               "passwordDigest": password_digest}
        if country is not None:
            rec["country"] = country
        if aadhaar is not None:
            rec["aadhaarNumber"] = aadhaar
        stub.put_record(PREFIX_CRED + subject_id, rec)

    # --- passport flow --------------------------------------------------

    def _apply_passport(self, stub, args):
        (user_id, name, email, phone_s, address, aadhaar_s,
         salt_hex, password_digest_hex) = args
        if not user_id:
            raise ContractError(err.VALIDATION, "userId must be non-empty")
        if not name:
            raise ContractError(err.VALIDATION, "name must be non-empty")
        if not address:
            raise ContractError(err.VALIDATION, "address must be non-empty")
        parts = email.split("@")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ContractError(err.VALIDATION, "email must contain exactly one '@'")
        phone = _int_arg(phone_s, "phoneNumber")
        aadhaar = _int_arg(aadhaar_s, "aadhaarNumber")
        if not (10**11 <= aadhaar < 10**12):
            raise ContractError(err.VALIDATION, "aadhaar must have exactly 12 digits")
        if stub.get_state(PREFIX_PASSAPP + user_id) is not None:
            raise ContractError(err.DUPLICATE_APPLICATION, user_id)
        cred = self._credential(stub, user_id)
        if cred is not None and cred["role"] != ROLE_CITIZEN:
            raise ContractError(err.DUPLICATE_APPLICATION, "subject id in use")
        if self._passport_by_aadhaar(stub, aadhaar) is not None:
            raise ContractError(err.ALREADY_HAS_PASSPORT, str(aadhaar))
        stub.put_record(PREFIX_PASSAPP + user_id, {
            "userId": user_id,
            "name": name,
            "email": email,
            "phoneNumber": phone,
            "address": address,
            "aadhaarNumber": aadhaar,
            "status": "PENDING",
            "submittedAt": stub.timestamp,
        })
        self._store_credential(stub, user_id, ROLE_CITIZEN,
                               bytes.fromhex(salt_hex),
                               bytes.fromhex(password_digest_hex),
                               aadhaar=aadhaar)
        return {"applicationId": user_id}

    def _passport_by_aadhaar(self, stub, aadhaar: int) -> dict | None:
        for _, raw in stub.scan(PREFIX_PASSPORT):
            rec = decode(raw)
            if rec["aadhaarNumber"] == aadhaar:
                return rec
        return None

    def _list_passport_applications(self, stub, args):
        (caller,) = args
        self._require_role(stub, caller, ROLE_PASSPORT_AGENT)
        apps = [decode(raw) for _, raw in stub.scan(PREFIX_PASSAPP)]
        apps.sort(key=lambda a: (a["submittedAt"], a["userId"]))
        return {"applications": apps}

    def _review_passport_application(self, stub, args):
        caller, application_id, decision = args
        self._require_role(stub, caller, ROLE_PASSPORT_AGENT)
        if decision not in ("APPROVE", "REJECT"):
            raise ContractError(err.VALIDATION, f"bad decision {decision!r}")
        app = stub.get_record(PREFIX_PASSAPP + application_id)
        if app is None:
            raise ContractError(err.NOT_FOUND, application_id)
        if decision == "REJECT":
            stub.delete_state(PREFIX_PASSAPP + application_id)
            return {}
        if self._passport_by_aadhaar(stub, app["aadhaarNumber"]) is not None:
            raise ContractError(err.ALREADY_HAS_PASSPORT, str(app["aadhaarNumber"]))
        passport_id = "P" + self._next_seq(stub, SEQ_PASSPORT)
        stub.put_record(PREFIX_PASSPORT + passport_id, {
            "passportId": passport_id,
            "name": app["name"],
            "email": app["email"],
            "phoneNumber": app["phoneNumber"],
            "address": app["address"],
            "aadhaarNumber": app["aadhaarNumber"],
            "issueDate": to_date(stub.timestamp).isoformat(),
        })
        stub.delete_state(PREFIX_PASSAPP + application_id)
        return {"passportId": passport_id}

    # --- visa flow ------------------------------------------------------

    def _apply_visa(self, stub, args):
        caller, passport_id, country, visa_type, duration_s = args
        cred = self._require_role(stub, caller, ROLE_CITIZEN)
        passport_raw = stub.get_state(PREFIX_PASSPORT + passport_id)
        if passport_raw is None:
            raise ContractError(err.NO_PASSPORT, passport_id)
        passport = decode(passport_raw)
        if passport["aadhaarNumber"] != cred.get("aadhaarNumber"):
            raise ContractError(err.FORBIDDEN, "caller does not own this passport")
        if visa_type not in self.visa_types:
            raise ContractError(err.VALIDATION, f"visaType must be one of {self.visa_types}")
        duration = _int_arg(duration_s, "durationDays")
        if duration < 1:
            raise ContractError(err.VALIDATION, "durationDays must be >= 1")
        if not country:
            raise ContractError(err.VALIDATION, "country must be non-empty")
        for _, raw in stub.scan(PREFIX_VISAAPP):
            rec = decode(raw)
            if rec["passportId"] == passport_id and rec["country"] == country:
                raise ContractError(err.DUPLICATE_PENDING, country)
        application_id = "VA" + self._next_seq(stub, SEQ_VISAAPP)
        stub.put_record(PREFIX_VISAAPP + application_id, {
            "applicationId": application_id,
            "passportId": passport_id,
            "country": country,
            "visaType": visa_type,
            "durationDays": duration,
            "status": "PENDING",
            "submittedAt": stub.timestamp,
        })
        return {"applicationId": application_id}

    def _list_visa_applications(self, stub, args):
        (caller,) = args
        cred = self._require_role(stub, caller, ROLE_VISA_AGENT)
        apps = [decode(raw) for _, raw in stub.scan(PREFIX_VISAAPP)]
        apps = [a for a in apps if a["country"] == cred.get("country")]
        apps.sort(key=lambda a: (a["submittedAt"], a["applicationId"]))
        return {"applications": apps}

    def _verify_visa_application(self, stub, args):
        caller, application_id = args
        app = stub.get_record(PREFIX_VISAAPP + application_id)
        if app is None:
            raise ContractError(err.NOT_FOUND, application_id)
        self._require_role(stub, caller, ROLE_VISA_AGENT, country=app["country"])
        if app["status"] == "VERIFIED":
            return {"result": "VERIFIED"}
        # cross-organization check: read the passport office's records
        passport_raw = stub.get_state(PREFIX_PASSPORT + app["passportId"])
        if passport_raw is None:
            return {"result": "VERIFY_DENIED"}
        passport = decode(passport_raw)
        live = self._passport_by_aadhaar(stub, passport["aadhaarNumber"])
        if live is None or live["passportId"] != app["passportId"]:
            return {"result": "VERIFY_DENIED"}
        app["status"] = "VERIFIED"
        stub.put_record(PREFIX_VISAAPP + application_id, app)
        return {"result": "VERIFIED"}

    def _review_visa_application(self, stub, args):
        caller, application_id, decision = args
        app = stub.get_record(PREFIX_VISAAPP + application_id)
        if app is None:
            raise ContractError(err.NOT_FOUND, application_id)
        self._require_role(stub, caller, ROLE_VISA_AGENT, country=app["country"])
        if decision not in ("APPROVE", "REJECT"):
            raise ContractError(err.VALIDATION, f"bad decision {decision!r}")
        if decision == "REJECT":
            stub.delete_state(PREFIX_VISAAPP + application_id)
            return {}
        if app["status"] != "VERIFIED":
            raise ContractError(err.NOT_VERIFIED, application_id)
        passport_raw = stub.get_state(PREFIX_PASSPORT + app["passportId"])
        if passport_raw is None:
            raise ContractError(err.NOT_FOUND, "passport no longer exists")
        passport = decode(passport_raw)
        visa_id = "V" + self._next_seq(stub, SEQ_VISA)
        issue = to_date(stub.timestamp)
        expire = issue + timedelta(days=app["durationDays"])
        # field set mirrors the issued-visa schema exactly (no phoneNumber)
        stub.put_record(PREFIX_VISA + visa_id, {
            "visaId": visa_id,
            "country": app["country"],
            "visaType": app["visaType"],
            "passportId": app["passportId"],
            "name": passport["name"],
            "email": passport["email"],
            "address": passport["address"],
            "aadhaarNumber": passport["aadhaarNumber"],
            "visaIssueDate": issue.isoformat(),
            "visaExpireDate": expire.isoformat(),
        })
        stub.delete_state(PREFIX_VISAAPP + application_id)
        return {"visaId": visa_id}

    # --- queries --------------------------------------------------------

    def _get_citizen_documents(self, stub, args):
        caller, subject_id = args
        if caller != subject_id:
            raise ContractError(err.FORBIDDEN, "cannot query another citizen's documents")
        cred = self._require_role(stub, caller, ROLE_CITIZEN)
        aadhaar = cred.get("aadhaarNumber")
        passport = self._passport_by_aadhaar(stub, aadhaar)
        visas = []
        if passport is not None:
            for _, raw in stub.scan(PREFIX_VISA):
                rec = decode(raw)
                if rec["passportId"] == passport["passportId"]:
                    visas.append(rec)
        pending = []
        app = stub.get_record(PREFIX_PASSAPP + subject_id)
        if app is not None:
            pending.append({"kind": "PASSPORT", "id": app["userId"],
                            "status": app["status"]})
        if passport is not None:
            for _, raw in stub.scan(PREFIX_VISAAPP):
                rec = decode(raw)
                if rec["passportId"] == passport["passportId"]:
                    pending.append({"kind": "VISA", "id": rec["applicationId"],
                                    "status": rec["status"]})
        out: dict = {"visas": visas, "pending": pending}
        if passport is not None:
            out["passport"] = passport
        return out

    def _get_passport(self, stub, args):
        caller, passport_id = args
        cred = self._credential(stub, caller)
        if cred is None:
            raise ContractError(err.FORBIDDEN, "unknown caller")
        raw = stub.get_state(PREFIX_PASSPORT + passport_id)
        if raw is None:
            raise ContractError(err.NOT_FOUND, passport_id)
        passport = decode(raw)
        if cred["role"] == ROLE_CITIZEN and cred.get("aadhaarNumber") != passport["aadhaarNumber"]:
            raise ContractError(err.FORBIDDEN, "not the passport owner")
        return {"passport": passport}

    # --- administration -------------------------------------------------

    def _register_agent(self, stub, args):
        caller, subject_id, role, country, salt_hex, password_digest_hex = args
        if caller:
            self._require_role(stub, caller, ROLE_ADMIN)
        elif not stub.caller_is_channel_admin:
            raise ContractError(err.FORBIDDEN, "admins policy not satisfied")
        if role not in (ROLE_PASSPORT_AGENT, ROLE_VISA_AGENT, ROLE_ADMIN):
            raise ContractError(err.VALIDATION, f"bad role {role!r}")
        if role == ROLE_VISA_AGENT and not country:
            raise ContractError(err.VALIDATION, "visa agents need a country")
        if self._credential(stub, subject_id) is not None:
            raise ContractError(err.DUPLICATE_SUBJECT, subject_id)
        self._store_credential(
            stub, subject_id, role,
            bytes.fromhex(salt_hex), bytes.fromhex(password_digest_hex),
            country=country if role == ROLE_VISA_AGENT else None)
        return {"subjectId": subject_id}

    # --- helpers --------------------------------------------------------

    def _next_seq(self, stub, seq_key: str) -> str:
        rec = stub.get_record(seq_key) or {"n": 0}
        n = rec["n"] + 1
        stub.put_record(seq_key, {"n": n})
        return f"{n:04d}"


def _int_arg(text: str, what: str) -> int:
    try:
        return int(text)
    except (TypeError, ValueError):
        raise ContractError(err.VALIDATION, f"{what} must be an integer") from None
