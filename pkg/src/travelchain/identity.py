"""Identities: certificates, CAs, MSP verification, and signature policies.

The signature scheme is Ed25519 (deterministic signing), fixed
platform-wide. Certificates are flat root->leaf: each organization's
root CA key signs member certificates directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .codec import canonical_encode
from .errors import POLICY_SYNTAX, WRONG_MSP, PlatformError

ROLE_MEMBER = "member"
ROLE_ADMIN = "admin"
ROLES = (ROLE_MEMBER, ROLE_ADMIN)

DEFAULT_VALIDITY_MICROS = 365 * 24 * 3600 * 1_000_000


@dataclass(frozen=True)
class Certificate:
    subject_id: str
    msp_id: str
    role: str
    public_key: bytes
    issuer_msp_id: str
    issuer_signature: bytes
    not_after: int

    def body_bytes(self) -> bytes:
        return canonical_encode(
            {
                "subject_id": self.subject_id,
                "msp_id": self.msp_id,
                "role": self.role,
                "public_key": self.public_key,
                "issuer_msp_id": self.issuer_msp_id,
                "not_after": self.not_after,
            }
        )

    def to_record(self) -> dict:
        return {
            "subject_id": self.subject_id,
            "msp_id": self.msp_id,
            "role": self.role,
            "public_key": self.public_key,
            "issuer_msp_id": self.issuer_msp_id,
            "issuer_signature": self.issuer_signature,
            "not_after": self.not_after,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Certificate":
        return cls(
            subject_id=rec["subject_id"],
            msp_id=rec["msp_id"],
            role=rec["role"],
            public_key=rec["public_key"],
            issuer_msp_id=rec["issuer_msp_id"],
            issuer_signature=rec["issuer_signature"],
            not_after=rec["not_after"],
        )


@dataclass(frozen=True)
class MspConfig:
    msp_id: str
    root_ca_public_key: bytes
    admin_subject_ids: tuple = ()

    def to_record(self) -> dict:
        return {
            "msp_id": self.msp_id,
            "root_ca_public_key": self.root_ca_public_key,
            "admin_subject_ids": list(self.admin_subject_ids),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "MspConfig":
        return cls(rec["msp_id"], rec["root_ca_public_key"], tuple(rec["admin_subject_ids"]))


@dataclass
class SigningIdentity:
    certificate: Certificate
    private_key_bytes: bytes = field(repr=False)

    def sign(self, message: bytes) -> bytes:
        return sign_with_key(self.private_key_bytes, message)


def generate_private_key(rng) -> bytes:
    return rng.bytes(32)


def public_key_of(private_key_bytes: bytes) -> bytes:
    key = Ed25519PrivateKey.from_private_bytes(private_key_bytes)
    return key.public_key().public_bytes_raw()


def sign_with_key(private_key_bytes: bytes, message: bytes) -> bytes:
    return Ed25519PrivateKey.from_private_bytes(private_key_bytes).sign(message)


def raw_verify(public_key: bytes, message: bytes, signature: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False


def sign(identity: SigningIdentity, message: bytes) -> bytes:
    return identity.sign(message)


def verify_signature(cert: Certificate, message: bytes, signature: bytes) -> bool:
    return raw_verify(cert.public_key, message, signature)


class CertificateAuthority:
    """Holds an organization's root key and issues member certificates."""

    def __init__(self, msp_id: str, root_private_key: bytes):
        self.msp_id = msp_id
        self.root_private_key = root_private_key
        self.root_public_key = public_key_of(root_private_key)

    def msp_config(self, admin_subject_ids=()) -> MspConfig:
        return MspConfig(self.msp_id, self.root_public_key, tuple(admin_subject_ids))

    def issue(self, subject_id: str, msp_id: str, role: str, public_key: bytes,
              not_after: int) -> Certificate:
        if msp_id != self.msp_id:
            raise PlatformError(WRONG_MSP, f"CA of {self.msp_id} cannot issue for {msp_id}")
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r}")
        unsigned = Certificate(subject_id, msp_id, role, public_key,
                               self.msp_id, b"", not_after)
        signature = sign_with_key(self.root_private_key, unsigned.body_bytes())
        return Certificate(subject_id, msp_id, role, public_key,
                           self.msp_id, signature, not_after)

    def new_identity(self, subject_id: str, role: str, rng, not_after: int) -> SigningIdentity:
        private = generate_private_key(rng)
        cert = self.issue(subject_id, self.msp_id, role, public_key_of(private), not_after)
        return SigningIdentity(cert, private)


def verify_certificate(cert: Certificate, msp: MspConfig, now: int) -> bool:
    if cert.msp_id != msp.msp_id or cert.issuer_msp_id != msp.msp_id:
        return False
    if now > cert.not_after:
        return False
    return raw_verify(msp.root_ca_public_key, cert.body_bytes(), cert.issuer_signature)


# --- signature policies -------------------------------------------------

@dataclass(frozen=True)
class PolicyNode:
    kind: str  # "OR" | "AND" | "PRINCIPAL"
    children: tuple = ()
    msp_id: str = ""
    role: str = ""


def Or(*children) -> PolicyNode:
    return PolicyNode("OR", tuple(children))


def And(*children) -> PolicyNode:
    return PolicyNode("AND", tuple(children))


def Principal(msp_id: str, role: str) -> PolicyNode:
    return PolicyNode("PRINCIPAL", (), msp_id, role)


def parse_policy(text: str) -> PolicyNode:
    node, pos = _parse_policy(text, _skip_ws(text, 0))
    pos = _skip_ws(text, pos)
    if pos != len(text):
        raise PlatformError(POLICY_SYNTAX, f"trailing input at {pos}")
    return node


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def _syntax(pos: int, why: str):
    raise PlatformError(POLICY_SYNTAX, f"{why} at position {pos}")


def _parse_policy(text: str, pos: int):
    for fn in ("OR", "AND"):
        if text.startswith(fn, pos):
            after = _skip_ws(text, pos + len(fn))
            if after >= len(text) or text[after] != "(":
                _syntax(after, "expected '('")
            children = []
            pos = _skip_ws(text, after + 1)
            if pos < len(text) and text[pos] == ")":
                _syntax(pos, "empty argument list")
            while True:
                child, pos = _parse_operand(text, pos)
                children.append(child)
                pos = _skip_ws(text, pos)
                if pos >= len(text):
                    _syntax(pos, "unterminated policy")
                if text[pos] == ",":
                    pos = _skip_ws(text, pos + 1)
                    continue
                if text[pos] == ")":
                    return PolicyNode(fn, tuple(children)), pos + 1
                _syntax(pos, "expected ',' or ')'")
    _syntax(pos, "expected OR or AND")


def _parse_operand(text: str, pos: int):
    if text.startswith("OR", pos) or text.startswith("AND", pos):
        return _parse_policy(text, pos)
    if pos >= len(text) or text[pos] != "'":
        _syntax(pos, "expected quoted principal or nested policy")
    end = text.find("'", pos + 1)
    if end < 0:
        _syntax(pos, "unterminated principal")
    body = text[pos + 1 : end]
    if body.count(".") != 1:
        _syntax(pos, "principal must be MSPID.role")
    msp_id, role = body.split(".")
    if not msp_id:
        _syntax(pos, "empty msp id")
    if role not in ROLES:
        _syntax(pos, f"unknown role {role!r}")
    return Principal(msp_id, role), end + 1


def format_policy(policy: PolicyNode) -> str:
    if policy.kind == "PRINCIPAL":
        return f"'{policy.msp_id}.{policy.role}'"
    inner = ",".join(format_policy(c) for c in policy.children)
    return f"{policy.kind}({inner})"


def evaluate_policy(policy: PolicyNode, signers) -> bool:
    """signers: iterable of verified Certificates."""
    signers = list(signers)
    if policy.kind == "PRINCIPAL":
        for cert in signers:
            if cert.msp_id != policy.msp_id:
                continue
            # admins also satisfy member principals
            if policy.role == ROLE_MEMBER or cert.role == ROLE_ADMIN:
                return True
        return False
    if policy.kind == "OR":
        return any(evaluate_policy(c, signers) for c in policy.children)
    if policy.kind == "AND":
        return all(evaluate_policy(c, signers) for c in policy.children)
    raise ValueError(f"bad policy node {policy.kind}")
