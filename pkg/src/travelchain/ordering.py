"""The ordering service: the channel admin that sequences transactions.

Admission (``broadcast``) checks endorsement signatures and the Writers
policy; block cutting is driven purely by queue length and an injected
clock, so there is no puzzle search of any kind.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import identity as ident
from .codec import ZERO_DIGEST, canonical_encode, compute_digest, decode
from .errors import (
    BAD_SIGNATURE,
    BUSY,
    NOT_ADMIN,
    OUT_OF_RANGE,
    POLICY_DENIED,
    WRONG_CHANNEL,
    PlatformError,
)
from .ledger import Endorsement, Ledger, TransactionEnvelope, WriteEntry, build_block

CONFIG_KEY = "CONFIG"
DEFAULT_BATCH_MAX_COUNT = 10
DEFAULT_BATCH_TIMEOUT_MICROS = 2_000_000
MAX_PENDING = 10_000


@dataclass(frozen=True)
class ChannelConfig:
    channel_id: str
    msps: tuple  # MspConfig
    readers_policy: ident.PolicyNode
    writers_policy: ident.PolicyNode
    admins_policy: ident.PolicyNode
    batch_max_count: int
    batch_timeout_micros: int
    orderer_certificate: ident.Certificate
    visa_types: tuple = ("TOURIST", "BUSINESS", "STUDENT", "WORK")
    hash_function: str = "sha256"
    signature_scheme: str = "ed25519"

    def __post_init__(self):
        if self.batch_max_count < 1:
            raise ValueError("batch_max_count must be >= 1")
        if self.batch_timeout_micros <= 0:
            raise ValueError("batch_timeout must be positive")
        known = {m.msp_id for m in self.msps}
        for policy in (self.readers_policy, self.writers_policy, self.admins_policy):
            for msp_id in _policy_msp_ids(policy):
                if msp_id not in known:
                    raise ValueError(f"policy references unknown msp {msp_id}")

    def msp_by_id(self, msp_id: str):
        for m in self.msps:
            if m.msp_id == msp_id:
                return m
        return None

    def to_record(self) -> dict:
        return {
            "channel_id": self.channel_id,
            "msps": [m.to_record() for m in self.msps],
            "readers_policy": ident.format_policy(self.readers_policy),
            "writers_policy": ident.format_policy(self.writers_policy),
            "admins_policy": ident.format_policy(self.admins_policy),
            "batch_max_count": self.batch_max_count,
            "batch_timeout_micros": self.batch_timeout_micros,
            "orderer_certificate": self.orderer_certificate.to_record(),
            "visa_types": list(self.visa_types),
            "hash_function": self.hash_function,
            "signature_scheme": self.signature_scheme,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ChannelConfig":
        return cls(
            channel_id=rec["channel_id"],
            msps=tuple(ident.MspConfig.from_record(m) for m in rec["msps"]),
            readers_policy=ident.parse_policy(rec["readers_policy"]),
            writers_policy=ident.parse_policy(rec["writers_policy"]),
            admins_policy=ident.parse_policy(rec["admins_policy"]),
            batch_max_count=rec["batch_max_count"],
            batch_timeout_micros=rec["batch_timeout_micros"],
            orderer_certificate=ident.Certificate.from_record(rec["orderer_certificate"]),
            visa_types=tuple(rec["visa_types"]),
            hash_function=rec["hash_function"],
            signature_scheme=rec["signature_scheme"],
        )


def _policy_msp_ids(policy: ident.PolicyNode):
    if policy.kind == "PRINCIPAL":
        yield policy.msp_id
    else:
        for child in policy.children:
            yield from _policy_msp_ids(child)


def verified_signers(certs, config: ChannelConfig, now: int) -> list:
    """Filter certificates down to those that verify against a channel MSP."""
    good = []
    for cert in certs:
        msp = config.msp_by_id(cert.msp_id)
        if msp is not None and ident.verify_certificate(cert, msp, now):
            good.append(cert)
    return good


def create_channel(config: ChannelConfig, orderer: ident.SigningIdentity,
                   now: int) -> "Block":
    """Build the signed genesis block carrying the channel configuration."""
    cert = orderer.certificate
    if cert != config.orderer_certificate:
        raise PlatformError(NOT_ADMIN, "identity is not the configured orderer")
    signers = verified_signers([cert], config, now)
    if not ident.evaluate_policy(config.admins_policy, signers):
        raise PlatformError(NOT_ADMIN, "admins policy not satisfied")
    config_bytes = canonical_encode(config.to_record())
    tx_id = compute_digest(b"genesis:" + config_bytes).hex()
    tx = TransactionEnvelope(
        tx_id=tx_id,
        channel_id=config.channel_id,
        chaincode_name="_config",
        function="setup",
        args=(),
        read_set=(),
        write_set=(WriteEntry(CONFIG_KEY, config_bytes),),
        creator=cert,
        endorsements=(),
        timestamp=now,
    )
    sig = orderer.sign(tx.signed_bytes())
    tx = replace(tx, endorsements=(Endorsement(cert, sig),))
    return build_block(0, ZERO_DIGEST, [tx], orderer)


def load_channel_config(state) -> ChannelConfig:
    entry = state.get(CONFIG_KEY)
    if entry is None:
        raise PlatformError(WRONG_CHANNEL, "no channel configuration committed")
    return ChannelConfig.from_record(decode(entry[0]))


@dataclass
class Broadcast:
    status: str  # "ACCEPTED" | "REJECTED"
    reason: str = ""

    @property
    def accepted(self) -> bool:
        return self.status == "ACCEPTED"


class Orderer:
    """Single-node ordering service; also keeps its own ledger copy."""

    def __init__(self, config: ChannelConfig, identity: ident.SigningIdentity,
                 data_path: str | None = None):
        self.config = config
        self.identity = identity
        self.pending: list[TransactionEnvelope] = []
        self.last_cut: int | None = None
        self.ledger = Ledger(config.orderer_certificate, data_path)

    @property
    def chain(self):
        return self.ledger.log.blocks

    def bootstrap_channel(self, now: int) -> "Block":
        genesis = create_channel(self.config, self.identity, now)
        self.ledger.commit(genesis)
        self.last_cut = now
        return genesis

    def broadcast(self, tx: TransactionEnvelope, now: int) -> Broadcast:
        if tx.channel_id != self.config.channel_id:
            return Broadcast("REJECTED", WRONG_CHANNEL)
        if len(self.pending) >= MAX_PENDING:
            return Broadcast("REJECTED", BUSY)
        if not tx.endorsements:
            return Broadcast("REJECTED", POLICY_DENIED)
        message = tx.signed_bytes()
        for e in tx.endorsements:
            if not ident.verify_signature(e.endorser, message, e.signature):
                return Broadcast("REJECTED", BAD_SIGNATURE)
        signers = verified_signers([e.endorser for e in tx.endorsements],
                                   self.config, now)
        if not ident.evaluate_policy(self.config.writers_policy, signers):
            return Broadcast("REJECTED", POLICY_DENIED)
        self.pending.append(tx)
        return Broadcast("ACCEPTED")

    def cut_block(self, now: int, force: bool = False):
        """Emit the next block if the batch is full or the timeout elapsed."""
        if self.last_cut is None:
            raise PlatformError(WRONG_CHANNEL, "channel not bootstrapped")
        if not self.pending:
            self.last_cut = max(self.last_cut, now)
            return None
        full = len(self.pending) >= self.config.batch_max_count
        timed_out = now - self.last_cut >= self.config.batch_timeout_micros
        if not (full or timed_out or force):
            return None
        batch = self.pending[: self.config.batch_max_count]
        del self.pending[: len(batch)]
        block = build_block(self.ledger.log.height, self.ledger.log.head_hash(),
                            batch, self.identity)
        self.ledger.commit(block)
        self.last_cut = now
        return block

    def deliver(self, start: int, requester: ident.Certificate, now: int) -> list:
        signers = verified_signers([requester], self.config, now)
        if not ident.evaluate_policy(self.config.readers_policy, signers):
            raise PlatformError(POLICY_DENIED, "readers policy not satisfied")
        if start > self.ledger.log.height:
            raise PlatformError(OUT_OF_RANGE, f"from={start} beyond height")
        return self.chain[start:]
