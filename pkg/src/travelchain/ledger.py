"""The two-part ledger: hash-chained block log plus versioned world state.

Blocks are append-only; the world state is always derivable by replaying
the log (``replay``). Commit-time MVCC validation compares each
transaction's recorded read versions against the current state, so stale
endorsements are flagged instead of applied.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

from . import identity as ident
from .codec import ZERO_DIGEST, canonical_encode, compute_digest, decode
from .errors import (
    BAD_ORDERER_SIG,
    CHAIN_GAP,
    CORRUPT_CHAIN,
    HASH_MISMATCH,
    PlatformError,
)

VALID = "VALID"
MVCC_CONFLICT = "MVCC_CONFLICT"
DUPLICATE_TXID = "DUPLICATE_TXID"


@dataclass(frozen=True, order=True)
class Version:
    block_number: int
    tx_index: int

    def to_record(self) -> dict:
        return {"block_number": self.block_number, "tx_index": self.tx_index}

    @classmethod
    def from_record(cls, rec: dict) -> "Version":
        return cls(rec["block_number"], rec["tx_index"])


@dataclass(frozen=True)
class WriteEntry:
    key: str
    value: bytes | None  # None means delete

    def to_record(self) -> dict:
        rec: dict = {"key": self.key}
        if self.value is not None:
            rec["value"] = self.value
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "WriteEntry":
        return cls(rec["key"], rec.get("value"))


@dataclass(frozen=True)
class ReadEntry:
    key: str
    version: Version | None  # None means the key did not exist when read

    def to_record(self) -> dict:
        rec: dict = {"key": self.key}
        if self.version is not None:
            rec["version"] = self.version.to_record()
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "ReadEntry":
        ver = rec.get("version")
        return cls(rec["key"], Version.from_record(ver) if ver else None)


@dataclass(frozen=True)
class Endorsement:
    endorser: ident.Certificate
    signature: bytes

    def to_record(self) -> dict:
        return {"endorser": self.endorser.to_record(), "signature": self.signature}

    @classmethod
    def from_record(cls, rec: dict) -> "Endorsement":
        return cls(ident.Certificate.from_record(rec["endorser"]), rec["signature"])


@dataclass(frozen=True)
class TransactionEnvelope:
    tx_id: str
    channel_id: str
    chaincode_name: str
    function: str
    args: tuple
    read_set: tuple  # ReadEntry
    write_set: tuple  # WriteEntry
    creator: ident.Certificate
    endorsements: tuple  # Endorsement
    timestamp: int

    def signed_bytes(self) -> bytes:
        """Canonical bytes every endorsement signature covers."""
        return canonical_encode(
            {
                "tx_id": self.tx_id,
                "channel_id": self.channel_id,
                "chaincode_name": self.chaincode_name,
                "function": self.function,
                "args": list(self.args),
                "read_set": [r.to_record() for r in self.read_set],
                "write_set": [w.to_record() for w in self.write_set],
                "timestamp": self.timestamp,
            }
        )

    def to_record(self) -> dict:
        return {
            "tx_id": self.tx_id,
            "channel_id": self.channel_id,
            "chaincode_name": self.chaincode_name,
            "function": self.function,
            "args": list(self.args),
            "read_set": [r.to_record() for r in self.read_set],
            "write_set": [w.to_record() for w in self.write_set],
            "creator": self.creator.to_record(),
            "endorsements": [e.to_record() for e in self.endorsements],
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "TransactionEnvelope":
        return cls(
            tx_id=rec["tx_id"],
            channel_id=rec["channel_id"],
            chaincode_name=rec["chaincode_name"],
            function=rec["function"],
            args=tuple(rec["args"]),
            read_set=tuple(ReadEntry.from_record(r) for r in rec["read_set"]),
            write_set=tuple(WriteEntry.from_record(w) for w in rec["write_set"]),
            creator=ident.Certificate.from_record(rec["creator"]),
            endorsements=tuple(Endorsement.from_record(e) for e in rec["endorsements"]),
            timestamp=rec["timestamp"],
        )


@dataclass(frozen=True)
class BlockHeader:
    number: int
    prev_hash: bytes
    data_hash: bytes

    def to_record(self) -> dict:
        return {
            "number": self.number,
            "prev_hash": self.prev_hash,
            "data_hash": self.data_hash,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "BlockHeader":
        return cls(rec["number"], rec["prev_hash"], rec["data_hash"])

    def canonical_bytes(self) -> bytes:
        return canonical_encode(self.to_record())

    def digest(self) -> bytes:
        return compute_digest(self.canonical_bytes())


@dataclass
class Block:
    header: BlockHeader
    data: tuple  # TransactionEnvelope
    validation_flags: list = field(default_factory=list)
    orderer_signature: bytes = b""

    def to_record(self) -> dict:
        return {
            "header": self.header.to_record(),
            "data": [tx.to_record() for tx in self.data],
            "metadata": {
                "validation_flags": list(self.validation_flags),
                "orderer_signature": self.orderer_signature,
            },
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Block":
        meta = rec["metadata"]
        return cls(
            header=BlockHeader.from_record(rec["header"]),
            data=tuple(TransactionEnvelope.from_record(t) for t in rec["data"]),
            validation_flags=list(meta["validation_flags"]),
            orderer_signature=meta["orderer_signature"],
        )


def data_hash_of(txs) -> bytes:
    return compute_digest(canonical_encode([tx.to_record() for tx in txs]))


def build_block(number: int, prev_hash: bytes, txs, orderer: ident.SigningIdentity) -> Block:
    header = BlockHeader(number, prev_hash, data_hash_of(txs))
    return Block(header, tuple(txs),
                 orderer_signature=orderer.sign(header.canonical_bytes()))


@dataclass
class IntegrityReport:
    ok: bool
    failed_block: int | None = None
    reason: str = ""


class WorldState:
    """Current key -> (value, version) view, plus the committed tx-id set."""

    def __init__(self):
        self.entries: dict[str, tuple[bytes, Version]] = {}
        self.tx_ids: set[str] = set()

    def get(self, key: str):
        return self.entries.get(key)

    def snapshot(self) -> "WorldState":
        s = WorldState()
        s.entries = dict(self.entries)
        s.tx_ids = set(self.tx_ids)
        return s

    def to_record(self, last_block: int) -> dict:
        return {
            "entries": {
                k: {"value": v, "version": ver.to_record()}
                for k, (v, ver) in self.entries.items()
            },
            "tx_ids": sorted(self.tx_ids),
            "last_block": last_block,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "WorldState":
        s = cls()
        for k, e in rec["entries"].items():
            s.entries[k] = (e["value"], Version.from_record(e["version"]))
        s.tx_ids = set(rec["tx_ids"])
        return s

    def state_digest(self) -> bytes:
        return compute_digest(canonical_encode(
            {k: {"value": v, "version": ver.to_record()}
             for k, (v, ver) in self.entries.items()}))


def read_state(state: WorldState, key: str):
    return state.get(key)


class BlockLog:
    """Append-only, hash-chain-checked block sequence with optional file backing."""

    def __init__(self, orderer_cert: ident.Certificate | None = None,
                 path: str | None = None):
        self.blocks: list[Block] = []
        self.orderer_cert = orderer_cert
        self.path = path

    @property
    def height(self) -> int:
        return len(self.blocks)

    def head_hash(self) -> bytes:
        if not self.blocks:
            return ZERO_DIGEST
        return self.blocks[-1].header.digest()

    def check_block(self, block: Block) -> None:
        if block.header.number != self.height:
            raise PlatformError(
                CHAIN_GAP,
                f"expected block {self.height}, got {block.header.number}")
        expected_prev = ZERO_DIGEST if not self.blocks else self.blocks[-1].header.digest()
        if block.header.prev_hash != expected_prev:
            raise PlatformError(HASH_MISMATCH, "prev_hash does not match chain head")
        if block.header.data_hash != data_hash_of(block.data):
            raise PlatformError(HASH_MISMATCH, "data_hash does not match block data")
        if self.orderer_cert is not None and not ident.verify_signature(
                self.orderer_cert, block.header.canonical_bytes(),
                block.orderer_signature):
            raise PlatformError(BAD_ORDERER_SIG, "orderer signature invalid")

    def append(self, block: Block) -> None:
        self.check_block(block)
        self.blocks.append(block)
        if self.path is not None:
            _append_to_file(self.path, block)

    def rewrite_last_metadata(self, flags) -> None:
        """Record validation flags on the in-memory head before persisting."""
        self.blocks[-1].validation_flags = list(flags)


def _append_to_file(path: str, block: Block) -> None:
    payload = canonical_encode(block.to_record())
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "ab") as f:
        f.write(struct.pack(">Q", len(payload)))
        f.write(payload)
        f.flush()
        os.fsync(f.fileno())


def load_blocks(path: str) -> list[Block]:
    """Read a length-prefixed block log file; strict about framing and form."""
    blocks = []
    with open(path, "rb") as f:
        raw = f.read()
    pos = 0
    while pos < len(raw):
        if pos + 8 > len(raw):
            raise PlatformError(CORRUPT_CHAIN, "truncated length prefix")
        (length,) = struct.unpack(">Q", raw[pos : pos + 8])
        pos += 8
        if pos + length > len(raw):
            raise PlatformError(CORRUPT_CHAIN, "truncated block payload")
        try:
            blocks.append(Block.from_record(decode(raw[pos : pos + length])))
        except (KeyError, TypeError, AttributeError) as e:
            raise PlatformError(CORRUPT_CHAIN, f"malformed block record: {e!r}") from None
        pos += length
    return blocks


def verify_chain(blocks, orderer_cert: ident.Certificate | None = None) -> IntegrityReport:
    """Check linkage, data hashes, orderer signatures, and stored validity
    flags (recomputed by replaying from genesis)."""
    probe = BlockLog(orderer_cert)
    state = WorldState()
    for block in blocks:
        n = block.header.number
        try:
            probe.check_block(block)
        except PlatformError as e:
            return IntegrityReport(False, n, e.code)
        flags = validate_transactions(block, state)
        if list(block.validation_flags) not in ([], list(flags)):
            return IntegrityReport(False, n, "FLAGS_MISMATCH")
        apply_block(state, block, flags)
        probe.blocks.append(block)
    return IntegrityReport(True)


def validate_transactions(block: Block, state: WorldState) -> list[str]:
    """MVCC-validate a block's transactions against the current state.

    Earlier VALID transactions in the block win conflicts over later ones.
    """
    flags: list[str] = []
    seen_in_block: set[str] = set()
    touched: set[str] = set()
    for tx in block.data:
        if tx.tx_id in state.tx_ids or tx.tx_id in seen_in_block:
            flags.append(DUPLICATE_TXID)
            continue
        seen_in_block.add(tx.tx_id)
        conflict = False
        for entry in tx.read_set:
            if entry.key in touched:
                conflict = True
                break
            current = state.get(entry.key)
            current_ver = current[1] if current else None
            if current_ver != entry.version:
                conflict = True
                break
        if not conflict:
            for w in tx.write_set:
                if w.key in touched:
                    conflict = True
                    break
        if conflict:
            flags.append(MVCC_CONFLICT)
        else:
            flags.append(VALID)
            touched.update(w.key for w in tx.write_set)
    return flags


def apply_block(state: WorldState, block: Block, flags) -> WorldState:
    for tx_index, (tx, flag) in enumerate(zip(block.data, flags)):
        # committed tx ids are burned even when the tx was invalid
        state.tx_ids.add(tx.tx_id)
        if flag != VALID:
            continue
        for w in tx.write_set:
            if w.value is None:
                state.entries.pop(w.key, None)
            else:
                state.entries[w.key] = (w.value, Version(block.header.number, tx_index))
    return state


def replay(blocks, orderer_cert: ident.Certificate | None = None) -> WorldState:
    report = verify_chain(blocks, orderer_cert)
    if not report.ok:
        raise PlatformError(
            CORRUPT_CHAIN, f"block {report.failed_block}: {report.reason}")
    state = WorldState()
    for block in blocks:
        flags = validate_transactions(block, state)
        apply_block(state, block, flags)
    return state


class Ledger:
    """Block log plus live world state, kept consistent on every commit."""

    def __init__(self, orderer_cert: ident.Certificate | None = None,
                 path: str | None = None):
        self.log = BlockLog(orderer_cert, path)
        self.state = WorldState()

    def commit(self, block: Block) -> list[str]:
        """Validate, flag, append, and apply one delivered block."""
        self.log.check_block(block)
        flags = validate_transactions(block, self.state)
        block.validation_flags = list(flags)
        self.log.append(block)
        apply_block(self.state, block, flags)
        return flags

    @classmethod
    def load(cls, path: str, orderer_cert: ident.Certificate | None = None) -> "Ledger":
        ledger = cls(orderer_cert)
        for block in load_blocks(path):
            ledger.commit(block)
        ledger.log.path = path
        return ledger

    def save_snapshot(self, path: str) -> None:
        payload = canonical_encode(self.state.to_record(self.log.height - 1))
        with open(path, "wb") as f:
            f.write(payload)
