"""Wires orderer, peers, and chaincode into one runnable channel.

The demo network follows the trust model of the channel-admin orderer:
the gateway's client identity is the orderer admin, and every endorsed
envelope is co-signed by it so the channel's Writers rule
(``OR('OrdererMSP.member')``) is satisfied while organization peers
produce the read/write sets. Committed blocks are pushed to every peer.
"""

from __future__ import annotations

import os
import socket
import socketserver
import threading
from dataclasses import dataclass, replace

from . import identity as ident
from .clocks import WallClock
from .codec import canonical_encode, decode, to_jsonable
from .contract import TravelContract
from .errors import (
    LEDGER_UNAVAILABLE,
    PENDING_TIMEOUT,
    PlatformError,
)
from .ledger import Block, Endorsement, TransactionEnvelope
from .ordering import ChannelConfig, Orderer, load_channel_config
from .peer import Peer, Proposal, make_proposal

IDENTITY_FILE_MODE = 0o600


@dataclass
class Receipt:
    tx_id: str
    block_number: int | None
    validity: str

    def to_dict(self) -> dict:
        return {"txId": self.tx_id, "blockNumber": self.block_number,
                "validity": self.validity}


def save_identity(path: str, identity: ident.SigningIdentity) -> None:
    payload = canonical_encode({
        "certificate": identity.certificate.to_record(),
        "private_key": identity.private_key_bytes,
    })
    os.makedirs(os.path.dirname(path), exist_ok=True)
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, IDENTITY_FILE_MODE)
    with os.fdopen(fd, "wb") as f:
        f.write(payload)


def load_identity(path: str) -> ident.SigningIdentity:
    with open(path, "rb") as f:
        rec = decode(f.read())
    return ident.SigningIdentity(
        ident.Certificate.from_record(rec["certificate"]), rec["private_key"])


def ledger_path(data_dir: str, org: str, channel_id: str) -> str:
    return os.path.join(data_dir, org, channel_id, "blocks.log")


class Network:
    """One channel: a single orderer, one peer per organization."""

    def __init__(self, config: ChannelConfig, orderer_identity, peer_identities,
                 clock=None, data_dir: str | None = None,
                 endorsing_org: str | None = None,
                 orderer_org: str = "Orderer"):
        self.config = config
        self.clock = clock or WallClock()
        self.data_dir = data_dir
        self.orderer_org = orderer_org
        orderer_path = None
        if data_dir:
            orderer_path = ledger_path(data_dir, orderer_org, config.channel_id)
        self.orderer = Orderer(config, orderer_identity, orderer_path)
        self.orderer_identity = orderer_identity
        self.peers: dict[str, Peer] = {}
        for org, pid in peer_identities.items():
            path = ledger_path(data_dir, org, config.channel_id) if data_dir else None
            self.peers[org] = Peer(org, pid, config, path)
        self.endorsing_org = endorsing_org or next(iter(self.peers))
        self._lock = threading.RLock()

    @property
    def contract_name(self) -> str:
        return TravelContract.name

    def install_everywhere(self, contract_factory) -> None:
        for peer in self.peers.values():
            peer.install_chaincode(contract_factory())

    def bootstrap_channel(self) -> Block:
        genesis = self.orderer.bootstrap_channel(self.clock.now())
        for peer in self.peers.values():
            peer.on_block_delivered(_clone_block(genesis))
        return genesis

    def feed_existing_chain(self) -> None:
        """After loading the orderer's persisted chain, sync empty peers."""
        for peer in self.peers.values():
            for block in self.orderer.chain[peer.height:]:
                peer.on_block_delivered(_clone_block(block))

    def co_endorse(self, envelope: TransactionEnvelope) -> TransactionEnvelope:
        sig = self.orderer_identity.sign(envelope.signed_bytes())
        extra = Endorsement(self.orderer_identity.certificate, sig)
        return replace(envelope, endorsements=envelope.endorsements + (extra,))

    def submit(self, caller: ident.SigningIdentity, function: str, args,
               endorsing_org: str | None = None) -> Receipt:
        """Endorse, order, commit, and report on one invoke transaction."""
        with self._lock:
            ts = self.clock.now()
            proposal = make_proposal(caller, self.config.channel_id,
                                     self.contract_name, function, args, ts)
            peer = self.peers[endorsing_org or self.endorsing_org]
            envelope = self.co_endorse(peer.endorse_proposal(proposal))
            result = self.orderer.broadcast(envelope, ts)
            if not result.accepted:
                raise PlatformError(result.reason, "broadcast rejected",
                                    retryable=result.reason == "BUSY")
            block = self.orderer.cut_block(self.clock.now(), force=True)
            if block is None:
                return Receipt(envelope.tx_id, None, PENDING_TIMEOUT)
            reports = self.deliver_to_peers(block)
            idx = [tx.tx_id for tx in block.data].index(envelope.tx_id)
            flags = next(iter(reports.values())).flags
            return Receipt(envelope.tx_id, block.header.number, flags[idx])

    def deliver_to_peers(self, block: Block) -> dict:
        return {org: peer.on_block_delivered(_clone_block(block))
                for org, peer in self.peers.items()}

    def query(self, caller: ident.SigningIdentity, function: str, args,
              endorsing_org: str | None = None) -> dict:
        ts = self.clock.now()
        proposal = make_proposal(caller, self.config.channel_id,
                                 self.contract_name, function, args, ts)
        peer = self.peers[endorsing_org or self.endorsing_org]
        return decode(peer.query(proposal))

    def block_summaries(self, start: int, stop: int) -> list[dict]:
        chain = self.orderer.chain
        if start < 0 or stop >= len(chain) or start > stop:
            raise PlatformError("OUT_OF_RANGE", f"blocks {start}..{stop}")
        out = []
        for block in chain[start : stop + 1]:
            out.append({
                "number": block.header.number,
                "prevHash": block.header.prev_hash.hex(),
                "dataHash": block.header.data_hash.hex(),
                "headerHash": block.header.digest().hex(),
                "txCount": len(block.data),
                "txIds": [tx.tx_id for tx in block.data],
                "validationFlags": list(block.validation_flags),
            })
        return out


def _clone_block(block: Block) -> Block:
    """Peers get their own mutable copy (validation flags are per-copy)."""
    return Block(block.header, block.data, list(block.validation_flags),
                 block.orderer_signature)


# --- line-delimited socket protocol ------------------------------------
#
# One request per line: VERB <space> canonical-encoded payload.
# One response line: canonical-encoded {"ok": true, ...} or
# {"error": code, "message": ...}. Canonical encoding never contains a
# raw newline, so line framing is safe.

class NodeServer:
    """Serves orderer verbs (BROADCAST, DELIVER) and peer verbs
    (ENDORSE, COMMIT) for a network over a local TCP socket."""

    def __init__(self, network: Network, host: str = "127.0.0.1", port: int = 0):
        self.network = network
        net = self

        class Handler(socketserver.StreamRequestHandler):
            def handle(self):
                for raw in self.rfile:
                    line = raw.strip()
                    if not line:
                        continue
                    response = net._handle_line(line)
                    self.wfile.write(response + b"\n")
                    self.wfile.flush()

        self._server = socketserver.ThreadingTCPServer((host, port), Handler)
        self._server.daemon_threads = True
        self.address = self._server.server_address
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    def start(self):
        self._thread.start()
        return self

    def stop(self):
        self._server.shutdown()
        self._server.server_close()

    def _handle_line(self, line: bytes) -> bytes:
        try:
            verb, _, payload = line.partition(b" ")
            request = decode(payload) if payload else {}
            return canonical_encode(self._dispatch(verb.decode("ascii"), request))
        except PlatformError as e:
            return canonical_encode({"error": e.code, "message": e.message})
        except Exception as e:  # malformed input must not kill the server
            return canonical_encode({"error": "BAD_REQUEST", "message": str(e)})

    def _dispatch(self, verb: str, request: dict) -> dict:
        net = self.network
        now = net.clock.now()
        if verb == "BROADCAST":
            tx = TransactionEnvelope.from_record(request["tx"])
            result = net.orderer.broadcast(tx, now)
            return {"ok": result.accepted, "status": result.status,
                    "reason": result.reason}
        if verb == "DELIVER":
            requester = ident.Certificate.from_record(request["requester"])
            blocks = net.orderer.deliver(request["from"], requester, now)
            return {"ok": True, "blocks": [b.to_record() for b in blocks]}
        if verb == "ENDORSE":
            proposal = Proposal.from_record(request["proposal"])
            peer = net.peers[request.get("org", net.endorsing_org)]
            tx = peer.endorse_proposal(proposal, now)
            return {"ok": True, "tx": tx.to_record()}
        if verb == "COMMIT":
            block = Block.from_record(request["block"])
            peer = net.peers[request.get("org", net.endorsing_org)]
            report = peer.on_block_delivered(block)
            return {"ok": True, "blockNumber": report.block_number,
                    "flags": list(report.flags)}
        raise PlatformError("BAD_REQUEST", f"unknown verb {verb}")


class NodeClient:
    """Client side of the line protocol."""

    def __init__(self, address):
        self._sock = socket.create_connection(address)
        self._file = self._sock.makefile("rwb")

    def call(self, verb: str, payload: dict) -> dict:
        self._file.write(verb.encode("ascii") + b" " + canonical_encode(payload) + b"\n")
        self._file.flush()
        line = self._file.readline()
        if not line:
            raise PlatformError(LEDGER_UNAVAILABLE, "connection closed", retryable=True)
        response = decode(line.strip())
        if "error" in response:
            raise PlatformError(response["error"], response.get("message", ""))
        return response

    def close(self):
        self._file.close()
        self._sock.close()
