"""An organization's peer: endorses proposals and commits delivered blocks."""

from __future__ import annotations

from dataclasses import dataclass

from . import identity as ident
from .codec import canonical_encode, compute_digest
from .contract import INVOKE, QUERY, ChaincodeStub
from .errors import (
    ALREADY_INSTALLED,
    BAD_CALLER_CERT,
    NO_CHAINCODE,
    PlatformError,
)
from .ledger import Endorsement, Ledger, TransactionEnvelope


@dataclass(frozen=True)
class Proposal:
    channel_id: str
    chaincode_name: str
    function: str
    args: tuple
    caller: ident.Certificate
    signature: bytes
    timestamp: int

    def signed_bytes(self) -> bytes:
        return canonical_encode(
            {
                "channel_id": self.channel_id,
                "chaincode_name": self.chaincode_name,
                "function": self.function,
                "args": list(self.args),
                "caller": self.caller.to_record(),
                "timestamp": self.timestamp,
            }
        )

    def tx_id(self) -> str:
        return compute_digest(self.signed_bytes()).hex()

    def to_record(self) -> dict:
        return {
            "channel_id": self.channel_id,
            "chaincode_name": self.chaincode_name,
            "function": self.function,
            "args": list(self.args),
            "caller": self.caller.to_record(),
            "signature": self.signature,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Proposal":
        return cls(
            channel_id=rec["channel_id"],
            chaincode_name=rec["chaincode_name"],
            function=rec["function"],
            args=tuple(rec["args"]),
            caller=ident.Certificate.from_record(rec["caller"]),
            signature=rec["signature"],
            timestamp=rec["timestamp"],
        )


def make_proposal(identity: ident.SigningIdentity, channel_id: str,
                  chaincode_name: str, function: str, args,
                  timestamp: int) -> Proposal:
    unsigned = Proposal(channel_id, chaincode_name, function, tuple(args),
                        identity.certificate, b"", timestamp)
    return Proposal(channel_id, chaincode_name, function, tuple(args),
                    identity.certificate,
                    identity.sign(unsigned.signed_bytes()), timestamp)


@dataclass
class CommitReport:
    block_number: int
    flags: list
    tx_ids: list


class Peer:
    """Hosts installed chaincode and a full copy of the channel ledger."""

    def __init__(self, org: str, identity: ident.SigningIdentity, channel_config,
                 data_path: str | None = None):
        self.org = org
        self.identity = identity
        self.config = channel_config
        self.installed: dict[str, object] = {}
        self.ledger = Ledger(channel_config.orderer_certificate, data_path)

    def install_chaincode(self, contract) -> None:
        key = (contract.name, contract.version)
        if contract.name in self.installed and \
                self.installed[contract.name].version == contract.version:
            raise PlatformError(ALREADY_INSTALLED, f"{key[0]} v{key[1]}")
        self.installed[contract.name] = contract

    def _verify_proposal(self, proposal: Proposal, now: int) -> None:
        if not ident.verify_signature(proposal.caller, proposal.signed_bytes(),
                                      proposal.signature):
            raise PlatformError(BAD_CALLER_CERT, "proposal signature invalid")
        msp = self.config.msp_by_id(proposal.caller.msp_id)
        if msp is None or not ident.verify_certificate(proposal.caller, msp, now):
            raise PlatformError(BAD_CALLER_CERT, "caller certificate not valid on channel")

    def _caller_is_channel_admin(self, cert: ident.Certificate, now: int) -> bool:
        from .ordering import verified_signers

        signers = verified_signers([cert], self.config, now)
        return ident.evaluate_policy(self.config.admins_policy, signers)

    def _contract_for(self, name: str):
        if name not in self.installed:
            raise PlatformError(NO_CHAINCODE, name)
        return self.installed[name]

    def endorse_proposal(self, proposal: Proposal, now: int | None = None) -> TransactionEnvelope:
        """Simulate the proposal against a snapshot and sign the result.

        The peer's committed state is never modified here.
        """
        now = proposal.timestamp if now is None else now
        self._verify_proposal(proposal, now)
        contract = self._contract_for(proposal.chaincode_name)
        stub = ChaincodeStub(
            self.ledger.state.snapshot(), proposal.caller, proposal.timestamp,
            mode=INVOKE,
            caller_is_channel_admin=self._caller_is_channel_admin(proposal.caller, now))
        contract.dispatch(proposal.function, proposal.args, stub, INVOKE)
        tx = TransactionEnvelope(
            tx_id=proposal.tx_id(),
            channel_id=proposal.channel_id,
            chaincode_name=proposal.chaincode_name,
            function=proposal.function,
            args=proposal.args,
            read_set=stub.read_set(),
            write_set=stub.write_set(),
            creator=proposal.caller,
            endorsements=(),
            timestamp=proposal.timestamp,
        )
        signature = self.identity.sign(tx.signed_bytes())
        return TransactionEnvelope(
            **{**tx.__dict__, "endorsements": (Endorsement(self.identity.certificate, signature),)})

    def query(self, proposal: Proposal, now: int | None = None) -> bytes:
        now = proposal.timestamp if now is None else now
        self._verify_proposal(proposal, now)
        contract = self._contract_for(proposal.chaincode_name)
        stub = ChaincodeStub(
            self.ledger.state.snapshot(), proposal.caller, proposal.timestamp,
            mode=QUERY,
            caller_is_channel_admin=self._caller_is_channel_admin(proposal.caller, now))
        return contract.dispatch(proposal.function, proposal.args, stub, QUERY)

    def on_block_delivered(self, block) -> CommitReport:
        flags = self.ledger.commit(block)
        return CommitReport(block.header.number, flags,
                            [tx.tx_id for tx in block.data])

    @property
    def height(self) -> int:
        return self.ledger.log.height
