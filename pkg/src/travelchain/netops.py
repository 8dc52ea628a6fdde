"""Operator workflows: bootstrap a demo network, run the demo scenario,
audit ledgers, dump blocks. The CLI is a thin wrapper over these."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from . import identity as ident
from .clocks import SeededRng, SteppingClock, SystemRng, WallClock, parse_instant
from .codec import canonical_encode
from .contract import ROLE_ADMIN as CRED_ADMIN
from .contract import ROLE_PASSPORT_AGENT, ROLE_VISA_AGENT, TravelContract
from .errors import DIR_NOT_EMPTY, TOPOLOGY_INVALID, PlatformError
from .gateway import GatewayService
from .ledger import load_blocks, replay, verify_chain
from .network import Network, ledger_path, load_identity, save_identity
from .ordering import ChannelConfig, load_channel_config

DEFAULT_VALIDITY_YEARS = 10

# Demo credential convention (documented in the README): bootstrap never
# writes a password to disk; operators derive them from the subject id.
def demo_password(subject_id: str) -> str:
    return f"let-me-in:{subject_id}"


@dataclass
class Topology:
    channel_id: str
    orderer_org: str
    passport_org: str
    visa_orgs: list  # [{"name": ..., "country": ...}]
    batch_max_count: int = 10
    batch_timeout_seconds: int = 2

    @classmethod
    def from_file(cls, path: str) -> "Topology":
        with open(path) as f:
            raw = json.load(f)
        try:
            topo = cls(
                channel_id=raw["channel_id"],
                orderer_org=raw["orderer_org"],
                passport_org=raw["passport_org"],
                visa_orgs=list(raw["visa_orgs"]),
                batch_max_count=raw.get("batch_max_count", 10),
                batch_timeout_seconds=raw.get("batch_timeout_seconds", 2),
            )
        except KeyError as e:
            raise PlatformError(TOPOLOGY_INVALID, f"missing field {e}") from None
        topo.validate()
        return topo

    def validate(self) -> None:
        if not self.visa_orgs:
            raise PlatformError(TOPOLOGY_INVALID, "need at least one visa org")
        countries = [v["country"] for v in self.visa_orgs]
        if len(countries) != len(set(countries)):
            raise PlatformError(TOPOLOGY_INVALID, "duplicate country codes")
        names = [self.orderer_org, self.passport_org] + [v["name"] for v in self.visa_orgs]
        if len(names) != len(set(names)):
            raise PlatformError(TOPOLOGY_INVALID, "duplicate org names")

    def org_names(self) -> list[str]:
        return [self.orderer_org, self.passport_org] + [v["name"] for v in self.visa_orgs]

    def peer_orgs(self) -> list[str]:
        return [self.passport_org] + [v["name"] for v in self.visa_orgs]

    def to_dict(self) -> dict:
        return {
            "channel_id": self.channel_id,
            "orderer_org": self.orderer_org,
            "passport_org": self.passport_org,
            "visa_orgs": self.visa_orgs,
            "batch_max_count": self.batch_max_count,
            "batch_timeout_seconds": self.batch_timeout_seconds,
        }


def default_topology() -> Topology:
    return Topology(
        channel_id="travel-channel",
        orderer_org="Orderer",
        passport_org="PassportOffice",
        visa_orgs=[{"name": "VisaOfficeFrance", "country": "France"},
                   {"name": "VisaOfficeJapan", "country": "Japan"}],
    )


def make_clock(clock_spec: str | None):
    if clock_spec:
        return SteppingClock(parse_instant(clock_spec))
    return WallClock()


def make_rng(seed: int | None):
    return SeededRng(seed) if seed is not None else SystemRng()


def _msp_id(org: str) -> str:
    return org + "MSP"


def passport_agent_id(topology: Topology) -> str:
    return "passport-agent"


def visa_agent_id(country: str) -> str:
    return f"visa-agent-{country.lower()}"


def bootstrap(topology: Topology, data_dir: str, seed: int | None = None,
              clock_spec: str | None = None) -> Network:
    """Create CAs, identities, channel genesis, and per-org agents on disk."""
    if os.path.isdir(data_dir) and os.listdir(data_dir):
        raise PlatformError(DIR_NOT_EMPTY, data_dir)
    topology.validate()
    os.makedirs(data_dir, exist_ok=True)
    rng = make_rng(seed)
    clock = make_clock(clock_spec)
    not_after = (clock.now() if clock_spec else WallClock().now()) \
        + DEFAULT_VALIDITY_YEARS * 365 * 24 * 3600 * 1_000_000

    with open(os.path.join(data_dir, "topology.json"), "w") as f:
        json.dump(topology.to_dict(), f, indent=2)

    cas = {}
    for org in topology.org_names():
        ca = ident.CertificateAuthority(_msp_id(org), ident.generate_private_key(rng))
        cas[org] = ca
        save_identity(
            os.path.join(data_dir, org, "ca_root.id"),
            ident.SigningIdentity(
                ca.issue("ca@" + org, _msp_id(org), ident.ROLE_ADMIN,
                         ca.root_public_key, not_after),
                ca.root_private_key))

    orderer_admin = cas[topology.orderer_org].new_identity(
        "orderer-admin", ident.ROLE_ADMIN, rng, not_after)
    save_identity(os.path.join(data_dir, topology.orderer_org, "orderer-admin.id"),
                  orderer_admin)

    peer_identities = {}
    for org in topology.peer_orgs():
        peer_id = cas[org].new_identity(f"peer0@{org}", ident.ROLE_MEMBER, rng, not_after)
        save_identity(os.path.join(data_dir, org, "peer0.id"), peer_id)
        peer_identities[org] = peer_id

    msps = tuple(
        cas[org].msp_config(("orderer-admin",) if org == topology.orderer_org else ())
        for org in topology.org_names())
    config = ChannelConfig(
        channel_id=topology.channel_id,
        msps=msps,
        readers_policy=ident.parse_policy("OR('OrdererMSP.member')"),
        writers_policy=ident.parse_policy("OR('OrdererMSP.member')"),
        admins_policy=ident.parse_policy("OR('OrdererMSP.admin')"),
        batch_max_count=topology.batch_max_count,
        batch_timeout_micros=topology.batch_timeout_seconds * 1_000_000,
        orderer_certificate=orderer_admin.certificate,
    )

    network = Network(config, orderer_admin, peer_identities, clock=clock,
                      data_dir=data_dir, endorsing_org=topology.passport_org,
                      orderer_org=topology.orderer_org)
    network.install_everywhere(lambda: TravelContract(config.visa_types))
    network.bootstrap_channel()

    gateway = GatewayService(network, clock=clock, rng=rng)
    _register_bootstrap_agents(network, gateway, topology)
    return network


def _register_bootstrap_agents(network: Network, gateway: GatewayService,
                               topology: Topology) -> None:
    # the orderer-admin certificate satisfies the Admins policy directly,
    # so these registrations go through with an empty caller subject
    def register(subject_id, role, country=""):
        salt_hex, digest_hex = gateway._salted(demo_password(subject_id))
        receipt = network.submit(network.orderer_identity, "registerAgent",
                                 ["", subject_id, role, country, salt_hex, digest_hex])
        assert receipt.validity == "VALID", receipt

    register("admin", CRED_ADMIN)
    register(passport_agent_id(topology), ROLE_PASSPORT_AGENT)
    for v in topology.visa_orgs:
        register(visa_agent_id(v["country"]), ROLE_VISA_AGENT, v["country"])


def load_network(data_dir: str, seed: int | None = None,
                 clock_spec: str | None = None) -> Network:
    """Rebuild a network from its persisted ledgers and identities."""
    topology = Topology.from_file(os.path.join(data_dir, "topology.json"))
    orderer_admin = load_identity(
        os.path.join(data_dir, topology.orderer_org, "orderer-admin.id"))
    peer_identities = {
        org: load_identity(os.path.join(data_dir, org, "peer0.id"))
        for org in topology.peer_orgs()
    }
    blocks = load_blocks(ledger_path(data_dir, topology.orderer_org,
                                     topology.channel_id))
    state = replay(blocks)
    config = load_channel_config(state)

    clock = make_clock(clock_spec)
    network = Network(config, orderer_admin, peer_identities, clock=clock,
                      data_dir=None, endorsing_org=topology.passport_org,
                      orderer_org=topology.orderer_org)
    network.install_everywhere(lambda: TravelContract(config.visa_types))
    # replay persisted logs into the fresh in-memory nodes, then reattach
    # the files for future appends
    for block in blocks:
        network.orderer.ledger.commit(_strip_flags(block))
    network.orderer.last_cut = clock.now()
    for org, peer in network.peers.items():
        peer_blocks = load_blocks(ledger_path(data_dir, org, topology.channel_id))
        for block in peer_blocks:
            peer.on_block_delivered(_strip_flags(block))
    network.orderer.ledger.log.path = ledger_path(
        data_dir, topology.orderer_org, topology.channel_id)
    for org, peer in network.peers.items():
        peer.ledger.log.path = ledger_path(data_dir, org, topology.channel_id)
    network.data_dir = data_dir
    return network


def _strip_flags(block):
    from .network import _clone_block

    clone = _clone_block(block)
    clone.validation_flags = []
    return clone


@dataclass
class AuditReport:
    ok: bool
    lines: list = field(default_factory=list)

    def add(self, ok: bool, text: str) -> None:
        self.lines.append(("OK  " if ok else "FAIL") + " " + text)
        if not ok:
            self.ok = False


def audit(data_dir: str) -> AuditReport:
    """Verify every org's chain, check replay equivalence, diff peers."""
    topology = Topology.from_file(os.path.join(data_dir, "topology.json"))
    orderer_admin = load_identity(
        os.path.join(data_dir, topology.orderer_org, "orderer-admin.id"))
    report = AuditReport(True)
    digests = {}
    for org in topology.org_names():
        path = ledger_path(data_dir, org, topology.channel_id)
        try:
            blocks = load_blocks(path)
            chain_report = verify_chain(blocks, orderer_admin.certificate)
            if not chain_report.ok:
                report.add(False, f"{org}: chain invalid at block "
                                  f"{chain_report.failed_block} ({chain_report.reason})")
                continue
            state = replay(blocks, orderer_admin.certificate)
            digest = state.state_digest().hex()
            digests[org] = (len(blocks), blocks[-1].header.digest().hex(), digest)
            report.add(True, f"{org}: {len(blocks)} blocks, head "
                             f"{digests[org][1][:16]}…, state {digest[:16]}…")
        except PlatformError as e:
            report.add(False, f"{org}: {e.code} {e.message}")
    if len({d for _, _, d in digests.values()}) > 1:
        report.add(False, "peers diverge: world states differ")
    elif digests:
        report.add(True, "all org copies identical")
    return report


def state_digest_of(data_dir: str, org: str, channel_id: str) -> str:
    blocks = load_blocks(ledger_path(data_dir, org, channel_id))
    return replay(blocks).state_digest().hex()


def dump_blocks(data_dir: str, start: int, stop: int, out_dir: str) -> list[str]:
    topology = Topology.from_file(os.path.join(data_dir, "topology.json"))
    blocks = load_blocks(ledger_path(data_dir, topology.orderer_org,
                                     topology.channel_id))
    if start < 0 or stop >= len(blocks) or start > stop:
        raise PlatformError("OUT_OF_RANGE", f"blocks {start}..{stop}")
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for block in blocks[start : stop + 1]:
        path = os.path.join(out_dir, f"block_{block.header.number:06d}.bin")
        with open(path, "wb") as f:
            f.write(canonical_encode(block.to_record()))
        written.append(path)
    return written


@dataclass
class ScenarioResult:
    transcript: list
    passport_id: str
    visa_id: str | None

    def lines(self) -> list[str]:
        return [f"{step}: {detail}" for step, detail in self.transcript]


def run_scenario(network: Network, gateway: GatewayService, topology: Topology,
                 decision: str = "APPROVE") -> ScenarioResult:
    """The end-to-end demo: passport application through visa issuance."""
    transcript = []

    def log(step, detail):
        transcript.append((step, detail))

    citizen = "alice"
    country = topology.visa_orgs[0]["country"]

    receipt = gateway.apply_passport(
        citizen, "Alice Traveller", "alice@example.com", 919876543210,
        "42 MG Road, Bangalore", 234567890123,
        demo_password(citizen))
    log("applyPassport", receipt)

    agent = gateway.login(passport_agent_id(topology), demo_password(passport_agent_id(topology)))
    pending = gateway.pending_passport_applications(agent)["applications"]
    log("listPassportApplications", [a["userId"] for a in pending])
    assert any(a["userId"] == citizen for a in pending), "application not listed"

    decision_receipt = gateway.decide_passport_application(agent, citizen, decision)
    log("reviewPassportApplication", decision_receipt)
    if decision == "REJECT":
        return ScenarioResult(transcript, "", None)
    passport_id = _passport_id_from(gateway, citizen)
    log("passportIssued", passport_id)

    session = gateway.login(citizen, demo_password(citizen))
    docs = gateway.citizen_documents(session)
    assert docs.get("passport", {}).get("passportId") == passport_id
    log("getCitizenDocuments", {"passport": passport_id})

    visa_receipt = gateway.apply_visa(session, passport_id, country, "TOURIST", 90)
    log("applyVisa", visa_receipt)

    visa_agent = gateway.login(visa_agent_id(country), demo_password(visa_agent_id(country)))
    queue = gateway.pending_visa_applications(visa_agent)["applications"]
    log("listVisaApplications", [a["applicationId"] for a in queue])
    application_id = queue[0]["applicationId"]

    verify_receipt = gateway.verify_visa_application(visa_agent, application_id)
    log("verifyVisaApplication", verify_receipt)

    approve_receipt = gateway.decide_visa_application(visa_agent, application_id, "APPROVE")
    log("reviewVisaApplication", approve_receipt)

    docs = gateway.citizen_documents(session)
    visas = docs["visas"]
    assert len(visas) == 1, f"expected one visa, got {len(visas)}"
    log("queryVisa", visas[0]["visaId"])
    return ScenarioResult(transcript, passport_id, visas[0]["visaId"])


def _passport_id_from(gateway: GatewayService, citizen: str) -> str:
    session = gateway.login(citizen, demo_password(citizen))
    docs = gateway.citizen_documents(session)
    return docs["passport"]["passportId"]
