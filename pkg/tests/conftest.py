import pytest

from travelchain import identity as ident
from travelchain.clocks import SeededRng, SteppingClock, parse_instant
from travelchain.contract import TravelContract
from travelchain.ledger import Endorsement, TransactionEnvelope, WriteEntry
from travelchain.network import Network
from travelchain.ordering import ChannelConfig, Orderer

NOT_AFTER = parse_instant("2031-01-01")
START = parse_instant("2021-01-01")


class Fixture:
    """A tiny two-org channel (orderer + passport office) built in memory."""

    def __init__(self, seed=1, extra_orgs=()):
        self.rng = SeededRng(seed)
        self.clock = SteppingClock(START)
        self.orderer_ca = ident.CertificateAuthority(
            "OrdererMSP", ident.generate_private_key(self.rng))
        self.org_cas = {"PassportOffice": ident.CertificateAuthority(
            "PassportOfficeMSP", ident.generate_private_key(self.rng))}
        for org in extra_orgs:
            self.org_cas[org] = ident.CertificateAuthority(
                org + "MSP", ident.generate_private_key(self.rng))
        self.orderer_admin = self.orderer_ca.new_identity(
            "orderer-admin", ident.ROLE_ADMIN, self.rng, NOT_AFTER)
        self.orderer_member = self.orderer_ca.new_identity(
            "orderer-member", ident.ROLE_MEMBER, self.rng, NOT_AFTER)
        self.peer_identities = {
            org: ca.new_identity(f"peer0@{org}", ident.ROLE_MEMBER, self.rng, NOT_AFTER)
            for org, ca in self.org_cas.items()
        }
        msps = [self.orderer_ca.msp_config(("orderer-admin",))]
        msps += [ca.msp_config() for ca in self.org_cas.values()]
        self.config = ChannelConfig(
            channel_id="test-channel",
            msps=tuple(msps),
            readers_policy=ident.parse_policy("OR('OrdererMSP.member')"),
            writers_policy=ident.parse_policy("OR('OrdererMSP.member')"),
            admins_policy=ident.parse_policy("OR('OrdererMSP.admin')"),
            batch_max_count=10,
            batch_timeout_micros=2_000_000,
            orderer_certificate=self.orderer_admin.certificate,
        )

    def orderer(self, path=None):
        orderer = Orderer(self.config, self.orderer_admin, path)
        orderer.bootstrap_channel(self.clock.now())
        return orderer

    def network(self, data_dir=None):
        net = Network(self.config, self.orderer_admin, self.peer_identities,
                      clock=self.clock, data_dir=data_dir,
                      endorsing_org="PassportOffice")
        net.install_everywhere(TravelContract)
        net.bootstrap_channel()
        return net

    def make_tx(self, n, reads=(), writes=(), signer=None, channel=None):
        """A hand-built endorsed transaction writing the given entries."""
        signer = signer or self.orderer_member
        tx = TransactionEnvelope(
            tx_id=f"tx-{n}",
            channel_id=channel or self.config.channel_id,
            chaincode_name="kv",
            function="put",
            args=(),
            read_set=tuple(reads),
            write_set=tuple(
                w if isinstance(w, WriteEntry) else WriteEntry(*w) for w in writes),
            creator=signer.certificate,
            endorsements=(),
            timestamp=self.clock.now(),
        )
        sig = signer.sign(tx.signed_bytes())
        return TransactionEnvelope(
            **{**tx.__dict__, "endorsements": (Endorsement(signer.certificate, sig),)})


@pytest.fixture
def fx():
    return Fixture()
