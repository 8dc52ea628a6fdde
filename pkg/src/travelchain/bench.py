"""Consensus-cost benchmark: orderer batching vs a toy proof-of-work miner.

Both paths run over the same synthetic transactions and share the
instrumented digest counter, so the report compares like with like: how
many hash evaluations each consensus style needs to commit N txs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from . import codec, identity as ident
from .clocks import SteppingClock, SeededRng, parse_instant
from .codec import canonical_encode, compute_digest
from .ledger import Endorsement, TransactionEnvelope, WriteEntry
from .ordering import ChannelConfig, Orderer

DEFAULT_POW_BITS = 20
POW_BLOCK_SIZE = 25


@dataclass
class BenchReport:
    tx_count: int
    pow_bits: int
    orderer_digests: int
    orderer_seconds: float
    pow_digests: int
    pow_seconds: float
    pow_blocks: int

    @property
    def ratio(self) -> float:
        return self.pow_digests / max(1, self.orderer_digests)

    def lines(self) -> list[str]:
        return [
            f"txs: {self.tx_count}",
            f"orderer path:  {self.orderer_digests} digest evaluations "
            f"in {self.orderer_seconds:.3f}s",
            f"pow path ({self.pow_bits} bits, {self.pow_blocks} blocks): "
            f"{self.pow_digests} digest evaluations in {self.pow_seconds:.3f}s",
            f"digest ratio (pow / orderer): {self.ratio:.1f}x",
        ]


def _bench_network(seed: int = 7):
    rng = SeededRng(seed)
    clock = SteppingClock(parse_instant("2021-01-01"))
    not_after = parse_instant("2031-01-01")
    ca = ident.CertificateAuthority("OrdererMSP", ident.generate_private_key(rng))
    admin = ca.new_identity("orderer-admin", ident.ROLE_ADMIN, rng, not_after)
    config = ChannelConfig(
        channel_id="bench",
        msps=(ca.msp_config(("orderer-admin",)),),
        readers_policy=ident.parse_policy("OR('OrdererMSP.member')"),
        writers_policy=ident.parse_policy("OR('OrdererMSP.member')"),
        admins_policy=ident.parse_policy("OR('OrdererMSP.admin')"),
        batch_max_count=10,
        batch_timeout_micros=2_000_000,
        orderer_certificate=admin.certificate,
    )
    return config, admin, clock


def synthetic_txs(count: int, config, admin, clock) -> list[TransactionEnvelope]:
    txs = []
    for i in range(count):
        tx = TransactionEnvelope(
            tx_id=compute_digest(f"bench-tx-{i}".encode()).hex(),
            channel_id=config.channel_id,
            chaincode_name="kv",
            function="put",
            args=(f"k{i}", f"v{i}"),
            read_set=(),
            write_set=(WriteEntry(f"k{i}", f"v{i}".encode()),),
            creator=admin.certificate,
            endorsements=(),
            timestamp=clock.now(),
        )
        sig = admin.sign(tx.signed_bytes())
        txs.append(TransactionEnvelope(
            **{**tx.__dict__, "endorsements": (Endorsement(admin.certificate, sig),)}))
    return txs


def run_orderer_path(tx_count: int) -> tuple[int, float, int]:
    """Commit tx_count synthetic txs through ordering; returns
    (digest evaluations, wall seconds, committed tx total)."""
    config, admin, clock = _bench_network()
    orderer = Orderer(config, admin)
    orderer.bootstrap_channel(clock.now())
    txs = synthetic_txs(tx_count, config, admin, clock)
    codec.reset_digest_count()
    start = time.perf_counter()
    committed = 0
    for tx in txs:
        result = orderer.broadcast(tx, clock.now())
        assert result.accepted, result.reason
        block = orderer.cut_block(clock.now())
        if block is not None:
            committed += len(block.data)
    block = orderer.cut_block(clock.now(), force=True)
    if block is not None:
        committed += len(block.data)
    elapsed = time.perf_counter() - start
    return codec.digest_count(), elapsed, committed


def mine_pow_block(payload: bytes, bits: int) -> tuple[int, int]:
    """Nonce search until the digest has `bits` leading zero bits."""
    target_shift = 256 - bits
    nonce = 0
    while True:
        digest = compute_digest(payload + nonce.to_bytes(8, "big"))
        if int.from_bytes(digest, "big") >> target_shift == 0:
            return nonce, 0
        nonce += 1


def run_pow_path(tx_count: int, bits: int,
                 block_size: int = POW_BLOCK_SIZE) -> tuple[int, float, int]:
    config, admin, clock = _bench_network(seed=13)
    txs = synthetic_txs(tx_count, config, admin, clock)
    codec.reset_digest_count()
    start = time.perf_counter()
    prev_hash = codec.ZERO_DIGEST
    blocks = 0
    for i in range(0, len(txs), block_size):
        batch = txs[i : i + block_size]
        payload = prev_hash + compute_digest(
            canonical_encode([tx.to_record() for tx in batch]))
        nonce, _ = mine_pow_block(payload, bits)
        prev_hash = compute_digest(payload + nonce.to_bytes(8, "big"))
        blocks += 1
    elapsed = time.perf_counter() - start
    return codec.digest_count(), elapsed, blocks


def run_benchmark(tx_count: int, pow_bits: int = DEFAULT_POW_BITS,
                  pow_block_size: int = POW_BLOCK_SIZE) -> BenchReport:
    orderer_digests, orderer_seconds, committed = run_orderer_path(tx_count)
    assert committed == tx_count
    pow_digests, pow_seconds, pow_blocks = run_pow_path(
        tx_count, pow_bits, pow_block_size)
    return BenchReport(tx_count, pow_bits, orderer_digests, orderer_seconds,
                       pow_digests, pow_seconds, pow_blocks)
