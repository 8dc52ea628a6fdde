"""Acceptance suite: one test and one printed PASS/FAIL line per criterion."""

import os
import random
import signal
import socket
import subprocess
import sys
import time

import pytest
from click.testing import CliRunner

from travelchain import identity as ident
from travelchain import netops
from travelchain.bench import run_benchmark
from travelchain.cli import main as cli_main
from travelchain.clocks import SeededRng
from travelchain.codec import canonical_encode, compute_digest, decode
from travelchain.errors import PlatformError
from travelchain.gateway import ALL_FUNCTIONS, ROLE_TABLE, GatewayService, Session
from travelchain.ledger import (
    ReadEntry,
    Version,
    build_block,
    load_blocks,
    replay,
    validate_transactions,
    verify_chain,
)
from travelchain.network import ledger_path
from travelchain.ordering import create_channel

from conftest import Fixture

CLOCK = "2021-01-01"


def report(name, ok, detail=""):
    line = ("PASS " if ok else "FAIL ") + name + (f" [{detail}]" if detail else "")
    print(line)
    sys.stderr.write(line + "\n")
    assert ok, line


def salted(password, salt=b"\x01" * 16):
    return salt.hex(), compute_digest(salt + password.encode()).hex()


def run_cli(*args):
    return CliRunner().invoke(cli_main, list(args))


def bootstrap_dir(tmp_path, name="net", seed=7):
    data_dir = str(tmp_path / name)
    netops.bootstrap(netops.default_topology(), data_dir, seed=seed,
                     clock_spec=CLOCK)
    return data_dir


def test_tamper_evidence(tmp_path):
    """Every single-byte flip in the persisted chain must be detected."""
    path = str(tmp_path / "blocks.log")
    fx = Fixture(seed=2)
    orderer = fx.orderer(path)
    for i in range(2):  # genesis + 2 = a 3-block chain
        orderer.broadcast(fx.make_tx(i, writes=[(f"k{i}", b"v")]), fx.clock.now())
        orderer.cut_block(fx.clock.now(), force=True)
    raw = open(path, "rb").read()

    started = time.monotonic()
    undetected = []
    for pos in range(len(raw)):
        flipped = raw[:pos] + bytes([raw[pos] ^ 0xFF]) + raw[pos + 1:]
        open(path, "wb").write(flipped)
        try:
            blocks = load_blocks(path)
            if verify_chain(blocks, fx.orderer_admin.certificate).ok:
                undetected.append(pos)
        except PlatformError:
            pass
    elapsed = time.monotonic() - started
    report("tamper evidence: 100% of single-byte flips detected",
           not undetected and elapsed < 30.0,
           f"{len(raw)} positions, {len(undetected)} missed, {elapsed:.1f}s")


def test_replay_equivalence():
    """500 randomized committed txs; replay == live state on both peers."""
    fx = Fixture(seed=5, extra_orgs=("VisaOfficeFrance",))
    net = fx.network()
    orderer = net.orderer
    rnd = random.Random(42)
    keys = [f"k{i}" for i in range(20)]

    started = time.monotonic()
    sent = 0
    while sent < 500:
        for _ in range(rnd.randint(1, 5)):
            key = rnd.choice(keys)
            current = orderer.ledger.state.get(key)
            version = current[1] if current else None
            if rnd.random() < 0.2:  # some stale reads, so invalid txs occur
                version = None if version is not None else Version(0, 0)
            tx = fx.make_tx(f"r{sent}", reads=[ReadEntry(key, version)],
                            writes=[(key, rnd.randbytes(6))])
            assert orderer.broadcast(tx, fx.clock.now()).accepted
            sent += 1
        block = orderer.cut_block(fx.clock.now(), force=True)
        net.deliver_to_peers(block)
    elapsed = time.monotonic() - started

    ok = True
    states = []
    for peer in net.peers.values():
        replayed = replay(peer.ledger.log.blocks, fx.orderer_admin.certificate)
        ok &= replayed.entries == peer.ledger.state.entries
        ok &= replayed.tx_ids == peer.ledger.state.tx_ids
        ok &= replayed.state_digest() == peer.ledger.state.state_digest()
        states.append(peer.ledger.state.state_digest())
    ok &= len(set(states)) == 1
    report("replay equivalence: 500 txs, 2 peers, replay == live state",
           ok and elapsed < 10.0, f"{sent} txs in {elapsed:.1f}s")


def _serial_flags(base_state, txs):
    """Independent oracle: execute txs one at a time, validating reads
    against the state left by every earlier transaction."""
    entries = dict(base_state.entries)
    used = set(base_state.tx_ids)
    flags = []
    for idx, tx in enumerate(txs):
        if tx.tx_id in used:
            flags.append("DUPLICATE_TXID")
            continue
        used.add(tx.tx_id)
        current = {r.key: (entries[r.key][1] if r.key in entries else None)
                   for r in tx.read_set}
        if all(current[r.key] == r.version for r in tx.read_set):
            flags.append("VALID")
            for w in tx.write_set:
                if w.value is None:
                    entries.pop(w.key, None)
                else:
                    entries[w.key] = (w.value, ("uncommitted", idx))
        else:
            flags.append("MVCC_CONFLICT")
    return flags


def test_mvcc_correctness():
    fx = Fixture(seed=6)
    net = fx.network()
    s, d = salted("pw")
    net.submit(fx.orderer_admin, "registerAgent",
               ["", "pa", "PASSPORT_AGENT", "", s, d])
    net.submit(fx.orderer_admin, "applyPassport",
               ["alice", "Alice", "a@x.com", "1", "addr", "234567890123", s, d])

    # two independent endorsements of the same approval, one block
    from travelchain.peer import make_proposal

    peer = net.peers["PassportOffice"]
    envelopes = []
    for _ in range(2):
        proposal = make_proposal(fx.orderer_admin, fx.config.channel_id,
                                 net.contract_name, "reviewPassportApplication",
                                 ["pa", "alice", "APPROVE"], fx.clock.now())
        envelopes.append(net.co_endorse(peer.endorse_proposal(proposal)))
    for envelope in envelopes:
        assert net.orderer.broadcast(envelope, fx.clock.now()).accepted
    block = net.orderer.cut_block(fx.clock.now(), force=True)
    reports = net.deliver_to_peers(block)
    flags = next(iter(reports.values())).flags
    passports = [k for k in peer.ledger.state.entries if k.startswith("PASSPORT_")]
    fixture_ok = flags == ["VALID", "MVCC_CONFLICT"] and len(passports) == 1

    # randomized conflict instances against the serial oracle
    oracle_ok = True
    rnd = random.Random(17)
    for case in range(100):
        base = Fixture(seed=100 + case)
        orderer = base.orderer()
        for i in range(5):
            orderer.broadcast(base.make_tx(i, writes=[(f"k{i}", b"v")]),
                              base.clock.now())
        orderer.cut_block(base.clock.now(), force=True)
        state = orderer.ledger.state
        txs = []
        for j in range(rnd.randint(2, 6)):
            key = f"k{rnd.randrange(5)}"
            committed = state.get(key)
            version = committed[1] if (committed and rnd.random() < 0.7) else None
            n = rnd.randrange(4) if rnd.random() < 0.3 else f"u{case}-{j}"
            txs.append(base.make_tx(n, reads=[ReadEntry(key, version)],
                                    writes=[(key, rnd.randbytes(3))]))
        block = build_block(2, orderer.ledger.log.head_hash(), txs,
                            base.orderer_admin)
        oracle_ok &= validate_transactions(block, state) == _serial_flags(state, txs)
    report("MVCC: conflicting approvals -> [VALID, MVCC_CONFLICT], one "
           "passport; 100 randomized instances match the serial oracle",
           fixture_ok and oracle_ok)


def test_policy_enforcement():
    fx = Fixture(seed=8)
    net = fx.network()
    service = GatewayService(net, clock=fx.clock, rng=SeededRng(8))
    height_before = net.orderer.ledger.log.height

    matrix_ok = True
    roles = [None, "CITIZEN", "PASSPORT_AGENT", "VISA_AGENT", "ADMIN"]
    for role in roles:
        session = None if role is None else Session("t", "s", role, None, 2**62)
        for function in sorted(ALL_FUNCTIONS):
            allowed = function in ROLE_TABLE[role]
            try:
                service._authorize(session, function)
                matrix_ok &= allowed
            except PlatformError as e:
                matrix_ok &= (not allowed) and e.code == "FORBIDDEN_FUNCTION"
    matrix_ok &= net.orderer.ledger.log.height == height_before

    # Readers rule OR('OrdererMSP.member')
    readers_pos = bool(net.orderer.deliver(0, fx.orderer_member.certificate,
                                           fx.clock.now()))
    try:
        net.orderer.deliver(0, fx.peer_identities["PassportOffice"].certificate,
                            fx.clock.now())
        readers_neg = False
    except PlatformError as e:
        readers_neg = e.code == "POLICY_DENIED"

    # Writers rule OR('OrdererMSP.member')
    writers_pos = net.orderer.broadcast(
        fx.make_tx("w1", signer=fx.orderer_member), fx.clock.now()).accepted
    writers_neg = net.orderer.broadcast(
        fx.make_tx("w2", signer=fx.peer_identities["PassportOffice"]),
        fx.clock.now()).reason == "POLICY_DENIED"

    # Admins rule OR('OrdererMSP.admin')
    admins_pos = create_channel(fx.config, fx.orderer_admin,
                                fx.clock.now()).header.number == 0
    try:
        create_channel(fx.config, fx.orderer_member, fx.clock.now())
        admins_neg = False
    except PlatformError as e:
        admins_neg = e.code == "NOT_ADMIN"

    report("policy enforcement: full role x function matrix plus the three "
           "channel rules, each with a positive and a negative case",
           matrix_ok and readers_pos and readers_neg and writers_pos
           and writers_neg and admins_pos and admins_neg)


PASSPORT_FIELDS = {"passportId", "name", "email", "phoneNumber", "address",
                   "aadhaarNumber", "issueDate"}
VISA_FIELDS = {"visaId", "country", "visaType", "passportId", "name", "email",
               "address", "aadhaarNumber", "visaIssueDate", "visaExpireDate"}


def test_workflow_fidelity(tmp_path):
    from datetime import date

    data_dir = bootstrap_dir(tmp_path)
    result = run_cli("scenario", "paper-demo", "--data-dir", data_dir,
                     "--seed", "7", "--clock", CLOCK)
    scenario_ok = result.exit_code == 0

    state = replay(load_blocks(ledger_path(data_dir, "Orderer", "travel-channel")))
    passports = [decode(v) for k, (v, _) in state.entries.items()
                 if k.startswith("PASSPORT_")]
    visas = [decode(v) for k, (v, _) in state.entries.items()
             if k.startswith("VISA_")]
    shape_ok = (len(passports) == 1 and len(visas) == 1
                and set(passports[0]) == PASSPORT_FIELDS
                and set(visas[0]) == VISA_FIELDS)
    span = (date.fromisoformat(visas[0]["visaExpireDate"])
            - date.fromisoformat(visas[0]["visaIssueDate"])).days if visas else 0
    audit_ok = run_cli("audit", "--data-dir", data_dir).exit_code == 0
    report("workflow fidelity: scenario exits 0; one passport + one visa with "
           "exact field names; 90-day validity; audit OK",
           scenario_ok and shape_ok and span == 90 and audit_ok)


def test_determinism(tmp_path):
    chains = []
    for name in ("run-a", "run-b"):
        data_dir = bootstrap_dir(tmp_path, name)
        result = run_cli("scenario", "paper-demo", "--data-dir", data_dir,
                         "--seed", "7", "--clock", CLOCK)
        assert result.exit_code == 0, result.output
        logs = {}
        for org in netops.default_topology().org_names():
            blob = open(ledger_path(data_dir, org, "travel-channel"), "rb").read()
            logs[org] = compute_digest(blob).hex()
        chains.append(logs)
    report("determinism: identical --seed/--clock runs produce hash-identical "
           "chains on every org", chains[0] == chains[1],
           f"orderer chain {chains[0]['Orderer'][:16]}…")


def test_consensus_cost():
    bench = run_benchmark(tx_count=100, pow_bits=20)
    report("consensus cost: orderer path >= 100x fewer digests than 20-bit "
           "proof-of-work; 100 txs in < 2s",
           bench.ratio >= 100.0 and bench.orderer_seconds < 2.0,
           f"ratio {bench.ratio:.0f}x, orderer {bench.orderer_seconds:.2f}s")


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _start_server(data_dir, port):
    proc = subprocess.Popen(
        [sys.executable, "-m", "travelchain.cli", "serve",
         "--data-dir", data_dir, "--gateway-port", str(port)],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    deadline = time.monotonic() + 30
    while time.monotonic() < deadline:
        try:
            with socket.create_connection(("127.0.0.1", port), timeout=0.2):
                return proc
        except OSError:
            if proc.poll() is not None:
                raise RuntimeError("server exited early")
            time.sleep(0.1)
    proc.kill()
    raise RuntimeError("server did not come up")


def test_crash_recovery(tmp_path):
    import httpx

    data_dir = bootstrap_dir(tmp_path)
    port = _free_port()
    base = f"http://127.0.0.1:{port}"
    proc = _start_server(data_dir, port)
    try:
        with httpx.Client(base_url=base, timeout=10) as http:
            r = http.post("/api/citizen/passport-applications", json={
                "userId": "alice", "name": "Alice", "email": "a@x.com",
                "phoneNumber": "1", "address": "addr",
                "aadhaarNumber": "234567890123", "password": "hunter2!"})
            assert r.status_code == 200, r.text
            agent = http.post("/api/login", json={
                "subjectId": "passport-agent",
                "password": netops.demo_password("passport-agent")}).json()
            headers = {"Authorization": "Bearer " + agent["token"]}
            r = http.post("/api/agent/passport/alice/decision",
                          json={"decision": "APPROVE"}, headers=headers)
            assert r.json()["validity"] == "VALID", r.text
    finally:
        proc.send_signal(signal.SIGKILL)
        proc.wait()

    pre_crash = {org: netops.state_digest_of(data_dir, org, "travel-channel")
                 for org in netops.default_topology().org_names()}
    recovered = netops.load_network(data_dir, clock_spec=None)
    state_ok = all(
        pre_crash[org] == peer.ledger.state.state_digest().hex()
        for org, peer in recovered.peers.items())
    state_ok &= pre_crash["Orderer"] == \
        recovered.orderer.ledger.state.state_digest().hex()

    proc = _start_server(data_dir, port)
    try:
        with httpx.Client(base_url=base, timeout=10) as http:
            alice = http.post("/api/login", json={
                "subjectId": "alice", "password": "hunter2!"}).json()
            citizen = {"Authorization": "Bearer " + alice["token"]}
            docs = http.get("/api/citizen/documents", headers=citizen).json()
            pid = docs["passport"]["passportId"]
            r = http.post("/api/citizen/visa-applications", headers=citizen,
                          json={"passportId": pid, "country": "France",
                                "visaType": "TOURIST", "durationDays": 90})
            assert r.json()["validity"] == "VALID", r.text
            va = http.post("/api/login", json={
                "subjectId": "visa-agent-france",
                "password": netops.demo_password("visa-agent-france")}).json()
            agent = {"Authorization": "Bearer " + va["token"]}
            queue = http.get("/api/agent/visa/pending", headers=agent).json()
            vid = queue["applications"][0]["applicationId"]
            http.post(f"/api/agent/visa/{vid}/verify", headers=agent)
            r = http.post(f"/api/agent/visa/{vid}/decision",
                          json={"decision": "APPROVE"}, headers=agent)
            visa_ok = r.json()["validity"] == "VALID"
            docs = http.get("/api/citizen/documents", headers=citizen).json()
            visa_ok &= len(docs["visas"]) == 1
    finally:
        proc.send_signal(signal.SIGKILL)
        proc.wait()

    report("crash recovery: state survives SIGKILL byte-for-byte and the visa "
           "flow completes after restart", state_ok and visa_ok)
