"""Operator CLI: bootstrap, scenario, audit, dump, bench, serve."""

from __future__ import annotations

import json
import os
import sys

import click

from . import netops
from .bench import DEFAULT_POW_BITS, run_benchmark
from .errors import PlatformError
from .gateway import DEFAULT_SESSION_TTL_MICROS, GatewayService, create_app


@click.group()
def main():
    """Permissioned travel-document ledger operations."""


def _fail(e: PlatformError):
    click.echo(f"error: {e.code}: {e.message}", err=True)
    sys.exit(1)


@main.command()
@click.option("--topology", "topology_path", type=click.Path(exists=True),
              help="Topology JSON; omit for the built-in two-visa-office demo.")
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=None,
              help="Seed all key generation and salts for reproducible runs.")
@click.option("--clock", "clock_spec", default=None,
              help="ISO start instant for a deterministic stepping clock.")
def bootstrap(topology_path, data_dir, seed, clock_spec):
    """Initialize a demo network on disk."""
    try:
        topo = (netops.Topology.from_file(topology_path) if topology_path
                else netops.default_topology())
        netops.bootstrap(topo, data_dir, seed=seed, clock_spec=clock_spec)
    except PlatformError as e:
        _fail(e)
    click.echo(f"bootstrapped channel {topo.channel_id} in {data_dir}")
    click.echo("agents: admin, " + netops.passport_agent_id(topo) + ", "
               + ", ".join(netops.visa_agent_id(v["country"]) for v in topo.visa_orgs))


@main.command()
@click.argument("name", default="paper-demo")
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None)
@click.option("--clock", "clock_spec", default=None)
@click.option("--decision", type=click.Choice(["APPROVE", "REJECT"]),
              default="APPROVE")
def scenario(name, data_dir, seed, clock_spec, decision):
    """Run the end-to-end demo workflow against a bootstrapped network."""
    if name != "paper-demo":
        click.echo(f"unknown scenario {name}", err=True)
        sys.exit(1)
    try:
        network = netops.load_network(data_dir, clock_spec=clock_spec)
        gateway = GatewayService(network, rng=netops.make_rng(seed))
        topo = netops.Topology.from_file(os.path.join(data_dir, "topology.json"))
        result = netops.run_scenario(network, gateway, topo, decision=decision)
    except (PlatformError, AssertionError) as e:
        if isinstance(e, PlatformError):
            _fail(e)
        click.echo(f"scenario failed: {e}", err=True)
        sys.exit(1)
    for line in result.lines():
        click.echo(line)


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True))
def audit(data_dir):
    """Verify chains, replay equivalence, and peer agreement."""
    report = netops.audit(data_dir)
    for line in report.lines:
        click.echo(line)
    sys.exit(0 if report.ok else 1)


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@click.option("--from", "start", type=int, default=0)
@click.option("--to", "stop", type=int, required=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def dump(data_dir, start, stop, out_dir):
    """Write one canonical-encoded file per block."""
    try:
        written = netops.dump_blocks(data_dir, start, stop, out_dir)
    except PlatformError as e:
        _fail(e)
    for path in written:
        click.echo(path)


@main.command()
@click.option("--txs", type=int, default=100)
@click.option("--pow-bits", type=int, default=DEFAULT_POW_BITS)
@click.option("--json", "as_json", is_flag=True)
def bench(txs, pow_bits, as_json):
    """Compare ordering-path digest cost against a toy proof-of-work miner."""
    report = run_benchmark(txs, pow_bits)
    if as_json:
        click.echo(json.dumps({
            "txCount": report.tx_count,
            "powBits": report.pow_bits,
            "ordererDigests": report.orderer_digests,
            "ordererSeconds": report.orderer_seconds,
            "powDigests": report.pow_digests,
            "powSeconds": report.pow_seconds,
            "ratio": report.ratio,
        }))
    else:
        for line in report.lines():
            click.echo(line)


@main.command()
@click.option("--data-dir", default=None, type=click.Path(exists=True))
@click.option("--gateway-port", type=int, default=None)
def serve(data_dir, gateway_port):
    """Run orderer, peers, and the HTTP gateway in one process."""
    import uvicorn

    data_dir = data_dir or os.environ.get("DATA_DIR")
    if not data_dir:
        click.echo("serve needs --data-dir or DATA_DIR", err=True)
        sys.exit(1)
    port = gateway_port or int(os.environ.get("GATEWAY_PORT", "8440"))
    ttl = int(os.environ.get("SESSION_TTL_SECONDS",
                             DEFAULT_SESSION_TTL_MICROS // 1_000_000))
    network = netops.load_network(data_dir)
    service = GatewayService(network, session_ttl_micros=ttl * 1_000_000)
    app = create_app(service)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")


if __name__ == "__main__":
    main()
