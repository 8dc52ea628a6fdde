"""Injectable time and randomness sources.

All timestamps in the platform are integer microseconds since the Unix
epoch (UTC). Nothing below the gateway ever reads the system clock
directly; a Clock is threaded through so demo runs can be replayed
bit-for-bit.
"""

from __future__ import annotations

import hashlib
import secrets
import time
from datetime import date, datetime, timezone

MICROS = 1_000_000


def parse_instant(text: str) -> int:
    """ISO-8601 instant (or bare date) -> epoch microseconds."""
    if "T" not in text:
        text += "T00:00:00"
    dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp() * MICROS)


def format_instant(micros: int) -> str:
    dt = datetime.fromtimestamp(micros / MICROS, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def to_date(micros: int) -> date:
    return datetime.fromtimestamp(micros / MICROS, tz=timezone.utc).date()


class WallClock:
    def now(self) -> int:
        return int(time.time() * MICROS)


class SteppingClock:
    """Starts at a fixed instant and advances by a fixed step per reading."""

    def __init__(self, start_micros: int, step_micros: int = MICROS):
        self._next = start_micros
        self._step = step_micros

    def now(self) -> int:
        current = self._next
        self._next += self._step
        return current


class SystemRng:
    def bytes(self, n: int) -> bytes:
        return secrets.token_bytes(n)


class SeededRng:
    """Deterministic byte stream derived from a seed (SHA-256 in counter mode)."""

    def __init__(self, seed: int):
        self._seed = seed.to_bytes(16, "big", signed=True)
        self._counter = 0

    def bytes(self, n: int) -> bytes:
        out = b""
        while len(out) < n:
            block = hashlib.sha256(
                self._seed + self._counter.to_bytes(8, "big")
            ).digest()
            self._counter += 1
            out += block
        return out[:n]
