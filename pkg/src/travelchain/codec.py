"""Canonical byte encoding and the platform digest primitive.

Every value that is hashed, signed, or persisted goes through
``canonical_encode`` so that equal records always produce identical
bytes, on any machine. The encoding is a restricted JSON dialect:

* maps ``{"k":v,...}`` with string keys sorted by code point
* lists ``[a,b,...]``
* strings as JSON strings (UTF-8, minimal escaping)
* integers in base 10, booleans as ``true``/``false``
* byte strings as ``h"<lowercase hex>"``
* no whitespace anywhere; floats are rejected outright

``decode`` is strict: it accepts only the canonical form (sorted keys,
lowercase hex, no stray bytes), so re-encoding a decoded value always
reproduces the input exactly.
"""

from __future__ import annotations

import hashlib
import json

from .errors import DECODE_INVALID, ENCODE_UNSUPPORTED, PlatformError

DIGEST_SIZE = 32
ZERO_DIGEST = bytes(DIGEST_SIZE)

_digest_count = 0


def compute_digest(data: bytes) -> bytes:
    """SHA-256 of ``data``; every call is counted for the consensus benchmark."""
    global _digest_count
    _digest_count += 1
    return hashlib.sha256(data).digest()


def digest_count() -> int:
    return _digest_count


def reset_digest_count() -> None:
    global _digest_count
    _digest_count = 0


def canonical_encode(value) -> bytes:
    out: list[str] = []
    _encode(value, out)
    return "".join(out).encode("utf-8")


def _encode(value, out: list) -> None:
    if isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, (bytes, bytearray)):
        out.append('h"' + bytes(value).hex() + '"')
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    elif isinstance(value, dict):
        keys = list(value.keys())
        for k in keys:
            if not isinstance(k, str):
                raise PlatformError(ENCODE_UNSUPPORTED, f"non-string map key {k!r}")
        out.append("{")
        for i, k in enumerate(sorted(keys)):
            if i:
                out.append(",")
            out.append(json.dumps(k, ensure_ascii=False))
            out.append(":")
            _encode(value[k], out)
        out.append("}")
    else:
        raise PlatformError(ENCODE_UNSUPPORTED, f"unsupported type {type(value).__name__}")


def decode(data: bytes):
    """Parse canonical bytes back into a value; rejects non-canonical input."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise PlatformError(DECODE_INVALID, str(e)) from None
    value, pos = _parse(text, 0)
    if pos != len(text):
        raise PlatformError(DECODE_INVALID, f"trailing bytes at {pos}")
    if canonical_encode(value) != data:
        raise PlatformError(DECODE_INVALID, "input is not in canonical form")
    return value


def _fail(pos: int, why: str):
    raise PlatformError(DECODE_INVALID, f"{why} at offset {pos}")


def _parse(text: str, pos: int):
    if pos >= len(text):
        _fail(pos, "unexpected end")
    c = text[pos]
    if c == "{":
        return _parse_map(text, pos)
    if c == "[":
        return _parse_list(text, pos)
    if c == '"':
        return _parse_string(text, pos)
    if c == "h" and text.startswith('h"', pos):
        end = text.find('"', pos + 2)
        if end < 0:
            _fail(pos, "unterminated hex string")
        hexpart = text[pos + 2 : end]
        if len(hexpart) % 2 or not all(ch in "0123456789abcdef" for ch in hexpart):
            _fail(pos, "invalid hex")
        return bytes.fromhex(hexpart), end + 1
    if text.startswith("true", pos):
        return True, pos + 4
    if text.startswith("false", pos):
        return False, pos + 5
    if c == "-" or c.isdigit():
        end = pos + 1 if c == "-" else pos
        while end < len(text) and text[end].isdigit():
            end += 1
        digits = text[pos:end]
        if digits in ("", "-"):
            _fail(pos, "bad integer")
        body = digits[1:] if digits[0] == "-" else digits
        if len(body) > 1 and body[0] == "0":
            _fail(pos, "leading zero")
        if digits == "-0":
            _fail(pos, "negative zero")
        return int(digits), end
    _fail(pos, f"unexpected character {c!r}")


def _parse_string(text: str, pos: int):
    # Delegate escape handling to the json parser on the smallest valid span.
    dec = json.JSONDecoder()
    try:
        s, end = dec.raw_decode(text, pos)
    except ValueError:
        _fail(pos, "bad string")
    if not isinstance(s, str):
        _fail(pos, "expected string")
    return s, end


def _parse_list(text: str, pos: int):
    items = []
    pos += 1
    if pos < len(text) and text[pos] == "]":
        return items, pos + 1
    while True:
        item, pos = _parse(text, pos)
        items.append(item)
        if pos >= len(text):
            _fail(pos, "unterminated list")
        if text[pos] == ",":
            pos += 1
            continue
        if text[pos] == "]":
            return items, pos + 1
        _fail(pos, "expected ',' or ']'")


def _parse_map(text: str, pos: int):
    result: dict = {}
    pos += 1
    if pos < len(text) and text[pos] == "}":
        return result, pos + 1
    prev_key = None
    while True:
        if pos >= len(text) or text[pos] != '"':
            _fail(pos, "expected map key")
        key, pos = _parse_string(text, pos)
        if prev_key is not None and key <= prev_key:
            _fail(pos, "map keys not strictly sorted")
        prev_key = key
        if pos >= len(text) or text[pos] != ":":
            _fail(pos, "expected ':'")
        value, pos = _parse(text, pos + 1)
        result[key] = value
        if pos >= len(text):
            _fail(pos, "unterminated map")
        if text[pos] == ",":
            pos += 1
            continue
        if text[pos] == "}":
            return result, pos + 1
        _fail(pos, "expected ',' or '}'")


def to_jsonable(value):
    """Render a decoded canonical value as plain JSON types (bytes -> hex)."""
    if isinstance(value, (bytes, bytearray)):
        return bytes(value).hex()
    if isinstance(value, list):
        return [to_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: to_jsonable(v) for k, v in value.items()}
    return value
