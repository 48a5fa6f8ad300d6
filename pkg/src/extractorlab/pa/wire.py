"""Bit-exact message framing.

Frame: ``[version 0x01][type][length, 4 octets big-endian][payload]``.
Type 0x01 carries A; type 0x02 carries W' then T'.  Every field is packed
most-significant bit first and zero-padded on the right to a whole octet,
so msg2 is ``ceil(m/8)`` octets of W' followed by ``ceil(m/8)`` of T'.
"""

from __future__ import annotations

import struct

from .protocol import Msg1, Msg2

__all__ = [
    "VERSION",
    "MSG1",
    "MSG2",
    "TransportError",
    "pack_bits",
    "unpack_bits",
    "encode_msg1",
    "encode_msg2",
    "decode_msg1",
    "decode_msg2",
    "frame",
    "parse_frame",
    "read_frame",
]

VERSION = 0x01
MSG1 = 0x01
MSG2 = 0x02
HEADER = struct.Struct(">BBI")
MAX_PAYLOAD = 1 << 16


class TransportError(Exception):
    """Malformed or truncated framing; distinct from a protocol reject."""


def pack_bits(v: int, w: int) -> bytes:
    nbytes = (w + 7) // 8
    if not 0 <= v < 1 << w:
        raise ValueError(f"{v} does not fit in {w} bits")
    return (v << (8 * nbytes - w)).to_bytes(nbytes, "big")


def unpack_bits(data: bytes, w: int) -> int:
    nbytes = (w + 7) // 8
    if len(data) != nbytes:
        raise TransportError(f"expected {nbytes} octets for a {w}-bit field, got {len(data)}")
    raw = int.from_bytes(data, "big")
    pad = 8 * nbytes - w
    if raw & ((1 << pad) - 1):
        raise TransportError("non-zero padding bits")
    return raw >> pad


def frame(kind: int, payload: bytes) -> bytes:
    return HEADER.pack(VERSION, kind, len(payload)) + payload


def parse_frame(data: bytes) -> tuple[int, bytes]:
    """Split one complete frame; trailing bytes are an error."""
    if len(data) < HEADER.size:
        raise TransportError("truncated header")
    version, kind, length = HEADER.unpack_from(data)
    if version != VERSION:
        raise TransportError(f"unsupported version {version:#04x}")
    if kind not in (MSG1, MSG2):
        raise TransportError(f"unknown message type {kind:#04x}")
    if len(data) != HEADER.size + length:
        raise TransportError(f"frame declares {length} payload octets, carries {len(data) - HEADER.size}")
    return kind, data[HEADER.size:]


def encode_msg1(msg: Msg1, a_bits: int) -> bytes:
    return frame(MSG1, pack_bits(msg.a, a_bits))


def encode_msg2(msg: Msg2, m: int) -> bytes:
    return frame(MSG2, pack_bits(msg.w, m) + pack_bits(msg.t, m))


def _expect(data: bytes, kind: int) -> bytes:
    got, payload = parse_frame(data)
    if got != kind:
        raise TransportError(f"expected message type {kind:#04x}, got {got:#04x}")
    return payload


def decode_msg1(data: bytes, a_bits: int) -> Msg1:
    return Msg1(unpack_bits(_expect(data, MSG1), a_bits))


def decode_msg2(data: bytes, m: int) -> Msg2:
    payload = _expect(data, MSG2)
    half = (m + 7) // 8
    if len(payload) != 2 * half:
        raise TransportError(f"msg2 payload must be {2 * half} octets, got {len(payload)}")
    return Msg2(unpack_bits(payload[:half], m), unpack_bits(payload[half:], m))


def _read_exact(stream, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = stream.read(n - len(buf))
        if not chunk:
            raise TransportError(f"connection closed after {len(buf)} of {n} octets")
        buf += chunk
    return buf


def read_frame(stream) -> bytes:
    """Read one whole frame from a binary file-like object."""
    head = _read_exact(stream, HEADER.size)
    _, _, length = HEADER.unpack(head)
    if length > MAX_PAYLOAD:
        raise TransportError(f"declared payload of {length} octets is too large")
    return head + _read_exact(stream, length)
