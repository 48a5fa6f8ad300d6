"""One-time MAC ``tag = k1 * msg + k2`` over GF(2^m)."""

from __future__ import annotations

from dataclasses import dataclass

from .ff import GF2m

__all__ = ["MacKey", "mac_tag", "mac_verify", "format_word", "parse_word"]


@dataclass(frozen=True)
class MacKey:
    k1: int
    k2: int
    field: GF2m

    def __post_init__(self):
        self.field.check(self.k1)
        self.field.check(self.k2)

    @property
    def m(self) -> int:
        return self.field.m

    @classmethod
    def from_bits(cls, s: int, field: GF2m) -> MacKey:
        """Split a 2m-bit key: ``k1`` is the high half, ``k2`` the low half."""
        m = field.m
        if not 0 <= s < 1 << (2 * m):
            raise ValueError(f"key {s:#x} does not fit in {2 * m} bits")
        return cls(s >> m, s & ((1 << m) - 1), field)

    def to_bits(self) -> int:
        return (self.k1 << self.m) | self.k2

    def to_hex(self) -> str:
        return f"{format_word(self.k1, self.m)},{format_word(self.k2, self.m)}"


def mac_tag(key: MacKey, msg: int) -> int:
    key.field.check(msg)
    return key.field.mul(key.k1, msg) ^ key.k2


def mac_verify(key: MacKey, msg: int, tag: int) -> bool:
    return mac_tag(key, msg) == tag


def format_word(v: int, m: int) -> str:
    """Fixed-width hex, upper case: ``format_word(12, 4) == "0xC"``."""
    return "0x" + format(v, "X").rjust((m + 3) // 4, "0")


def parse_word(text: str, m: int | None = None) -> int:
    v = int(text, 16) if text.lower().startswith("0x") else int(text, 0)
    if m is not None and not 0 <= v < 1 << m:
        raise ValueError(f"{text} is not an {m}-bit word")
    return v
