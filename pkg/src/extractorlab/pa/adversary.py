"""Active adversaries that rewrite the two protocol messages.

An adversary sees each message in turn and returns a message of the same
widths.  ``state`` persists for the adversary's lifetime, so a strategy may
use anything it saw earlier in the session or in earlier sessions.
"""

from __future__ import annotations

import numpy as np

from .protocol import Msg1, Msg2

__all__ = [
    "ActiveAdversary",
    "Identity",
    "ConstantMsg1",
    "FlipMsg2Bit",
    "ReplayMsg2",
    "RandomBoth",
    "ADVERSARIES",
    "make_adversary",
]


class ActiveAdversary:
    name = "base"

    def __init__(self, m: int, a_bits: int):
        self.m = m
        self.a_bits = a_bits
        self.state: dict = {}

    def begin_session(self, index: int):
        self.state["session"] = index

    def tamper1(self, msg: Msg1, rng: np.random.Generator) -> Msg1:
        return msg

    def tamper2(self, msg: Msg2, rng: np.random.Generator) -> Msg2:
        return msg


class Identity(ActiveAdversary):
    name = "identity"


class ConstantMsg1(ActiveAdversary):
    """Replace A by a fixed A*; if A already equals A*, send A* with its low bit flipped."""

    name = "constant-substitute-msg1"

    def __init__(self, m: int, a_bits: int, value: int = 0):
        super().__init__(m, a_bits)
        self.value = value

    def tamper1(self, msg, rng):
        return Msg1(self.value if msg.a != self.value else self.value ^ 1)


class FlipMsg2Bit(ActiveAdversary):
    """Flip bit ``bit`` (0 = least significant) of W and forward T unchanged."""

    name = "flip-msg2-bit0"

    def __init__(self, m: int, a_bits: int, bit: int = 0):
        super().__init__(m, a_bits)
        self.bit = bit

    def tamper2(self, msg, rng):
        return Msg2(msg.w ^ (1 << self.bit), msg.t)


class ReplayMsg2(ActiveAdversary):
    """Forward the previous session's second message; the first session passes untouched."""

    name = "replay-msg2"

    def tamper2(self, msg, rng):
        prev = self.state.get("last")
        self.state["last"] = msg
        return prev if prev is not None else msg


class RandomBoth(ActiveAdversary):
    """Replace both messages by uniformly random ones of the right widths."""

    name = "random-both"

    def tamper1(self, msg, rng):
        return Msg1(int(rng.integers(0, 1 << self.a_bits)))

    def tamper2(self, msg, rng):
        return Msg2(int(rng.integers(0, 1 << self.m)), int(rng.integers(0, 1 << self.m)))


ADVERSARIES = {cls.name: cls for cls in (Identity, ConstantMsg1, FlipMsg2Bit, ReplayMsg2, RandomBoth)}
ADVERSARIES["flip-msg2-bit"] = FlipMsg2Bit


def make_adversary(name: str, params) -> ActiveAdversary:
    try:
        cls = ADVERSARIES[name]
    except KeyError:
        raise ValueError(f"unknown adversary {name!r}; choose from {sorted(ADVERSARIES)}") from None
    return cls(params.m, params.a_bits)
