"""TCP transport: one session per connection, handled sequentially.

X, A and B are drawn from the same per-session streams ``run_session``
uses, so networked runs reproduce local runs given equal seeds.  Alice
draws X and A, Bob draws X and B, and the proxy gets the adversary stream.
"""

from __future__ import annotations

import logging
import socket
from typing import Callable

from .protocol import Msg1, ProtocolParams, SessionOutcome, _streams, alice_finish, alice_round1, bob_round, session_seed
from .wire import TransportError, decode_msg1, decode_msg2, encode_msg1, encode_msg2, read_frame

__all__ = ["BobServer", "MitmProxy", "run_alice", "merge_records", "parse_address"]

log = logging.getLogger(__name__)


def parse_address(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"expected host:port, got {text!r}")
    return host, int(port)


def _sources(params, x_src, a_src, b_src):
    return x_src or params.source("x"), a_src or params.source("a"), b_src or params.source("b")


class _Server:
    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self.sock = socket.create_server((host, port))
        self.address = self.sock.getsockname()[:2]

    def close(self):
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class BobServer(_Server):
    """Answers ``sessions`` connections; ``emit`` receives one record per session."""

    def __init__(self, params: ProtocolParams, seed: int, host="127.0.0.1", port=0,
                 x_src=None, b_src=None):
        super().__init__(host, port)
        self.params, self.seed = params, seed
        self.x_src, _, self.b_src = _sources(params, x_src, None, b_src)

    def handle(self, conn: socket.socket, index: int) -> dict:
        p = self.params
        rx, _, rb, _ = _streams(session_seed(self.seed, index))
        x, b = self.x_src.sample(rx), self.b_src.sample(rb)
        with conn, conn.makefile("rb") as rf:
            msg1 = decode_msg1(read_frame(rf), p.a_bits)
            msg2, s_bob, r_b = bob_round(p, x, msg1, b)
            conn.sendall(encode_msg2(msg2, p.m))
        return {"session": index, "x": x, "b": b, "a_recv": msg1.a, "w_sent": msg2.w,
                "t_sent": msg2.t, "s_bob": s_bob, "r_b": r_b}

    def serve(self, sessions: int, emit: Callable[[dict], None]):
        for i in range(sessions):
            conn, _ = self.sock.accept()
            try:
                emit(self.handle(conn, i))
            except TransportError as exc:
                log.warning("session %d: transport error: %s", i, exc)
                emit({"session": i, "transport_error": str(exc)})


class MitmProxy(_Server):
    """Relays each connection to Bob, passing both messages through ``adv``."""

    def __init__(self, params: ProtocolParams, adv, upstream: tuple[str, int], seed: int,
                 host="127.0.0.1", port=0):
        super().__init__(host, port)
        self.params, self.adv, self.upstream, self.seed = params, adv, upstream, seed

    def handle(self, conn: socket.socket, index: int) -> dict:
        p = self.params
        *_, radv = _streams(session_seed(self.seed, index))
        self.adv.begin_session(index)
        with conn, conn.makefile("rb") as rf, socket.create_connection(self.upstream) as up, up.makefile("rb") as uf:
            msg1 = decode_msg1(read_frame(rf), p.a_bits)
            msg1r = self.adv.tamper1(msg1, radv)
            up.sendall(encode_msg1(msg1r, p.a_bits))
            msg2 = decode_msg2(read_frame(uf), p.m)
            msg2r = self.adv.tamper2(msg2, radv)
            conn.sendall(encode_msg2(msg2r, p.m))
        return {"session": index, "a": msg1.a, "a_fwd": msg1r.a, "w": msg2.w, "t": msg2.t,
                "w_fwd": msg2r.w, "t_fwd": msg2r.t}

    def serve(self, sessions: int, emit: Callable[[dict], None]):
        for i in range(sessions):
            conn, _ = self.sock.accept()
            try:
                emit(self.handle(conn, i))
            except (TransportError, OSError) as exc:
                log.warning("session %d: transport error: %s", i, exc)
                emit({"session": i, "transport_error": str(exc)})


def run_alice(params: ProtocolParams, address: tuple[str, int], sessions: int, seed: int,
              emit: Callable[[dict], None], x_src=None, a_src=None, timeout: float = 30.0):
    x_src, a_src, _ = _sources(params, x_src, a_src, None)
    for i in range(sessions):
        rx, ra, _, _ = _streams(session_seed(seed, i))
        x, a = x_src.sample(rx), a_src.sample(ra)
        msg1, state = alice_round1(params, x, a)
        try:
            with socket.create_connection(address, timeout=timeout) as conn, conn.makefile("rb") as rf:
                conn.sendall(encode_msg1(msg1, params.a_bits))
                msg2 = decode_msg2(read_frame(rf), params.m)
        except (TransportError, OSError) as exc:
            log.warning("session %d: transport error: %s", i, exc)
            emit({"session": i, "transport_error": str(exc)})
            continue
        r_a, s = alice_finish(params, state, msg2)
        emit({"session": i, "x": x, "a": a, "w_recv": msg2.w, "t_recv": msg2.t, "s_alice": s, "r_a": r_a})


def merge_records(alice: dict, bob: dict, seed: int | None = None) -> SessionOutcome:
    """Join one session's Alice and Bob records into a ``SessionOutcome``."""
    if alice["session"] != bob["session"]:
        raise ValueError("records belong to different sessions")
    return SessionOutcome(alice["x"], alice["a"], bob["b"], bob["a_recv"], bob["w_sent"], bob["t_sent"],
                          alice["w_recv"], alice["t_recv"], alice["s_alice"], bob["s_bob"], alice["r_a"],
                          bob["r_b"], seed)
