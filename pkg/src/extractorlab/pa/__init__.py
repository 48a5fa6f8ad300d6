"""Two-round privacy amplification: parties, adversaries, wire format, transport and audit."""

from .adversary import ADVERSARIES, ActiveAdversary, make_adversary
from .audit import AuditReport, extraction_audit
from .protocol import (
    AliceState,
    Msg1,
    Msg2,
    ProtocolParams,
    SessionOutcome,
    alice_finish,
    alice_round1,
    bob_round,
    load_profile,
    protocol_bounds,
    run_session,
    run_sessions,
    session_seed,
)

__all__ = [
    "ADVERSARIES",
    "ActiveAdversary",
    "make_adversary",
    "AuditReport",
    "extraction_audit",
    "AliceState",
    "Msg1",
    "Msg2",
    "ProtocolParams",
    "SessionOutcome",
    "alice_finish",
    "alice_round1",
    "bob_round",
    "load_profile",
    "protocol_bounds",
    "run_session",
    "run_sessions",
    "session_seed",
]
