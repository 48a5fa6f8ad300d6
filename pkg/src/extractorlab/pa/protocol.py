"""Two-round privacy amplification with weak local sources.

Round 1, Alice -> Bob: her local sample ``A`` in the clear.
Round 2, Bob -> Alice: ``W' = Ext(X, B)`` and ``T' = MAC_{S'}(W')`` where
``S' = nmExt(X, A')``; Bob outputs ``R_B = Tre(X, W')``.
Alice recomputes ``S = nmExt(X, A)``, rejects unless ``T = MAC_S(W)`` and
otherwise outputs ``R_A = Tre(X, W)``.

Field outputs are cut to bit strings by keeping their low-order bits: 2m
bits for the MAC key, m bits for the Trevisan seed.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..dist import WeakSourceSpec
from ..ff import GF2m, encode_int, parse_field
from ..mac import MacKey, mac_tag, mac_verify
from ..nmtest import NmErrorReport
from ..xtr import (
    NmExtParams,
    TrevisanParams,
    TwoWiseSpec,
    ip_ext,
    nm_ext,
    nm_error_bound,
    trevisan_bound,
    trevisan_ext,
    truncate,
    truncation_bias,
    two_source_bound,
)

__all__ = [
    "ProtocolParams",
    "load_profile",
    "Msg1",
    "Msg2",
    "AliceState",
    "alice_round1",
    "bob_round",
    "alice_finish",
    "SessionOutcome",
    "run_session",
    "run_sessions",
    "session_seed",
    "protocol_bounds",
    "fold_min_entropy",
]

PROFILE_ENV = "EXTRACTORLAB_PROFILE_DIR"


@dataclass(frozen=True)
class ProtocolParams:
    n: int
    m: int
    l: int
    nmext: NmExtParams
    ext: TwoWiseSpec
    tre: TrevisanParams
    mac_field: GF2m
    name: str = "custom"
    sources: dict | None = None

    def __post_init__(self):
        if self.n % 2:
            raise ValueError("n must be even so that A has n/2 bits")
        if math.floor(math.log2(self.nmext.p)) < 2 * self.m:
            raise ValueError("nmExt field is too small for a 2m-bit key")
        if self.nmext.p**self.nmext.n < 1 << self.n:
            raise ValueError("X does not fit in the nmExt vector space")
        if self.nmext.ny < 1 << (self.n // 2):
            raise ValueError("A does not fit in the nmExt seed field")
        if self.ext.rule != "ip" or self.ext.nx < 1 << self.n:
            raise ValueError("Ext must be an inner product whose domain holds n-bit strings")
        if self.ext.nz < 1 << self.m:
            raise ValueError("Ext range is too small for m output bits")
        if self.tre.d != self.m or self.tre.n != self.n or self.tre.l != self.l:
            raise ValueError("Trevisan seed width must equal m, input n and output l")
        if self.mac_field.m != self.m:
            raise ValueError("MAC field width must equal m")

    @property
    def a_bits(self) -> int:
        return self.n // 2

    def to_dict(self) -> dict:
        return {"name": self.name, "n": self.n, "m": self.m, "l": self.l,
                "nmext": json.loads(self.nmext.to_json()), "ext": json.loads(self.ext.to_json()),
                "tre": json.loads(self.tre.to_json()), "mac_field": self.mac_field.descriptor,
                "sources": self.sources}

    @classmethod
    def from_dict(cls, rec: dict) -> ProtocolParams:
        known = {"name", "n", "m", "l", "nmext", "ext", "tre", "mac_field", "sources"}
        unknown = set(rec) - known
        if unknown:
            raise ValueError(f"unknown profile fields {sorted(unknown)}")
        return cls(rec["n"], rec["m"], rec["l"], NmExtParams.from_json(json.dumps(rec["nmext"])),
                   TwoWiseSpec.from_json(json.dumps(rec["ext"])),
                   TrevisanParams.from_json(json.dumps(rec["tre"])), parse_field(rec["mac_field"]),
                   rec.get("name", "custom"), rec.get("sources"))

    def source(self, which: str) -> WeakSourceSpec:
        """The profile's default source for ``x``, ``a`` or ``b`` (uniform when unspecified)."""
        width = {"x": self.n, "a": self.a_bits, "b": self.n}[which]
        rec = (self.sources or {}).get(which)
        if rec is None:
            return WeakSourceSpec.uniform(width)
        src = WeakSourceSpec.from_json(json.dumps(rec))
        if src.size != 1 << width:
            raise ValueError(f"source {which} must be over {width}-bit strings")
        return src


def load_profile(name: str, profile_dir: str | os.PathLike | None = None) -> ProtocolParams:
    """Load ``<name>.json`` from ``profile_dir``, ``$EXTRACTORLAB_PROFILE_DIR`` or the bundled set."""
    profile_dir = profile_dir or os.environ.get(PROFILE_ENV)
    if profile_dir:
        path = Path(profile_dir) / f"{name}.json"
        if not path.exists():
            raise FileNotFoundError(f"no profile {name!r} in {profile_dir}")
        text = path.read_text()
    else:
        ref = resources.files("extractorlab") / "profiles" / f"{name}.json"
        if not ref.is_file():
            raise FileNotFoundError(f"no bundled profile {name!r}")
        text = ref.read_text()
    return ProtocolParams.from_dict(json.loads(text))


def _bits(v: int, w: int) -> str:
    return format(v, f"0{w}b")


def _check_width(v: int, w: int, what: str):
    if not (isinstance(v, (int, np.integer)) and 0 <= v < 1 << w):
        raise ValueError(f"{what} must be a {w}-bit value, got {v!r}")


def mac_key(params: ProtocolParams, x: int, a: int) -> int:
    """``trunc_{2m}(nmExt(X, A))``."""
    nm = params.nmext
    xv = encode_int(x, nm.p, nm.n)
    return truncate(nm_ext(xv, nm.field.from_int(a), nm), 2 * params.m)


def ext_seed(params: ProtocolParams, x: int, b: int) -> int:
    """``trunc_m(Ext(X, B))``."""
    e = params.ext
    return truncate(ip_ext(encode_int(x, e.p, e.n), encode_int(b, e.p, e.n), e.p), params.m)


def tre_output(params: ProtocolParams, x: int, w: int) -> int:
    return int(trevisan_ext(_bits(x, params.n), _bits(w, params.m), params.tre), 2)


@dataclass(frozen=True)
class Msg1:
    a: int


@dataclass(frozen=True)
class Msg2:
    w: int
    t: int


@dataclass(frozen=True)
class AliceState:
    x: int
    a: int

    def to_json(self) -> str:
        return json.dumps({"x": self.x, "a": self.a})

    @classmethod
    def from_json(cls, text: str) -> AliceState:
        rec = json.loads(text)
        return cls(rec["x"], rec["a"])


def alice_round1(params: ProtocolParams, x: int, a: int) -> tuple[Msg1, AliceState]:
    _check_width(x, params.n, "X")
    _check_width(a, params.a_bits, "A")
    return Msg1(int(a)), AliceState(int(x), int(a))


def bob_round(params: ProtocolParams, x: int, msg1: Msg1, b: int) -> tuple[Msg2, int, int]:
    """Returns ``(msg2, S', R_B)``."""
    _check_width(x, params.n, "X")
    _check_width(msg1.a, params.a_bits, "A'")
    _check_width(b, params.n, "B")
    s2 = mac_key(params, x, msg1.a)
    w2 = ext_seed(params, x, b)
    t2 = mac_tag(MacKey.from_bits(s2, params.mac_field), w2)
    return Msg2(w2, t2), s2, tre_output(params, x, w2)


def alice_finish(params: ProtocolParams, state: AliceState, msg2: Msg2) -> tuple[int | None, int]:
    """Returns ``(R_A or None for reject, S)``."""
    _check_width(msg2.w, params.m, "W")
    _check_width(msg2.t, params.m, "T")
    s = mac_key(params, state.x, state.a)
    if not mac_verify(MacKey.from_bits(s, params.mac_field), msg2.w, msg2.t):
        return None, s
    return tre_output(params, state.x, msg2.w), s


@dataclass(frozen=True)
class SessionOutcome:
    """One session: samples, the four messages as seen by each side, keys and outputs.

    ``r_a`` is None when Alice rejected.  Bob never rejects.
    """

    x: int
    a: int
    b: int
    a_recv: int
    w_sent: int
    t_sent: int
    w_recv: int
    t_recv: int
    s_alice: int
    s_bob: int
    r_a: int | None
    r_b: int
    seed: int | None = None

    @property
    def rejected(self) -> bool:
        return self.r_a is None

    @property
    def correct(self) -> bool:
        return self.r_a is not None and self.r_a == self.r_b

    @property
    def robust_violation(self) -> bool:
        return self.r_a is not None and self.r_a != self.r_b

    @property
    def tampered(self) -> bool:
        return self.a_recv != self.a or (self.w_recv, self.t_recv) != (self.w_sent, self.t_sent)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(correct=self.correct, robust_violation=self.robust_violation, rejected=self.rejected)
        return d

    @classmethod
    def from_dict(cls, rec: dict) -> SessionOutcome:
        fields = {k: rec[k] for k in cls.__dataclass_fields__}
        return cls(**fields)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def replay(self, params: ProtocolParams) -> SessionOutcome:
        """Recompute both parties from the recorded samples and received messages."""
        m1, st = alice_round1(params, self.x, self.a)
        msg2, s_bob, r_b = bob_round(params, self.x, Msg1(self.a_recv), self.b)
        r_a, s_alice = alice_finish(params, st, Msg2(self.w_recv, self.t_recv))
        return SessionOutcome(self.x, m1.a, self.b, self.a_recv, msg2.w, msg2.t, self.w_recv,
                              self.t_recv, s_alice, s_bob, r_a, r_b, self.seed)


def session_seed(seed: int, index: int) -> int:
    """Per-session seed derived from ``(seed, index)``."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint64)[0])


def _streams(seed: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4)]


def run_session(params: ProtocolParams, x_src: WeakSourceSpec, a_src: WeakSourceSpec,
                b_src: WeakSourceSpec, adv, seed: int) -> SessionOutcome:
    """Sample X, A, B independently and run both parties through ``adv``."""
    rx, ra, rb, radv = _streams(seed)
    x, a, b = x_src.sample(rx), a_src.sample(ra), b_src.sample(rb)
    msg1, state = alice_round1(params, x, a)
    msg1r = adv.tamper1(msg1, radv)
    msg2, s_bob, r_b = bob_round(params, x, msg1r, b)
    msg2r = adv.tamper2(msg2, radv)
    r_a, s_alice = alice_finish(params, state, msg2r)
    return SessionOutcome(x, a, b, msg1r.a, msg2.w, msg2.t, msg2r.w, msg2r.t, s_alice, s_bob, r_a, r_b, seed)


def run_sessions(params: ProtocolParams, adv, sessions: int, seed: int, x_src=None, a_src=None,
                 b_src=None):
    """Yield ``sessions`` outcomes; session ``i`` uses ``session_seed(seed, i)``."""
    x_src = x_src or params.source("x")
    a_src = a_src or params.source("a")
    b_src = b_src or params.source("b")
    for i in range(sessions):
        adv.begin_session(i)
        yield run_session(params, x_src, a_src, b_src, adv, session_seed(seed, i))


def fold_min_entropy(src: WeakSourceSpec, t: int) -> float:
    """Min-entropy of the XOR-folded input ``parity_fold(X, t)``."""
    n = src.n
    if src.kind == "flat" and src.subset is None:
        return float(min(n, t))
    if src.kind == "prefix":
        # the free bits are the last ceil(k) positions, consecutive, so they hit min(free, t) residues
        return float(min(math.ceil(src.k), t))
    from ..xtr import parity_fold

    if src.kind == "flat":
        items = [(v, 1) for v in src.outcomes()]
    else:
        items = [(v, p) for v, p in src.dist.items() if p]
    law: dict = {}
    for v, p in items:
        key = parity_fold(_bits(v, n), t)
        law[key] = law.get(key, 0) + p
    return math.log2(sum(law.values()) / max(law.values()))


def protocol_bounds(params: ProtocolParams, x_src=None, a_src=None, b_src=None) -> dict:
    """The computed error terms and the robustness/extraction bounds for a profile.

    eps_nm and eps_ext are the instantiated extractor bounds plus the exact
    truncation bias; eps is their maximum; eps_prime = 2^-m.
    """
    x_src = x_src or params.source("x")
    a_src = a_src or params.source("a")
    b_src = b_src or params.source("b")
    kx, ka, kb = x_src.realized_min_entropy, a_src.realized_min_entropy, b_src.realized_min_entropy
    nm = params.nmext
    # the formula increases with entropy; reading it at full-domain entropy is the conservative choice
    lp = math.log2(nm.p)
    nm_bound = nm_error_bound(nm.p, nm.n, nm.n * lp, nm.n // 2 * lp)
    eps_nm = min(1.0, nm_bound + float(truncation_bias(nm.p, 2 * params.m)))
    e = params.ext
    eps_ext = min(1.0, two_source_bound(e.nz, e.ny, kx, kb) + float(truncation_bias(e.p, params.m)))
    eps = max(eps_nm, eps_ext)
    eps_prime = 2.0 ** -params.m
    k_enc = fold_min_entropy(x_src, params.tre.t)
    eps_t = trevisan_bound(params.tre, k_enc)
    robust_a = 2 * eps_prime + 3 * eps
    extract = eps_t + 3 * eps
    nm_report = NmErrorReport(epsilon=None, bound=nm_bound, in_force=nm_bound < 1.0, p=nm.p, n=nm.n,
                              k_x=nm.n * lp, k_y=nm.n // 2 * lp, worst_table=(), tables_checked=0, mode="bound-only")
    return {"k_x": kx, "k_a": ka, "k_b": kb, "k_enc": k_enc, "eps_nm": eps_nm, "eps_ext": eps_ext,
            "eps": eps, "eps_prime": eps_prime, "eps_t": eps_t, "robust_mac": robust_a,
            "extract": extract, "robust": max(robust_a, extract), "nm_report": nm_report}
