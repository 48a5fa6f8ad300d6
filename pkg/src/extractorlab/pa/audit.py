"""Monte-Carlo audit of the extracted key against the public transcript.

The plug-in estimate of ``Delta((R_B, V), U x V)`` is compared with
``eps_t + 3 eps``.  The confidence radius

    sqrt((K - 1) / N) + sqrt(2 ln(1/delta) / N)

holds with probability ``1 - delta``: the first term bounds the expected
total-variation error of the empirical law on ``K`` outcomes (doubled, for
the two plug-in marginals), the second is McDiarmid's inequality.  ``K`` is
the size of the joint alphabet of ``(R_B, V)``, so for views with a large
transcript alphabet the radius exceeds 1 and the comparison carries no
information; ``AuditReport.informative`` records that.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .adversary import Identity
from .protocol import ProtocolParams, protocol_bounds, run_sessions

__all__ = ["AuditReport", "RegimeError", "extraction_audit", "VIEWS"]

VIEWS = ("key", "seed", "full")


class RegimeError(ValueError):
    pass


@dataclass
class AuditReport:
    view: str
    trials: int
    distance: float
    radius: float
    target: float
    alphabet: int
    delta: float

    @property
    def holds(self) -> bool:
        return self.distance <= self.target + self.radius

    @property
    def informative(self) -> bool:
        return self.radius < 1.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(distance=float(self.distance), holds=bool(self.holds), informative=bool(self.informative))
        return d


def _view_key(o, view: str, active: bool):
    if view == "key":
        return 0
    if view == "seed":
        return o.w_sent
    if active:
        return (o.a, o.a_recv, o.w_sent, o.t_sent, o.w_recv, o.t_recv)
    return (o.a, o.w_sent, o.t_sent)


def plugin_distance(pairs, l: int) -> float:
    """``1/2 sum_{r,v} |P^(r, v) - P^(v) / 2^l|`` from a list of ``(r, v)`` samples."""
    n = len(pairs)
    by_v: dict = {}
    for r, v in pairs:
        by_v.setdefault(v, []).append(r)
    size = 1 << l
    total = 0.0
    for rs in by_v.values():
        c = np.bincount(np.asarray(rs), minlength=size)
        total += np.abs(c - len(rs) / size).sum()
    return total / (2 * n)


def extraction_audit(params: ProtocolParams, x_src=None, adversary=None, trials: int = 10_000,
                     seed: int = 0, view: str = "full", delta: float = 1e-3, a_src=None,
                     b_src=None) -> AuditReport:
    if view not in VIEWS:
        raise ValueError(f"view must be one of {VIEWS}")
    adversary = adversary or Identity(params.m, params.a_bits)
    x_src = x_src or params.source("x")
    target = protocol_bounds(params, x_src, a_src, b_src)["extract"]
    se = 1 / math.sqrt(trials)
    if se > target / 5:
        raise RegimeError(f"standard error {se:.3g} exceeds target/5 = {target / 5:.3g}; raise trials")
    active = not isinstance(adversary, Identity)
    pairs = [(o.r_b, _view_key(o, view, active))
             for o in run_sessions(params, adversary, trials, seed, x_src, a_src, b_src)]
    vbits = {"key": 0, "seed": params.m,
             "full": (params.a_bits + 2 * params.m) * (2 if active else 1)}[view]
    k = 1 << (params.l + vbits)
    radius = math.sqrt((k - 1) / trials) + math.sqrt(2 * math.log(1 / delta) / trials)
    return AuditReport(view, trials, plugin_distance(pairs, params.l), radius, target, k, delta)
