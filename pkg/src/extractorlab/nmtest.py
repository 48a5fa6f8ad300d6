"""Exhaustive testers: two-source error, non-malleability error, MAC forgery.

Every tester returns exact rationals.  Where a fast vectorised route exists
a second, slow route that enumerates in plain Python is kept alongside it;
the two are compared in the test suite.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import kernels
from .dist import WeakSourceSpec
from .ff import GF2m
from .xtr import NmExtParams, TwoWiseSpec, nm_ext, nm_seed_vectors, nm_error_bound

__all__ = [
    "RegimeError",
    "TamperStrategy",
    "enum_tamper",
    "NmErrorReport",
    "test_two_source",
    "two_source_slow",
    "test_nm",
    "nm_bruteforce",
    "nm_pair_deltas",
    "test_mac_forgery",
    "mac_pair_counts",
    "mac_pairwise_range",
    "sample_two_source",
    "EXHAUSTIVE_LIMIT",
]

EXHAUSTIVE_LIMIT = 1 << 24
NM_TABLE_LIMIT = 9

NM_NOTE = ("k' is H_min(X), i.e. no side information; exhaustive classical tampering "
           "is a property-level substitute for the asymptotic regime of the bound")


class RegimeError(ValueError):
    """The instance is too large for exhaustive evaluation."""


@dataclass(frozen=True)
class TamperStrategy:
    """Deterministic map ``y -> table[y]`` with no fixed points."""

    table: tuple
    side: int | None = None

    def __post_init__(self):
        t = tuple(int(v) for v in self.table)
        object.__setattr__(self, "table", t)
        q = len(t)
        for y, v in enumerate(t):
            if not 0 <= v < q:
                raise ValueError(f"table[{y}] = {v} is outside range({q})")
            if v == y:
                raise ValueError(f"table has a fixed point at {y}")

    def __call__(self, y: int) -> int:
        return self.table[y]


def enum_tamper(q: int) -> Iterator[TamperStrategy]:
    """All ``(q-1)^q`` no-fixed-point tables on ``range(q)``, lexicographic order."""
    if q < 2:
        raise ValueError("need at least two values to tamper")
    choices = [[v for v in range(q) if v != y] for y in range(q)]
    for t in itertools.product(*choices):
        yield TamperStrategy(t)


def _int_weights(src: WeakSourceSpec) -> tuple[np.ndarray, int]:
    """Integer weights proportional to the source's law."""
    if src.kind != "dist":
        return src.weights()
    probs = [Fraction(p) for p in src.dist.probs]
    den = math.lcm(*(p.denominator for p in probs))
    w = np.array([int(p * den) for p in probs], dtype=np.int64)
    return w, int(w.sum())


def _check_size(nx: int, ny: int):
    if nx * ny > EXHAUSTIVE_LIMIT:
        raise RegimeError(f"|X|*|Y| = {nx * ny} exceeds 2^24; use sample_two_source for a Monte-Carlo estimate")


def test_two_source(ext: TwoWiseSpec, srcX: WeakSourceSpec, srcY: WeakSourceSpec,
                    strong: str = "Y") -> Fraction:
    """Exact ``Delta(Z Y, U_Z x Y)`` (``strong="Y"``), the X analogue, or ``Delta(Z, U_Z)`` (``"none"``)."""
    if srcX.size != ext.nx or srcY.size != ext.ny:
        raise ValueError("source domains do not match the extractor")
    _check_size(ext.nx, ext.ny)
    wx, Wx = _int_weights(srcX)
    wy, Wy = _int_weights(srcY)
    nz = ext.nz
    table = ext.full_table()
    if strong == "Y":
        J = kernels.joint_counts(table, wx, nz)
        dev = np.abs(nz * J - Wx).sum(axis=1)
        return Fraction(int((wy * dev).sum()), 2 * Wx * Wy * nz)
    if strong == "X":
        J = kernels.joint_counts(np.ascontiguousarray(table.T), wy, nz)
        dev = np.abs(nz * J - Wy).sum(axis=1)
        return Fraction(int((wx * dev).sum()), 2 * Wx * Wy * nz)
    if strong == "none":
        J = kernels.joint_counts(table, wx, nz)
        pz = (wy[:, None] * J).sum(axis=0)
        return Fraction(int(np.abs(nz * pz - Wx * Wy).sum()), 2 * Wx * Wy * nz)
    raise ValueError(f"strong must be 'Y', 'X' or 'none', not {strong!r}")


test_two_source.__test__ = False


def two_source_slow(ext: TwoWiseSpec, srcX: WeakSourceSpec, srcY: WeakSourceSpec,
                    strong: str = "Y") -> Fraction:
    """Same quantity as ``test_two_source`` by direct enumeration, x in the outer loop."""
    _check_size(ext.nx, ext.ny)
    px = srcX.to_dist().as_dict()
    py = srcY.to_dist().as_dict()
    px = {k: Fraction(v) for k, v in px.items() if v}
    py = {k: Fraction(v) for k, v in py.items() if v}
    joint: dict = {}
    for x, pxv in px.items():
        for y, pyv in py.items():
            z = ext.eval(x, y)
            key = {"Y": (z, y), "X": (z, x), "none": (z,)}[strong]
            joint[key] = joint.get(key, 0) + pxv * pyv
    side = {"Y": py, "X": px, "none": {None: Fraction(1)}}[strong]
    u = Fraction(1, ext.nz)
    total = Fraction(0)
    for s, ps in side.items():
        for z in range(ext.nz):
            key = (z,) if strong == "none" else (z, s)
            total += abs(joint.get(key, 0) - u * ps)
    return total / 2


def sample_two_source(ext: TwoWiseSpec, srcX: WeakSourceSpec, srcY: WeakSourceSpec,
                      samples: int, seed: int) -> float:
    """Plug-in Monte-Carlo estimate of the Y-strong error for domains beyond the exhaustive regime."""
    rng = np.random.default_rng(seed)
    counts: dict = {}
    ycount: dict = {}
    for _ in range(samples):
        x, y = srcX.sample(rng), srcY.sample(rng)
        z = ext.eval(x, y)
        counts[(z, y)] = counts.get((z, y), 0) + 1
        ycount[y] = ycount.get(y, 0) + 1
    total = 0.0
    for y, cy in ycount.items():
        for z in range(ext.nz):
            total += abs(counts.get((z, y), 0) / samples - cy / (samples * ext.nz))
    return total / 2


@dataclass
class NmErrorReport:
    epsilon: Fraction
    bound: float
    in_force: bool
    p: int
    n: int
    k_x: float
    k_y: float
    worst_table: tuple
    tables_checked: int
    mode: str
    note: str = NM_NOTE
    per_seed: list = field(default_factory=list, repr=False)

    @property
    def holds(self) -> bool:
        return (not self.in_force) or float(self.epsilon) <= self.bound + 1e-12

    def csv_row(self) -> dict:
        return {"p": self.p, "n": self.n, "k_x": f"{self.k_x:.6f}", "k_y": f"{self.k_y:.6f}",
                "epsilon": f"{float(self.epsilon):.12g}", "epsilon_exact": str(self.epsilon),
                "bound": f"{self.bound:.12g}", "in_force": int(self.in_force), "holds": int(self.holds)}

    def detail(self) -> str:
        rec = self.csv_row()
        rec.update(worst_table=list(self.worst_table), tables_checked=self.tables_checked,
                   mode=self.mode, note=self.note)
        return json.dumps(rec, sort_keys=True)


def _nm_domain(params: NmExtParams, srcX: WeakSourceSpec, srcY: WeakSourceSpec):
    nx, ny = params.p**params.n, params.ny
    if srcX.size != nx or srcY.size != ny:
        raise ValueError(f"sources must be over F_p^n (size {nx}) and GF(p^(n/2)) (size {ny})")
    return nx, ny


def nm_pair_deltas(params: NmExtParams, srcX: WeakSourceSpec) -> tuple[np.ndarray, int]:
    """Integer numerators ``N[y, y']``; the slice error is ``N / (2 p W_x)``."""
    nx, ny = params.p**params.n, params.ny
    if ny * ny * (nx + params.p**2) > 1 << 32:
        raise RegimeError("nmExt instance too large for exhaustive pair slices")
    xdig = np.array(list(itertools.product(range(params.p), repeat=params.n)), dtype=np.int64)
    ztab = kernels.ip_table(xdig, nm_seed_vectors(params), params.p)
    wx, Wx = _int_weights(srcX)
    return kernels.pair_slice_l1(ztab, wx, params.p), Wx


def _report(params, srcX, srcY, eps, worst, checked, mode) -> NmErrorReport:
    kx, ky = srcX.realized_min_entropy, srcY.realized_min_entropy
    bound = nm_error_bound(params.p, params.n, kx, ky)
    # the formula rises with entropy, so it is only read at full-entropy sources
    lp = math.log2(params.p)
    full = abs(kx - params.n * lp) < 1e-9 and abs(ky - params.n // 2 * lp) < 1e-9
    return NmErrorReport(eps, bound, full and bound < 1.0, params.p, params.n, kx, ky, tuple(worst), checked, mode)


def test_nm(params: NmExtParams, srcX: WeakSourceSpec, srcY: WeakSourceSpec,
            strategies: str = "all", samples: int = 256, seed: int = 0) -> NmErrorReport:
    """Worst non-malleability error over deterministic no-fixed-point tampering.

    For a fixed table the error splits over seeds, so the maximum is taken per
    seed from the pair slices; ties go to the smallest ``y'`` which yields the
    lexicographically first maximising table.  ``"sampled"`` evaluates
    ``samples`` random tables instead.
    """
    nx, ny = _nm_domain(params, srcX, srcY)
    N, Wx = nm_pair_deltas(params, srcX)
    wy, Wy = _int_weights(srcY)
    den = 2 * params.p * Wx * Wy
    if strategies == "all":
        worst = []
        for y in range(ny):
            row = N[y].copy() if wy[y] else np.zeros(ny, dtype=np.int64)
            row[y] = -1
            worst.append(int(np.argmax(row)))
        eps = Fraction(sum(int(wy[y]) * int(N[y, worst[y]]) for y in range(ny)), den)
        return _report(params, srcX, srcY, eps, worst, (ny - 1) ** ny, "all")
    if strategies == "sampled":
        rng = np.random.default_rng(seed)
        best, best_t = Fraction(-1), None
        for _ in range(samples):
            t = rng.integers(0, ny - 1, size=ny)
            t = t + (t >= np.arange(ny))
            eps = Fraction(sum(int(wy[y]) * int(N[y, t[y]]) for y in range(ny)), den)
            tt = tuple(int(v) for v in t)
            if eps > best or (eps == best and tt < best_t):
                best, best_t = eps, tt
        return _report(params, srcX, srcY, best, best_t, samples, "sampled")
    raise ValueError(f"strategies must be 'all' or 'sampled', not {strategies!r}")


test_nm.__test__ = False


def _nm_table_error(params, px, py, tau, cache) -> Fraction:
    joint: dict = {}
    side: dict = {}
    for x, pxv in px.items():
        for y, pyv in py.items():
            y2 = tau[y]
            z = cache[(x, y)]
            z2 = cache[(x, y2)]
            w = pxv * pyv
            joint[(z, z2, y, y2)] = joint.get((z, z2, y, y2), 0) + w
            side[(z2, y, y2)] = side.get((z2, y, y2), 0) + w
    u = Fraction(1, params.p)
    total = Fraction(0)
    for (z2, y, y2), ps in side.items():
        for z in range(params.p):
            total += abs(joint.get((z, z2, y, y2), 0) - u * ps)
    return total / 2


def nm_bruteforce(params: NmExtParams, srcX: WeakSourceSpec, srcY: WeakSourceSpec) -> NmErrorReport:
    """Enumerate every tampering table and the full joint law of ``(Z, Z', Y, Y')``."""
    _, ny = _nm_domain(params, srcX, srcY)
    if ny > NM_TABLE_LIMIT:
        raise RegimeError(f"{(ny - 1) ** ny} tables is too many to enumerate; use test_nm")
    from .ff import encode_int

    px = {k: Fraction(v) for k, v in srcX.to_dist().items() if v}
    py = {k: Fraction(v) for k, v in srcY.to_dist().items()}
    cache = {}
    for x in px:
        xv = encode_int(x, params.p, params.n)
        for y in range(ny):
            cache[(x, y)] = nm_ext(xv, params.field.from_int(y), params)
    best, best_t, checked = Fraction(-1), None, 0
    for strat in enum_tamper(ny):
        eps = _nm_table_error(params, px, py, strat.table, cache)
        checked += 1
        if eps > best:
            best, best_t = eps, strat.table
    return _report(params, srcX, srcY, best, best_t, checked, "bruteforce")


def mac_pair_counts(m: int, poly: int = 0) -> np.ndarray:
    """``C[mu, mu', sigma, sigma']`` = number of keys with both tags as given."""
    if not 1 <= m <= 5:
        raise RegimeError("exhaustive MAC analysis is limited to m <= 5")
    fld = GF2m(m, poly)
    size = 1 << m
    mul = kernels.gf2m_mul_table(m, fld.poly)
    k1 = np.repeat(np.arange(size), size)
    k2 = np.tile(np.arange(size), size)
    tags = mul[k1, :] ^ k2[:, None]  # [key, msg]
    out = np.zeros((size, size, size, size), dtype=np.int64)
    for mu in range(size):
        for mu2 in range(size):
            np.add.at(out[mu, mu2], (tags[:, mu], tags[:, mu2]), 1)
    return out


def test_mac_forgery(m: int, poly: int = 0) -> Fraction:
    """Exact best success of a forger who sees one tag and outputs ``(mu', sigma')`` with ``mu' != mu``."""
    counts = mac_pair_counts(m, poly)
    size = 1 << m
    nkeys = size * size
    best = Fraction(0)
    for mu in range(size):
        others = np.delete(counts[mu], mu, axis=0)  # [mu', sigma, sigma']
        # for each observed sigma, the forger picks the best (mu', sigma')
        per_sigma = others.transpose(1, 0, 2).reshape(size, -1).max(axis=1)
        best = max(best, Fraction(int(per_sigma.sum()), nkeys))
    return best


test_mac_forgery.__test__ = False


def mac_pairwise_range(m: int, poly: int = 0) -> tuple[Fraction, Fraction]:
    """Min and max over ``mu != mu'`` and ``(sigma, sigma')`` of the joint tag probability."""
    counts = mac_pair_counts(m, poly)
    size = 1 << m
    off = ~np.eye(size, dtype=bool)
    vals = counts[off]
    return Fraction(int(vals.min()), size * size), Fraction(int(vals.max()), size * size)
