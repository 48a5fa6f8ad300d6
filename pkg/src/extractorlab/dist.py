"""Finite distributions, weak sources, and exact classical statistics.

Probabilities are ``fractions.Fraction`` when every input is exact and the
alphabet has at most 2^16 outcomes; otherwise they are floats and
normalisation is checked to 1e-12.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "EXACT_LIMIT",
    "Dist",
    "WeakSourceSpec",
    "stat_dist",
    "min_entropy",
    "cond_dist",
    "RejectionSampler",
    "rejection_sample",
    "enum_flat_sources",
]

EXACT_LIMIT = 1 << 16
_TOL = 1e-12


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction))


@dataclass(frozen=True)
class Dist:
    """A distribution over an ordered alphabet ``support``.

    Zero-probability labels are allowed; they define the alphabet that
    distances are aligned on.
    """

    support: tuple
    probs: tuple

    def __post_init__(self):
        support, probs = tuple(self.support), tuple(self.probs)
        if len(support) != len(probs):
            raise ValueError("support and probs differ in length")
        if len(set(support)) != len(support):
            raise ValueError("duplicate outcome labels")
        exact = all(_is_exact(p) for p in probs) and len(probs) <= EXACT_LIMIT
        probs = tuple(Fraction(p) for p in probs) if exact else tuple(float(p) for p in probs)
        if any(p < 0 for p in probs):
            raise ValueError("negative probability mass")
        total = sum(probs)
        if (exact and total != 1) or (not exact and abs(total - 1) > _TOL):
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, labels: Iterable[Hashable]) -> Dist:
        labels = tuple(labels)
        n = len(labels)
        if n <= EXACT_LIMIT:
            return cls(labels, (Fraction(1, n),) * n)
        return cls(labels, (1.0 / n,) * n)

    @classmethod
    def point(cls, label: Hashable, labels: Iterable[Hashable] | None = None) -> Dist:
        labels = tuple(labels) if labels is not None else (label,)
        return cls(labels, tuple(Fraction(int(v == label)) for v in labels))

    @classmethod
    def from_mapping(cls, mapping: Mapping) -> Dist:
        return cls(tuple(mapping), tuple(mapping.values()))

    @property
    def exact(self) -> bool:
        return bool(self.probs) and isinstance(self.probs[0], Fraction)

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs))

    def prob(self, label) -> Fraction | float:
        return self.as_dict().get(label, 0)

    def __len__(self) -> int:
        return len(self.support)

    def items(self):
        return zip(self.support, self.probs)

    def pushforward(self, g: Callable, labels: Iterable | None = None) -> Dist:
        """Law of ``g(X)``; ``labels`` fixes the output alphabet and order."""
        out: dict = {} if labels is None else {v: 0 for v in labels}
        for v, p in self.items():
            w = g(v)
            if labels is not None and w not in out:
                raise ValueError(f"{w!r} is outside the declared output alphabet")
            out[w] = out.get(w, 0) + p
        return Dist.from_mapping(out)

    def product(self, other: Dist) -> Dist:
        labels, probs = [], []
        for (a, p), (b, q) in itertools.product(self.items(), other.items()):
            labels.append((a, b))
            probs.append(p * q)
        return Dist(tuple(labels), tuple(probs))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["outcome", "probability"])
        for v, p in self.items():
            w.writerow([json.dumps(v), str(p)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> Dist:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["outcome", "probability"]:
            raise ValueError("missing outcome,probability header")
        labels, probs = [], []
        for label, prob in rows[1:]:
            v = json.loads(label)
            labels.append(tuple(v) if isinstance(v, list) else v)
            probs.append(Fraction(prob) if "." not in prob and "e" not in prob.lower() else float(prob))
        return cls(tuple(labels), tuple(probs))


def _aligned(P: Dist, Q: Dist):
    if set(P.support) != set(Q.support):
        raise ValueError("distributions are over different alphabets")
    qd = Q.as_dict()
    return [(p, qd[v]) for v, p in P.items()]


def stat_dist(P: Dist, Q: Dist):
    """Total-variation distance ``1/2 sum |P(x) - Q(x)|`` on a shared alphabet."""
    total = sum(abs(p - q) for p, q in _aligned(P, Q))
    return total / 2


def min_entropy(P: Dist) -> float:
    return -math.log2(max(P.probs))


def cond_dist(joint: Dist, z_alphabet: Sequence | None = None):
    """``Delta(P_ZY, U_Z x P_Y)`` for a joint law with labels ``(z, y)``."""
    zs = tuple(z_alphabet) if z_alphabet is not None else tuple(dict.fromkeys(z for z, _ in joint.support))
    nz = len(zs)
    py: dict = {}
    d = joint.as_dict()
    for (z, y), p in joint.items():
        if z not in zs:
            raise ValueError(f"{z!r} is outside the Z alphabet")
        py[y] = py.get(y, 0) + p
    total = 0
    for y, pyv in py.items():
        for z in zs:
            total += abs(d.get((z, y), 0) - (Fraction(pyv, nz) if isinstance(pyv, Fraction) else pyv / nz))
    return total / 2


class RejectionSampler:
    """Draw ``y ~ Y`` and accept with probability ``X(y) / (2^k Y(y))``.

    Conditioned on acceptance the output is distributed exactly as ``X``
    and the acceptance probability is ``2^-k``.  Pass ``scale`` (an exact
    value of ``2^k``) to keep everything rational.
    """

    def __init__(self, X: Dist, Y: Dist, k: float, scale=None):
        if set(X.support) - set(Y.support):
            raise ValueError("X has outcomes outside the alphabet of Y")
        self.X, self.Y, self.k = X, Y, k
        if scale is None:
            scale = Fraction(2) ** k if isinstance(k, int) else 2.0**k
        self.scale = scale
        xd = X.as_dict()
        self._accept = {}
        for y, q in Y.items():
            x = xd.get(y, 0)
            bound = scale * q
            exceeds = x > bound if _is_exact(x) and _is_exact(bound) else x > bound * (1 + _TOL) + _TOL
            if exceeds:
                raise ValueError(f"D_max(X||Y) > k: X({y!r}) = {x} exceeds 2^k * Y({y!r}) = {bound}")
            self._accept[y] = (x / bound) if q else 0
        self._labels = list(Y.support)
        self._yprobs = np.array([float(q) for q in Y.probs])
        self._acc = np.array([float(self._accept[y]) for y in self._labels])

    def accept_prob(self, y):
        return self._accept[y]

    @property
    def pr_accept(self):
        """Exact acceptance probability ``sum_y Y(y) a(y)``."""
        return sum(q * self._accept[y] for y, q in self.Y.items())

    def accepted_law(self) -> Dist:
        pa = self.pr_accept
        return Dist(self.Y.support, tuple(q * self._accept[y] / pa for y, q in self.Y.items()))

    def draw(self, rng: np.random.Generator, size: int):
        """``size`` coupled samples: (indices into Y's alphabet, accept bits)."""
        idx = rng.choice(len(self._labels), size=size, p=self._yprobs)
        z = rng.random(size) < self._acc[idx]
        return idx, z

    def labels(self, idx) -> list:
        return [self._labels[i] for i in idx]


def rejection_sample(X: Dist, Y: Dist, k: float, scale=None) -> RejectionSampler:
    return RejectionSampler(X, Y, k, scale=scale)


_KINDS = ("flat", "prefix", "dist")


@dataclass(frozen=True)
class WeakSourceSpec:
    """A source over ``range(size)`` with min-entropy at least ``k``.

    ``flat`` is uniform over ``subset`` (the whole domain when ``subset`` is
    None); ``prefix`` is uniform over the n-bit strings whose top
    ``n - ceil(k)`` bits equal ``prefix``; ``dist`` is an explicit law.
    """

    size: int
    k: float
    kind: str = "flat"
    subset: tuple | None = None
    prefix: int = 0
    dist: Dist | None = field(default=None, compare=False)
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == "flat" and self.subset is not None:
            sub = tuple(sorted(int(v) for v in self.subset))
            if len(set(sub)) != len(sub) or not sub or sub[0] < 0 or sub[-1] >= self.size:
                raise ValueError("subset must be distinct outcomes inside the domain")
            object.__setattr__(self, "subset", sub)
        if self.kind == "prefix":
            n = self.n
            if n is None:
                raise ValueError("prefix sources need a power-of-two domain")
            free = math.ceil(self.k)
            if not 0 <= free <= n or not 0 <= self.prefix < 1 << (n - free):
                raise ValueError("prefix does not fit the declared (n, k)")
        if self.kind == "dist":
            if self.dist is None or len(self.dist) != self.size:
                raise ValueError("dist sources need a law over the whole domain")
        if self.realized_min_entropy < self.k - 1e-12:
            raise ValueError(f"realised min-entropy {self.realized_min_entropy} is below k={self.k}")

    @property
    def n(self) -> int | None:
        """Bit length when the domain is ``{0,1}^n``."""
        if self.size & (self.size - 1) == 0:
            return self.size.bit_length() - 1
        return None

    @property
    def support_size(self) -> int | None:
        if self.kind == "flat":
            return self.size if self.subset is None else len(self.subset)
        if self.kind == "prefix":
            return 1 << math.ceil(self.k)
        return None

    @property
    def realized_min_entropy(self) -> float:
        if self.kind == "dist":
            return min_entropy(self.dist)
        return math.log2(self.support_size)

    def outcomes(self) -> Iterable[int]:
        if self.kind == "flat":
            return range(self.size) if self.subset is None else self.subset
        if self.kind == "prefix":
            free = math.ceil(self.k)
            base = self.prefix << free
            return range(base, base + (1 << free))
        return (v for v, p in self.dist.items() if p)

    def weights(self) -> tuple[np.ndarray, int]:
        """Integer weights over the domain and their total (flat and prefix kinds)."""
        if self.kind == "dist":
            raise ValueError("explicit laws have no integer weights; use to_dist()")
        w = np.zeros(self.size, dtype=np.int64)
        w[np.fromiter(self.outcomes(), dtype=np.int64)] = 1
        return w, int(w.sum())

    def to_dist(self) -> Dist:
        if self.kind == "dist":
            return self.dist
        if self.size > 1 << 20:
            raise ValueError("domain too large to materialise")
        s = self.support_size
        members = set(self.outcomes())
        exact = self.size <= EXACT_LIMIT
        mass = Fraction(1, s) if exact else 1.0 / s
        zero = Fraction(0) if exact else 0.0
        return Dist(tuple(range(self.size)), tuple(mass if v in members else zero for v in range(self.size)))

    def sample(self, rng: np.random.Generator) -> int:
        if self.kind == "flat":
            if self.subset is None:
                return int(rng.integers(0, self.size))
            return int(self.subset[rng.integers(0, len(self.subset))])
        if self.kind == "prefix":
            free = math.ceil(self.k)
            return (self.prefix << free) | int(rng.integers(0, 1 << free))
        probs = np.array([float(p) for p in self.dist.probs])
        return int(self.dist.support[rng.choice(len(probs), p=probs)])

    def to_json(self) -> str:
        rec = {"n": self.n, "size": self.size, "k": self.k, "kind": self.kind}
        if self.subset is not None:
            rec["subset"] = list(self.subset)
        if self.kind == "prefix":
            rec["prefix"] = self.prefix
        if self.kind == "dist":
            rec["probs"] = [str(p) for p in self.dist.probs]
        if self.seed is not None:
            rec["seed"] = self.seed
        return json.dumps(rec, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> WeakSourceSpec:
        rec = json.loads(text)
        unknown = set(rec) - {"n", "size", "k", "kind", "subset", "prefix", "probs", "seed"}
        if unknown:
            raise ValueError(f"unknown fields {sorted(unknown)}")
        size = rec.get("size") or 1 << rec["n"]
        dist = None
        if rec["kind"] == "dist":
            dist = Dist(tuple(range(size)), tuple(Fraction(p) for p in rec["probs"]))
        return cls(size, rec["k"], rec["kind"], tuple(rec["subset"]) if "subset" in rec else None,
                   rec.get("prefix", 0), dist, rec.get("seed"))

    # constructors

    @classmethod
    def uniform(cls, nbits: int) -> WeakSourceSpec:
        return cls(1 << nbits, nbits)

    @classmethod
    def flat(cls, size: int, subset: Iterable[int], seed: int | None = None) -> WeakSourceSpec:
        subset = tuple(subset)
        return cls(size, math.log2(len(subset)), "flat", subset, seed=seed)

    @classmethod
    def random_flat(cls, size: int, k: float, seed: int) -> WeakSourceSpec:
        """Flat source over ``ceil(2^k)`` outcomes drawn with ``seed``."""
        s = math.ceil(2**k - 1e-12)
        rng = np.random.default_rng(seed)
        subset = tuple(sorted(int(v) for v in rng.choice(size, size=s, replace=False)))
        return cls(size, k, "flat", subset, seed=seed)

    @classmethod
    def with_prefix(cls, nbits: int, k: float, prefix: int = 0) -> WeakSourceSpec:
        return cls(1 << nbits, k, "prefix", prefix=prefix)

    @classmethod
    def from_dist(cls, dist: Dist) -> WeakSourceSpec:
        return cls(len(dist), min_entropy(dist), "dist", dist=dist)


def enum_flat_sources(n: int | None, s: int, budget: int = 1 << 16, seed: int = 0,
                      size: int | None = None) -> Iterator[WeakSourceSpec]:
    """Every flat source with support size ``s`` over ``2^n`` (or ``size``) outcomes.

    When there are more than ``budget`` of them, ``budget`` subsets are drawn
    uniformly at random with ``seed`` instead.
    """
    size = size if size is not None else 1 << n
    if not 1 <= s <= size:
        raise ValueError(f"support size {s} outside [1, {size}]")
    if math.comb(size, s) <= budget:
        for sub in itertools.combinations(range(size), s):
            yield WeakSourceSpec.flat(size, sub)
        return
    rng = np.random.default_rng(seed)
    for _ in range(budget):
        sub = rng.choice(size, size=s, replace=False)
        yield WeakSourceSpec.flat(size, sorted(int(v) for v in sub), seed=seed)
