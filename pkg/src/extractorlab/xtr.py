"""Extractor constructions over small finite fields.

* ``ip_ext``: the inner product ``<x, y> mod p`` on F_p^n.
* ``TwoWiseSpec`` / ``twowise_eval``: two-wise independent families (inner
  product, affine ``a*x + b``, or an explicit table).
* ``nm_ext``: ``<x, y || y^2>`` with ``y`` in GF(p^{n/2}) and ``y^2`` the
  field square.
* ``build_weak_design`` / ``trevisan_ext``: a polynomial weak design with an
  inner-product one-bit extractor applied to a parity-folded encoding of x.

Outputs in F_p are turned into bit strings by keeping the ``w`` low-order bits
of the canonical representative; ``truncation_bias`` gives the exact cost.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .ff import ExtField, FieldError, FieldVec, PrimeField, decode_int, encode_int, is_prime

__all__ = [
    "ip_ext",
    "TwoWiseSpec",
    "twowise_eval",
    "NmExtParams",
    "nm_ext",
    "nm_ext_int",
    "nm_seed_vectors",
    "pair_map_injective",
    "truncate",
    "truncation_bias",
    "two_source_bound",
    "nm_error_bound",
    "prime_power",
    "TrevisanParams",
    "build_weak_design",
    "parity_fold",
    "one_bit_ext",
    "trevisan_ext",
    "trevisan_bound",
]


def _coeffs(v, p: int | None = None) -> tuple[int, ...]:
    if isinstance(v, FieldVec):
        if p is not None and getattr(v.field, "p", None) != p:
            raise FieldError("vector is over a different field")
        return v.coeffs
    return tuple(int(c) for c in v)


def ip_ext(x, y, p: int | None = None) -> int:
    """``sum_i x_i y_i mod p``; ``p`` defaults to the field of ``x``."""
    if p is None:
        if not isinstance(x, FieldVec) or not isinstance(x.field, PrimeField):
            raise FieldError("pass p or F_p vectors")
        p = x.field.p
    if isinstance(x, FieldVec) and isinstance(y, FieldVec) and x.field != y.field:
        raise FieldError("x and y are over different fields")
    xs, ys = _coeffs(x, p), _coeffs(y, p)
    if len(xs) != len(ys):
        raise FieldError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if any(not 0 <= c < p for c in xs + ys):
        raise FieldError(f"coefficients out of range for p={p}")
    return sum(a * b for a, b in zip(xs, ys)) % p


_RULES = ("ip", "affine", "table")


@dataclass(frozen=True)
class TwoWiseSpec:
    """A function ``f: X x Y -> Z`` on integer-indexed alphabets.

    ``ip``: X = Y = F_p^n indexed by base-p value, Z = F_p.
    ``affine``: X = F_p, Y = F_p^2 holding ``(a, b)``, f = a*x + b.
    ``table``: ``table[x, y]`` in ``range(nz)``.
    """

    rule: str
    p: int = 0
    n: int = 1
    table: np.ndarray | None = field(default=None, compare=False, repr=False)
    nz_declared: int = 0

    def __post_init__(self):
        if self.rule not in _RULES:
            raise ValueError(f"unknown rule {self.rule!r}")
        if self.rule in ("ip", "affine") and not is_prime(self.p):
            raise FieldError(f"{self.p} is not prime")
        if self.rule == "table":
            t = np.asarray(self.table, dtype=np.int32)
            nz = self.nz_declared or int(t.max()) + 1
            if t.ndim != 2 or t.min() < 0 or t.max() >= nz:
                raise ValueError("table entries must lie in range(nz)")
            object.__setattr__(self, "table", t)
            object.__setattr__(self, "nz_declared", nz)

    @classmethod
    def ip(cls, p: int, n: int) -> TwoWiseSpec:
        return cls("ip", p, n)

    @classmethod
    def affine(cls, p: int) -> TwoWiseSpec:
        return cls("affine", p, 1)

    @classmethod
    def from_table(cls, table, nz: int = 0) -> TwoWiseSpec:
        return cls("table", table=np.asarray(table), nz_declared=nz)

    @property
    def nx(self) -> int:
        return self.p**self.n if self.rule != "table" else self.table.shape[0]

    @property
    def ny(self) -> int:
        if self.rule == "ip":
            return self.p**self.n
        if self.rule == "affine":
            return self.p**2
        return self.table.shape[1]

    @property
    def nz(self) -> int:
        return self.p if self.rule != "table" else self.nz_declared

    def _index(self, v, size: int, width: int) -> int:
        if isinstance(v, (int, np.integer)):
            i = int(v)
        else:
            digits = _coeffs(v)
            if len(digits) != width or any(not 0 <= c < self.p for c in digits):
                raise FieldError(f"{digits!r} is not an element of F_{self.p}^{width}")
            i = decode_int(digits, self.p)
        if not 0 <= i < size:
            raise FieldError(f"{v!r} is outside the domain of size {size}")
        return i

    def eval(self, x, y) -> int:
        if self.rule == "ip":
            xi = self._index(x, self.nx, self.n)
            yi = self._index(y, self.ny, self.n)
            return ip_ext(encode_int(xi, self.p, self.n), encode_int(yi, self.p, self.n), self.p)
        if self.rule == "affine":
            xi = self._index(x, self.nx, 1)
            a, b = encode_int(self._index(y, self.ny, 2), self.p, 2)
            return (a * xi + b) % self.p
        return int(self.table[self._index(x, self.nx, 0), self._index(y, self.ny, 0)])

    def full_table(self) -> np.ndarray:
        """``T[x, y]`` over the whole domain (int32)."""
        if self.rule == "table":
            return self.table
        if self.rule == "ip":
            dig = np.array(list(itertools.product(range(self.p), repeat=self.n)), dtype=np.int64)
            return kernels.ip_table(dig, dig, self.p)
        x = np.arange(self.p, dtype=np.int64)[:, None]
        a = np.arange(self.ny, dtype=np.int64)[None, :] // self.p
        b = np.arange(self.ny, dtype=np.int64)[None, :] % self.p
        return ((a * x + b) % self.p).astype(np.int32)

    def collision_counts(self) -> np.ndarray:
        if self.nx * self.ny > 1 << 20:
            raise ValueError("domain too large for the exhaustive collision check")
        return kernels.collision_counts(self.full_table())

    def is_twowise(self) -> bool:
        """Every distinct pair collides on exactly ``|Y| / |Z|`` seeds."""
        if self.ny % self.nz:
            return False
        c = self.collision_counts()
        off = ~np.eye(self.nx, dtype=bool)
        return bool(np.all(c[off] == self.ny // self.nz))

    def to_json(self) -> str:
        rec = {"rule": self.rule, "p": self.p, "n": self.n}
        if self.rule == "table":
            rec = {"rule": "table", "nz": self.nz, "table": self.table.tolist()}
        return json.dumps(rec, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> TwoWiseSpec:
        rec = json.loads(text)
        if rec["rule"] == "table":
            return cls.from_table(rec["table"], rec["nz"])
        return cls(rec["rule"], rec["p"], rec["n"])


def twowise_eval(spec: TwoWiseSpec, x, y) -> int:
    return spec.eval(x, y)


@dataclass(frozen=True)
class NmExtParams:
    """``p`` an odd prime, ``n`` the even length of x; ``y`` lives in GF(p^{n/2})."""

    p: int
    n: int
    field: ExtField | None = None

    def __post_init__(self):
        if self.p == 2 or not is_prime(self.p):
            raise FieldError(f"nmExt needs an odd prime, got {self.p}")
        if self.n < 2 or self.n % 2:
            raise FieldError(f"nmExt needs an even length, got {self.n}")
        fld = self.field if self.field is not None else ExtField.canonical(self.p, self.n // 2)
        if fld.p != self.p or fld.degree != self.n // 2:
            raise FieldError(f"{fld.descriptor} is not GF({self.p}^{self.n // 2})")
        object.__setattr__(self, "field", fld)

    @property
    def half(self) -> int:
        return self.n // 2

    @property
    def ny(self) -> int:
        return self.p**self.half

    def to_json(self) -> str:
        return json.dumps({"p": self.p, "n": self.n, "field": self.field.descriptor}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> NmExtParams:
        from .ff import parse_field

        rec = json.loads(text)
        return cls(rec["p"], rec["n"], parse_field(rec["field"]))


def nm_ext(x, y, params: NmExtParams) -> int:
    """``<x, y || y^2> mod p``, squaring in the extension field."""
    xs = _coeffs(x, params.p)
    if len(xs) != params.n:
        raise FieldError(f"x must have {params.n} coordinates, got {len(xs)}")
    if isinstance(y, (int, np.integer)) and params.half == 1:
        y = (int(y),)
    ys = params.field.check(_coeffs(y, params.p))
    return ip_ext(xs, ys + params.field.square(ys), params.p)


def nm_ext_int(xi: int, yi: int, params: NmExtParams) -> int:
    """``nm_ext`` on integer indices (base-p, most significant digit first for x).

    ``yi`` is the integer encoding of the field element (``ExtField.to_int``).
    """
    return nm_ext(encode_int(xi, params.p, params.n), params.field.from_int(yi), params)


def nm_seed_vectors(params: NmExtParams) -> np.ndarray:
    """Row ``yi`` holds ``y || y^2`` for the field element with integer code ``yi``."""
    fld = params.field
    rows = []
    for yi in range(params.ny):
        y = fld.from_int(yi)
        rows.append(y + fld.square(y))
    return np.array(rows, dtype=np.int64)


def pair_map_injective(field: ExtField) -> tuple[bool, int]:
    """Does ``{y, y'} -> +-(y - y', y^2 - y'^2)`` separate unordered pairs of distinct elements?

    Returns the verdict and the number of pairs examined.
    """
    elems = list(field.elements())
    seen = {}
    pairs = 0
    for i, y in enumerate(elems):
        for yp in elems[i + 1:]:
            d = field.sub(y, yp)
            e = field.sub(field.square(y), field.square(yp))
            key = min((d, e), (field.neg(d), field.neg(e)))
            pairs += 1
            if seen.setdefault(key, (y, yp)) != (y, yp):
                return False, pairs
    return True, pairs


def truncate(z: int, w: int) -> int:
    """The ``w`` low-order bits of ``z``."""
    return z & ((1 << w) - 1)


def truncation_bias(p: int, w: int) -> Fraction:
    """Exact ``Delta(U_p mod 2^w, U_{2^w})``."""
    size = 1 << w
    a, r = divmod(p, size)
    return (r * abs(Fraction(a + 1, p) - Fraction(1, size)) + (size - r) * abs(Fraction(a, p) - Fraction(1, size))) / 2


def two_source_bound(nz: int, ny: int, kx: float, ky: float) -> float:
    """Two-wise-family error bound ``sqrt(|Z| |Y| 2^{-(kx + ky)})``, capped at 1."""
    expo = (math.log2(nz) + math.log2(ny) - kx - ky) / 2
    return min(1.0, 2.0**expo)


def nm_error_bound(p: int, n: int, k_x: float, k_y: float) -> float:
    """``2^{(k' + k - (n + 5) log p + 1) / 4}`` with ``k' = k_x``, ``k = k_y``; capped at 1."""
    return min(1.0, 2.0 ** ((k_x + k_y - (n + 5) * math.log2(p) + 1) / 4))


def prime_power(q: int) -> tuple[int, int] | None:
    """``(r, e)`` with ``q = r^e`` and ``r`` prime, or None."""
    if q < 2:
        return None
    for r in range(2, q + 1):
        if q % r == 0:
            e = 0
            while q % r == 0:
                q //= r
                e += 1
            return (r, e) if q == 1 else None
    return None  # pragma: no cover


class _SmallField:
    """F_q on integer codes ``0..q-1`` for a prime power ``q``."""

    def __init__(self, q: int):
        r, e = prime_power(q)
        self.q = q
        self._ext = None if e == 1 else ExtField.canonical(r, e)

    def add(self, a: int, b: int) -> int:
        if self._ext is None:
            return (a + b) % self.q
        f = self._ext
        return f.to_int(f.add(f.from_int(a), f.from_int(b)))

    def mul(self, a: int, b: int) -> int:
        if self._ext is None:
            return a * b % self.q
        f = self._ext
        return f.to_int(f.mul(f.from_int(a), f.from_int(b)))

    def poly_eval(self, coeffs: Sequence[int], a: int) -> int:
        acc = 0
        for c in reversed(coeffs):
            acc = self.add(self.mul(acc, a), c)
        return acc


def _overlaps(design) -> list[int]:
    sets = [set(s) for s in design]
    return [sum(2 ** len(sets[i] & sets[j]) for j in range(i)) for i in range(len(sets))]


@dataclass(frozen=True)
class TrevisanParams:
    """Seed of ``d`` bits, ``l`` output bits, each reading the ``t`` seed bits in ``design[i]``."""

    n: int
    t: int
    l: int
    d: int
    design: tuple
    rho: float

    def __post_init__(self):
        design = tuple(tuple(int(v) for v in s) for s in self.design)
        object.__setattr__(self, "design", design)
        if self.n < 1 or self.l < 1 or len(design) != self.l:
            raise ValueError("design must hold exactly l sets")
        for s in design:
            if len(s) != self.t or len(set(s)) != self.t or min(s) < 0 or max(s) >= self.d:
                raise ValueError(f"design set {s} is not a {self.t}-subset of range({self.d})")
        for i, a in enumerate(_overlaps(design)):
            if a > self.rho * i + 1e-12:
                raise ValueError(f"overlap {a} of set {i} exceeds rho*(i) = {self.rho * i}")

    @property
    def advice(self) -> list[int]:
        """``a_i = sum_{j<i} 2^{|S_i cap S_j|}``."""
        return _overlaps(self.design)

    @property
    def disjoint(self) -> bool:
        seen: set = set()
        for s in self.design:
            if seen & set(s):
                return False
            seen |= set(s)
        return True

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "t": self.t, "l": self.l, "d": self.d, "rho": self.rho,
                           "design": [list(s) for s in self.design]}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> TrevisanParams:
        rec = json.loads(text)
        return cls(rec["n"], rec["t"], rec["l"], rec["d"], tuple(map(tuple, rec["design"])), rec["rho"])


def build_weak_design(l: int, t: int, n: int | None = None, rho: float | None = None) -> TrevisanParams:
    """Polynomial weak design over F_q, q the smallest prime power ``>= t``.

    Seed coordinates are ``a * q + b`` for ``(a, b)`` in F_q^2; set ``i`` is the
    graph of the polynomial whose base-q coefficient digits spell ``i``, using
    ``c = max(1, ceil(log_q l))`` coefficients.  ``rho`` defaults to the
    attained overlap ratio.  ``n`` (input bits) defaults to ``q``.
    """
    if l < 1 or t < 1:
        raise ValueError("need l >= 1 and t >= 1")
    q = max(t, 2)
    while prime_power(q) is None:
        q += 1
    c = 1
    while q**c < l:
        c += 1
    fq = _SmallField(q)
    design = []
    for i in range(l):
        coeffs = list(reversed(encode_int(i, q, c)))
        design.append(tuple(a * q + fq.poly_eval(coeffs, a) for a in range(q)))
    adv = _overlaps(design)
    if rho is None:
        rho = max([a / i for i, a in enumerate(adv) if i] or [1.0])
    return TrevisanParams(n if n is not None else q, q, l, q * q, tuple(design), rho)


def parity_fold(x: str, t: int) -> str:
    """Linear map {0,1}^n -> {0,1}^t: bit j is the XOR of ``x[i]`` over ``i = j mod t``.

    It is the identity, zero-padded on the right, when ``len(x) <= t``.
    """
    out = [0] * t
    for i, c in enumerate(x):
        out[i % t] ^= c == "1"
    return "".join("1" if b else "0" for b in out)


def one_bit_ext(x: str, s: str) -> int:
    """``<x, s> mod 2`` for equal-length bit strings."""
    if len(x) != len(s):
        raise ValueError(f"length mismatch: {len(x)} vs {len(s)}")
    return sum(a == b == "1" for a, b in zip(x, s)) % 2


def trevisan_ext(x: str, seed: str, params: TrevisanParams) -> str:
    if len(x) != params.n:
        raise ValueError(f"x must have {params.n} bits, got {len(x)}")
    if len(seed) != params.d:
        raise ValueError(f"seed must have {params.d} bits, got {len(seed)}")
    e = parity_fold(x, params.t)
    return "".join(str(one_bit_ext(e, "".join(seed[j] for j in s))) for s in params.design)


def trevisan_bound(params: TrevisanParams, k_enc: float) -> float:
    """Error bound for a uniform seed when ``parity_fold(X)`` has min-entropy ``k_enc``.

    Hybrid argument: output bit ``i`` given the previous ones costs
    ``1/2 sqrt(2^{1 - (k_enc - a_i)})``.  For disjoint designs the map is a
    universal family on the folded input, so the leftover-hash value
    ``1/2 sqrt(2^{l - k_enc})`` also applies; the smaller one is returned.
    """
    hybrid = sum(0.5 * math.sqrt(2.0 ** (1 - (k_enc - a))) for a in params.advice)
    best = hybrid
    if params.disjoint:
        best = min(best, 0.5 * math.sqrt(2.0 ** (params.l - k_enc)))
    return min(1.0, best)
