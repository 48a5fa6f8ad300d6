"""Exact arithmetic over F_p, GF(p^k) and GF(2^m), plus bit/field-vector encodings.

Elements of a prime field are plain ints in ``[0, p)``.  Elements of an
extension field GF(p^k) are coefficient tuples of length ``k``, lowest
degree first, so ``(1, 2)`` in F_3[t]/(t^2+1) is ``1 + 2t``.  Elements of
GF(2^m) are ints whose bit ``i`` is the coefficient of ``x^i``.

Field descriptors round-trip through text::

    Fp:3
    GF:3^2:t^2+1
    GF2:4:0x13
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

__all__ = [
    "FieldError",
    "is_prime",
    "next_prime",
    "PrimeField",
    "ExtField",
    "GF2m",
    "FieldVec",
    "fp_arith",
    "ext_arith",
    "gf2m_mul",
    "encode_bits",
    "decode_bits",
    "encode_int",
    "decode_int",
    "parse_field",
]


class FieldError(ValueError):
    """Invalid field parameters or operands."""


# Deterministic for n < 3.3e24 (Sorenson & Webster).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_LIMIT = 3317044064679887385961981


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test for ``n < 3.3e24``."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    if n >= _MR_LIMIT:
        raise FieldError(f"primality of {n} is beyond the deterministic range")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than ``n``."""
    c = max(n + 1, 2)
    while not is_prime(c):
        c += 1
    return c


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise FieldError(f"{self.p!r} is not prime")

    @property
    def order(self) -> int:
        return self.p

    def check(self, a: int) -> int:
        if not (isinstance(a, int) and 0 <= a < self.p):
            raise FieldError(f"{a!r} is not a canonical element of F_{self.p}")
        return a

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.p}")
        return pow(a, -1, self.p)

    def pow(self, a: int, e: int) -> int:
        return pow(a, e, self.p)

    def elements(self) -> range:
        return range(self.p)

    @property
    def descriptor(self) -> str:
        return f"Fp:{self.p}"


def _poly_is_zero(c: Sequence[int]) -> bool:
    return not any(c)


def _poly_mod(num: list[int], mod: Sequence[int], p: int) -> list[int]:
    # mod is monic, lowest degree first
    k = len(mod) - 1
    num = [c % p for c in num]
    for i in range(len(num) - 1, k - 1, -1):
        c = num[i]
        if c:
            for j in range(k + 1):
                num[i - k + j] = (num[i - k + j] - c * mod[j]) % p
    out = num[:k]
    out += [0] * (k - len(out))
    return out


def _poly_mul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return out


def _monic_polys(p: int, d: int) -> Iterator[tuple[int, ...]]:
    """Monic degree-``d`` polynomials over F_p, in increasing integer encoding."""
    for low in range(p**d):
        coeffs = []
        for _ in range(d):
            low, r = divmod(low, p)
            coeffs.append(r)
        yield tuple(coeffs) + (1,)


def _divides(f: Sequence[int], g: Sequence[int], p: int) -> bool:
    """Whether monic ``f`` divides ``g`` over F_p."""
    return _poly_is_zero(_poly_mod(list(g), f, p))


def _is_irreducible(mod: Sequence[int], p: int) -> bool:
    k = len(mod) - 1
    if k <= 1:
        return k == 1
    for d in range(1, k // 2 + 1):
        for f in _monic_polys(p, d):
            if _divides(f, mod, p):
                return False
    return True


def _format_poly(mod: Sequence[int], var: str = "t") -> str:
    terms = []
    for i in range(len(mod) - 1, -1, -1):
        c = mod[i]
        if not c:
            continue
        mono = "1" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if c == 1:
            terms.append(mono)
        elif i == 0:
            terms.append(str(c))
        else:
            terms.append(f"{c}{mono}" if i else str(c))
    return "+".join(terms) if terms else "0"


def _parse_poly(text: str, p: int) -> tuple[int, ...]:
    coeffs: dict[int, int] = {}
    for term in text.replace(" ", "").split("+"):
        m = re.fullmatch(r"(\d*)(?:\*?([a-z])(?:\^(\d+))?)?", term)
        if not m or not term:
            raise FieldError(f"cannot parse polynomial term {term!r}")
        c, var, e = m.groups()
        if var is None:
            deg, coef = 0, int(c)
        else:
            deg, coef = (int(e) if e else 1), (int(c) if c else 1)
        coeffs[deg] = (coeffs.get(deg, 0) + coef) % p
    k = max(coeffs)
    return tuple(coeffs.get(i, 0) for i in range(k + 1))


@dataclass(frozen=True)
class ExtField:
    """GF(p^k) as F_p[t]/(modulus), with ``modulus`` monic, lowest degree first."""

    base: PrimeField
    degree: int
    modulus: tuple[int, ...]

    def __post_init__(self):
        mod = tuple(int(c) % self.base.p for c in self.modulus)
        object.__setattr__(self, "modulus", mod)
        if self.degree < 1 or len(mod) != self.degree + 1 or mod[-1] != 1:
            raise FieldError("modulus must be monic of the declared degree")
        if not _is_irreducible(mod, self.base.p):
            raise FieldError(f"{_format_poly(mod)} is reducible over F_{self.base.p}")

    @classmethod
    def canonical(cls, p: int, k: int) -> ExtField:
        """GF(p^k) with the irreducible modulus of smallest integer encoding."""
        base = PrimeField(p)
        for mod in _monic_polys(p, k):
            if _is_irreducible(mod, p):
                return cls(base, k, mod)
        raise FieldError(f"no irreducible polynomial of degree {k} over F_{p}")  # pragma: no cover

    @property
    def p(self) -> int:
        return self.base.p

    @property
    def order(self) -> int:
        return self.p**self.degree

    @property
    def zero(self) -> tuple[int, ...]:
        return (0,) * self.degree

    @property
    def one(self) -> tuple[int, ...]:
        return (1,) + (0,) * (self.degree - 1)

    def check(self, a: Sequence[int]) -> tuple[int, ...]:
        a = tuple(a)
        if len(a) != self.degree:
            raise FieldError(f"expected {self.degree} coefficients, got {len(a)}")
        if any(not (isinstance(c, int) and 0 <= c < self.p) for c in a):
            raise FieldError(f"{a!r} has non-canonical coefficients for p={self.p}")
        return a

    def add(self, a, b) -> tuple[int, ...]:
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def sub(self, a, b) -> tuple[int, ...]:
        return tuple((x - y) % self.p for x, y in zip(a, b))

    def neg(self, a) -> tuple[int, ...]:
        return tuple(-x % self.p for x in a)

    def mul(self, a, b) -> tuple[int, ...]:
        return tuple(_poly_mod(_poly_mul(a, b, self.p), self.modulus, self.p))

    def square(self, a) -> tuple[int, ...]:
        return self.mul(a, a)

    def pow(self, a, e: int) -> tuple[int, ...]:
        result, base = self.one, tuple(a)
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a) -> tuple[int, ...]:
        if _poly_is_zero(a):
            raise ZeroDivisionError("0 has no inverse")
        return self.pow(a, self.order - 2)

    def to_int(self, a) -> int:
        return sum(c * self.p**i for i, c in enumerate(a))

    def from_int(self, v: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.degree):
            v, r = divmod(v, self.p)
            out.append(r)
        return tuple(out)

    def elements(self) -> Iterator[tuple[int, ...]]:
        for v in range(self.order):
            yield self.from_int(v)

    @property
    def descriptor(self) -> str:
        return f"GF:{self.p}^{self.degree}:{_format_poly(self.modulus)}"


def _clmul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _gf2_mod(a: int, poly: int) -> int:
    dp = poly.bit_length() - 1
    while a.bit_length() - 1 >= dp:
        a ^= poly << (a.bit_length() - 1 - dp)
    return a


def _gf2_irreducible(poly: int) -> bool:
    m = poly.bit_length() - 1
    if m < 1:
        return False
    for f in range(2, 1 << (m // 2 + 1)):
        if _gf2_mod(poly, f) == 0:
            return False
    return True


@dataclass(frozen=True)
class GF2m:
    """GF(2^m); ``poly`` is the reduction polynomial including the x^m bit."""

    m: int
    poly: int = field(default=0)

    def __post_init__(self):
        if self.poly == 0:
            object.__setattr__(self, "poly", self._smallest_irreducible(self.m))
        if self.poly.bit_length() - 1 != self.m:
            raise FieldError(f"reduction polynomial {self.poly:#x} is not of degree {self.m}")
        if not _gf2_irreducible(self.poly):
            raise FieldError(f"reduction polynomial {self.poly:#x} is reducible")

    @staticmethod
    def _smallest_irreducible(m: int) -> int:
        for poly in range(1 << m, 1 << (m + 1)):
            if _gf2_irreducible(poly):
                return poly
        raise FieldError(f"no irreducible polynomial of degree {m}")  # pragma: no cover

    @property
    def order(self) -> int:
        return 1 << self.m

    def check(self, a: int) -> int:
        if not (isinstance(a, int) and 0 <= a < (1 << self.m)):
            raise FieldError(f"{a!r} is not an {self.m}-bit word")
        return a

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        return gf2m_mul(a, b, self.m, self.poly)

    def pow(self, a: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in GF(2^m)")
        return self.pow(a, self.order - 2)

    def elements(self) -> range:
        return range(self.order)

    @property
    def descriptor(self) -> str:
        return f"GF2:{self.m}:{self.poly:#x}"


Field = Union[PrimeField, ExtField, GF2m]


@dataclass(frozen=True)
class FieldVec:
    """A length-``n`` vector over a field; the carrier of sources and seeds."""

    field: Field
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        for c in self.coeffs:
            self.field.check(c)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]


def fp_arith(op: str, a: int, b: int | None, field: PrimeField) -> int:
    """Apply ``op`` in {add, sub, mul, inv, pow} over ``field``.

    ``inv`` ignores ``b``; ``pow`` treats ``b`` as an integer exponent.
    """
    field.check(a)
    if op == "inv":
        return field.inv(a)
    if op == "pow":
        return field.pow(a, b)
    field.check(b)
    if op == "add":
        return field.add(a, b)
    if op == "sub":
        return field.sub(a, b)
    if op == "mul":
        return field.mul(a, b)
    raise FieldError(f"unknown operation {op!r}")


def ext_arith(op: str, a, b, field: ExtField):
    a = field.check(a.coeffs if isinstance(a, FieldVec) else a)
    if op == "square":
        return field.square(a)
    b = field.check(b.coeffs if isinstance(b, FieldVec) else b)
    if op == "add":
        return field.add(a, b)
    if op == "sub":
        return field.sub(a, b)
    if op == "mul":
        return field.mul(a, b)
    raise FieldError(f"unknown operation {op!r}")


def gf2m_mul(a: int, b: int, m: int, poly: int) -> int:
    """Carry-less product of two m-bit words reduced modulo ``poly``."""
    out = 0
    top = 1 << m
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return out


def encode_int(value: int, p: int, n: int) -> tuple[int, ...]:
    """Base-``p`` digits of ``value``, ``n`` of them, most significant first."""
    if value < 0 or value >= p**n:
        raise FieldError(f"{value} does not fit in {n} base-{p} digits")
    out = [0] * n
    for i in range(n - 1, -1, -1):
        value, out[i] = divmod(value, p)
    return tuple(out)


def decode_int(digits: Sequence[int], p: int) -> int:
    v = 0
    for d in digits:
        v = v * p + d
    return v


def encode_bits(bits: str, p: int, n: int) -> FieldVec:
    """Read ``bits`` as a big-endian integer and write it as ``n`` base-p digits."""
    if any(c not in "01" for c in bits):
        raise FieldError(f"not a bitstring: {bits!r}")
    if 2 ** len(bits) > p**n:
        raise FieldError(f"2^{len(bits)} exceeds {p}^{n}; encoding would not be injective")
    return FieldVec(PrimeField(p), encode_int(int(bits, 2) if bits else 0, p, n))


def decode_bits(vec: FieldVec, nbits: int) -> str:
    v = decode_int(vec.coeffs, vec.field.p)
    if v >= 1 << nbits:
        raise FieldError(f"vector is outside the image of {nbits}-bit strings")
    return format(v, f"0{nbits}b") if nbits else ""


def parse_field(desc: str) -> Field:
    """Inverse of the ``descriptor`` property on every field type."""
    parts = desc.strip().split(":")
    kind = parts[0]
    try:
        if kind == "Fp" and len(parts) == 2:
            return PrimeField(int(parts[1]))
        if kind == "GF" and len(parts) == 3:
            p, k = (int(v) for v in parts[1].split("^"))
            return ExtField(PrimeField(p), k, _parse_poly(parts[2], p))
        if kind == "GF2" and len(parts) == 3:
            return GF2m(int(parts[1]), int(parts[2], 16))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, FieldError):
            raise
        raise FieldError(f"malformed field descriptor {desc!r}") from exc
    raise FieldError(f"malformed field descriptor {desc!r}")


def all_vectors(p: int, n: int) -> Iterator[tuple[int, ...]]:
    """F_p^n in the same order as ``encode_int`` over ``range(p**n)``."""
    return itertools.product(range(p), repeat=n)
