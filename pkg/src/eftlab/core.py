"""Parametric binary floating-point sets and exact dyadic arithmetic.

A format ``F(p, emin, emax)`` holds the values ``M * 2**(E - p + 1)`` with
``emin <= E <= emax``, ``|M| < 2**p`` and ``|M| >= 2**(p-1)`` whenever
``E > emin``.  Every quantity the rest of the package touches (operands,
exact sums, rounding errors) is a dyadic rational, so :class:`Dyadic` stands
in for the reals and no operation here ever rounds.
"""

from __future__ import annotations

import enum
import functools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

__all__ = [
    "Dyadic", "FormatConfig", "Fp", "Kind",
    "exponent", "ufp", "ulp", "pred", "succ", "is_multiple_of", "h_lsb",
    "in_format", "to_fp", "enumerate_floats", "parse_dyadic",
]


def _trailing_zeros(m: int) -> int:
    return (m & -m).bit_length() - 1


@functools.total_ordering
class Dyadic:
    """Exact value ``m * 2**q``, kept canonical (``m`` odd, or ``m == q == 0``)."""

    __slots__ = ("m", "q")

    def __init__(self, m: int = 0, q: int = 0):
        m = int(m)
        q = int(q)
        if m == 0:
            q = 0
        else:
            tz = _trailing_zeros(m)
            m >>= tz
            q += tz
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "q", q)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    @classmethod
    def pow2(cls, k: int) -> Dyadic:
        return cls(1, k)

    @classmethod
    def from_fraction(cls, f: Fraction) -> Dyadic:
        d = f.denominator
        if d & (d - 1):
            raise ValueError(f"{f} is not a dyadic rational")
        return cls(f.numerator, -(d.bit_length() - 1))

    @classmethod
    def parse(cls, text: str) -> Dyadic:
        return parse_dyadic(text)

    @staticmethod
    def _coerce(other):
        if isinstance(other, Dyadic):
            return other
        if isinstance(other, int):
            return Dyadic(other)
        if isinstance(other, Fraction):
            return Dyadic.from_fraction(other)
        return NotImplemented

    # arithmetic (all exact)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.m == 0:
            return other
        if other.m == 0:
            return self
        q = min(self.q, other.q)
        return Dyadic((self.m << (self.q - q)) + (other.m << (other.q - q)), q)

    __radd__ = __add__

    def __neg__(self):
        return Dyadic(-self.m, self.q)

    def __pos__(self):
        return self

    def __abs__(self):
        return self if self.m >= 0 else -self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Dyadic(self.m * other.m, self.q + other.q)

    __rmul__ = __mul__

    def scale(self, k: int) -> Dyadic:
        """Multiply by ``2**k``."""
        return Dyadic(self.m, self.q + k) if self.m else self

    # comparison

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.m == other.m and self.q == other.q

    def __lt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).m < 0

    def __hash__(self):
        return hash(self.to_fraction())

    def __bool__(self):
        return self.m != 0

    @property
    def sign(self) -> int:
        return (self.m > 0) - (self.m < 0)

    def is_zero(self) -> bool:
        return self.m == 0

    def to_fraction(self) -> Fraction:
        if self.q >= 0:
            return Fraction(self.m << self.q)
        return Fraction(self.m, 1 << -self.q)

    def __float__(self):
        return float(self.to_fraction())

    def __str__(self):
        if self.q >= 0:
            if self.q <= 64:
                return str(self.m << self.q)
            return f"{self.m}*2^{self.q}"
        if -self.q <= 64:
            return f"{self.m}/{1 << -self.q}"
        return f"{self.m}*2^{self.q}"

    def __repr__(self):
        return f"Dyadic('{self}')"


_LITERAL = re.compile(
    r"^\s*([+-]?)(\d+)(?:\*2\^([+-]?\d+)|/(\d+))?\s*$"
)


def parse_dyadic(text: str) -> Dyadic:
    """Parse ``<int>``, ``<int>*2^<int>`` or ``<int>/<power of two>``."""
    match = _LITERAL.match(text)
    if match is None:
        raise ValueError(f"bad dyadic literal: {text!r}")
    sign, digits, exp, den = match.groups()
    m = int(digits)
    if sign == "-":
        m = -m
    if exp is not None:
        return Dyadic(m, int(exp))
    if den is not None:
        d = int(den)
        if d == 0 or d & (d - 1):
            raise ValueError(f"denominator must be a power of two: {text!r}")
        return Dyadic(m, -(d.bit_length() - 1))
    return Dyadic(m)


@dataclass(frozen=True)
class FormatConfig:
    """The binary format ``F(p, emin, emax)``."""

    p: int
    emin: int
    emax: int

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f"precision must be >= 2, got {self.p}")
        if self.emax < self.emin:
            raise ValueError(f"emax ({self.emax}) < emin ({self.emin})")

    @classmethod
    def parse(cls, text: str) -> FormatConfig:
        try:
            p, emin, emax = (int(part) for part in text.split(","))
        except ValueError:
            raise ValueError(f"format must be 'p,emin,emax', got {text!r}") from None
        return cls(p, emin, emax)

    @property
    def id(self) -> str:
        return f"{self.p},{self.emin},{self.emax}"

    @property
    def unit_roundoff(self) -> Dyadic:
        return Dyadic(1, -self.p)

    @property
    def max_finite(self) -> Dyadic:
        return Dyadic((1 << self.p) - 1, self.emax - self.p + 1)

    @property
    def min_positive(self) -> Dyadic:
        return Dyadic(1, self.emin - self.p + 1)

    @property
    def min_normal(self) -> Dyadic:
        return Dyadic(1, self.emin)

    @property
    def count(self) -> int:
        """Number of finite elements (one zero)."""
        half = 1 << (self.p - 1)
        return 2 * ((self.emax - self.emin + 1) * half + half - 1) + 1


class Kind(enum.Enum):
    FINITE = "finite"
    POS_INF = "+inf"
    NEG_INF = "-inf"


@functools.total_ordering
@dataclass(frozen=True, eq=True)
class Fp:
    """A finite element of a format in canonical ``(M, E)`` form, or an infinity.

    Subnormals and zero use ``E = emin``; there is a single, unsigned zero.
    Infinities carry ``M = E = 0``.
    """

    M: int
    E: int
    fmt: FormatConfig
    kind: Kind = Kind.FINITE

    def __post_init__(self):
        if self.kind is not Kind.FINITE:
            return
        fmt = self.fmt
        if not fmt.emin <= self.E <= fmt.emax:
            raise ValueError(f"exponent {self.E} outside [{fmt.emin}, {fmt.emax}]")
        if abs(self.M) >= 1 << fmt.p:
            raise ValueError(f"significand {self.M} needs more than {fmt.p} bits")
        if self.E > fmt.emin and abs(self.M) < 1 << (fmt.p - 1):
            raise ValueError(f"({self.M}, {self.E}) is not normalized")

    @classmethod
    def zero(cls, fmt: FormatConfig) -> Fp:
        return cls(0, fmt.emin, fmt)

    @classmethod
    def inf(cls, fmt: FormatConfig, sign: int = 1) -> Fp:
        return cls(0, 0, fmt, Kind.POS_INF if sign > 0 else Kind.NEG_INF)

    @classmethod
    def from_dyadic(cls, r: Dyadic, fmt: FormatConfig) -> Fp:
        return to_fp(r, fmt)

    @property
    def is_finite(self) -> bool:
        return self.kind is Kind.FINITE

    @property
    def is_zero(self) -> bool:
        return self.is_finite and self.M == 0

    @property
    def sign(self) -> int:
        if self.kind is Kind.POS_INF:
            return 1
        if self.kind is Kind.NEG_INF:
            return -1
        return (self.M > 0) - (self.M < 0)

    @property
    def value(self) -> Dyadic:
        if not self.is_finite:
            raise ValueError(f"{self.kind.value} has no finite value")
        return Dyadic(self.M, self.E - self.fmt.p + 1)

    @property
    def significand_is_odd(self) -> bool:
        # infinities have no significand, hence are never odd
        return self.is_finite and self.M % 2 == 1

    def __neg__(self):
        if self.kind is Kind.POS_INF:
            return Fp.inf(self.fmt, -1)
        if self.kind is Kind.NEG_INF:
            return Fp.inf(self.fmt, 1)
        return Fp(-self.M, self.E, self.fmt)

    def __abs__(self):
        return -self if self.sign < 0 else self

    def _key(self):
        if self.kind is Kind.NEG_INF:
            return (-1, Dyadic(0))
        if self.kind is Kind.POS_INF:
            return (1, Dyadic(0))
        return (0, self.value)

    def __lt__(self, other):
        if not isinstance(other, Fp):
            return NotImplemented
        return self._key() < other._key()

    def literal(self) -> str:
        if self.is_finite:
            return str(self.value)
        return "inf" if self.kind is Kind.POS_INF else "-inf"

    def to_dict(self) -> dict:
        if self.is_finite:
            return {"M": self.M, "E": self.E, "fmt": self.fmt.id}
        return {"kind": self.kind.value, "fmt": self.fmt.id}

    def __str__(self):
        return self.literal()


def exponent(r: Dyadic) -> int | None:
    """``floor(log2|r|)``; ``None`` stands for the exponent of zero."""
    if r.m == 0:
        return None
    return abs(r.m).bit_length() - 1 + r.q


def ufp(r: Dyadic) -> Dyadic:
    e = exponent(r)
    return Dyadic(0) if e is None else Dyadic(1, e)


def ulp(r: Dyadic, fmt: FormatConfig) -> Dyadic:
    e = exponent(r)
    if e is not None and e >= fmt.emin:
        return Dyadic(1, e - fmt.p + 1)
    return fmt.min_positive


def is_multiple_of(r: Dyadic, g: Dyadic) -> bool:
    """Whether ``r`` lies in ``g * Z`` for ``g`` zero or a power of two."""
    if g.m == 0:
        return r.m == 0
    if g.m != 1:
        raise ValueError(f"modulus must be zero or a positive power of two, got {g}")
    return r.m == 0 or r.q >= g.q


def h_lsb(y: Dyadic) -> int:
    """Exponent of the least significant nonzero bit of ``y``."""
    if y.m == 0:
        raise ValueError("h_lsb is undefined for zero")
    return y.q


def in_format(r: Dyadic, fmt: FormatConfig) -> bool:
    if r.m == 0:
        return True
    e = exponent(r)
    if e > fmt.emax:
        return False
    return r.q >= max(e, fmt.emin) - fmt.p + 1


def to_fp(r: Dyadic, fmt: FormatConfig) -> Fp:
    """Convert an exactly representable dyadic to canonical form."""
    if not in_format(r, fmt):
        raise ValueError(f"{r} is not an element of F({fmt.id})")
    if r.m == 0:
        return Fp.zero(fmt)
    E = max(exponent(r), fmt.emin)
    return Fp(r.m << (r.q - (E - fmt.p + 1)), E, fmt)


def succ(x: Fp) -> Fp:
    fmt = x.fmt
    if not x.is_finite:
        raise ValueError("succ is defined on finite values only")
    if x.is_zero:
        return to_fp(fmt.min_positive, fmt)
    v = x.value
    if v == fmt.max_finite:
        return Fp.inf(fmt, 1)
    if v == -ufp(v) and v < -fmt.min_normal:
        step = ulp(v, fmt).scale(-1)
    else:
        step = ulp(v, fmt)
    return to_fp(v + step, fmt)


def pred(x: Fp) -> Fp:
    fmt = x.fmt
    if not x.is_finite:
        raise ValueError("pred is defined on finite values only")
    if x.is_zero:
        return to_fp(-fmt.min_positive, fmt)
    v = x.value
    if v == -fmt.max_finite:
        return Fp.inf(fmt, -1)
    if v == ufp(v) and v > fmt.min_normal:
        step = ulp(v, fmt).scale(-1)
    else:
        step = ulp(v, fmt)
    return to_fp(v - step, fmt)


def enumerate_floats(fmt: FormatConfig) -> Iterator[Fp]:
    """Every finite element of ``fmt`` once, in ascending order."""
    half = 1 << (fmt.p - 1)
    positives = [(M, fmt.emin) for M in range(1, half)]
    for E in range(fmt.emin, fmt.emax + 1):
        positives.extend((M, E) for M in range(half, 2 * half))
    for M, E in reversed(positives):
        yield Fp(-M, E, fmt)
    yield Fp.zero(fmt)
    for M, E in positives:
        yield Fp(M, E, fmt)
