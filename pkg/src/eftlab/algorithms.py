"""FastTwoSum and ExtractScalar with a rounding mode per operation.

Each call returns a trace holding every intermediate, with the error-free
flags decided in exact dyadic arithmetic.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import NamedTuple

from .core import Dyadic, FormatConfig, Fp, in_format, is_multiple_of, ulp
from .rounding import FAITHFUL_MODES, RoundingMode, parse_mode, round_dyadic

__all__ = [
    "ModeTriple", "FtsTrace", "SplitTrace", "fast_two_sum", "rounding_error",
    "extract_scalar", "uniform_triples", "mixed_triples", "faithful_branches",
]


class ModeTriple(NamedTuple):
    o1: RoundingMode
    o2: RoundingMode
    o3: RoundingMode

    @classmethod
    def parse(cls, text: str, sep: str | None = None) -> ModeTriple:
        """Parse ``o1,o2,o3`` or ``o1/o2/o3``; a single mode fills all three steps."""
        parts = re.split(r"[,/]" if sep is None else re.escape(sep), text)
        parts = [p for p in parts if p.strip()]
        if len(parts) == 1:
            parts = parts * 3
        if len(parts) != 3:
            raise ValueError(f"expected three rounding modes, got {text!r}")
        return cls(*(parse_mode(p) for p in parts))

    @classmethod
    def uniform(cls, mode) -> ModeTriple:
        mode = parse_mode(mode)
        return cls(mode, mode, mode)

    def label(self, sep: str = "/") -> str:
        return sep.join(m.value for m in self)


def uniform_triples() -> list[ModeTriple]:
    return [ModeTriple.uniform(m) for m in FAITHFUL_MODES]


def mixed_triples() -> list[ModeTriple]:
    return [ModeTriple(*t) for t in itertools.product(FAITHFUL_MODES, repeat=3)]


def faithful_branches(fixed: tuple = (None, None, None)) -> list[ModeTriple]:
    """Every per-step choice between rounding down and rounding up.

    A faithful rounding returns RD or RU of its argument, and each step of
    the three-operation algorithms sees one argument, so these eight
    branches reach every output any faithful rounding can produce.  Steps
    given in ``fixed`` keep that mode.
    """
    choices = [
        (parse_mode(f),) if f is not None else (RoundingMode.RD, RoundingMode.RU)
        for f in fixed
    ]
    return [ModeTriple(*t) for t in itertools.product(*choices)]


def _as_triple(modes) -> ModeTriple:
    if isinstance(modes, ModeTriple):
        return modes
    if isinstance(modes, str):
        return ModeTriple.parse(modes)
    return ModeTriple(*(parse_mode(m) for m in modes))


def _round_sum(u: Fp, v: Fp, negate_v: bool, mode: RoundingMode, fmt: FormatConfig) -> Fp:
    """Round ``u + v`` (or ``u - v``), propagating infinities."""
    if negate_v:
        v = -v
    if not u.is_finite or not v.is_finite:
        signs = {w.sign for w in (u, v) if not w.is_finite}
        if len(signs) != 1:
            raise ValueError("inf - inf has no value")
        return Fp.inf(fmt, signs.pop())
    return round_dyadic(u.value + v.value, mode, fmt)


@dataclass(frozen=True)
class FtsTrace:
    a: Fp
    b: Fp
    modes: ModeTriple
    x: Fp
    z: Fp
    y: Fp
    delta: Dyadic | None
    eft: bool
    overflow: bool

    @property
    def outcome(self) -> str:
        if self.overflow:
            return "overflow"
        return "eft" if self.eft else "inexact"

    def to_dict(self) -> dict:
        return {
            "a": self.a.literal(), "b": self.b.literal(),
            "modes": self.modes.label(","),
            "x": self.x.literal(), "z": self.z.literal(), "y": self.y.literal(),
            "delta": None if self.delta is None else str(self.delta),
            "eft": self.eft, "overflow": self.overflow,
        }


def _check_operands(*values: Fp) -> None:
    for v in values:
        if not v.is_finite:
            raise ValueError("operands must be finite")


def fast_two_sum(a: Fp, b: Fp, modes, fmt: FormatConfig) -> FtsTrace:
    """``x = o1(a+b); z = o2(x-a); y = o3(b-z)``."""
    _check_operands(a, b)
    modes = _as_triple(modes)
    x = _round_sum(a, b, False, modes.o1, fmt)
    z = _round_sum(x, a, True, modes.o2, fmt)
    y = _round_sum(b, z, True, modes.o3, fmt)
    overflow = not (x.is_finite and z.is_finite and y.is_finite)
    exact = a.value + b.value
    delta = None if not x.is_finite else exact - x.value
    eft = not overflow and x.value + y.value == exact
    return FtsTrace(a, b, modes, x, z, y, delta, eft, overflow)


def rounding_error(a: Fp, b: Fp, mode, fmt: FormatConfig) -> tuple[Dyadic | None, bool]:
    """``(a + b - round(a + b), whether that error is in the format)``.

    An overflow to infinity has no finite error: ``(None, False)``.
    """
    _check_operands(a, b)
    exact = a.value + b.value
    x = round_dyadic(exact, mode, fmt)
    if not x.is_finite:
        return None, False
    delta = exact - x.value
    return delta, in_format(delta, fmt)


@dataclass(frozen=True)
class SplitTrace:
    sigma: Fp
    x: Fp
    modes: ModeTriple
    s: Fp
    x_h: Fp
    x_l: Fp
    exact_split: bool
    grid_ok: bool
    overflow: bool

    @property
    def ok(self) -> bool:
        return self.exact_split and self.grid_ok

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma.literal(), "x": self.x.literal(),
            "modes": self.modes.label(","),
            "s": self.s.literal(), "x_h": self.x_h.literal(), "x_l": self.x_l.literal(),
            "exact_split": self.exact_split, "grid_ok": self.grid_ok,
            "overflow": self.overflow,
        }


def extract_scalar(sigma: Fp, x: Fp, modes, fmt: FormatConfig) -> SplitTrace:
    """``s = o1(sigma+x); x_h = o2(s-sigma); x_l = o3(x-x_h)``."""
    _check_operands(sigma, x)
    modes = _as_triple(modes)
    s = _round_sum(sigma, x, False, modes.o1, fmt)
    x_h = _round_sum(s, sigma, True, modes.o2, fmt)
    x_l = _round_sum(x, x_h, True, modes.o3, fmt)
    overflow = not (s.is_finite and x_h.is_finite and x_l.is_finite)
    if overflow:
        return SplitTrace(sigma, x, modes, s, x_h, x_l, False, False, True)
    exact_split = x_h.value + x_l.value == x.value
    grid_ok = is_multiple_of(x_h.value, ulp(sigma.value, fmt).scale(-1))
    return SplitTrace(sigma, x, modes, s, x_h, x_l, exact_split, grid_ok, False)
