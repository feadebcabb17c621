"""Rounding of exact dyadic values into a format.

All six modes are faithful: a value already in the format is returned
unchanged, anything else goes to one of its two floating-point neighbors.
Overflow follows IEEE 754 for RD/RU/RZ/RNE/RNA.  Round-to-odd saturates at
the largest finite magnitude, because an infinite neighbor has no odd
significand to offer.
"""

from __future__ import annotations

import enum

from .core import Dyadic, FormatConfig, Fp

__all__ = [
    "RoundingMode", "FAITHFUL_MODES", "NEAREST_MODES", "parse_mode",
    "round_dyadic", "round_magnitude", "is_faithful_result",
    "check_double_round_formats", "double_round_ro",
]


class RoundingMode(str, enum.Enum):
    RD = "rd"
    RU = "ru"
    RZ = "rz"
    RNE = "rne"
    RNA = "rna"
    RO = "ro"

    @property
    def is_nearest(self) -> bool:
        return self in (RoundingMode.RNE, RoundingMode.RNA)

    def __str__(self):
        return self.value


FAITHFUL_MODES = tuple(RoundingMode)
NEAREST_MODES = (RoundingMode.RNE, RoundingMode.RNA)


def parse_mode(text) -> RoundingMode:
    if isinstance(text, RoundingMode):
        return text
    try:
        return RoundingMode(text.strip().lower())
    except ValueError:
        names = ", ".join(m.value for m in RoundingMode)
        raise ValueError(f"unknown rounding mode {text!r} (expected one of {names})") from None


def round_up_in_magnitude(mode: RoundingMode, negative: bool, kept: int, rem: int, half: int) -> bool:
    """Whether to bump the truncated significand ``kept`` by one.

    ``rem`` is the discarded remainder and ``half`` the remainder of an exact
    midpoint, both in the same units.
    """
    if rem == 0:
        return False
    if mode is RoundingMode.RZ:
        return False
    if mode is RoundingMode.RU:
        return not negative
    if mode is RoundingMode.RD:
        return negative
    if mode is RoundingMode.RNA:
        return rem >= half
    if mode is RoundingMode.RNE:
        return rem > half or (rem == half and kept & 1 == 1)
    # RO: keep an odd truncation, otherwise step to the odd neighbor
    return kept & 1 == 0


def overflows_to_infinity(mode: RoundingMode, negative: bool) -> bool:
    if mode.is_nearest:
        return True
    if mode is RoundingMode.RU:
        return not negative
    if mode is RoundingMode.RD:
        return negative
    return False


def round_magnitude(mag: int, q: int, negative: bool, mode: RoundingMode, fmt: FormatConfig):
    """Round ``mag * 2**q`` (``mag > 0``) as a value of the given sign.

    Returns ``(M, E)`` of the rounded magnitude, or ``None`` on overflow to
    infinity.
    """
    e = mag.bit_length() - 1 + q
    E = max(e, fmt.emin)
    lsb = E - fmt.p + 1
    if q >= lsb:
        M = mag << (q - lsb)
    else:
        shift = lsb - q
        M = mag >> shift
        rem = mag & ((1 << shift) - 1)
        if round_up_in_magnitude(mode, negative, M, rem, 1 << (shift - 1)):
            M += 1
            if M == 1 << fmt.p:
                M >>= 1
                E += 1
    if E > fmt.emax:
        if overflows_to_infinity(mode, negative):
            return None
        return (1 << fmt.p) - 1, fmt.emax
    return M, E


def round_dyadic(r: Dyadic, mode: RoundingMode, fmt: FormatConfig) -> Fp:
    """Round an exact value into ``fmt`` under ``mode``."""
    mode = parse_mode(mode)
    if r.m == 0:
        return Fp.zero(fmt)
    negative = r.m < 0
    out = round_magnitude(abs(r.m), r.q, negative, mode, fmt)
    if out is None:
        return Fp.inf(fmt, -1 if negative else 1)
    M, E = out
    return Fp(-M if negative else M, E, fmt)


def is_faithful_result(r: Dyadic, x: Fp, fmt: FormatConfig) -> bool:
    """Whether ``x`` is RD(r) or RU(r)."""
    return x in (round_dyadic(r, RoundingMode.RD, fmt), round_dyadic(r, RoundingMode.RU, fmt))


def check_double_round_formats(wide: FormatConfig, narrow: FormatConfig) -> None:
    """Reject format pairs where the wide rounding could lose information.

    The wide format needs ``2p + 2`` bits, at least two extra bits below the
    narrow format's smallest subnormal, and no earlier overflow.
    """
    if wide.p < 2 * narrow.p + 2:
        raise ValueError(f"wide precision {wide.p} < 2*{narrow.p}+2")
    if wide.emin - wide.p > narrow.emin - narrow.p - 2:
        raise ValueError("wide format underflows before the narrow format's subnormals")
    if wide.emax < narrow.emax:
        raise ValueError("wide format overflows before the narrow format")


def double_round_ro(r: Dyadic, fmt_wide: FormatConfig, fmt_narrow: FormatConfig) -> Fp:
    """RNE into ``fmt_narrow`` of RO into ``fmt_wide``."""
    check_double_round_formats(fmt_wide, fmt_narrow)
    inner = round_dyadic(r, RoundingMode.RO, fmt_wide)
    return round_dyadic(inner.value, RoundingMode.RNE, fmt_narrow)
