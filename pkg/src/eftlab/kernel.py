"""Array kernels for exhaustive sweeps.

Every element of a format, every exact sum or difference of two elements,
and every rounding of those is an integer multiple of the smallest
subnormal ``omega``.  The sweeps therefore work on integer arrays holding
values in units of ``omega``, where rounding becomes shifts and masks.
Formats too wide for int64 fall back to object arrays of Python ints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conditions import ConditionId
from .core import Dyadic, FormatConfig, enumerate_floats
from .rounding import RoundingMode

__all__ = [
    "unit_dtype", "to_units", "from_units", "literal_units", "bit_length",
    "round_units", "in_format_units", "Features", "features", "float_units",
    "condition_mask", "post_hoc_mask",
]


def unit_dtype(fmt: FormatConfig):
    # sums of two values and one rounding carry need p + (emax - emin) + 2 bits;
    # bit lengths come from float64 frexp, exact below 2**53
    if fmt.p + (fmt.emax - fmt.emin) + 4 <= 52:
        return np.int64
    return object


def _lsb_exponent(fmt: FormatConfig) -> int:
    return fmt.emin - fmt.p + 1


def to_units(r: Dyadic, fmt: FormatConfig) -> int:
    shift = r.q - _lsb_exponent(fmt)
    if r.m and shift < 0:
        raise ValueError(f"{r} is not a multiple of the smallest subnormal")
    return r.m << shift if r.m else 0


def from_units(n: int, fmt: FormatConfig) -> Dyadic:
    return Dyadic(int(n), _lsb_exponent(fmt))


def literal_units(n, inf: int, fmt: FormatConfig) -> str:
    if inf:
        return "inf" if inf > 0 else "-inf"
    return str(from_units(n, fmt))


def max_units(fmt: FormatConfig) -> int:
    return ((1 << fmt.p) - 1) << (fmt.emax - fmt.emin)


_py_bit_length = np.frompyfunc(int.bit_length, 1, 1)


def bit_length(a: np.ndarray) -> np.ndarray:
    """Bit length of nonnegative integers."""
    if a.dtype == object:
        return _py_bit_length(a)
    return np.frexp(a.astype(np.float64))[1].astype(np.int64)


def round_units(n: np.ndarray, mode: RoundingMode, fmt: FormatConfig):
    """Round integers (in units of omega) into ``fmt``.

    Returns ``(values, inf)`` where ``inf`` is -1/0/+1 and ``values`` is 0
    wherever the result is infinite.
    """
    p = fmt.p
    neg = n < 0
    a = np.abs(n)
    shift = np.maximum(bit_length(a) - p, 0)
    kept = a >> shift
    rem = a - (kept << shift)
    half = (np.ones_like(a) << shift) >> 1
    inexact = rem != 0
    if mode is RoundingMode.RZ:
        up = np.zeros(a.shape, dtype=bool)
    elif mode is RoundingMode.RU:
        up = inexact & ~neg
    elif mode is RoundingMode.RD:
        up = inexact & neg
    elif mode is RoundingMode.RNA:
        up = inexact & (rem >= half)
    elif mode is RoundingMode.RNE:
        up = inexact & ((rem > half) | ((rem == half) & ((kept & 1) == 1)))
    elif mode is RoundingMode.RO:
        up = inexact & ((kept & 1) == 0)
    else:
        raise ValueError(mode)
    # object arrays need Python ints, not numpy bools, to stay unbounded
    mag = (kept + (up.astype(object) if a.dtype == object else up)) << shift
    top = max_units(fmt)
    over = mag > top
    if mode.is_nearest:
        to_inf = over
    elif mode is RoundingMode.RU:
        to_inf = over & ~neg
    elif mode is RoundingMode.RD:
        to_inf = over & neg
    else:
        to_inf = np.zeros(a.shape, dtype=bool)
    mag = np.where(over, top, mag)
    values = np.where(neg, -mag, mag)
    values = np.where(to_inf, 0, values)
    inf = np.where(to_inf, np.where(neg, -1, 1), 0).astype(np.int8)
    if a.dtype != object:
        values = values.astype(a.dtype)
    return values, inf


def round_units_inf(n: np.ndarray, n_inf: np.ndarray, mode: RoundingMode, fmt: FormatConfig):
    """``round_units`` where some arguments are already infinite."""
    values, inf = round_units(n, mode, fmt)
    inf = np.where(n_inf != 0, n_inf, inf).astype(np.int8)
    values = np.where(n_inf != 0, 0, values)
    if n.dtype != object:
        values = values.astype(n.dtype)
    return values, inf


def in_format_units(n: np.ndarray, fmt: FormatConfig) -> np.ndarray:
    values, _ = round_units(n, RoundingMode.RZ, fmt)
    return values == n


@dataclass
class Features:
    """Per-value quantities the condition masks are built from (units of omega)."""

    n: np.ndarray
    mag: np.ndarray
    exp: np.ndarray    # floor(log2 |n|), -1 for zero
    ulp: np.ndarray    # log2 ulp
    lsb: np.ndarray    # trailing zeros, -1 for zero
    odd: np.ndarray    # canonical significand is odd
    zero: np.ndarray

    def __getitem__(self, key) -> Features:
        return Features(*(getattr(self, f)[key] for f in self.__dataclass_fields__))


def features(n: np.ndarray, fmt: FormatConfig) -> Features:
    mag = np.abs(n)
    exp = (bit_length(mag) - 1).astype(np.int64)
    lsb = (bit_length(mag & -mag) - 1).astype(np.int64)
    ulp = np.maximum(exp - fmt.p + 1, 0)
    zero = n == 0
    odd = ~zero & (lsb == ulp)
    return Features(n, mag, exp, ulp, lsb, odd, zero)


def float_units(fmt: FormatConfig) -> np.ndarray:
    """All finite elements of ``fmt`` in ascending order, in units of omega."""
    dtype = unit_dtype(fmt)
    out = [fp.M << (fp.E - fmt.emin) for fp in enumerate_floats(fmt)]
    return np.array(out, dtype=dtype)


def _sum_le_max(a: Features, b: Features, fmt: FormatConfig):
    return np.abs(a.n + b.n) <= max_units(fmt)


def condition_mask(cond: ConditionId, a: Features, b: Features, fmt: FormatConfig) -> np.ndarray:
    """Broadcast mask of ``check(cond, a, b)`` over operand arrays.

    Post-hoc conditions are handled by :func:`post_hoc_mask`.
    """
    p = fmt.p
    C = ConditionId
    if cond is C.LEMMA_RTO1:
        return np.abs(a.n + b.n) > max_units(fmt)
    zero = a.zero | b.zero
    # a in 2^t Z for t in units: lsb >= t (a != 0)
    if cond is C.LEMMA_FAITH1:
        m = (a.mag < (1 << (p - 1))) & (b.mag < (1 << (p - 1)))
    elif cond is C.COROLLARY_FAITH1:
        m = np.abs(a.n + b.n) < (1 << p)
    elif cond is C.LEMMA_FAITH2:
        m = _sum_le_max(a, b, fmt) & (a.exp >= b.exp - p) & (b.exp >= a.exp - p)
    elif cond is C.THEOREM_FAITH1:
        m = _sum_le_max(a, b, fmt) & (a.lsb >= b.exp + 1 - 2 * p) & (b.lsb >= a.exp + 1 - 2 * p)
    elif cond is C.COROLLARY_RTO1:
        m = (a.lsb >= b.exp + 1 - 2 * p) & (b.lsb >= a.exp + 1 - 2 * p)
    elif cond is C.THEOREM_FAITH2:
        m = _sum_le_max(a, b, fmt) & (a.lsb >= b.ulp) & (b.lsb >= a.exp + 1 - 2 * p)
    elif cond is C.LEMMA_RTO3:
        m = np.where(a.mag >= b.mag, a.odd, b.odd)
    elif cond is C.THEOREM_RTO1:
        m = a.odd & (a.lsb >= b.ulp)
    elif cond is C.PRIOR_DEKKER:
        m = _sum_le_max(a, b, fmt) & (a.exp >= b.exp)
    elif cond is C.PRIOR_BOLDO:
        m = _sum_le_max(a, b, fmt) & (np.abs(a.exp - b.exp) <= p - 1)
    elif cond is C.PRIOR_JEANNEROD:
        m = _sum_le_max(a, b, fmt) & (a.lsb >= b.ulp) & (a.exp - b.exp <= p)
    elif cond in (C.PRIOR_SIGN_RD, C.PRIOR_SIGN_RU, C.PRIOR_SIGN_RZ):
        if cond is C.PRIOR_SIGN_RD:
            sign = b.n >= 0
        elif cond is C.PRIOR_SIGN_RU:
            sign = b.n <= 0
        else:
            sign = np.sign(a.n) * np.sign(b.n) >= 0
        m = _sum_le_max(a, b, fmt) & (a.lsb >= b.ulp) & sign
    elif cond is C.PRIOR_LINNAINMAA_PARITY:
        m = (a.mag >= b.mag) & a.odd
    else:
        raise ValueError(f"{cond} has no pairwise mask")
    return zero | m


def post_hoc_mask(cond: ConditionId, a: Features, b: Features, x: np.ndarray, x_inf: np.ndarray,
                  fmt: FormatConfig) -> np.ndarray:
    """Mask of a condition that depends on the computed sum ``x``."""
    if cond is not ConditionId.PRIOR_LINNAINMAA_H:
        raise ValueError(f"{cond} is not post-hoc")
    ex = (bit_length(np.abs(x)) - 1).astype(np.int64)
    h_small = np.where(a.mag <= b.mag, a.lsb, b.lsb)
    m = (x_inf == 0) & ((x == 0) | (ex - h_small < 2 * fmt.p))
    return a.zero | b.zero | m
