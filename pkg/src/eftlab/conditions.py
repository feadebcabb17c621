"""Sufficient conditions for error-free FastTwoSum and ExtractScalar.

Each condition is a conjunction of named clauses evaluated exactly on an
operand pair.  The registry records what each one guarantees (rounding
error representable, FastTwoSum error-free, or an exact split) and for
which rounding modes at each step.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .core import (
    Dyadic, FormatConfig, Fp, exponent, h_lsb, is_multiple_of, ufp, ulp,
)
from .rounding import FAITHFUL_MODES, NEAREST_MODES, RoundingMode

__all__ = [
    "ConditionId", "Guarantee", "ConditionInfo", "CONDITIONS", "parse_condition",
    "clauses", "check", "exponent_gap_bound",
]


class ConditionId(str, enum.Enum):
    LEMMA_FAITH1 = "lemma_faith1"
    COROLLARY_FAITH1 = "corollary_faith1"
    LEMMA_FAITH2 = "lemma_faith2"
    THEOREM_FAITH1 = "theorem_faith1"
    THEOREM_FAITH2 = "theorem_faith2"
    LEMMA_RTO1 = "lemma_rto1"
    LEMMA_RTO3 = "lemma_rto3"
    COROLLARY_RTO1 = "corollary_rto1"
    THEOREM_RTO1 = "theorem_rto1"
    THEOREM_EXTRACT_SCALAR = "theorem_extract_scalar"
    PRIOR_DEKKER = "prior_dekker"
    PRIOR_BOLDO = "prior_boldo"
    PRIOR_JEANNEROD = "prior_jeannerod"
    PRIOR_SIGN_RD = "prior_sign_rd"
    PRIOR_SIGN_RU = "prior_sign_ru"
    PRIOR_SIGN_RZ = "prior_sign_rz"
    PRIOR_LINNAINMAA_PARITY = "prior_linnainmaa_parity"
    PRIOR_LINNAINMAA_H = "prior_linnainmaa_h"

    def __str__(self):
        return self.value


class Guarantee(str, enum.Enum):
    DELTA_IN_F = "delta-in-F"
    EFT = "EFT"
    SPLIT_EFT = "split-EFT"


FR = FAITHFUL_MODES
RO = (RoundingMode.RO,)


@dataclass(frozen=True)
class ConditionInfo:
    guarantee: Guarantee
    # modes the guarantee covers: one entry for the single rounding of a
    # delta-class condition, three (per step) for EFT/split conditions
    modes: tuple
    post_hoc: bool = False


CONDITIONS: dict[ConditionId, ConditionInfo] = {
    ConditionId.LEMMA_FAITH1: ConditionInfo(Guarantee.DELTA_IN_F, (FR,)),
    ConditionId.COROLLARY_FAITH1: ConditionInfo(Guarantee.DELTA_IN_F, (FR,)),
    ConditionId.LEMMA_FAITH2: ConditionInfo(Guarantee.DELTA_IN_F, (FR,)),
    ConditionId.THEOREM_FAITH1: ConditionInfo(Guarantee.DELTA_IN_F, (FR,)),
    ConditionId.THEOREM_FAITH2: ConditionInfo(Guarantee.EFT, (FR, FR, FR)),
    # saturation also makes the error representable under RZ
    ConditionId.LEMMA_RTO1: ConditionInfo(Guarantee.DELTA_IN_F, ((RoundingMode.RO, RoundingMode.RZ),)),
    ConditionId.LEMMA_RTO3: ConditionInfo(Guarantee.DELTA_IN_F, (RO,)),
    ConditionId.COROLLARY_RTO1: ConditionInfo(Guarantee.DELTA_IN_F, (RO,)),
    ConditionId.THEOREM_RTO1: ConditionInfo(Guarantee.EFT, (RO, FR, FR)),
    ConditionId.THEOREM_EXTRACT_SCALAR: ConditionInfo(Guarantee.SPLIT_EFT, (RO, FR, FR)),
    ConditionId.PRIOR_DEKKER: ConditionInfo(Guarantee.EFT, (NEAREST_MODES,) * 3),
    ConditionId.PRIOR_BOLDO: ConditionInfo(Guarantee.DELTA_IN_F, (FR,)),
    ConditionId.PRIOR_JEANNEROD: ConditionInfo(Guarantee.EFT, (FR, FR, FR)),
    ConditionId.PRIOR_SIGN_RD: ConditionInfo(Guarantee.EFT, ((RoundingMode.RD,), FR, FR)),
    ConditionId.PRIOR_SIGN_RU: ConditionInfo(Guarantee.EFT, ((RoundingMode.RU,), FR, FR)),
    ConditionId.PRIOR_SIGN_RZ: ConditionInfo(Guarantee.EFT, ((RoundingMode.RZ,), FR, FR)),
    ConditionId.PRIOR_LINNAINMAA_PARITY: ConditionInfo(Guarantee.EFT, (RO, FR, FR)),
    ConditionId.PRIOR_LINNAINMAA_H: ConditionInfo(
        Guarantee.DELTA_IN_F, ((RoundingMode.RZ, RoundingMode.RO),), post_hoc=True),
}


def parse_condition(text) -> ConditionId:
    if isinstance(text, ConditionId):
        return text
    try:
        return ConditionId(text.strip().lower())
    except ValueError:
        raise ValueError(f"unknown condition {text!r}") from None


def _two_u2_ufp(r: Dyadic, fmt: FormatConfig) -> Dyadic:
    # 2u^2 * ufp(r)
    return ufp(r).scale(1 - 2 * fmt.p)


def _no_overflow(a: Dyadic, b: Dyadic, fmt: FormatConfig) -> bool:
    return abs(a + b) <= fmt.max_finite


def clauses(cond, a: Fp, b: Fp, fmt: FormatConfig, extra: Fp | None = None) -> dict[str, bool]:
    """Evaluate each clause of ``cond`` on ``(a, b)`` separately.

    For ``theorem_extract_scalar`` the pair is ``(sigma, x)``.  For
    ``prior_linnainmaa_h`` ``extra`` is the computed sum ``x``.
    Zero operands are not special-cased here; see :func:`check`.
    """
    cond = parse_condition(cond)
    if not (a.is_finite and b.is_finite):
        raise ValueError("operands must be finite")
    A, B = a.value, b.value
    p = fmt.p
    C = ConditionId

    if cond is C.LEMMA_FAITH1:
        return {"|a| < 2^emin": abs(A) < fmt.min_normal, "|b| < 2^emin": abs(B) < fmt.min_normal}
    if cond is C.COROLLARY_FAITH1:
        return {"|a+b| < 2^(emin+1)": abs(A + B) < fmt.min_normal.scale(1)}
    if cond is C.LEMMA_FAITH2:
        u = fmt.unit_roundoff
        return {
            "|a+b| <= Omega": _no_overflow(A, B, fmt),
            "|a| >= u*ufp(b)": abs(A) >= u * ufp(B),
            "|b| >= u*ufp(a)": abs(B) >= u * ufp(A),
        }
    if cond in (C.THEOREM_FAITH1, C.COROLLARY_RTO1):
        out = {} if cond is C.COROLLARY_RTO1 else {"|a+b| <= Omega": _no_overflow(A, B, fmt)}
        out["a in 2u^2*ufp(b)Z"] = is_multiple_of(A, _two_u2_ufp(B, fmt))
        out["b in 2u^2*ufp(a)Z"] = is_multiple_of(B, _two_u2_ufp(A, fmt))
        return out
    if cond is C.THEOREM_FAITH2:
        return {
            "|a+b| <= Omega": _no_overflow(A, B, fmt),
            "a in ulp(b)Z": is_multiple_of(A, ulp(B, fmt)),
            "b in 2u^2*ufp(a)Z": is_multiple_of(B, _two_u2_ufp(A, fmt)),
        }
    if cond is C.LEMMA_RTO1:
        return {"|a+b| > Omega": abs(A + B) > fmt.max_finite}
    if cond is C.LEMMA_RTO3:
        larger = a if abs(A) >= abs(B) else b
        return {"M_max(|a|,|b|) odd": larger.significand_is_odd}
    if cond is C.THEOREM_RTO1:
        return {"M_a odd": a.significand_is_odd, "a in ulp(b)Z": is_multiple_of(A, ulp(B, fmt))}
    if cond is C.THEOREM_EXTRACT_SCALAR:
        k = exponent(A)
        power = Dyadic(1, k) if k is not None else Dyadic(0)
        return {
            "sigma = 2^k + ulp(2^k)": k is not None and A == power + ulp(power, fmt),
            "2^k >= 2*omega": k is not None and power >= fmt.min_positive.scale(1),
            "|x| <= 2^k": abs(B) <= power,
        }
    if cond is C.PRIOR_DEKKER:
        return {"|a+b| <= Omega": _no_overflow(A, B, fmt), "e_a >= e_b": _cmp_exp(A, B, lambda ea, eb: ea >= eb)}
    if cond is C.PRIOR_BOLDO:
        return {
            "|a+b| <= Omega": _no_overflow(A, B, fmt),
            "|e_a - e_b| <= p-1": _cmp_exp(A, B, lambda ea, eb: abs(ea - eb) <= p - 1),
        }
    if cond is C.PRIOR_JEANNEROD:
        return {
            "|a+b| <= Omega": _no_overflow(A, B, fmt),
            "a in ulp(b)Z": is_multiple_of(A, ulp(B, fmt)),
            "e_a - e_b <= p": _cmp_exp(A, B, lambda ea, eb: ea - eb <= p),
        }
    if cond in (C.PRIOR_SIGN_RD, C.PRIOR_SIGN_RU, C.PRIOR_SIGN_RZ):
        if cond is C.PRIOR_SIGN_RD:
            sign = ("b >= 0", B.sign >= 0)
        elif cond is C.PRIOR_SIGN_RU:
            sign = ("b <= 0", B.sign <= 0)
        else:
            sign = ("a*b >= 0", A.sign * B.sign >= 0)
        return {
            "|a+b| <= Omega": _no_overflow(A, B, fmt),
            "a in ulp(b)Z": is_multiple_of(A, ulp(B, fmt)),
            sign[0]: sign[1],
        }
    if cond is C.PRIOR_LINNAINMAA_PARITY:
        return {"|a| >= |b|": abs(A) >= abs(B), "M_a odd": a.significand_is_odd}
    if cond is C.PRIOR_LINNAINMAA_H:
        if extra is None:
            raise ValueError("prior_linnainmaa_h needs the computed sum x (extra)")
        if not extra.is_finite:
            return {"x finite": False}
        smaller = A if abs(A) <= abs(B) else B
        ex = exponent(extra.value)
        if ex is None or smaller.is_zero():
            return {"e_x - h_min(|a|,|b|) < 2p": True}
        return {"e_x - h_min(|a|,|b|) < 2p": ex - h_lsb(smaller) < 2 * p}
    raise AssertionError(cond)


def _cmp_exp(A: Dyadic, B: Dyadic, rel) -> bool:
    ea, eb = exponent(A), exponent(B)
    if ea is None or eb is None:
        return True
    return rel(ea, eb)


def check(cond, a: Fp, b: Fp, fmt: FormatConfig, extra: Fp | None = None) -> bool:
    """Whether ``(a, b)`` satisfies ``cond``.

    A zero operand satisfies every condition except ``lemma_rto1``: the
    guaranteed conclusion holds trivially there.
    """
    cond = parse_condition(cond)
    if cond is ConditionId.PRIOR_LINNAINMAA_H and extra is None:
        raise ValueError("prior_linnainmaa_h needs the computed sum x (extra)")
    if cond is not ConditionId.LEMMA_RTO1 and (a.is_zero or b.is_zero):
        return True
    return all(clauses(cond, a, b, fmt, extra).values())


def exponent_gap_bound(cond, fmt: FormatConfig) -> int:
    """Largest exponent difference ``e_a - e_b`` the condition admits.

    For ``theorem_faith2`` the bound is asymmetric: ``e_b - e_a`` is
    further limited to ``p - 1``.
    """
    cond = parse_condition(cond)
    p = fmt.p
    bounds = {
        ConditionId.LEMMA_FAITH2: p,
        ConditionId.THEOREM_FAITH1: 2 * p - 1,
        ConditionId.THEOREM_FAITH2: 2 * p - 1,
        ConditionId.PRIOR_BOLDO: p - 1,
        ConditionId.PRIOR_JEANNEROD: p,
    }
    if cond not in bounds:
        raise ValueError(f"{cond} has no closed-form exponent gap")
    return bounds[cond]
