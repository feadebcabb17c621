import numpy as np
import pytest

from eftlab import kernel as K
from eftlab.conditions import (
    CONDITIONS, ConditionId, Guarantee, check, clauses, exponent_gap_bound, parse_condition,
)
from eftlab.core import FormatConfig, Fp, enumerate_floats, parse_dyadic, to_fp
from eftlab.rounding import RoundingMode, round_dyadic

F3 = FormatConfig(3, -6, 6)
F4 = FormatConfig(4, -10, 10)
C = ConditionId
PAIRWISE = [c for c in C if c is not C.THEOREM_EXTRACT_SCALAR and not CONDITIONS[c].post_hoc]


def fp(text, fmt=F4):
    return to_fp(parse_dyadic(text), fmt)


def masks(fmt):
    feats = K.features(K.float_units(fmt), fmt)
    return feats[:, None], feats[None, :]


# ---------------------------------------------------------------- registry

def test_every_condition_registered():
    assert set(CONDITIONS) == set(C)
    assert len(C) == 18


@pytest.mark.parametrize("cond, guarantee", [
    (C.THEOREM_FAITH1, Guarantee.DELTA_IN_F),
    (C.THEOREM_FAITH2, Guarantee.EFT),
    (C.THEOREM_RTO1, Guarantee.EFT),
    (C.THEOREM_EXTRACT_SCALAR, Guarantee.SPLIT_EFT),
    (C.PRIOR_LINNAINMAA_H, Guarantee.DELTA_IN_F),
])
def test_guarantee_classes(cond, guarantee):
    assert CONDITIONS[cond].guarantee is guarantee


def test_parse_condition():
    assert parse_condition(" Theorem_Faith2 ") is C.THEOREM_FAITH2
    with pytest.raises(ValueError):
        parse_condition("theorem_faith3")


# ---------------------------------------------------------------- worked examples

@pytest.mark.parametrize("cond, a, b, expected", [
    (C.THEOREM_FAITH2, "16", "1/2", True),
    (C.PRIOR_JEANNEROD, "16", "1/2", False),
    (C.THEOREM_FAITH2, "16", "1/16", False),
    (C.THEOREM_RTO1, "18", "-1/16", True),
    (C.THEOREM_FAITH2, "18", "-1/16", False),
    (C.THEOREM_FAITH1, "15", "1/16", True),
    (C.LEMMA_RTO1, "1920", "128", True),
    (C.LEMMA_RTO1, "1920", "0", False),
])
def test_examples(cond, a, b, expected):
    assert check(cond, fp(a), fp(b), F4) is expected


def test_linnainmaa_h_example():
    a, b = fp("15"), fp("1/16")
    x = round_dyadic(a.value + b.value, RoundingMode.RU, F4)
    assert x.value == parse_dyadic("16")
    assert check(C.PRIOR_LINNAINMAA_H, a, b, F4, x) is False
    assert check(C.THEOREM_FAITH1, a, b, F4) is True


def test_linnainmaa_h_needs_computed_sum():
    with pytest.raises(ValueError):
        check(C.PRIOR_LINNAINMAA_H, fp("15"), fp("1/16"), F4)


def test_clause_breakdown():
    out = clauses(C.THEOREM_FAITH2, fp("16"), fp("1/16"), F4)
    assert out == {"|a+b| <= Omega": True, "a in ulp(b)Z": True, "b in 2u^2*ufp(a)Z": False}


def test_extract_scalar_predicate():
    assert check(C.THEOREM_EXTRACT_SCALAR, fp("9/8"), fp("1/256"), F4)
    assert not check(C.THEOREM_EXTRACT_SCALAR, fp("1"), fp("1/256"), F4)
    assert not check(C.THEOREM_EXTRACT_SCALAR, fp("9/8"), fp("3/2"), F4)
    # smallest anchor: 2^k = 2 * omega
    sigma = to_fp(F4.min_positive.scale(1) + F4.min_positive, F4)
    assert check(C.THEOREM_EXTRACT_SCALAR, sigma, to_fp(F4.min_positive, F4), F4)


@pytest.mark.parametrize("cond", [c for c in C if c is not C.LEMMA_RTO1], ids=str)
def test_zero_operands_satisfy(cond):
    zero, one = Fp.zero(F4), fp("1")
    extra = fp("1")
    assert check(cond, zero, one, F4, extra) and check(cond, one, zero, F4, extra)


def test_operands_must_be_finite():
    with pytest.raises(ValueError):
        check(C.THEOREM_FAITH1, Fp.inf(F4), fp("1"), F4)


# ---------------------------------------------------------------- exponent gaps

@pytest.mark.parametrize("cond, bound", [
    (C.LEMMA_FAITH2, 4), (C.THEOREM_FAITH1, 7), (C.THEOREM_FAITH2, 7),
    (C.PRIOR_BOLDO, 3), (C.PRIOR_JEANNEROD, 4),
])
def test_exponent_gap_bound(cond, bound):
    assert exponent_gap_bound(cond, F4) == bound


@pytest.mark.parametrize("cond", [C.LEMMA_FAITH2, C.THEOREM_FAITH1, C.THEOREM_FAITH2, C.PRIOR_BOLDO,
                                  C.PRIOR_JEANNEROD], ids=str)
def test_exponent_gap_bound_is_tight(cond):
    a, b = masks(F4)
    m = K.condition_mask(cond, a, b, F4) & ~(a.zero | b.zero)
    gaps = (a.exp - b.exp)[m]
    assert gaps.max() == exponent_gap_bound(cond, F4)


def test_faith2_reverse_gap():
    a, b = masks(F4)
    m = K.condition_mask(C.THEOREM_FAITH2, a, b, F4) & ~(a.zero | b.zero)
    assert (b.exp - a.exp)[m].max() == F4.p - 1


def test_exponent_gap_bound_rejects_others():
    with pytest.raises(ValueError):
        exponent_gap_bound(C.THEOREM_RTO1, F4)


# ---------------------------------------------------------------- scalar predicate vs array mask

@pytest.mark.parametrize("cond", PAIRWISE, ids=str)
def test_mask_matches_scalar_predicate(cond):
    floats = list(enumerate_floats(F3))
    a, b = masks(F3)
    mask = K.condition_mask(cond, a, b, F3)
    expected = np.array([[check(cond, x, y, F3) for y in floats] for x in floats])
    assert np.array_equal(mask, expected)


@pytest.mark.parametrize("mode", [RoundingMode.RZ, RoundingMode.RO], ids=str)
def test_post_hoc_mask_matches_scalar_predicate(mode):
    floats = list(enumerate_floats(F3))
    a, b = masks(F3)
    x, x_inf = K.round_units(a.n + b.n, mode, F3)
    mask = K.post_hoc_mask(C.PRIOR_LINNAINMAA_H, a, b, x, x_inf, F3)
    expected = np.array([
        [check(C.PRIOR_LINNAINMAA_H, p, q, F3, round_dyadic(p.value + q.value, mode, F3)) for q in floats]
        for p in floats
    ])
    assert np.array_equal(mask, expected)


# ---------------------------------------------------------------- implication lattice

@pytest.mark.parametrize("fmt", [F3, F4], ids=lambda f: f.id)
@pytest.mark.parametrize("stronger, weaker", [
    (C.LEMMA_FAITH2, C.THEOREM_FAITH1),
    (C.THEOREM_FAITH2, C.THEOREM_FAITH1),
    (C.PRIOR_JEANNEROD, C.THEOREM_FAITH2),
    (C.THEOREM_FAITH1, C.COROLLARY_RTO1),
    (C.LEMMA_FAITH1, C.COROLLARY_FAITH1),
    (C.PRIOR_BOLDO, C.LEMMA_FAITH2),
], ids=lambda c: str(c))
def test_implication(fmt, stronger, weaker):
    a, b = masks(fmt)
    s = K.condition_mask(stronger, a, b, fmt)
    w = K.condition_mask(weaker, a, b, fmt)
    assert not (s & ~w).any()


@pytest.mark.parametrize("cond, other, a, b", [
    (C.THEOREM_FAITH2, C.PRIOR_JEANNEROD, "16", "1/2"),
    (C.THEOREM_RTO1, C.THEOREM_FAITH2, "18", "-1/16"),
])
def test_strictness_witness(cond, other, a, b):
    assert check(cond, fp(a), fp(b), F4) and not check(other, fp(a), fp(b), F4)
