import itertools
import json

import numpy as np
import pytest

from eftlab import kernel as K
from eftlab.algorithms import ModeTriple, extract_scalar, fast_two_sum, rounding_error, uniform_triples
from eftlab.conditions import ConditionId, check
from eftlab.core import Dyadic, FormatConfig, enumerate_floats, to_fp, ulp
from eftlab.rounding import FAITHFUL_MODES, RoundingMode, round_dyadic
from eftlab.verifier import (
    BudgetExceeded, ReportError, SweepReport, SweepSpec, Target, admissible_split_exponents,
    emit_report, load_report, merge_reports, sweep, sweep_delta, sweep_double_round, sweep_fts,
    sweep_split,
)

F3 = FormatConfig(3, -6, 6)
F4 = FormatConfig(4, -10, 10)
SMALL = FormatConfig(3, -3, 3)
C = ConditionId
RO = RoundingMode.RO


def comparable(report: SweepReport) -> dict:
    d = report.to_dict()
    d.pop("wall_time")
    return d


def find(report, **fields):
    return [v for v in report.violations if all(v[k] == val for k, val in fields.items())]


# ---------------------------------------------------------------- scalar reference route

def scalar_fts(fmt, cond, triples):
    floats = list(enumerate_floats(fmt))
    cond_pairs = violations = outside = 0
    for a, b in itertools.product(floats, repeat=2):
        holds = cond is None or check(cond, a, b, fmt)
        cond_pairs += holds
        for t in triples:
            eft = fast_two_sum(a, b, t, fmt).eft
            violations += holds and not eft
            outside += (not holds) and eft
    return cond_pairs, violations, outside


def scalar_delta(fmt, cond, modes):
    floats = list(enumerate_floats(fmt))
    cond_pairs = violations = 0
    for a, b in itertools.product(floats, repeat=2):
        holds = cond is None or check(cond, a, b, fmt)
        cond_pairs += holds
        for mode in modes:
            violations += holds and not rounding_error(a, b, mode, fmt)[1]
    return cond_pairs, violations


@pytest.mark.parametrize("cond, triples", [
    (C.THEOREM_FAITH2, uniform_triples()),
    (C.PRIOR_JEANNEROD, uniform_triples()),
    (None, [ModeTriple.parse("rz"), ModeTriple.parse("ro,rd,ru"), ModeTriple.parse("rna,ru,rz")]),
], ids=["faith2", "jeannerod", "none"])
def test_fts_sweep_matches_scalar_route(cond, triples):
    report = sweep(SweepSpec(F3, Target.FTS, cond, tuple(triples)))
    cond_pairs, violations, outside = scalar_fts(F3, cond, triples)
    assert report.pairs_total == F3.count ** 2
    assert report.pairs_condition_true == cond_pairs
    assert report.violations_total == violations
    assert report.guarantee_holds_outside_condition == outside


@pytest.mark.parametrize("cond", [C.THEOREM_FAITH1, C.LEMMA_FAITH2, None], ids=str)
def test_delta_sweep_matches_scalar_route(cond):
    report = sweep(SweepSpec(F3, Target.DELTA, cond, FAITHFUL_MODES))
    assert (report.pairs_condition_true, report.violations_total) == scalar_delta(F3, cond, FAITHFUL_MODES)


def test_split_sweep_matches_scalar_route():
    triples = [ModeTriple(RO, o2, o3) for o2, o3 in itertools.product(FAITHFUL_MODES, repeat=2)]
    report = sweep(SweepSpec(SMALL, Target.SPLIT, modes=tuple(triples)))
    floats = list(enumerate_floats(SMALL))
    total = failures = control = 0
    for k in admissible_split_exponents(SMALL):
        power = Dyadic(1, k)
        sigma = to_fp(power + ulp(power, SMALL), SMALL)
        for x in floats:
            if abs(x.value) > power:
                continue
            total += 1
            assert check(C.THEOREM_EXTRACT_SCALAR, sigma, x, SMALL)
            for t in triples:
                failures += not extract_scalar(sigma, x, t, SMALL).ok
                control += not extract_scalar(to_fp(power, SMALL), x, t, SMALL).ok
    assert report.pairs_total == total
    assert report.violations_total == failures == 0
    assert report.control["failures"] == control


def test_double_round_matches_direct_rounding():
    narrow, wide = FormatConfig(3, -4, 4), FormatConfig(8, -9, 4)
    spec = SweepSpec(narrow, Target.DOUBLE, wide=wide, grid_bits=6, grid_q=(-12, 2))
    report = sweep(spec)
    assert report.violations_total == 0
    assert report.pairs_total == len({Dyadic(m, q) for m in range(-63, 64) for q in range(-12, 3)})


# ---------------------------------------------------------------- counterexamples

def test_delta_sweep_finds_ru_counterexample():
    report = sweep_delta(SweepSpec(F4, Target.DELTA, modes=("ru",), pair_filter="nonzero",
                                   max_violations=10**6))
    [hit] = find(report, a="16", b="1/16")
    assert hit["x"] == "18" and hit["delta"] == "-31/16" and hit["outcome"] == "delta_not_in_F"


def test_fts_sweep_finds_rz_counterexample():
    report = sweep_fts(SweepSpec(F4, Target.FTS, modes=("rz",), max_violations=10**6))
    [hit] = find(report, a="18", b="-1/16")
    assert (hit["x"], hit["z"], hit["y"]) == ("16", "-2", "15/8")


def test_split_control_records_power_of_two_failure():
    report = sweep_split(SweepSpec(F4, Target.SPLIT), k=0)
    assert report.violations_total == 0
    assert report.control["far_x_instances"] == [{"k": 0, "x": "1/256", "failed": True}]
    assert report.control["failures"] > 0


def test_saturation_sweep():
    spec = SweepSpec(F3, Target.DELTA, C.LEMMA_RTO1, ("ro",), pair_filter="abs_sum_gt_omega")
    report = sweep(spec)
    assert report.violations_total == 0 and report.pairs_total == report.pairs_condition_true > 0


def test_saturation_guarantee_fails_without_saturation():
    spec = SweepSpec(F3, Target.DELTA, C.LEMMA_RTO1, ("rne",), pair_filter="abs_sum_gt_omega")
    report = sweep(spec)
    # round-to-nearest overflows once the sum reaches the midpoint past Omega
    threshold = F3.max_finite + ulp(F3.max_finite, F3).scale(-1)
    floats = [x.value for x in enumerate_floats(F3)]
    expected = sum(abs(a + b) >= threshold for a in floats for b in floats)
    assert 0 < report.violations_total == expected < report.pairs_total
    assert report.failure_outcomes == {"overflow": expected}


# ---------------------------------------------------------------- spec handling

def test_default_modes():
    assert len(SweepSpec(F3, Target.FTS, C.THEOREM_FAITH2).resolved_modes()) == 6
    assert len(SweepSpec(F3, Target.FTS, C.THEOREM_RTO1).resolved_modes()) == 36
    assert len(SweepSpec(F3, Target.FTS, C.PRIOR_DEKKER).resolved_modes()) == 8
    assert SweepSpec(F3, Target.DELTA, C.COROLLARY_RTO1).resolved_modes() == (RO,)
    assert len(SweepSpec(F3, Target.SPLIT).resolved_modes()) == 36
    assert len(SweepSpec(F3, Target.FTS, C.THEOREM_FAITH2, adversarial=True).resolved_modes()) == 12


def test_adversarial_rejected_for_nearest_only_claims():
    with pytest.raises(ValueError):
        SweepSpec(F3, Target.FTS, C.PRIOR_DEKKER, adversarial=True).resolved_modes()


@pytest.mark.parametrize("kwargs", [
    dict(target=Target.FTS, condition=C.THEOREM_FAITH1),
    dict(target=Target.DELTA, condition=C.THEOREM_FAITH2),
    dict(target=Target.SPLIT, k=F4.emin - F4.p + 1),
    dict(target=Target.SPLIT, k=F4.emax + 1),
    dict(target=Target.DOUBLE),
    dict(target=Target.FTS, pair_filter="positive"),
    dict(target=Target.FTS, max_violations=-1),
])
def test_spec_rejects(kwargs):
    with pytest.raises(ValueError):
        SweepSpec(F4, **kwargs)


def test_wrapper_checks_target():
    with pytest.raises(ValueError):
        sweep_delta(SweepSpec(F3, Target.FTS))
    with pytest.raises(ValueError):
        sweep_double_round(SweepSpec(F3, Target.FTS))


def test_budget_guard(monkeypatch):
    with pytest.raises(BudgetExceeded, match="smaller format"):
        sweep(SweepSpec(FormatConfig(11, -100, 100), Target.FTS))
    monkeypatch.setenv("EFTLAB_PAIR_BUDGET", "1000")
    with pytest.raises(BudgetExceeded):
        sweep(SweepSpec(F3, Target.FTS))
    assert sweep(SweepSpec(F3, Target.FTS), allow_large=True).pairs_total == F3.count ** 2


def test_violation_cap_keeps_exact_total():
    spec = SweepSpec(F4, Target.FTS, modes=("rz",), max_violations=5)
    report = sweep(spec)
    assert len(report.violations) == 5
    assert report.violations_total > 5
    assert [v["index"] for v in report.violations] == sorted(v["index"] for v in report.violations)


# ---------------------------------------------------------------- wide formats use Python ints

def test_object_dtype_path():
    wide = FormatConfig(2, -26, 26)
    assert K.unit_dtype(wide) is object
    units = K.float_units(wide)
    sums = np.unique((units[:, None] + units[None, :]).ravel())[::97]
    for mode in FAITHFUL_MODES:
        values, inf = K.round_units(sums, mode, wide)
        for n, v, i in zip(sums, values, inf):
            x = round_dyadic(K.from_units(n, wide), mode, wide)
            assert (x.sign if not x.is_finite else 0) == i
            if x.is_finite:
                assert x.value == K.from_units(v, wide)
    report = sweep(SweepSpec(wide, Target.FTS, C.THEOREM_FAITH2))
    assert report.violations_total == 0


# ---------------------------------------------------------------- determinism and partitioning

@pytest.mark.parametrize("spec", [
    SweepSpec(F3, Target.FTS, modes=("rz", "ro/rd/ru")),
    SweepSpec(F3, Target.DELTA, modes=("ru", "rd")),
    SweepSpec(F3, Target.DELTA, C.PRIOR_LINNAINMAA_H),
    SweepSpec(SMALL, Target.SPLIT, max_violations=3),
], ids=["fts", "delta", "post-hoc", "split"])
def test_partitioning_does_not_change_report(spec):
    base = comparable(sweep(spec))
    assert comparable(sweep(spec)) == base
    assert comparable(sweep(spec, partitions=7)) == base
    assert comparable(sweep(spec, jobs=2)) == base


def test_merge_is_order_independent():
    spec = SweepSpec(F3, Target.FTS, modes=("rz",), max_violations=10)
    from eftlab.verifier import _run_chunk
    n = F3.count
    chunks = [_run_chunk(spec, lo, hi) for lo, hi in [(0, 30), (30, 31), (31, 80), (80, n)]]
    forward = comparable(merge_reports(chunks))
    assert comparable(merge_reports(chunks[::-1])) == forward
    assert comparable(merge_reports([merge_reports(chunks[:2]), merge_reports(chunks[2:])])) == forward


def test_merge_rejects_mixed_specs():
    a = sweep(SweepSpec(SMALL, Target.FTS))
    b = sweep(SweepSpec(SMALL, Target.DELTA))
    with pytest.raises(ValueError):
        merge_reports([a, b])
    with pytest.raises(ValueError):
        merge_reports([])


# ---------------------------------------------------------------- report files

def test_clean_report_json(tmp_path):
    report = sweep(SweepSpec(F3, Target.FTS, C.THEOREM_FAITH2))
    path = tmp_path / "r.json"
    emit_report(report, "json", path)
    data = json.loads(path.read_text())
    assert data["schema"] == "eftlab.sweep-report/1"
    assert data["violations"] == []
    assert data["pairs_total"] == F3.count ** 2


def test_report_round_trip(tmp_path):
    spec = SweepSpec(SMALL, Target.SPLIT, k=0, max_violations=4)
    report = sweep(spec)
    path = tmp_path / "r.json"
    emit_report(report, "json", path)
    assert load_report(path) == report
    report = sweep(SweepSpec(F3, Target.FTS, modes=("rz",), max_violations=4))
    emit_report(report, "json", path)
    assert load_report(path) == report


def test_csv_row_has_dyadic_literals(tmp_path):
    report = sweep(SweepSpec(F4, Target.FTS, modes=("rz",), max_violations=1))
    path = tmp_path / "r.csv"
    emit_report(report, "csv", path)
    header, row = path.read_text().splitlines()
    assert header == "a,b,modes,x,z,y,delta,outcome"
    assert row == "-1920,1/8192,rz/rz/rz,-1792,128,-120,-1048575/8192,inexact"


def test_report_io_errors_name_the_path(tmp_path):
    report = sweep(SweepSpec(SMALL, Target.FTS))
    bad = tmp_path / "missing" / "r.json"
    with pytest.raises(ReportError, match="missing"):
        emit_report(report, "json", bad)
    with pytest.raises(ReportError, match="missing"):
        load_report(bad)
    with pytest.raises(ValueError):
        emit_report(report, "xml", tmp_path / "r.xml")
