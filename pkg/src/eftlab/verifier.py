"""Exhaustive soundness sweeps over small formats.

A sweep walks every operand pair (or every split input) of a format,
evaluates a condition, runs the algorithm under each requested rounding
configuration, and counts pairs where the condition holds but the promised
guarantee does not.  The outer operand index is split into contiguous
chunks; chunk reports merge by summing counts and merging violation lists
in enumeration order, so any partitioning yields the same report.
"""

from __future__ import annotations

import csv
import itertools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import kernel as K
from .algorithms import ModeTriple, faithful_branches, uniform_triples
from .conditions import CONDITIONS, ConditionId, Guarantee, check, parse_condition
from .core import Dyadic, FormatConfig, to_fp, ulp
from .rounding import (
    FAITHFUL_MODES, RoundingMode, check_double_round_formats, parse_mode, round_dyadic,
)

__all__ = [
    "Target", "PAIR_FILTERS", "SweepSpec", "SweepReport", "BudgetExceeded", "ReportError",
    "pair_budget", "sweep", "sweep_delta", "sweep_fts", "sweep_split", "sweep_double_round",
    "merge_reports", "admissible_split_exponents", "double_round_grid",
    "emit_report", "load_report", "SCHEMA",
]

SCHEMA = "eftlab.sweep-report/1"
DEFAULT_PAIR_BUDGET = 10**9
BLOCK_ELEMENTS = 1 << 20


class Target(str, Enum):
    DELTA = "delta-in-F"
    FTS = "fts-eft"
    SPLIT = "split-eft"
    DOUBLE = "double-round"

    def __str__(self):
        return self.value


PAIR_FILTERS = ("abs_sum_le_omega", "abs_sum_gt_omega", "nonzero")


class BudgetExceeded(ValueError):
    pass


class ReportError(OSError):
    pass


def pair_budget() -> int:
    raw = os.environ.get("EFTLAB_PAIR_BUDGET")
    return int(raw) if raw else DEFAULT_PAIR_BUDGET


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep.

    ``modes`` holds rounding modes for ``delta-in-F`` and mode triples for
    ``fts-eft``/``split-eft``; left empty it defaults to the modes the
    condition's guarantee covers.  ``k`` picks the split anchor exponent
    (``None`` sweeps every admissible one).  ``wide`` is the intermediate
    format of a ``double-round`` sweep, whose grid is ``m * 2**q`` with
    ``|m| < 2**grid_bits`` and ``q`` in ``grid_q``.
    """

    fmt: FormatConfig
    target: Target
    condition: ConditionId | None = None
    modes: tuple = ()
    pair_filter: str | None = None
    adversarial: bool = False
    max_violations: int = 100
    k: int | None = None
    wide: FormatConfig | None = None
    grid_bits: int = 10
    grid_q: tuple = (-20, 6)

    def __post_init__(self):
        object.__setattr__(self, "target", Target(self.target))
        if self.condition is not None:
            object.__setattr__(self, "condition", parse_condition(self.condition))
        if self.target is Target.DELTA:
            modes = tuple(parse_mode(m) for m in self.modes)
        else:
            modes = tuple(m if isinstance(m, ModeTriple) else ModeTriple.parse(m) if isinstance(m, str)
                          else ModeTriple(*(parse_mode(x) for x in m)) for m in self.modes)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "grid_q", tuple(self.grid_q))
        if self.pair_filter is not None and self.pair_filter not in PAIR_FILTERS:
            raise ValueError(f"unknown pair filter {self.pair_filter!r}")
        if self.max_violations < 0:
            raise ValueError("max_violations must be >= 0")
        if self.condition is not None:
            guarantee = CONDITIONS[self.condition].guarantee
            expected = {
                Target.DELTA: Guarantee.DELTA_IN_F, Target.FTS: Guarantee.EFT,
                Target.SPLIT: Guarantee.SPLIT_EFT,
            }.get(self.target)
            if guarantee is not expected:
                raise ValueError(f"{self.condition} guarantees {guarantee.value}, not {self.target.value}")
        if self.target is Target.DOUBLE:
            if self.wide is None:
                raise ValueError("double-round sweeps need a wide format")
            check_double_round_formats(self.wide, self.fmt)
        if self.target is Target.SPLIT and self.k is not None:
            if self.k not in admissible_split_exponents(self.fmt):
                raise ValueError(f"k={self.k} is not admissible for F({self.fmt.id})")

    def claimed_modes(self) -> tuple:
        if self.condition is not None:
            return CONDITIONS[self.condition].modes
        if self.target is Target.SPLIT:
            return CONDITIONS[ConditionId.THEOREM_EXTRACT_SCALAR].modes
        if self.target is Target.DELTA:
            return (FAITHFUL_MODES,)
        return (FAITHFUL_MODES,) * 3

    def resolved_modes(self) -> tuple:
        """The concrete modes (or triples) the sweep evaluates, deduplicated."""
        claimed = self.claimed_modes()
        if self.target is Target.DOUBLE:
            return ()
        if self.target is Target.DELTA:
            out = list(self.modes or claimed[0])
            if self.adversarial:
                out += [RoundingMode.RD, RoundingMode.RU]
        else:
            if self.modes:
                out = list(self.modes)
            elif claimed == (FAITHFUL_MODES,) * 3:
                out = uniform_triples()
            else:
                out = [ModeTriple(*t) for t in itertools.product(*claimed)]
            if self.adversarial:
                out += faithful_branches(self._fixed_positions(claimed))
        return tuple(dict.fromkeys(out))

    def _fixed_positions(self, claimed) -> tuple:
        fixed = []
        for modes in claimed:
            if len(modes) == 1:
                fixed.append(modes[0])
            elif set(modes) == set(FAITHFUL_MODES):
                fixed.append(None)
            else:
                raise ValueError(
                    f"adversarial faithful rounding does not apply to {self.condition} "
                    f"(claimed modes {[m.value for m in modes]})")
        return tuple(fixed)

    def to_dict(self) -> dict:
        if self.target is Target.DELTA:
            modes = [m.value for m in self.modes]
        else:
            modes = [t.label() for t in self.modes]
        return {
            "fmt": self.fmt.id, "target": self.target.value,
            "condition": None if self.condition is None else self.condition.value,
            "modes": modes, "pair_filter": self.pair_filter,
            "adversarial": self.adversarial, "max_violations": self.max_violations,
            "k": self.k, "wide": None if self.wide is None else self.wide.id,
            "grid_bits": self.grid_bits, "grid_q": list(self.grid_q),
        }

    @classmethod
    def from_dict(cls, d: dict) -> SweepSpec:
        target = Target(d["target"])
        modes = d.get("modes", [])
        if target is not Target.DELTA:
            modes = [ModeTriple.parse(m, "/") for m in modes]
        return cls(
            fmt=FormatConfig.parse(d["fmt"]), target=target, condition=d.get("condition"),
            modes=tuple(modes), pair_filter=d.get("pair_filter"),
            adversarial=d.get("adversarial", False), max_violations=d.get("max_violations", 100),
            k=d.get("k"), wide=FormatConfig.parse(d["wide"]) if d.get("wide") else None,
            grid_bits=d.get("grid_bits", 10), grid_q=tuple(d.get("grid_q", (-20, 6))),
        )


@dataclass
class SweepReport:
    spec: SweepSpec
    pairs_total: int = 0
    pairs_condition_true: int = 0
    evaluations: int = 0
    evaluations_condition_true: int = 0
    violations_total: int = 0
    violations: list = field(default_factory=list)
    guarantee_holds_outside_condition: int = 0
    failure_outcomes: dict = field(default_factory=dict)
    control: dict | None = None
    wall_time: float = field(default=0.0, compare=False)

    @property
    def clean(self) -> bool:
        return self.violations_total == 0

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "spec": self.spec.to_dict(),
            "resolved_modes": [m.value if isinstance(m, RoundingMode) else m.label()
                               for m in self.spec.resolved_modes()],
            "pairs_total": self.pairs_total,
            "pairs_condition_true": self.pairs_condition_true,
            "evaluations": self.evaluations,
            "evaluations_condition_true": self.evaluations_condition_true,
            "violations_total": self.violations_total,
            "violations": self.violations,
            "guarantee_holds_outside_condition": self.guarantee_holds_outside_condition,
            "failure_outcomes": dict(sorted(self.failure_outcomes.items())),
            "control": self.control,
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_dict(cls, d: dict) -> SweepReport:
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        return cls(
            spec=SweepSpec.from_dict(d["spec"]),
            pairs_total=d["pairs_total"],
            pairs_condition_true=d["pairs_condition_true"],
            evaluations=d["evaluations"],
            evaluations_condition_true=d["evaluations_condition_true"],
            violations_total=d["violations_total"],
            violations=d["violations"],
            guarantee_holds_outside_condition=d["guarantee_holds_outside_condition"],
            failure_outcomes=d["failure_outcomes"],
            control=d.get("control"),
            wall_time=d.get("wall_time", 0.0),
        )


# ---------------------------------------------------------------- merging

def _add_counts(dst: dict, src: dict) -> None:
    for key, n in src.items():
        dst[key] = dst.get(key, 0) + n


def _merge_capped(lists, cap: int) -> list:
    merged = sorted((v for lst in lists for v in lst), key=lambda v: v["index"])
    return merged[:cap]


def merge_reports(reports: list[SweepReport]) -> SweepReport:
    """Combine chunk reports of one spec; associative and commutative."""
    if not reports:
        raise ValueError("nothing to merge")
    spec = reports[0].spec
    if any(r.spec != spec for r in reports):
        raise ValueError("cannot merge reports of different sweeps")
    out = SweepReport(spec)
    for r in reports:
        out.pairs_total += r.pairs_total
        out.pairs_condition_true += r.pairs_condition_true
        out.evaluations += r.evaluations
        out.evaluations_condition_true += r.evaluations_condition_true
        out.violations_total += r.violations_total
        out.guarantee_holds_outside_condition += r.guarantee_holds_outside_condition
        _add_counts(out.failure_outcomes, r.failure_outcomes)
        out.wall_time += r.wall_time
    out.violations = _merge_capped([r.violations for r in reports], spec.max_violations)
    controls = [r.control for r in reports if r.control is not None]
    if controls:
        out.control = _merge_controls(controls, spec.max_violations)
    return out


def _merge_controls(controls: list[dict], cap: int) -> dict:
    by_k: dict = {}
    for c in controls:
        _add_counts(by_k, c["failures_by_k"])
    return {
        "failures": sum(c["failures"] for c in controls),
        "failures_by_k": {k: by_k[k] for k in sorted(by_k, key=int)},
        "far_x_instances": sorted((i for c in controls for i in c["far_x_instances"]),
                                  key=lambda i: i["k"]),
        "examples": _merge_capped([c["examples"] for c in controls], cap),
    }


# ---------------------------------------------------------------- driver

def admissible_split_exponents(fmt: FormatConfig) -> range:
    """Anchor exponents ``k`` with ``2**k >= 2*omega`` and ``2**k`` in the format."""
    return range(fmt.emin - fmt.p + 2, fmt.emax + 1)


def double_round_grid(spec: SweepSpec) -> list[Dyadic]:
    """Distinct values ``m * 2**q`` of the double-rounding grid, ascending."""
    lo, hi = spec.grid_q
    bound = 1 << spec.grid_bits
    values = {Dyadic(m, q) for q in range(lo, hi + 1) for m in range(-bound + 1, bound)}
    return sorted(values)


def _outer_size(spec: SweepSpec) -> tuple[int, int]:
    """(outer index count, total work units) for chunking and budgeting."""
    if spec.target is Target.DOUBLE:
        n = len(double_round_grid(spec))
        return n, n
    count = spec.fmt.count
    if spec.target is Target.SPLIT:
        ks = 1 if spec.k is not None else len(admissible_split_exponents(spec.fmt))
        return count, count * ks
    return count, count * count


def sweep(spec: SweepSpec, jobs: int = 1, partitions: int | None = None,
          allow_large: bool = False) -> SweepReport:
    """Run ``spec`` over ``partitions`` chunks (default ``jobs``) on ``jobs`` processes."""
    outer, work = _outer_size(spec)
    budget = pair_budget()
    if work > budget and not allow_large:
        raise BudgetExceeded(
            f"F({spec.fmt.id}) needs {work} evaluations per mode, over the budget of {budget}; "
            f"use a smaller format (p <= 5, narrow exponent range), raise EFTLAB_PAIR_BUDGET, "
            f"or pass the explicit override")
    spec.resolved_modes()  # reject inapplicable adversarial requests before any work
    parts = max(1, min(partitions or jobs, outer))
    bounds = [(outer * i // parts, outer * (i + 1) // parts) for i in range(parts)]
    start = time.perf_counter()
    if jobs > 1 and parts > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_chunk, [spec] * parts, *zip(*bounds)))
    else:
        chunks = [_run_chunk(spec, lo, hi) for lo, hi in bounds]
    report = merge_reports(chunks)
    report.wall_time = time.perf_counter() - start
    return report


def _require(spec: SweepSpec, target: Target) -> None:
    if spec.target is not target:
        raise ValueError(f"expected a {target.value} sweep, got {spec.target.value}")


def sweep_delta(spec: SweepSpec, **kw) -> SweepReport:
    _require(spec, Target.DELTA)
    return sweep(spec, **kw)


def sweep_fts(spec: SweepSpec, **kw) -> SweepReport:
    _require(spec, Target.FTS)
    return sweep(spec, **kw)


def sweep_split(spec: SweepSpec, k: int | None = None, **kw) -> SweepReport:
    _require(spec, Target.SPLIT)
    if k is not None:
        spec = replace(spec, k=k)
    return sweep(spec, **kw)


def sweep_double_round(spec: SweepSpec, **kw) -> SweepReport:
    _require(spec, Target.DOUBLE)
    return sweep(spec, **kw)


def _run_chunk(spec: SweepSpec, lo: int, hi: int) -> SweepReport:
    runner = {
        Target.DELTA: _chunk_pairs, Target.FTS: _chunk_pairs,
        Target.SPLIT: _chunk_split, Target.DOUBLE: _chunk_double,
    }[spec.target]
    return runner(spec, lo, hi)


# ---------------------------------------------------------------- pair sweeps

class _Collector:
    """Keeps the first ``cap`` violations (by index) seen so far."""

    def __init__(self, cap: int):
        self.cap = cap
        self.items: list = []

    def full_before(self, index: tuple) -> bool:
        return len(self.items) >= self.cap and self.items[-1]["index"] <= list(index)

    def extend(self, entries: list) -> None:
        self.items = sorted(self.items + entries, key=lambda v: v["index"])[:self.cap]


def _pair_filter_mask(name: str | None, s: np.ndarray, a: K.Features, b: K.Features,
                      fmt: FormatConfig) -> np.ndarray:
    shape = np.broadcast(a.n, b.n).shape
    if name is None:
        return np.ones(shape, dtype=bool)
    if name == "abs_sum_le_omega":
        return np.abs(s) <= K.max_units(fmt)
    if name == "abs_sum_gt_omega":
        return np.abs(s) > K.max_units(fmt)
    return ~(a.zero | b.zero)


def _chunk_pairs(spec: SweepSpec, lo: int, hi: int) -> SweepReport:
    fmt = spec.fmt
    units = K.float_units(fmt)
    feats = K.features(units, fmt)
    nb = len(units)
    cond = spec.condition
    post_hoc = cond is not None and CONDITIONS[cond].post_hoc
    modes = spec.resolved_modes()
    report = SweepReport(spec)
    collector = _Collector(spec.max_violations)
    rows = max(1, BLOCK_ELEMENTS // nb)
    for r0 in range(lo, hi, rows):
        r1 = min(hi, r0 + rows)
        a = feats[r0:r1, None]
        b = feats[None, :]
        s = a.n + b.n
        filt = _pair_filter_mask(spec.pair_filter, s, a, b, fmt)
        if cond is None:
            base = filt
        elif post_hoc:
            base = None
        else:
            base = filt & K.condition_mask(cond, a, b, fmt)
        report.pairs_total += int(filt.sum())
        if spec.target is Target.DELTA:
            any_cond = _delta_block(spec, modes, a, b, s, filt, base, r0, report, collector)
        else:
            any_cond = _fts_block(spec, modes, a, b, s, filt, base, r0, report, collector)
        report.pairs_condition_true += int(any_cond.sum())
    report.violations = collector.items
    return report


def _tally(report: SweepReport, filt, cond_m, ok, outcomes: dict) -> np.ndarray:
    viol = cond_m & ~ok
    report.evaluations += int(filt.sum())
    report.evaluations_condition_true += int(cond_m.sum())
    report.violations_total += int(viol.sum())
    report.guarantee_holds_outside_condition += int((filt & ~cond_m & ok).sum())
    for name, mask in outcomes.items():
        n = int((filt & ~ok & mask).sum())
        if n:
            report.failure_outcomes[name] = report.failure_outcomes.get(name, 0) + n
    return viol


def _violation_positions(viol: np.ndarray, r0: int, t: int, collector: _Collector):
    flat = np.flatnonzero(viol)[:collector.cap]
    ncols = viol.shape[1]
    for f in flat:
        i, j = divmod(int(f), ncols)
        index = (r0 + i, j, t)
        if collector.full_before(index):
            break
        yield i, j, [r0 + i, j, t]


def _delta_block(spec, modes, a, b, s, filt, base, r0, report, collector):
    fmt = spec.fmt
    cond = spec.condition
    saturating = cond is ConditionId.LEMMA_RTO1
    any_cond = np.zeros(s.shape, dtype=bool)
    top = K.max_units(fmt)
    for t, mode in enumerate(modes):
        x, x_inf = K.round_units(s, mode, fmt)
        delta = s - x
        finite = x_inf == 0
        delta_ok = finite & K.in_format_units(delta, fmt)
        ok = delta_ok
        outcomes = {"overflow": ~finite, "delta_not_in_F": finite & ~delta_ok}
        if saturating:
            saturated = finite & (np.abs(x) == top)
            ok = ok & saturated
            outcomes["not_saturated"] = delta_ok & ~saturated
        cond_m = base if base is not None else filt & K.post_hoc_mask(cond, a, b, x, x_inf, fmt)
        any_cond |= cond_m
        viol = _tally(report, filt, cond_m, ok, outcomes)
        entries = []
        for i, j, index in _violation_positions(viol, r0, t, collector):
            out = "overflow" if not finite[i, j] else "delta_not_in_F" if not delta_ok[i, j] else "not_saturated"
            entries.append({
                "index": index,
                "a": K.literal_units(a.n[i, 0], 0, fmt), "b": K.literal_units(b.n[0, j], 0, fmt),
                "mode": mode.value,
                "x": K.literal_units(x[i, j], x_inf[i, j], fmt),
                "delta": K.literal_units(delta[i, j], 0, fmt) if finite[i, j] else "",
                "outcome": out,
            })
        collector.extend(entries)
    return any_cond


def _fts_block(spec, modes, a, b, s, filt, base, r0, report, collector):
    fmt = spec.fmt
    cond = spec.condition
    any_cond = np.zeros(s.shape, dtype=bool)
    xs: dict = {}
    zs: dict = {}
    for t, triple in enumerate(modes):
        o1, o2, o3 = triple
        if o1 not in xs:
            xs[o1] = K.round_units(s, o1, fmt)
        x, x_inf = xs[o1]
        if (o1, o2) not in zs:
            zs[o1, o2] = K.round_units_inf(x - a.n, x_inf, o2, fmt)
        z, z_inf = zs[o1, o2]
        y, y_inf = K.round_units_inf(b.n - z, -z_inf, o3, fmt)
        overflow = (x_inf != 0) | (z_inf != 0) | (y_inf != 0)
        ok = ~overflow & (x + y == s)
        cond_m = base if base is not None else filt & K.post_hoc_mask(cond, a, b, x, x_inf, fmt)
        any_cond |= cond_m
        viol = _tally(report, filt, cond_m, ok, {"overflow": overflow, "inexact": ~overflow})
        entries = []
        for i, j, index in _violation_positions(viol, r0, t, collector):
            entries.append({
                "index": index,
                "a": K.literal_units(a.n[i, 0], 0, fmt), "b": K.literal_units(b.n[0, j], 0, fmt),
                "modes": triple.label(),
                "x": K.literal_units(x[i, j], x_inf[i, j], fmt),
                "z": K.literal_units(z[i, j], z_inf[i, j], fmt),
                "y": K.literal_units(y[i, j], y_inf[i, j], fmt),
                "delta": K.literal_units(s[i, j] - x[i, j], 0, fmt) if not x_inf[i, j] else "",
                "outcome": "overflow" if overflow[i, j] else "inexact",
            })
        collector.extend(entries)
    return any_cond


# ---------------------------------------------------------------- split sweep

def _split_arrays(sigma: int, xs: np.ndarray, triple: ModeTriple, fmt: FormatConfig):
    s, s_inf = K.round_units(sigma + xs, triple.o1, fmt)
    xh, xh_inf = K.round_units_inf(s - sigma, s_inf, triple.o2, fmt)
    xl, xl_inf = K.round_units_inf(xs - xh, -xh_inf, triple.o3, fmt)
    overflow = (s_inf != 0) | (xh_inf != 0) | (xl_inf != 0)
    # x_h on the grid of half ulp(sigma); a half-omega grid holds every value
    half_ulp = K.to_units(ulp(K.from_units(sigma, fmt), fmt), fmt) >> 1
    grid_ok = ~overflow & ((xh & (half_ulp - 1)) == 0 if half_ulp >= 1 else np.ones(xs.shape, bool))
    exact = ~overflow & (xh + xl == xs)
    return (s, s_inf), (xh, xh_inf), (xl, xl_inf), overflow, grid_ok, exact


def _split_entry(index, k, sigma, x, triple, arrays, i, fmt):
    (s, s_inf), (xh, xh_inf), (xl, xl_inf), overflow, grid_ok, exact = arrays
    if overflow[i]:
        outcome = "overflow"
    elif not grid_ok[i]:
        outcome = "off_grid"
    else:
        outcome = "inexact_split"
    return {
        "index": index, "k": k,
        "sigma": K.literal_units(sigma, 0, fmt), "x": K.literal_units(x, 0, fmt),
        "modes": triple.label(),
        "s": K.literal_units(s[i], s_inf[i], fmt),
        "x_h": K.literal_units(xh[i], xh_inf[i], fmt),
        "x_l": K.literal_units(xl[i], xl_inf[i], fmt),
        "outcome": outcome,
    }


def _chunk_split(spec: SweepSpec, lo: int, hi: int) -> SweepReport:
    fmt = spec.fmt
    units = K.float_units(fmt)
    modes = spec.resolved_modes()
    ks = [spec.k] if spec.k is not None else list(admissible_split_exponents(fmt))
    report = SweepReport(spec)
    collector = _Collector(spec.max_violations)
    control_examples = _Collector(spec.max_violations)
    control = {"failures": 0, "failures_by_k": {}, "far_x_instances": [], "examples": []}
    ro_triple = ModeTriple.uniform(RoundingMode.RO)
    for ki, k in enumerate(ks):
        power = K.to_units(Dyadic(1, k), fmt)
        sigma = power + K.to_units(ulp(Dyadic(1, k), fmt), fmt)
        idx = np.arange(lo, hi)
        xs = units[lo:hi]
        sel = np.abs(xs) <= power
        idx, xs = idx[sel], xs[sel]
        if not len(xs):
            continue
        sigma_fp = to_fp(K.from_units(sigma, fmt), fmt)
        if spec.condition is None:
            cond_m = np.ones(len(xs), dtype=bool)
        else:
            cond_m = np.array([check(spec.condition, sigma_fp, to_fp(K.from_units(x, fmt), fmt), fmt)
                               for x in xs], dtype=bool)
        report.pairs_total += len(xs)
        report.pairs_condition_true += int(cond_m.sum())
        filt = np.ones(len(xs), dtype=bool)

        # x = 2**(k - 2p) sits just past the reach of a power-of-two anchor
        # under round-to-odd; record whether the control breaks there
        far_x = Dyadic(1, k - 2 * fmt.p)
        far_pos = None
        if far_x >= fmt.min_positive:
            hits = np.flatnonzero(xs == K.to_units(far_x, fmt))
            far_pos = int(hits[0]) if len(hits) else None

        for t, triple in enumerate(modes):
            arrays = _split_arrays(sigma, xs, triple, fmt)
            overflow, grid_ok, exact = arrays[3:]
            ok = grid_ok & exact
            viol = _tally(report, filt, cond_m, ok, {
                "overflow": overflow, "off_grid": ~overflow & ~grid_ok,
                "inexact_split": ~overflow & grid_ok & ~exact,
            })
            collector.extend([
                _split_entry([ki, int(idx[i]), t], k, sigma, xs[i], triple, arrays, i, fmt)
                for i in np.flatnonzero(viol)[:spec.max_violations]
            ])

            # control: the plain power of two as anchor
            c_arrays = _split_arrays(power, xs, triple, fmt)
            c_fail = ~(c_arrays[4] & c_arrays[5])
            n_fail = int(c_fail.sum())
            control["failures"] += n_fail
            if n_fail:
                control["failures_by_k"][str(k)] = control["failures_by_k"].get(str(k), 0) + n_fail
            control_examples.extend([
                _split_entry([ki, int(idx[i]), t], k, power, xs[i], triple, c_arrays, i, fmt)
                for i in np.flatnonzero(c_fail)[:spec.max_violations]
            ])
            if far_pos is not None and triple == ro_triple:
                control["far_x_instances"].append({
                    "k": k, "x": str(far_x), "failed": bool(c_fail[far_pos]),
                })
    report.violations = collector.items
    control["examples"] = control_examples.items
    report.control = control
    return report


# ---------------------------------------------------------------- double rounding

def _chunk_double(spec: SweepSpec, lo: int, hi: int) -> SweepReport:
    narrow, wide = spec.fmt, spec.wide
    grid = double_round_grid(spec)[lo:hi]
    report = SweepReport(spec)
    entries = []
    for i, r in enumerate(grid, start=lo):
        inner = round_dyadic(r, RoundingMode.RO, wide)
        doubled = round_dyadic(inner.value, RoundingMode.RNE, narrow)
        direct = round_dyadic(r, RoundingMode.RNE, narrow)
        if doubled != direct:
            report.violations_total += 1
            report.failure_outcomes["mismatch"] = report.failure_outcomes.get("mismatch", 0) + 1
            if len(entries) < spec.max_violations:
                entries.append({
                    "index": [i], "r": str(r), "wide_ro": inner.literal(),
                    "direct": direct.literal(), "doubled": doubled.literal(), "outcome": "mismatch",
                })
    n = len(grid)
    report.pairs_total = report.pairs_condition_true = n
    report.evaluations = report.evaluations_condition_true = n
    report.violations = entries
    return report


# ---------------------------------------------------------------- report files

CSV_COLUMNS = {
    Target.DELTA: ["a", "b", "mode", "x", "delta", "outcome"],
    Target.FTS: ["a", "b", "modes", "x", "z", "y", "delta", "outcome"],
    Target.SPLIT: ["k", "sigma", "x", "modes", "s", "x_h", "x_l", "outcome"],
    Target.DOUBLE: ["r", "wide_ro", "direct", "doubled", "outcome"],
}


def emit_report(report: SweepReport, format: str, path) -> None:
    """Write ``report`` as versioned JSON, or as CSV with one violation per row."""
    try:
        with open(path, "w", newline="") as fh:
            if format == "json":
                json.dump(report.to_dict(), fh, indent=2)
                fh.write("\n")
            elif format == "csv":
                columns = CSV_COLUMNS[report.spec.target]
                writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
                writer.writeheader()
                writer.writerows(report.violations)
            else:
                raise ValueError(f"unknown report format {format!r}")
    except OSError as exc:
        raise ReportError(f"cannot write report to {path}: {exc}") from exc


def load_report(path) -> SweepReport:
    try:
        with open(path) as fh:
            return SweepReport.from_dict(json.load(fh))
    except OSError as exc:
        raise ReportError(f"cannot read report from {path}: {exc}") from exc
