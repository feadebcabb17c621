"""Exact small-format floating-point arithmetic for checking error-free transformations."""

from .algorithms import ModeTriple, extract_scalar, fast_two_sum, rounding_error
from .conditions import ConditionId, check, clauses
from .core import Dyadic, FormatConfig, Fp, pred, succ, to_fp, ufp, ulp
from .rounding import RoundingMode, round_dyadic
from .verifier import SweepReport, SweepSpec, Target, emit_report, load_report, sweep

__all__ = [
    "Dyadic", "FormatConfig", "Fp", "ufp", "ulp", "pred", "succ", "to_fp",
    "RoundingMode", "round_dyadic", "ModeTriple", "fast_two_sum", "extract_scalar",
    "rounding_error", "ConditionId", "check", "clauses", "SweepSpec", "SweepReport",
    "Target", "sweep", "emit_report", "load_report",
]
