"""Deciding Polya's conjecture on the strip: lambda_k >= 2k/h for all k.

Closed-form remainder bounds reduce the question on the window
((1 - 2 sqrt(6)/9) pi, pi^2/2] to eigenvalues below 400, hence to levels
k < 1019; a weighted-interval sweep per level extracts the exact failure
windows.  Outside the window the answer is analytic: satisfied below,
failed from pi^2/2 on (first eigenvalue).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .exact import (
    PI,
    CertificateFailure,
    ExactValue,
    compare,
    eval_ball,
    rational,
    sign,
    sqrt,
    value_json,
)
from .spectrum import EigenIndex
from .sweep import (
    LevelScreen,
    WeightedInterval,
    coverage_at,
    coverage_ranges,
    generate_level_intervals,
    make_interval,
)

__all__ = [
    "SEARCH_K_MAX",
    "low_gate",
    "high_gate",
    "k_interval",
    "failure_set_for_k",
    "FailureReport",
    "all_failure_reports",
    "r_bound_first",
    "r_bound_second",
    "first_estimate_threshold",
    "second_estimate_threshold",
    "Verdict",
    "polya_verdict",
    "certify_search_caps",
]

SEARCH_K_MAX = 1019


def low_gate() -> ExactValue:
    """(1 - 2 sqrt(6)/9) pi: below this height the first remainder
    estimate settles the conjecture outright."""
    return (1 - 2 * sqrt(rational(6)) / 9) * PI


def high_gate() -> ExactValue:
    """pi^2/2: from here on the first eigenvalue violates the bound."""
    return PI ** 2 / 2


def k_interval(k: int, idx: EigenIndex) -> Optional[WeightedInterval]:
    """The open set of h where lambda_{m,n}, if it were the k-th
    eigenvalue, would violate the counting bound (natural h units)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return make_interval(Fraction(k), k, idx)


@dataclass(frozen=True)
class FailureReport:
    """Per-level union of open height windows violating the bound."""

    k: int
    intervals: Tuple[Tuple[ExactValue, ExactValue], ...]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "intervals": [
                {
                    "lo_exact": value_json(lo)["exact"],
                    "lo_decimal30": value_json(lo)["decimal30"],
                    "hi_exact": value_json(hi)["exact"],
                    "hi_decimal30": value_json(hi)["decimal30"],
                }
                for lo, hi in self.intervals
            ],
        }


def failure_set_for_k(
    k: int, h_lo: ExactValue, h_hi: ExactValue
) -> FailureReport:
    """Exact certified failure windows for level k inside (h_lo, h_hi)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if sign(h_lo) <= 0 or compare(h_lo, h_hi) >= 0:
        raise ValueError("need 0 < h_lo < h_hi")
    intervals = generate_level_intervals(k, Fraction(k), h_lo, h_hi)
    ranges = coverage_ranges(intervals, h_lo, h_hi, need=k)
    return FailureReport(k, tuple(ranges))


def _default_window() -> Tuple[ExactValue, ExactValue]:
    return low_gate(), high_gate()


def all_failure_reports(
    k_max: int = SEARCH_K_MAX,
    h_lo: Optional[ExactValue] = None,
    h_hi: Optional[ExactValue] = None,
    thread_count: int = 1,
) -> List[FailureReport]:
    """Failure reports for every level 1..k_max with nonempty failure set.

    A certified float screen rules out the bulk of the levels; the exact
    sweep re-derives every flagged level.  ``thread_count`` only chunks
    the (deterministic) screening work.
    """
    if h_lo is None or h_hi is None:
        lo_default, hi_default = _default_window()
        h_lo = h_lo if h_lo is not None else lo_default
        h_hi = h_hi if h_hi is not None else hi_default
    certify_search_caps()
    screen = LevelScreen(k_max, k_max, h_lo, h_hi, lambda_cap=None)

    def screen_level(k: int) -> bool:
        return screen.max_coverage_upper(float(k)) >= k

    flagged: List[int] = []
    ks = list(range(1, k_max + 1))
    if thread_count > 1:
        from concurrent.futures import ThreadPoolExecutor

        chunk = (len(ks) + thread_count - 1) // thread_count
        chunks = [ks[i : i + chunk] for i in range(0, len(ks), chunk)]
        with ThreadPoolExecutor(max_workers=thread_count) as pool:
            results = list(pool.map(lambda c: [k for k in c if screen_level(k)], chunks))
        for part in results:
            flagged.extend(part)
    else:
        flagged = [k for k in ks if screen_level(k)]

    reports = []
    for k in flagged:
        report = failure_set_for_k(k, h_lo, h_hi)
        if report.intervals:
            reports.append(report)
    return reports


# ---------------------------------------------------------------------------
# Closed-form remainder bounds (certified upper bounds on N(lam) - lam h/2)
# ---------------------------------------------------------------------------


def _lam_quarter(lam: ExactValue) -> ExactValue:
    return sqrt(sqrt(lam))


def r_bound_first(h: ExactValue, lam: ExactValue) -> ExactValue:
    """(h/pi - 1) sqrt(lam) + sqrt(pi/h) (2/3)^(3/2) lam^(1/4)."""
    if sign(h) <= 0 or sign(lam) <= 0:
        raise ValueError("h and lambda must be positive")
    c = sqrt(rational(Fraction(8, 27)))
    return (h / PI - 1) * sqrt(lam) + sqrt(PI / h) * c * _lam_quarter(lam)


def r_bound_second(h: ExactValue, lam: ExactValue) -> ExactValue:
    """-(sqrt(h^2+pi^2)-h)/pi sqrt(lam) + (h/pi + sqrt(pi/h)) (2/3)^(3/2) lam^(1/4)."""
    if sign(h) <= 0 or sign(lam) <= 0:
        raise ValueError("h and lambda must be positive")
    c = sqrt(rational(Fraction(8, 27)))
    lead = (sqrt(h * h + PI ** 2) - h) / PI
    return -lead * sqrt(lam) + (h / PI + sqrt(PI / h)) * c * _lam_quarter(lam)


def first_estimate_threshold(h: ExactValue) -> ExactValue:
    """sqrt(lam) >= 8 pi^3/(27 h (pi-h)^2) makes the first bound <= 0 (h < pi)."""
    if sign(PI - h) <= 0:
        raise ValueError("first estimate threshold needs h < pi")
    return 8 * PI ** 3 / (27 * h * (PI - h) ** 2)


def second_estimate_threshold(h: ExactValue) -> ExactValue:
    """sqrt(lam) >= (8/27)((h/pi + sqrt(pi/h))/(sqrt((h/pi)^2+1) - h/pi))^2
    makes the second bound <= 0."""
    ratio = (h / PI + sqrt(PI / h)) / (sqrt((h / PI) ** 2 + 1) - h / PI)
    return rational(Fraction(8, 27)) * ratio ** 2


def certify_search_caps() -> None:
    """Certify the reduction constants behind the k <= 1019 search:
    the second-estimate threshold stays below 20 at both window ends
    (it is convex in h), and N(400) at h = pi^2/2 stays below 1019."""
    lo, hi = _default_window()
    for h in (lo, hi):
        t = second_estimate_threshold(h)
        if compare(t, rational(20)) >= 0:
            raise CertificateFailure(
                "second-estimate threshold not < 20 on the search window"
            )
    # k <= h/2 * 400 + (h/pi) * 20 at h = pi^2/2, certified < 1019
    kb = hi * 200 + (hi / PI) * 20
    if compare(kb, rational(SEARCH_K_MAX)) >= 0:
        raise CertificateFailure("level cap 1019 failed to certify")


# ---------------------------------------------------------------------------
# Verdict
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    """Outcome of the conjecture at a fixed height."""

    kind: str  # "SatisfiedAnalytic" | "SatisfiedSearched" | "Fails"
    failing_k: Tuple[int, ...] = ()
    gate: str = ""

    @property
    def satisfied(self) -> bool:
        return not self.failing_k

    def to_json(self) -> dict:
        return {
            "verdict": self.kind,
            "failing_k": list(self.failing_k),
            "gate": self.gate,
        }


def polya_verdict(h: ExactValue, k_max: int = SEARCH_K_MAX) -> Verdict:
    """Decide the conjecture at height h.

    h <= (1-2 sqrt(6)/9) pi: satisfied by the first estimate.  h > pi^2/2:
    fails at k = 1.  In between: certified per-level coverage counts over
    the 1..1019 levels (complete for lambda < 400 by the analytic gates).
    """
    if sign(h) <= 0:
        raise ValueError("h must be positive")
    lo_gate, hi_gate = _default_window()
    if compare(h, lo_gate) <= 0:
        return Verdict("SatisfiedAnalytic", (), "first-estimate gate")
    if compare(h, hi_gate) > 0:
        return Verdict("Fails", (1,), "first eigenvalue above pi^2/2")
    certify_search_caps()
    screen = LevelScreen(k_max, k_max, lo_gate, hi_gate, lambda_cap=None)
    failing: List[int] = []
    for k in range(1, k_max + 1):
        if screen.coverage_at(Fraction(k), k, h) >= k:
            failing.append(k)
    if failing:
        return Verdict("Fails", tuple(failing), "level search")
    return Verdict("SatisfiedSearched", (), "level search + analytic gates")
