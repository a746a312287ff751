"""Weighted-interval coverage machinery shared by the two searches.

Both searches ask, level by level, whether some h in a window lies inside
at least k open intervals whose endpoints are quadratic surds in pi.  Two
cooperating passes answer it:

* an exact event sweep over ``ExactValue`` endpoints with certified
  comparisons -- the authoritative path, used for levels that matter;
* a vectorized float64 screen that computes a *certified upper bound* on
  the maximal coverage of a level, used to discard the overwhelming
  majority of levels without exact arithmetic.

Screen soundness: endpoints are evaluated in cancellation-free form
(lo = S / (m^2 (t + sqrt(t^2 - S)))), whose absolute float64 error inside
the window is below 5e-10 (inputs m^2 n^2 and t^2 = (k - 1/2)^2 are exact
in float64 up to the search caps; the error budget is dominated by the
2-ulp error of S = m^2 n^2 pi^2 propagated through one subtraction, one
square root and one division).  Start events are shifted left and end
events shifted right by DELTA = 1e-8 >> 5e-10, seeds are counted
generously, near-tangent intervals (t^2 - S < 1e-10 t^2) are replaced by
fattened enclosing intervals, and borderline pruning decisions fall back
to certified exact comparisons.  Every shift only increases the computed
coverage, so a screen value < k certifies the level clean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .exact import PI, ExactValue, compare, rational, sign, sqrt
from .spectrum import EigenIndex

__all__ = [
    "WeightedInterval",
    "make_interval",
    "generate_level_intervals",
    "coverage_ranges",
    "coverage_at",
    "LevelScreen",
    "DELTA",
]

DELTA = 1e-8
_NEAR_TANGENT = 1e-10


@dataclass(frozen=True)
class WeightedInterval:
    """Open interval of heights with an integer multiplicity weight."""

    lo: ExactValue
    hi: Optional[ExactValue]  # None encodes +infinity
    weight: int
    source: EigenIndex
    k: int

    def contains(self, h: ExactValue) -> bool:
        if compare(self.lo, h) >= 0:
            return False
        return self.hi is None or compare(h, self.hi) < 0


def make_interval(
    threshold: Fraction, k: int, idx: EigenIndex
) -> Optional[WeightedInterval]:
    """The open interval of h with threshold > m^2 h/2 + n^2 pi^2/(2h),
    in natural h units; None when the interval is empty.

    For m = 0 the interval is (n^2 pi^2 / (2 threshold), +inf), weight 1.
    For m >= 1 it is nonempty iff threshold^2 > m^2 n^2 pi^2 (certified;
    equality cannot occur, pi^2 being irrational), with endpoints
    (threshold -+ sqrt(threshold^2 - m^2 n^2 pi^2)) / m^2 and weight 2.
    """
    m, n = idx.m, idx.n
    t = rational(threshold)
    if m == 0:
        lo = rational(n * n) * PI ** 2 / (2 * t)
        return WeightedInterval(lo, None, 1, idx, k)
    disc = t * t - rational(m * m * n * n) * PI ** 2
    if sign(disc) <= 0:
        return None
    root = sqrt(disc)
    m2 = rational(m * m)
    return WeightedInterval((t - root) / m2, (t + root) / m2, 2, idx, k)


def generate_level_intervals(
    k: int,
    threshold: Fraction,
    h_lo: ExactValue,
    h_hi: ExactValue,
    pair_filter: Optional[Callable[[int, int], bool]] = None,
    m_cap: Optional[int] = None,
    n_cap: Optional[int] = None,
) -> List[WeightedInterval]:
    """All nonempty level intervals that can intersect (h_lo, h_hi).

    m and n range over 1..k (0..k for m) as in the search, further pruned
    by m n < threshold/pi, by the window, and by ``pair_filter`` (the
    eigenvalue cap of the relaxed search) when given.
    """
    out: List[WeightedInterval] = []
    tf = float(threshold)
    # m = 0 column: lo increasing in n; stop once lo >= h_hi
    n = 1
    n_top = n_cap if n_cap is not None else k
    while n <= n_top:
        iv = make_interval(threshold, k, EigenIndex(0, n))
        if compare(iv.lo, h_hi) >= 0:
            break
        if pair_filter is None or pair_filter(0, n):
            out.append(iv)
        n += 1
    # m >= 1: nonempty needs m n < threshold/pi (certified inside
    # make_interval; the float cap only bounds the loops)
    mn_cap = tf / math.pi
    m_top = m_cap if m_cap is not None else k
    hi_f = float(h_hi)
    lo_f = float(h_lo)
    m = 1
    while m <= m_top and m <= mn_cap + 1:
        n = 1
        while n <= n_top and m * n <= mn_cap + 1:
            if pair_filter is not None and not pair_filter(m, n):
                n += 1
                continue
            iv = make_interval(threshold, k, EigenIndex(m, n))
            if iv is not None:
                # window prefilter (floats), certified at the boundary
                keep = float(iv.lo) < hi_f + 1e-6 and float(iv.hi) > lo_f - 1e-6
                if keep and compare(iv.lo, h_hi) < 0 and compare(iv.hi, h_lo) > 0:
                    out.append(iv)
            n += 1
        m += 1
    return out


def _event_cmp(a, b) -> int:
    c = compare(a[0], b[0])
    if c:
        return c
    return a[1] - b[1]  # ends (0) before starts (1)


def coverage_ranges(
    intervals: Sequence[WeightedInterval],
    h_lo: ExactValue,
    h_hi: ExactValue,
    need: int,
) -> List[Tuple[ExactValue, ExactValue]]:
    """Maximal open subranges of (h_lo, h_hi) where at least ``need`` of
    the open intervals overlap (exact, certified).

    Events sort end-before-start at equal values; coverage at a shared
    endpoint counts neither the interval ending there nor the one
    starting there (all intervals are open).
    """
    seed = 0
    events = []  # (value, kind 0=end/1=start, weight)
    for iv in intervals:
        starts_before = compare(iv.lo, h_lo) <= 0
        ends_after_lo = iv.hi is None or compare(iv.hi, h_lo) > 0
        if starts_before and ends_after_lo:
            seed += iv.weight
        elif not starts_before and compare(iv.lo, h_hi) < 0:
            events.append((iv.lo, 1, iv.weight))
        if iv.hi is not None and ends_after_lo and compare(iv.hi, h_hi) < 0:
            if compare(iv.hi, h_lo) > 0:
                events.append((iv.hi, 0, iv.weight))
    events.sort(key=cmp_to_key(_event_cmp))

    ranges: List[Tuple[ExactValue, ExactValue]] = []
    cnt = seed
    open_start: Optional[ExactValue] = h_lo if seed >= need else None
    i = 0
    while i < len(events):
        v = events[i][0]
        w_end = 0
        w_start = 0
        j = i
        while j < len(events) and compare(events[j][0], v) == 0:
            if events[j][1] == 0:
                w_end += events[j][2]
            else:
                w_start += events[j][2]
            j += 1
        at = cnt - w_end
        after = at + w_start
        if open_start is not None and at < need:
            ranges.append((open_start, v))
            open_start = None
        if open_start is None and after >= need:
            open_start = v
        cnt = after
        i = j
    if open_start is not None:
        ranges.append((open_start, h_hi))
    return ranges


def coverage_at(
    intervals: Sequence[WeightedInterval], h: ExactValue
) -> int:
    """Exact certified coverage of the point h."""
    return sum(iv.weight for iv in intervals if iv.contains(h))


# ---------------------------------------------------------------------------
# Vectorized screening pass
# ---------------------------------------------------------------------------


class LevelScreen:
    """Certified-upper-bound coverage screen over a fixed height window.

    The candidate (m, n) table is built once; ``max_coverage_upper`` then
    answers one level in a handful of numpy passes.
    """

    def __init__(
        self,
        m_max: int,
        n_max: int,
        window_lo: ExactValue,
        window_hi: ExactValue,
        lambda_cap: Optional[int] = None,
    ):
        self.window_lo = window_lo
        self.window_hi = window_hi
        # outward-rounded float window
        self.a = float(window_lo) - 1e-12
        self.b = float(window_hi) + 1e-12
        pi2 = math.pi * math.pi
        ms = []
        ns = []
        for m in range(1, m_max + 1):
            for n in range(1, n_max + 1):
                if lambda_cap is not None:
                    v = m * m + n * n / pi2
                    if v > lambda_cap + 1e-6:
                        continue
                    if v > lambda_cap - 1e-6:
                        # borderline: certified decision (never equal in
                        # fact: m^2 pi^2 + n^2 vs cap pi^2 differ unless
                        # pi^2 were rational)
                        exact = rational(m * m) + rational(n * n) / PI ** 2
                        if compare(exact, rational(lambda_cap)) > 0:
                            continue
                ms.append(m)
                ns.append(n)
        m_arr = np.asarray(ms, dtype=np.float64)
        n_arr = np.asarray(ns, dtype=np.float64)
        s = (m_arr * n_arr) ** 2 * pi2
        order = np.argsort(s, kind="stable")
        self.s = s[order]
        self.m2 = (m_arr ** 2)[order]
        self.m_int = np.asarray(ms, dtype=np.int64)[order]
        self.n_int = np.asarray(ns, dtype=np.int64)[order]
        m0 = [
            n
            for n in range(1, n_max + 1)
            if lambda_cap is None or n * n / pi2 <= lambda_cap + 1e-6
        ]
        self.m0_n = np.asarray(m0, dtype=np.int64)
        self.m0_n2 = np.asarray(m0, dtype=np.float64) ** 2
        self.pi2 = pi2

    def max_coverage_upper(self, threshold: float) -> int:
        """Upper bound on max_h coverage within the window at this level."""
        t = threshold
        t2 = t * t
        a, b = self.a, self.b
        d = DELTA
        cut = int(np.searchsorted(self.s, t2 * (1 + 5e-15) + 1e-9, side="right"))
        s = self.s[:cut]
        m2 = self.m2[:cut]
        disc = t2 - s
        tangent = disc < _NEAR_TANGENT * t2
        disc_pos = np.maximum(disc, 0.0)
        root = np.sqrt(disc_pos)
        lo = s / (m2 * (t + root))
        hi = (t + root) / m2
        if tangent.any():
            center = t / m2[tangent]
            width = root[tangent] / m2[tangent] + 3e-4
            lo = lo.copy()
            hi = hi.copy()
            lo[tangent] = center - width
            hi[tangent] = center + width
        lo0 = self.m0_n2 * (self.pi2 / (2.0 * t))

        seed = 2 * int(np.count_nonzero((lo <= a + d) & (hi >= a - d)))
        seed += int(np.count_nonzero(lo0 <= a + d))

        start_mask = (lo > a - d) & (lo < b + d)
        end_mask = (hi > a - d) & (hi <= b + d)
        start0_mask = (lo0 > a - d) & (lo0 < b + d)
        n_ev = int(start_mask.sum() + end_mask.sum() + start0_mask.sum())
        if n_ev == 0:
            return seed
        values = np.concatenate(
            [lo[start_mask] - d, lo0[start0_mask] - d, hi[end_mask] + d]
        )
        weights = np.concatenate(
            [
                np.full(int(start_mask.sum()), 2, dtype=np.int64),
                np.full(int(start0_mask.sum()), 1, dtype=np.int64),
                np.full(int(end_mask.sum()), -2, dtype=np.int64),
            ]
        )
        order = np.argsort(values, kind="stable")
        running = np.cumsum(weights[order])
        return seed + max(0, int(running.max()))

    def coverage_at(
        self, threshold: Fraction, k: int, h: ExactValue
    ) -> int:
        """Exact coverage of the point h at one level: float64 decides the
        clear cases, certified exact intervals decide the ambiguous band."""
        t = float(threshold)
        t2 = t * t
        hf = float(h)
        d = DELTA
        cut = int(np.searchsorted(self.s, t2 * (1 + 5e-15) + 1e-9, side="right"))
        s = self.s[:cut]
        m2 = self.m2[:cut]
        disc = t2 - s
        tangent = disc < _NEAR_TANGENT * t2
        root = np.sqrt(np.maximum(disc, 0.0))
        lo = s / (m2 * (t + root))
        hi = (t + root) / m2
        inside = (lo < hf - d) & (hi > hf + d) & ~tangent
        outside = ((lo > hf + d) | (hi < hf - d)) & ~tangent
        total = 2 * int(np.count_nonzero(inside))
        ambiguous = np.nonzero(~inside & ~outside)[0]
        for i in ambiguous:
            iv = make_interval(
                threshold, k, EigenIndex(int(self.m_int[i]), int(self.n_int[i]))
            )
            if iv is not None and iv.contains(h):
                total += iv.weight
        lo0 = self.m0_n2 * (self.pi2 / (2.0 * t))
        total += int(np.count_nonzero(lo0 < hf - d))
        for n in self.m0_n[np.abs(lo0 - hf) <= d]:
            iv = make_interval(threshold, k, EigenIndex(0, int(n)))
            if iv.contains(h):
                total += 1
        return total
