"""Li-Yau inequalities on the strip: (1/k) sum_{i<=k} lambda_i >= k/h.

Three cooperating verifications cover (0, pi^2]:

* on (0, pi^2/2] the inequality follows by induction from the conjecture's
  failure windows (only k = 8, 13) plus closed-form checks that
  lambda_8 >= 8/h and lambda_13 >= 13/h there;
* on (pi^2/2, pi^2] a relaxed sweep (threshold k - 1/2) over the first
  130297 levels isolates the exceptional orders {7, 10, 77, 86}, and a
  crossover-free partition verifies the partial-sum inequalities up to
  k = 86 cell by cell;
* beyond pi^2 the first inequality already fails.

The caps 26301 (eigenvalue size) and 130297 (level count) are certified
at runtime from the closed-form quartic root; the run aborts loudly if
either certification fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .exact import (
    PI,
    CertificateFailure,
    ExactValue,
    compare,
    decimal_str,
    rational,
    sign,
    sqrt,
    value_json,
)
from .spectrum import (
    EigenIndex,
    crossover_points,
    eigenvalue,
    enumerate_up_to,
    kth_eigenvalue,
)
from .sweep import (
    LevelScreen,
    WeightedInterval,
    coverage_ranges,
    generate_level_intervals,
    make_interval,
)

__all__ = [
    "LAMBDA_CAP",
    "RELAXED_K_MAX",
    "M_CAP",
    "N_CAP",
    "relaxed_interval",
    "certify_relaxed_caps",
    "exceptional_orders",
    "PartitionCell",
    "build_partition",
    "PartialSumCoeffs",
    "partial_sum_coeffs",
    "liyau_check_cell",
    "lowrange_certificates",
    "LiYauVerdict",
    "liyau_verdict",
    "corollary_certificate",
]

LAMBDA_CAP = 26301
RELAXED_K_MAX = 130297
M_CAP = 162
N_CAP = 509

_caps_certified = False


def relaxed_interval(k: int, idx: EigenIndex) -> Optional[WeightedInterval]:
    """The k-interval construction with threshold k - 1/2 (natural units)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return make_interval(Fraction(2 * k - 1, 2), k, idx)


def certify_relaxed_caps() -> None:
    """Certify the two reduction constants of the relaxed search from the
    closed-form quartic root: the eigenvalue cap 26301 and the level cap
    130297.  Raises CertificateFailure if either fails to verify."""
    global _caps_certified
    if _caps_certified:
        return
    pi32 = PI * sqrt(PI)
    inner = -27 * PI * sqrt(1 + PI ** 2) + 8 * pi32 + 4 * PI ** 3 + 27 * PI ** 2 + 4
    lam_quarter = (2 * pi32 + 2 + sqrt(inner)) / (
        3 * sqrt(6 * PI) * (sqrt(1 + PI ** 2) - PI)
    )
    lam_max = lam_quarter ** 4
    if compare(lam_max, rational(LAMBDA_CAP)) >= 0:
        raise CertificateFailure(
            "eigenvalue cap 26301 failed to certify against the quartic root"
        )
    k_bound = PI ** 2 * lam_max / 2 + PI * lam_quarter ** 2
    if compare(k_bound, rational(RELAXED_K_MAX + 1)) >= 0:
        raise CertificateFailure("level cap 130297 failed to certify")
    _caps_certified = True


def _pair_in_cap(m: int, n: int) -> bool:
    """The relaxed search's eigenvalue prune: keep (m, n) iff the smallest
    value of lambda_{m,n} on the window, m^2 + n^2/pi^2, is <= 26301."""
    if m > M_CAP or n > N_CAP:
        return False
    v = m * m + n * n / (math.pi * math.pi)
    if v < LAMBDA_CAP - 1e-6:
        return True
    if v > LAMBDA_CAP + 1e-6:
        return False
    exact = rational(m * m) + rational(n * n) / PI ** 2
    return compare(exact, rational(LAMBDA_CAP)) <= 0


def _window_default() -> Tuple[ExactValue, ExactValue]:
    return PI ** 2 / 2, PI ** 2


def exceptional_orders(
    h_lo: Optional[ExactValue] = None,
    h_hi: Optional[ExactValue] = None,
    k_max: int = RELAXED_K_MAX,
    checkpoint_path: Optional[str] = None,
    progress: Optional[Callable[[int], None]] = None,
) -> List[int]:
    """Levels k <= k_max whose relaxed condition lambda_k < (2k-1)/h holds
    somewhere in (h_lo, h_hi) (defaults: the (pi^2/2, pi^2] window).

    Streams level by level: a certified float screen discards the level or
    hands it to the exact relaxed sweep.  Optionally checkpoints the last
    completed level to a plain-text file for resumability.
    """
    lo_default, hi_default = _window_default()
    h_lo = h_lo if h_lo is not None else lo_default
    h_hi = h_hi if h_hi is not None else hi_default
    if compare(h_lo, lo_default) < 0 or compare(h_hi, hi_default) > 0:
        raise ValueError("range must lie within [pi^2/2, pi^2]")
    if compare(h_lo, h_hi) >= 0:
        raise ValueError("empty range")
    certify_relaxed_caps()

    start_k = 1
    found: List[int] = []
    if checkpoint_path:
        resumed = _read_checkpoint(checkpoint_path)
        if resumed is not None:
            start_k, found = resumed[0] + 1, list(resumed[1])

    screen = LevelScreen(M_CAP, N_CAP, h_lo, h_hi, lambda_cap=LAMBDA_CAP)
    for k in range(start_k, k_max + 1):
        t = Fraction(2 * k - 1, 2)
        if screen.max_coverage_upper(float(t)) >= k:
            intervals = generate_level_intervals(
                k,
                t,
                h_lo,
                h_hi,
                pair_filter=_pair_in_cap,
                m_cap=M_CAP,
                n_cap=N_CAP,
            )
            if coverage_ranges(intervals, h_lo, h_hi, need=k):
                found.append(k)
        if checkpoint_path and (k % 1000 == 0 or k == k_max):
            _write_checkpoint(checkpoint_path, k, found)
        if progress is not None and k % 5000 == 0:
            progress(k)
    return found


def _read_checkpoint(path: str):
    import os

    if not os.path.exists(path):
        return None
    data = {}
    with open(path) as fh:
        for line in fh:
            key, _, val = line.strip().partition("=")
            data[key] = val
    if "k" not in data:
        return None
    found = [int(x) for x in data.get("found", "").split(",") if x]
    return int(data["k"]), found


def _write_checkpoint(path: str, k: int, found: Sequence[int]) -> None:
    with open(path, "w") as fh:
        fh.write(f"k={k}\n")
        fh.write("found=" + ",".join(str(x) for x in found) + "\n")


# ---------------------------------------------------------------------------
# Crossover-free partition of (pi^2/2, pi^2] and per-cell partial sums
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartitionCell:
    """Crossover-free height range carrying the fixed spectral ordering."""

    lo: ExactValue
    hi: ExactValue
    ordered_indices: Tuple[Tuple[EigenIndex, int], ...]  # (index, multiplicity)

    def flattened(self) -> List[EigenIndex]:
        out: List[EigenIndex] = []
        for idx, mult in self.ordered_indices:
            out.extend([idx] * mult)
        return out


def _ordered_indices_at(
    h: ExactValue, m_cap: int, n_cap: int, count: int
) -> Tuple[Tuple[EigenIndex, int], ...]:
    """Spectral ordering at a fixed height: float-keyed sort, then a
    certified pass over adjacent pairs (falling back to a fully certified
    sort if the float keys misordered anything)."""
    inv = PI ** 2 / (h * h)
    entries = []
    for m in range(0, m_cap + 1):
        mm = rational(m * m)
        for n in range(1, n_cap + 1):
            idx = EigenIndex(m, n)
            entries.append((idx, idx.multiplicity, mm + (n * n) * inv))
    entries.sort(key=lambda e: (float(e[2]), e[0].m, e[0].n))
    ok = True
    for a, b in zip(entries, entries[1:]):
        c = compare(a[2], b[2])
        if c > 0 or (c == 0 and (a[0].m, a[0].n) > (b[0].m, b[0].n)):
            ok = False
            break
    if not ok:
        def cmp(a, b):
            c = compare(a[2], b[2])
            if c:
                return c
            return -1 if (a[0].m, a[0].n) < (b[0].m, b[0].n) else 1

        entries.sort(key=cmp_to_key(cmp))
    out = []
    total = 0
    for idx, mult, _lam in entries:
        out.append((idx, mult))
        total += mult
        if total >= count:
            break
    return tuple(out)


def build_partition(k_cap: int = 86) -> List[PartitionCell]:
    """Cells covering (pi^2/2, pi^2] with no eigenvalue crossover strictly
    inside any cell (crossover caps 9, 28 are justified for k_cap <= 86)."""
    if k_cap > 86:
        raise ValueError("index caps (9, 28) are only justified for k_cap <= 86")
    lo, hi = _window_default()
    points = crossover_points(9, 28, lo, hi)
    bounds = [lo] + points + [hi]
    cells = []
    for a, b in zip(bounds, bounds[1:]):
        mid = (a + b) / 2
        ordering = _ordered_indices_at(mid, 9, 28, max(k_cap, 86))
        cells.append(PartitionCell(a, b, ordering))
    return cells


@dataclass(frozen=True)
class PartialSumCoeffs:
    """sum_{i<=k} lambda_i = a_k + beta_k pi^2 / h^2 within a cell."""

    k: int
    a_k: int
    beta_k: int


def partial_sum_coeffs(cell: PartitionCell, k: int) -> PartialSumCoeffs:
    flat = cell.flattened()
    if k > len(flat):
        raise ValueError("cell ordering too short for requested k")
    a = sum(idx.m * idx.m for idx in flat[:k])
    beta = sum(idx.n * idx.n for idx in flat[:k])
    return PartialSumCoeffs(k, a, beta)


def liyau_check_cell(cell: PartitionCell, k_cap: int) -> List[int]:
    """Levels k <= k_cap whose satisfied region a_k h^2 - k^2 h + b_k >= 0
    fails to cover [cell.lo, cell.hi]; empty means Li-Yau holds there.

    b_k = beta_k pi^2.  The a_k = 0 region is h <= b_k/k^2; for a_k != 0 a
    violation needs a positive discriminant k^4 - 4 a_k b_k and the open
    root interval to meet the cell (tangency counts as satisfied, the
    inequality being non-strict).
    """
    flat = cell.flattened()
    if k_cap > len(flat):
        raise ValueError("cell ordering too short for k_cap")
    violations = []
    a = 0
    beta = 0
    for k in range(1, k_cap + 1):
        idx = flat[k - 1]
        a += idx.m * idx.m
        beta += idx.n * idx.n
        if a == 0:
            bound = rational(beta) * PI ** 2 / (k * k)
            if compare(cell.hi, bound) > 0:
                violations.append(k)
            continue
        # discriminant k^4 - 4 a beta pi^2: never zero (pi^2 irrational);
        # <= 0 (including the impossible tangency) means covered
        disc = rational(k ** 4) - rational(4 * a * beta) * PI ** 2
        if sign(disc) <= 0:
            continue
        root = sqrt(disc)
        r_minus = (rational(k * k) - root) / (2 * a)
        r_plus = (rational(k * k) + root) / (2 * a)
        if compare(r_minus, cell.hi) < 0 and compare(r_plus, cell.lo) > 0:
            violations.append(k)
    return violations


# ---------------------------------------------------------------------------
# Closed-form low-range certificates (h <= pi^2/2)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CertificateRecord:
    name: str
    statement: str
    verified: bool

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "statement": self.statement,
            "verified": self.verified,
        }


def _lambda8_branches() -> List[Tuple[Fraction, ExactValue]]:
    """(sample height, closed-form lambda_8) for both branches."""
    out = []
    for hq in (Fraction(31, 10), Fraction(309, 100)):  # (8-sqrt(64-4pi^2), pi)
        h = rational(hq)
        out.append((hq, 1 + 4 * PI ** 2 / (h * h)))
    for hq in (Fraction(63, 20), Fraction(323, 100)):  # (pi, 2+sqrt(4-pi^2/4))
        h = rational(hq)
        out.append((hq, 4 + PI ** 2 / (h * h)))
    return out


def _lambda13_branches() -> List[Tuple[Fraction, ExactValue]]:
    out = []
    for hq in (Fraction(81, 20), Fraction(405, 100)):  # up to pi sqrt(5/3)
        h = rational(hq)
        out.append((hq, 1 + 9 * PI ** 2 / (h * h)))
    for hq in (Fraction(203, 50), Fraction(408, 100)):  # beyond pi sqrt(5/3)
        h = rational(hq)
        out.append((hq, 4 + 4 * PI ** 2 / (h * h)))
    return out


def lowrange_certificates() -> List[CertificateRecord]:
    """Certify the closed-form facts giving Li-Yau on (0, pi^2/2]:
    the four completed-square right-hand sides are negative, the piecewise
    lambda_8/lambda_13 formulas match the spectrum oracle on both branches,
    and both eigenvalues clear the k/h line there.  Raises
    CertificateFailure on any failed check."""
    records = []

    def check(name, statement, ok):
        records.append(CertificateRecord(name, statement, bool(ok)))
        if not ok:
            raise CertificateFailure(f"low-range certificate failed: {name}")

    check("sign-16-4pi2", "16 - 4 pi^2 < 0", sign(rational(16) - 4 * PI ** 2) == -1)
    check("sign-1-pi2/4", "1 - pi^2/4 < 0", sign(rational(1) - PI ** 2 / 4) == -1)
    check(
        "sign-169/4-9pi2",
        "169/4 - 9 pi^2 < 0",
        sign(rational(Fraction(169, 4)) - 9 * PI ** 2) == -1,
    )
    check(
        "sign-169/64-pi2",
        "169/64 - pi^2 < 0",
        sign(rational(Fraction(169, 64)) - PI ** 2) == -1,
    )
    for hq, formula in _lambda8_branches():
        lam = kth_eigenvalue(rational(hq), 8)
        check(
            f"lambda8-branch-h={hq}",
            "piecewise formula matches the spectrum oracle",
            compare(lam, formula) == 0,
        )
        check(
            f"lambda8-line-h={hq}",
            "lambda_8 >= 8/h",
            compare(lam, rational(8) / rational(hq)) >= 0,
        )
    for hq, formula in _lambda13_branches():
        lam = kth_eigenvalue(rational(hq), 13)
        check(
            f"lambda13-branch-h={hq}",
            "piecewise formula matches the spectrum oracle",
            compare(lam, formula) == 0,
        )
        check(
            f"lambda13-line-h={hq}",
            "lambda_13 >= 13/h",
            compare(lam, rational(13) / rational(hq)) >= 0,
        )
    return records


# ---------------------------------------------------------------------------
# Verdict at a fixed height, and the full-range certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiYauVerdict:
    kind: str  # "Holds" | "FailsAt"
    failing_k: Tuple[int, ...] = ()
    gate: str = ""

    @property
    def holds(self) -> bool:
        return not self.failing_k

    def to_json(self) -> dict:
        return {
            "verdict": self.kind,
            "failing_k": list(self.failing_k),
            "gate": self.gate,
        }


def _relaxed_violations_at(h: ExactValue, k_max: int = RELAXED_K_MAX) -> List[int]:
    """Levels k <= k_max with lambda_k(h) < (2k-1)/h, exactly.

    Vectorized screen over the capped spectrum with an exact fallback for
    any level whose margin is ambiguous at float precision.
    """
    certify_relaxed_caps()
    hf = float(h)
    pi2 = math.pi * math.pi
    lam_vals = []
    weights = []
    pairs = []
    n_top = int(math.ceil((hf / math.pi) * math.sqrt(LAMBDA_CAP + 2))) + 1
    m_top = int(math.isqrt(LAMBDA_CAP + 2)) + 1
    for m in range(0, m_top + 1):
        for n in range(1, n_top + 1):
            lam = m * m + n * n * pi2 / (hf * hf)
            if lam > LAMBDA_CAP + 2:
                break
            lam_vals.append(lam)
            weights.append(1 if m == 0 else 2)
            pairs.append((m, n))
    lam_arr = np.asarray(lam_vals)
    order = np.argsort(lam_arr, kind="stable")
    lam_sorted = np.repeat(lam_arr[order], np.asarray(weights, dtype=np.int64)[order])
    count = min(k_max, len(lam_sorted))
    ks = np.arange(1, count + 1, dtype=np.float64)
    margin = lam_sorted[:count] * (hf / 2.0) - (ks - 0.5)
    # float error budget: lambda ~ 1e-11 absolute, times h/2 < 5
    eps = 1e-9 * np.maximum(1.0, lam_sorted[:count])
    violating = np.nonzero(margin < -eps)[0]
    ambiguous = np.nonzero(np.abs(margin) <= eps)[0]
    out = [int(i) + 1 for i in violating]
    for i in ambiguous:
        k = int(i) + 1
        lam_exact = kth_eigenvalue(h, k)
        if compare(lam_exact * h / 2, rational(Fraction(2 * k - 1, 2))) < 0:
            out.append(k)
    return sorted(out)


def _certified_partial_sum_holds(h: ExactValue, k: int) -> bool:
    """sum_{i<=k} lambda_i(h) >= k^2/h, certified exactly."""
    piece = enumerate_up_to(h, kth_eigenvalue(h, k))
    total = rational(0)
    acc = 0
    for idx, mult, lam in piece.entries:
        take = min(mult, k - acc)
        if take <= 0:
            break
        total = total + lam * take
        acc += take
    if acc < k:
        raise RuntimeError("partial sum enumeration too short")
    return compare(total, rational(k * k) / h) >= 0


def liyau_verdict(h: ExactValue) -> LiYauVerdict:
    """Decide the Li-Yau inequalities at height h (all k at once)."""
    if sign(h) <= 0:
        raise ValueError("h must be positive")
    if compare(h, PI ** 2) > 0:
        return LiYauVerdict("FailsAt", (1,), "lambda_1 = pi^2/h^2 < 1/h")
    if compare(h, PI ** 2 / 2) <= 0:
        from .polya import polya_verdict

        verdict = polya_verdict(h)
        lowrange_certificates()
        for k in verdict.failing_k:
            if not _certified_partial_sum_holds(h, k):
                return LiYauVerdict("FailsAt", (k,), "partial sum check")
        return LiYauVerdict(
            "Holds", (), "conjecture windows + closed-form eigenvalue lines"
        )
    # (pi^2/2, pi^2]: relaxed condition + direct partial sums where it fails
    failing = []
    for k in _relaxed_violations_at(h):
        if not _certified_partial_sum_holds(h, k):
            failing.append(k)
    if failing:
        return LiYauVerdict("FailsAt", tuple(failing), "partial sum check")
    return LiYauVerdict("Holds", (), "relaxed level condition + partial sums")


def corollary_certificate(
    k_cap: int = 86, exceptional: Optional[Sequence[int]] = None
) -> dict:
    """The full (0, pi^2] certificate: low-range certificates, the
    crossover partition with per-cell partial-sum checks up to k_cap, and
    (optionally pre-computed) exceptional orders for the relaxed window.

    Returns the machine-readable record; raises CertificateFailure if any
    piece fails.
    """
    certify_relaxed_caps()
    low = lowrange_certificates()
    cells = build_partition(k_cap)
    cell_reports = []
    for cell in cells:
        bad = liyau_check_cell(cell, k_cap)
        cell_reports.append(
            {
                "lo": decimal_str(cell.lo, 20),
                "hi": decimal_str(cell.hi, 20),
                "violations": bad,
            }
        )
        if bad:
            raise CertificateFailure(
                f"partial-sum check failed in cell [{decimal_str(cell.lo, 12)}, "
                f"{decimal_str(cell.hi, 12)}] at k={bad}"
            )
    record = {
        "lowrange": [r.to_json() for r in low],
        "cells": len(cells),
        "cell_reports": cell_reports,
        "k_cap": k_cap,
    }
    if exceptional is not None:
        record["exceptional_orders"] = list(exceptional)
        if any(k > k_cap for k in exceptional):
            raise CertificateFailure(
                "an exceptional order exceeds the partition's k_cap"
            )
    return record
