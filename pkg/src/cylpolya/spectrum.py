"""Eigenvalue lattice of the Dirichlet Laplacian on the strip S^1 x (0, h).

Eigenvalues are lambda_{m,n} = m^2 + n^2 pi^2 / h^2 with m in Z (folded to
|m| with multiplicity 2 for m != 0) and n >= 1.  This module enumerates,
orders and counts them with certified comparisons; ``counting_function`` is
the brute-force oracle the sweep machinery is tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import List, Optional, Tuple, Union

from .exact import (
    PI,
    ExactValue,
    compare,
    rational,
    sign,
    sqrt,
    value_json,
)

__all__ = [
    "EigenIndex",
    "SpectrumSlice",
    "InvalidHeight",
    "eigenvalue",
    "enumerate_up_to",
    "kth_eigenvalue",
    "counting_function",
    "crossover_points",
]


class InvalidHeight(ValueError):
    """The strip height must be certifiably positive."""


HeightLike = Union[ExactValue, int, Fraction]


@dataclass(frozen=True)
class EigenIndex:
    """Lattice index (|m|, n) of an eigenvalue; n >= 1, m >= 0."""

    m: int
    n: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("m is stored folded; it must be >= 0")
        if self.n < 1:
            raise ValueError("n must be >= 1 (Dirichlet direction)")

    @property
    def multiplicity(self) -> int:
        return 1 if self.m == 0 else 2


@dataclass(frozen=True)
class SpectrumSlice:
    """The initial spectrum at a fixed height: sorted entries
    (index, multiplicity, exact eigenvalue) covering at least k_max
    eigenvalues counted with multiplicity."""

    h: ExactValue
    entries: Tuple[Tuple[EigenIndex, int, ExactValue], ...]
    k_max: int

    @property
    def total_multiplicity(self) -> int:
        return sum(mult for _, mult, _ in self.entries)

    def to_json_lines(self) -> List[str]:
        import json

        lines = []
        for idx, mult, lam in self.entries:
            record = {"m": idx.m, "n": idx.n, "multiplicity": mult}
            record.update(value_json(lam))
            lines.append(json.dumps(record, separators=(",", ":")))
        return lines


def _as_height(h: HeightLike) -> ExactValue:
    hv = rational(h) if isinstance(h, (int, Fraction)) else h
    if sign(hv) != 1:
        raise InvalidHeight("strip height must be positive")
    return hv


def eigenvalue(idx: EigenIndex, h: HeightLike) -> ExactValue:
    """lambda_{m,n} = m^2 + n^2 pi^2 / h^2."""
    hv = _as_height(h)
    return rational(idx.m * idx.m) + rational(idx.n * idx.n) * PI ** 2 / (hv * hv)


def _q_float(q: ExactValue) -> float:
    return float(q)


def enumerate_up_to(h: HeightLike, lambda_max) -> SpectrumSlice:
    """All indices with lambda_{m,n} <= lambda_max (certified), sorted.

    Materializes the slice; meant for the first few thousand eigenvalues.
    The counting oracle below avoids materialization.
    """
    hv = _as_height(h)
    lam = rational(lambda_max) if isinstance(lambda_max, (int, Fraction)) else lambda_max
    q = PI ** 2 / (hv * hv)  # the n^2 coefficient
    entries = []
    n = 1
    while True:
        base = rational(n * n) * q
        if compare(base, lam) > 0:
            break
        m = 0
        while compare(rational(m * m) + base, lam) <= 0:
            idx = EigenIndex(m, n)
            entries.append((idx, idx.multiplicity, rational(m * m) + base))
            m += 1
        n += 1

    def cmp(a, b):
        c = compare(a[2], b[2])
        if c:
            return c
        return -1 if (a[0].m, a[0].n) < (b[0].m, b[0].n) else 1

    entries.sort(key=cmp_to_key(cmp))
    return SpectrumSlice(hv, tuple(entries), sum(e[1] for e in entries))


def counting_function(h: HeightLike, lam) -> int:
    """N(lambda): eigenvalues <= lambda counted with multiplicity.

    Column-count form of the lattice-point count under the half-ellipse;
    this is the brute-force oracle for all sweep results.
    """
    hv = _as_height(h)
    lamv = rational(lam) if isinstance(lam, (int, Fraction)) else lam
    if sign(lamv) <= 0:
        return 0
    q = PI ** 2 / (hv * hv)
    qf = _q_float(q)
    lamf = float(lamv)
    total = 0
    n = 1
    while True:
        base = rational(n * n) * q
        if compare(base, lamv) > 0:
            break
        # largest m >= 0 with m^2 <= lam - n^2 q, certified around a guess
        rest = lamv - base
        m = math.isqrt(max(0, int(max(0.0, lamf - n * n * qf) + 1)))
        while m > 0 and compare(rational(m * m), rest) > 0:
            m -= 1
        while compare(rational((m + 1) * (m + 1)), rest) <= 0:
            m += 1
        total += 1 + 2 * m
        n += 1
    return total


def kth_eigenvalue(h: HeightLike, k: int) -> ExactValue:
    """The k-th smallest eigenvalue of the multiset (multiplicity 2 for
    m != 0), by enumeration with a geometrically grown cutoff."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hv = _as_height(h)
    hf = float(hv)
    # Weyl-guided initial cutoff N(lam) ~ lam h / 2
    lam_guess = max(4.0, 2.2 * k / hf, 1.2 * (math.pi / hf) ** 2)
    while True:
        cutoff = rational(Fraction(lam_guess).limit_denominator(10**6))
        piece = enumerate_up_to(hv, cutoff)
        if piece.total_multiplicity >= k:
            acc = 0
            for idx, mult, lam in piece.entries:
                acc += mult
                if acc >= k:
                    return lam
        lam_guess *= 2


def crossover_points(
    m_cap: int,
    n_cap: int,
    h_lo: HeightLike,
    h_hi: HeightLike,
) -> List[ExactValue]:
    """Heights where two distinct eigenvalue branches cross:
    h = pi sqrt((n2^2 - n1^2) / (m1^2 - m2^2)), deduplicated by canonical
    form and restricted to (h_lo, h_hi), sorted by certified comparison."""
    if m_cap < 1 or n_cap < 1:
        raise ValueError("caps must be >= 1")
    lo = _as_height(h_lo)
    hi = _as_height(h_hi)
    if compare(lo, hi) >= 0:
        raise ValueError("h_lo must be < h_hi")
    lof, hif = float(lo), float(hi)
    ratios = set()
    for m1 in range(0, m_cap + 1):
        for m2 in range(0, m1):
            dm = m1 * m1 - m2 * m2
            for n1 in range(1, n_cap + 1):
                for n2 in range(n1 + 1, n_cap + 1):
                    # positive radicand needs n2 > n1 paired with m1 > m2
                    ratios.add(Fraction(n2 * n2 - n1 * n1, dm))
    points = []
    for r in sorted(ratios):
        hf = math.pi * math.sqrt(r)
        if not (lof - 1e-6 <= hf <= hif + 1e-6):
            continue  # coarse filter; the band is re-checked exactly
        value = PI * sqrt(rational(r))
        if compare(value, lo) > 0 and compare(value, hi) < 0:
            points.append(value)
    points.sort(key=cmp_to_key(compare))
    return points
