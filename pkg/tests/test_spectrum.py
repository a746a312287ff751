"""Spectrum model tests, pinned against an independent double-loop oracle.

The expected counts below were computed first with the plain float
double loop (safe here: no eigenvalue can be exactly rational-equal to the
rational cutoffs used, so no boundary ties exist for the oracle to miss).
"""

import math
from fractions import Fraction

import pytest

from cylpolya.exact import PI, compare, rational, sqrt
from cylpolya.spectrum import (
    EigenIndex,
    InvalidHeight,
    counting_function,
    crossover_points,
    eigenvalue,
    enumerate_up_to,
    kth_eigenvalue,
)


def double_loop_count(h: float, lam: float) -> int:
    """Independent brute-force oracle: raw float double loop over m, n."""
    c = 0
    mm = int(math.isqrt(int(lam))) + 2
    for m in range(-mm, mm + 1):
        n = 1
        while m * m + n * n * math.pi ** 2 / h ** 2 <= lam:
            c += 1
            n += 1
    return c


class TestEigenvalue:
    def test_first_eigenvalue(self):
        lam = eigenvalue(EigenIndex(0, 1), rational(3))
        assert compare(lam, PI ** 2 / 9) == 0

    def test_branch_form(self):
        h = rational(Fraction(31, 10))
        lam = eigenvalue(EigenIndex(1, 2), h)
        assert compare(lam, 1 + 4 * PI ** 2 / (h * h)) == 0

    def test_unit_value_at_h_pi(self):
        assert compare(eigenvalue(EigenIndex(0, 1), PI), rational(1)) == 0

    def test_invalid_height(self):
        with pytest.raises(InvalidHeight):
            eigenvalue(EigenIndex(0, 1), rational(0))
        with pytest.raises(InvalidHeight):
            eigenvalue(EigenIndex(0, 1), rational(-2))

    def test_index_validation(self):
        with pytest.raises(ValueError):
            EigenIndex(0, 0)
        with pytest.raises(ValueError):
            EigenIndex(-1, 1)
        assert EigenIndex(0, 3).multiplicity == 1
        assert EigenIndex(2, 3).multiplicity == 2


class TestEnumerate:
    def test_figure_case_h3_lam50(self):
        # independent oracle: 66 lattice points (computed first, frozen)
        assert double_loop_count(3, 50) == 66
        piece = enumerate_up_to(rational(3), rational(50))
        assert piece.total_multiplicity == 66

    def test_empty_below_first_eigenvalue(self):
        for h in (rational(2), rational(5)):
            lam1 = PI ** 2 / (h * h)
            piece = enumerate_up_to(h, lam1 - rational(Fraction(1, 100)))
            assert piece.total_multiplicity == 0

    def test_exactly_first_at_h_pi(self):
        piece = enumerate_up_to(PI, rational(1))
        assert piece.total_multiplicity == 1
        assert piece.entries[0][0] == EigenIndex(0, 1)

    def test_sorted_entries(self):
        piece = enumerate_up_to(rational(3), rational(50))
        for a, b in zip(piece.entries, piece.entries[1:]):
            assert compare(a[2], b[2]) <= 0

    def test_json_lines(self):
        piece = enumerate_up_to(PI, rational(2))
        lines = piece.to_json_lines()
        assert len(lines) == len(piece.entries)
        assert '"m":' in lines[0] and '"decimal30"' in lines[0]


class TestCounting:
    def test_matches_double_loop(self):
        cases = [(3, 50), (2, 61), (1, 17), (4, 30)]
        for h, lam in cases:
            assert counting_function(rational(h), rational(lam)) == double_loop_count(h, lam)

    def test_exactly_lambda1(self):
        h = rational(3)
        assert counting_function(h, PI ** 2 / 9) == 1

    def test_failure_witness_above_threshold(self):
        # just above pi^2/2 the first eigenvalue already violates the
        # counting bound: N(lambda_1) = 1 > lambda_1 h / 2
        h = PI ** 2 / 2 + rational(Fraction(1, 10))
        lam1 = PI ** 2 / (h * h)
        assert counting_function(h, lam1) >= 1
        assert compare(lam1 * h / 2, rational(1)) < 0

    def test_weyl_sanity(self):
        for h in (1, 3, 9):
            n = counting_function(rational(h), rational(10**4))
            ratio = n * 2 / (h * 10**4)
            assert abs(ratio - 1) < 0.1

    def test_monotone_in_lambda_and_h(self):
        grid = [Fraction(3, 2), Fraction(5, 2), Fraction(7, 2), Fraction(9, 2)]
        lams = [5, 10, 20, 40]
        for h in grid:
            counts = [counting_function(rational(h), rational(l)) for l in lams]
            assert counts == sorted(counts)
        for lam in lams:
            counts = [counting_function(rational(h), rational(lam)) for h in grid]
            assert counts == sorted(counts)


class TestKth:
    def test_first(self):
        h = rational(Fraction(7, 2))
        assert compare(kth_eigenvalue(h, 1), PI ** 2 / (h * h)) == 0

    def test_lambda8_branches(self):
        # paper's lambda_8 table: branch split at h = pi
        h1 = rational(Fraction(31, 10))
        assert compare(kth_eigenvalue(h1, 8), 1 + 4 * PI ** 2 / (h1 * h1)) == 0
        h2 = rational(Fraction(63, 20))
        assert compare(kth_eigenvalue(h2, 8), 4 + PI ** 2 / (h2 * h2)) == 0

    def test_lambda13_branches(self):
        # paper's lambda_13 table: branch split at h = pi sqrt(5/3)
        h1 = rational(Fraction(81, 20))  # 4.05 < pi sqrt(5/3) = 4.0558
        assert compare(kth_eigenvalue(h1, 13), 1 + 9 * PI ** 2 / (h1 * h1)) == 0
        h2 = rational(Fraction(203, 50))  # 4.06, second branch
        assert compare(kth_eigenvalue(h2, 13), 4 + 4 * PI ** 2 / (h2 * h2)) == 0

    def test_nondecreasing(self):
        h = rational(Fraction(33, 10))
        vals = [kth_eigenvalue(h, k) for k in range(1, 16)]
        for a, b in zip(vals, vals[1:]):
            assert compare(a, b) <= 0

    def test_consistency_with_counting(self):
        h = rational(Fraction(27, 10))
        for k in (1, 4, 9):
            lam = kth_eigenvalue(h, k)
            assert counting_function(h, lam) >= k
            eps = rational(Fraction(1, 1000))
            assert counting_function(h, lam - eps) < k


class TestCrossovers:
    def test_trivial_crossover_at_pi(self):
        # (1,2) vs (2,1): h = pi sqrt((4-1)/(4-1)) = pi
        pts = crossover_points(2, 2, rational(3), rational(Fraction(33, 10)))
        assert any(compare(p, PI) == 0 for p in pts)

    def test_pi_sqrt3_in_window(self):
        # (0,2) vs (1,1): h = pi sqrt(3) in (pi^2/2, pi^2)
        pts = crossover_points(1, 2, PI ** 2 / 2, PI ** 2)
        target = PI * sqrt(rational(3))
        assert any(compare(p, target) == 0 for p in pts)

    def test_sorted_and_dedup(self):
        pts = crossover_points(4, 6, rational(1), rational(20))
        for a, b in zip(pts, pts[1:]):
            assert compare(a, b) < 0  # strict: dedup happened

    def test_appendix_caps_cover_window(self):
        pts = crossover_points(9, 28, PI ** 2 / 2, PI ** 2)
        assert len(pts) > 50
        for p in pts:
            assert compare(p, PI ** 2 / 2) > 0 and compare(p, PI ** 2) < 0
