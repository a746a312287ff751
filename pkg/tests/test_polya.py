"""Counting-inequality search: k-intervals, failure windows, bounds, verdicts."""

import random
from fractions import Fraction

import pytest

from cylpolya.exact import (
    PI,
    compare,
    decimal_str,
    quadratic_pi_surd,
    rational,
    sign,
    sqrt,
)
from cylpolya.polya import (
    FailureReport,
    all_failure_reports,
    failure_set_for_k,
    first_estimate_threshold,
    high_gate,
    k_interval,
    low_gate,
    polya_verdict,
    r_bound_first,
    r_bound_second,
    second_estimate_threshold,
    certify_search_caps,
)
from cylpolya.spectrum import EigenIndex, counting_function, kth_eigenvalue


def endpoints_8():
    lo = rational(8) - sqrt(rational(64) - 4 * PI ** 2)
    hi = rational(2) + sqrt(rational(4) - PI ** 2 / 4)
    return lo, hi


def endpoints_13():
    lo = rational(13) - sqrt(rational(169) - 9 * PI ** 2)
    hi = rational(Fraction(13, 4)) + sqrt(rational(Fraction(169, 16)) - PI ** 2)
    return lo, hi


class TestKInterval:
    def test_k8_main_interval(self):
        iv = k_interval(8, EigenIndex(1, 2))
        lo, _ = endpoints_8()
        assert iv.weight == 2
        assert iv.lo == lo
        assert iv.hi == rational(8) + sqrt(rational(64) - 4 * PI ** 2)

    def test_k8_second_interval(self):
        iv = k_interval(8, EigenIndex(2, 1))
        assert iv.lo == rational(2) - sqrt(rational(4) - PI ** 2 / 4)
        assert iv.hi == rational(2) + sqrt(rational(4) - PI ** 2 / 4)

    def test_empty_when_k_below_pi_mn(self):
        assert k_interval(1, EigenIndex(1, 1)) is None

    def test_m0_ray(self):
        iv = k_interval(8, EigenIndex(0, 2))
        assert iv.hi is None and iv.weight == 1
        assert compare(iv.lo, 4 * PI ** 2 / 16) == 0


class TestFailureSets:
    def test_theorem_window_k8(self):
        rep = failure_set_for_k(8, low_gate(), high_gate())
        lo, hi = endpoints_8()
        assert len(rep.intervals) == 1
        assert rep.intervals[0][0] == lo
        assert rep.intervals[0][1] == hi

    def test_theorem_window_k13(self):
        rep = failure_set_for_k(13, low_gate(), high_gate())
        lo, hi = endpoints_13()
        assert len(rep.intervals) == 1
        assert rep.intervals[0][0] == lo
        assert rep.intervals[0][1] == hi

    def test_k5_empty(self):
        rep = failure_set_for_k(5, low_gate(), high_gate())
        assert rep.intervals == ()

    def test_decimal_renderings(self):
        lo8, hi8 = endpoints_8()
        lo13, hi13 = endpoints_13()
        assert decimal_str(lo8, 5) == "3.0481e+00"
        assert decimal_str(hi8, 5) == "3.2380e+00"
        assert decimal_str(lo13, 5) == "4.0460e+00"
        assert decimal_str(hi13, 5) == "4.0824e+00"

    def test_canonical_tuples_of_window_endpoints(self):
        lo8, hi8 = endpoints_8()
        assert quadratic_pi_surd(lo8) == (Fraction(8), Fraction(-1), Fraction(64), Fraction(-4))
        assert quadratic_pi_surd(hi8) == (Fraction(2), Fraction(1), Fraction(4), Fraction(-1, 4))

    def test_endpoint_sharpness(self):
        # at the left endpoint of the k=8 window, lambda_8 h/2 = 8 exactly
        lo8, _ = endpoints_8()
        lam8 = 1 + 4 * PI ** 2 / (lo8 * lo8)
        assert (lam8 * lo8 / 2) == rational(8)
        lo13, _ = endpoints_13()
        lam13 = 1 + 9 * PI ** 2 / (lo13 * lo13)
        assert (lam13 * lo13 / 2) == rational(13)

    def test_weight_bookkeeping_matches_counting(self):
        # total event weight at level k equals the multiplicity convention:
        # coverage at h is the number of eigenvalues with lambda h/2 < k
        from cylpolya.sweep import coverage_at, generate_level_intervals

        for hq in (Fraction(3), Fraction(33, 10), Fraction(45, 10)):
            h = rational(hq)
            for k in (4, 8, 13):
                ivs = generate_level_intervals(k, Fraction(k), low_gate(), high_gate())
                cov = coverage_at(ivs, h)
                # oracle: count eigenvalues with lambda < 2k/h via N
                lam_target = rational(2 * k) / h
                n_at = counting_function(h, lam_target)
                lam_k = kth_eigenvalue(h, counting_function(h, lam_target)) if n_at else None
                strict = n_at
                if lam_k is not None and compare(lam_k, lam_target) == 0:
                    # remove multiplicity sitting exactly at the threshold
                    eps = rational(Fraction(1, 10**6))
                    strict = counting_function(h, lam_target - eps)
                assert cov == strict


class TestBounds:
    def test_first_bound_at_h_pi(self):
        # leading coefficient vanishes at h = pi: bound reduces to
        # (2/3)^(3/2) lam^(1/4) > 0
        lam = rational(7)
        b = r_bound_first(PI, lam)
        expected = sqrt(rational(Fraction(8, 27))) * sqrt(sqrt(lam))
        assert compare(b, expected) == 0
        assert sign(b) == 1

    def test_first_threshold_identity_sampled(self):
        rng = random.Random(3)
        for _ in range(20):
            h = rational(Fraction(rng.randrange(5, 30), 10))
            lam = rational(Fraction(rng.randrange(1, 4000), 7))
            thr = first_estimate_threshold(h)
            lhs_nonpos = compare(r_bound_first(h, lam), rational(0)) <= 0
            rhs_holds = compare(sqrt(lam), thr) >= 0
            assert lhs_nonpos == rhs_holds

    def test_second_threshold_identity_sampled(self):
        rng = random.Random(4)
        for _ in range(20):
            h = rational(Fraction(rng.randrange(5, 60), 10))
            lam = rational(Fraction(rng.randrange(1, 4000), 7))
            thr = second_estimate_threshold(h)
            lhs_nonpos = compare(r_bound_second(h, lam), rational(0)) <= 0
            rhs_holds = compare(sqrt(lam), thr) >= 0
            assert lhs_nonpos == rhs_holds

    def test_threshold_below_20_at_window_ends(self):
        assert compare(second_estimate_threshold(high_gate()), rational(20)) < 0
        assert compare(second_estimate_threshold(low_gate()), rational(20)) < 0

    def test_sampled_soundness_figure_cases(self):
        # N(lam) - lam h/2 <= bounds at the figure anchors (h=3, lam=50),
        # (h=2, lam=61)
        for hq, lam in ((3, 50), (2, 61)):
            h = rational(hq)
            lamv = rational(lam)
            r = rational(counting_function(h, lamv)) - lamv * h / 2
            assert compare(r, r_bound_second(h, lamv)) <= 0
            if hq < 3.14:
                assert compare(r, r_bound_first(h, lamv)) <= 0

    def test_caps_certify(self):
        certify_search_caps()


class TestVerdicts:
    def test_spec_examples(self):
        assert polya_verdict(rational(Fraction(31, 10))).to_json()["failing_k"] == [8]
        assert polya_verdict(rational(1)).kind == "SatisfiedAnalytic"
        v5 = polya_verdict(rational(5))
        assert v5.kind == "Fails" and v5.failing_k == (1,)
        assert polya_verdict(rational(Fraction(407, 100))).failing_k == (13,)

    def test_boundary_heights_satisfied(self):
        assert polya_verdict(high_gate()).satisfied
        assert polya_verdict(low_gate()).kind == "SatisfiedAnalytic"

    def test_inside_windows_fail(self):
        lo8, hi8 = endpoints_8()
        mid = (lo8 + hi8) / 2
        v = polya_verdict(mid)
        assert v.failing_k == (8,)


class TestSearch:
    def test_full_reports_reproduce_theorem(self):
        reports = all_failure_reports(k_max=200)
        assert [r.k for r in reports] == [8, 13]

    def test_sweep_oracle_equivalence_small(self):
        # membership in the failure set <=> lambda_k < 2k/h, sampled
        rng = random.Random(99)
        lo, hi = low_gate(), high_gate()
        ks = list(range(1, 21))
        reports = {k: failure_set_for_k(k, lo, hi) for k in ks}
        for _ in range(40):
            hq = Fraction(rng.randrange(150, 493), 100)
            h = rational(hq)
            for k in ks:
                inside = any(
                    compare(a, h) < 0 and compare(h, b) < 0
                    for a, b in reports[k].intervals
                )
                direct = compare(kth_eigenvalue(h, k), rational(2 * k) / h) < 0
                assert inside == direct, (hq, k)

    def test_report_json_shape(self):
        rep = failure_set_for_k(8, low_gate(), high_gate())
        j = rep.to_json()
        assert j["k"] == 8
        assert set(j["intervals"][0]) == {
            "lo_exact",
            "lo_decimal30",
            "hi_exact",
            "hi_decimal30",
        }

    def test_ladder_separates_level_endpoints(self):
        # distinct canonical endpoint surds must never compare Equal, and
        # every pairwise comparison must resolve under the ladder
        from cylpolya.sweep import generate_level_intervals

        for k in (8, 13, 101, 500, 1019):
            values = []
            for iv in generate_level_intervals(k, Fraction(k), low_gate(), high_gate()):
                values.append(iv.lo)
                if iv.hi is not None:
                    values.append(iv.hi)
            sample = values[:: max(1, len(values) // 40)]
            for i, a in enumerate(sample):
                for b in sample[i + 1 :]:
                    c = compare(a, b)  # must not raise Undecided
                    if c == 0:
                        assert a == b  # Equal only via canonical equality
