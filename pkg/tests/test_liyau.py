"""Averaged-inequality machinery: relaxed sweep, partition, certificates."""

import random
from fractions import Fraction

import pytest

from cylpolya.exact import (
    PI,
    CertificateFailure,
    compare,
    rational,
    sign,
    sqrt,
)
from cylpolya.liyau import (
    LAMBDA_CAP,
    RELAXED_K_MAX,
    PartitionCell,
    build_partition,
    certify_relaxed_caps,
    exceptional_orders,
    liyau_check_cell,
    liyau_verdict,
    lowrange_certificates,
    partial_sum_coeffs,
    relaxed_interval,
)
from cylpolya.spectrum import EigenIndex, enumerate_up_to, kth_eigenvalue


class TestRelaxedIntervals:
    def test_k1_ray_starts_at_pi_squared(self):
        iv = relaxed_interval(1, EigenIndex(0, 1))
        assert iv.lo == PI ** 2 and iv.hi is None

    def test_absent_below_pi(self):
        assert relaxed_interval(2, EigenIndex(1, 1)) is None

    def test_order7_interval_reaches_window(self):
        # the (2,1) interval at level 7 is nonempty: (6.5)^2 > 4 pi^2
        iv = relaxed_interval(7, EigenIndex(2, 1))
        assert iv is not None

    def test_caps_certify(self):
        certify_relaxed_caps()


class TestExceptionalOrders:
    def test_smoke_up_to_2000(self):
        # all four true orders already lie below 2000
        assert exceptional_orders(k_max=2000) == [7, 10, 77, 86]

    def test_direct_check_inside_windows(self):
        # inside each reported window the k-th eigenvalue dips below
        # (2k-1)/h; just outside it does not
        for k, hq_in in ((7, Fraction(15, 2)), (10, 9), (77, Fraction(83, 10)), (86, Fraction(44, 5))):
            h = rational(Fraction(hq_in))
            assert compare(kth_eigenvalue(h, k), rational(2 * k - 1) / h) < 0

    def test_subrange_avoiding_windows_is_empty(self):
        # computed windows: 7 -> (6.83, 8.17), 10 -> (8.31, 9.87),
        # 77 -> (8.25, 8.39), 86 -> (8.79, 8.97); [6.2, 6.7] avoids all
        got = exceptional_orders(
            rational(Fraction(31, 5)), rational(Fraction(67, 10)), k_max=3000
        )
        assert got == []
        h = rational(Fraction(13, 2))
        for k in (7, 10, 77, 86):
            assert compare(kth_eigenvalue(h, k), rational(2 * k - 1) / h) >= 0

    def test_range_validation(self):
        with pytest.raises(ValueError):
            exceptional_orders(rational(1), rational(2))

    def test_checkpoint_resume(self, tmp_path):
        path = str(tmp_path / "sweep.ckpt")
        full = exceptional_orders(k_max=1200, checkpoint_path=path)
        with open(path) as fh:
            content = fh.read()
        assert "k=1200" in content
        # resuming from the checkpoint must not rescan or duplicate
        again = exceptional_orders(k_max=1200, checkpoint_path=path)
        assert again == full == [7, 10, 77, 86]


@pytest.fixture(scope="module")
def cells():
    return build_partition(86)


class TestPartition:
    def test_cells_chain_and_cover(self, cells):
        assert cells[0].lo == PI ** 2 / 2
        assert cells[-1].hi == PI ** 2
        for a, b in zip(cells, cells[1:]):
            assert a.hi == b.lo

    def test_pi_sqrt3_is_a_boundary(self, cells):
        target = PI * sqrt(rational(3))
        assert any(c.lo == target for c in cells)

    def test_orderings_stable_across_interior_samples(self, cells):
        rng = random.Random(5)
        from cylpolya.liyau import _ordered_indices_at

        for cell in rng.sample(cells, 12):
            probe = cell.lo + (cell.hi - cell.lo) / 10
            probe2 = cell.lo + (cell.hi - cell.lo) * rational(Fraction(9, 10))
            want = cell.ordered_indices[:40]
            assert _ordered_indices_at(probe, 9, 28, 86)[:40] == want
            assert _ordered_indices_at(probe2, 9, 28, 86)[:40] == want

    def test_coefficients_match_spectrum_oracle(self, cells):
        rng = random.Random(11)
        for cell in rng.sample(cells, 5):
            width = cell.hi - cell.lo
            samples = (
                (cell.lo + cell.hi) / 2,
                cell.lo + width / 10,
                cell.lo + width * rational(Fraction(7, 10)),
            )
            for h in samples:
                for k in (1, 8, 13, 86):
                    coeffs = partial_sum_coeffs(cell, k)
                    expected = coeffs.a_k + rational(coeffs.beta_k) * PI ** 2 / (h * h)
                    piece = enumerate_up_to(h, kth_eigenvalue(h, k))
                    total = rational(0)
                    acc = 0
                    for idx, mult, lam in piece.entries:
                        take = min(mult, k - acc)
                        if take <= 0:
                            break
                        total = total + lam * take
                        acc += take
                    assert compare(total, expected) == 0

    def test_induction_soundness_at_cell_endpoints(self, cells):
        # away from the exceptional orders, the relaxed line
        # lambda_k >= (2k-1)/h holds at sampled cell endpoints
        rng = random.Random(23)
        exceptional = {7, 10, 77, 86}
        for cell in rng.sample(cells, 12):
            flat = cell.flattened()
            for h in (cell.lo, cell.hi):
                inv = PI ** 2 / (h * h)
                for k in range(1, 87):
                    if k in exceptional:
                        continue
                    idx = flat[k - 1]
                    lam = rational(idx.m * idx.m) + rational(idx.n * idx.n) * inv
                    assert compare(lam, rational(2 * k - 1) / h) >= 0, (k,)

    def test_all_cells_pass_at_k86(self, cells):
        for cell in cells:
            assert liyau_check_cell(cell, 86) == []

    def test_k1_region_covers_everything(self, cells):
        for cell in (cells[0], cells[-1]):
            assert 1 not in liyau_check_cell(cell, 1)

    def test_synthetic_cell_past_pi_squared_fails_k1(self):
        cell = PartitionCell(
            PI ** 2 - rational(Fraction(1, 10)),
            PI ** 2 + rational(Fraction(1, 10)),
            ((EigenIndex(0, 1), 1), (EigenIndex(0, 2), 1)),
        )
        assert 1 in liyau_check_cell(cell, 1)

    def test_cap_guard(self):
        with pytest.raises(ValueError):
            build_partition(87)


class TestLowRange:
    def test_all_records_verified(self):
        records = lowrange_certificates()
        assert len(records) >= 16
        assert all(r.verified for r in records)

    def test_sign_checks_match(self):
        assert sign(rational(16) - 4 * PI ** 2) == -1
        assert sign(rational(1) - PI ** 2 / 4) == -1
        assert sign(rational(Fraction(169, 4)) - 9 * PI ** 2) == -1
        assert sign(rational(Fraction(169, 64)) - PI ** 2) == -1

    def test_branch_formula_and_line_at_31_10(self):
        h = rational(Fraction(31, 10))
        lam = kth_eigenvalue(h, 8)
        assert compare(lam, 1 + 4 * PI ** 2 / (h * h)) == 0
        assert compare(lam, rational(8) / h) >= 0


class TestVerdicts:
    def test_holds_inside_failure_window(self):
        # the averaged inequality survives where the per-eigenvalue one dies
        assert liyau_verdict(rational(Fraction(31, 10))).holds

    def test_holds_at_7(self):
        assert liyau_verdict(rational(7)).holds

    def test_fails_at_10(self):
        v = liyau_verdict(rational(10))
        assert v.kind == "FailsAt" and v.failing_k == (1,)

    def test_fails_just_past_pi_squared(self):
        v = liyau_verdict(PI ** 2 + rational(Fraction(1, 100)))
        assert v.failing_k == (1,)

    def test_holds_at_pi_squared(self):
        assert liyau_verdict(PI ** 2).holds

    def test_average_form_random(self):
        # (1/k) sum <= k/h certified for random heights in (0, pi^2]
        rng = random.Random(314)
        for _ in range(50):
            hq = Fraction(rng.randrange(1, 987), 100)
            k = rng.randrange(1, 87)
            h = rational(hq)
            piece = enumerate_up_to(h, kth_eigenvalue(h, k))
            total = rational(0)
            acc = 0
            for idx, mult, lam in piece.entries:
                take = min(mult, k - acc)
                if take <= 0:
                    break
                total = total + lam * take
                acc += take
            assert compare(total / k, rational(k) / h) >= 0, (hq, k)
