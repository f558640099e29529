import io
import math

import pytest
from scipy.stats import binom

from ballotlab.approx import (
    chernoff_binomial_bounds,
    clt_compare,
    clt_rows_to_csv,
    stone_lattice_approx,
    stone_window_approx,
)
from ballotlab.distributions import builtin
from ballotlab.errors import OffLatticeError
from ballotlab.exactdp import endpoint_window_prob

RAD = builtin("rademacher")
LAZY = builtin("lazy")


class TestWindowApprox:
    def test_center_value(self):
        assert stone_window_approx(1.0, 100, 0.0, 1.0) == pytest.approx(
            1.0 / math.sqrt(200 * math.pi), rel=1e-12)

    def test_far_tail_vanishes(self):
        assert stone_window_approx(1.0, 100, 1e6, 1.0) == 0.0

    def test_scale_invariance(self):
        # sigma * sqrt(n) equal => equal values
        assert stone_window_approx(4.0, 25, 0.0, 1.0) == pytest.approx(
            stone_window_approx(1.0, 100, 0.0, 1.0), rel=1e-12)

    def test_integrates_to_one(self):
        sigma2, n = 1.0, 100
        span = 6 * math.sqrt(sigma2 * n)
        h = span / 600
        total = sum(stone_window_approx(sigma2, n, -span + j * h, h)
                    for j in range(1200))
        assert total == pytest.approx(1.0, abs=0.01)


class TestLatticeApprox:
    def test_rademacher_center(self):
        approx = stone_lattice_approx(RAD, 100, 0)
        assert approx == pytest.approx(2 / math.sqrt(200 * math.pi), rel=1e-12)
        exact = math.comb(100, 50) / 2 ** 100
        assert abs(approx / exact - 1) < 0.003

    def test_off_lattice(self):
        with pytest.raises(OffLatticeError):
            stone_lattice_approx(RAD, 100, 1)

    def test_lazy_center(self):
        approx = stone_lattice_approx(LAZY, 90, 0)
        assert approx == pytest.approx(1 / math.sqrt(2 * math.pi * 60), rel=1e-12)
        exact = endpoint_window_prob(LAZY, 90, 0, 1, mode="exact").value
        assert abs(approx / exact - 1) < 0.02

    def test_lattice_sum_near_one(self):
        for dist, n in ((RAD, 400), (LAZY, 400)):
            sigma = math.sqrt(float(dist.cached_variance))
            span = float(__import__("ballotlab").lattice_info(dist).span_h)
            lim = 6 * sigma * math.sqrt(n)
            x = -math.floor(lim)
            # walk lattice of an even-n +-1 walk is the even integers
            if dist is RAD and x % 2 != 0:
                x += 1
            total = 0.0
            step = span
            while x <= lim:
                total += stone_lattice_approx(dist, n, x)
                x += step
            assert total == pytest.approx(1.0, abs=0.02)


class TestChernoffBinomial:
    def test_example_values(self):
        upper, lower = chernoff_binomial_bounds(100, 0.5, 0.2)
        assert upper == pytest.approx(math.exp(-0.9375), rel=1e-12)
        assert lower == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_tiny_c_vacuous(self):
        upper, lower = chernoff_binomial_bounds(100, 0.5, 1e-9)
        assert upper > 0.999999 and lower > 0.999999

    @pytest.mark.parametrize("n", [10, 100, 1000])
    @pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize("c", [0.1, 0.5, 1.0, 2.0])
    def test_dominates_exact_tail(self, n, p, c):
        upper, lower = chernoff_binomial_bounds(n, p, c)
        mu = n * p
        exact_upper = float(binom.sf(math.floor((1 + c) * mu), n, p))
        exact_lower = float(binom.cdf(math.ceil((1 - c) * mu) - 1, n, p))
        assert exact_upper <= upper + 1e-12
        assert exact_lower <= lower + 1e-12


class TestCltCompare:
    def test_center_accuracy_large_n(self):
        rows = clt_compare(RAD, [1000], x_rule="zero")
        assert rows[0].rel_error < 0.01

    def test_two_sigma_regime(self):
        rows = clt_compare(RAD, [100], x_rule=[20])
        assert rows[0].x == 20
        assert rows[0].rel_error < 0.05

    def test_small_n_reported_without_threshold(self):
        rows = clt_compare(RAD, [4], x_rule="zero")
        assert math.isfinite(rows[0].rel_error)

    def test_sigma_rule_snaps(self):
        rows = clt_compare(RAD, [64], x_rule={"kind": "sigma_multiple", "c": 1})
        assert rows[0].x % 2 == 0  # even lattice

    def test_csv_format(self):
        rows = clt_compare(RAD, [16, 64], x_rule="zero")
        buf = io.StringIO()
        clt_rows_to_csv(rows, buf)
        lines = buf.getvalue().strip().split("\r\n")
        assert lines[0] == "n,x_num,x_den,exact,approx,rel_error"
        assert len(lines) == 3
        n, xn, xd, exact, approx, rel = lines[1].split(",")
        assert int(n) == 16 and int(xd) == 1
        assert float(exact) == math.comb(16, 8) / 2 ** 16
