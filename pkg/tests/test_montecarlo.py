import math
from fractions import Fraction

import pytest

from ballotlab.distributions import builtin, tower_distribution
from ballotlab.errors import (
    TooLargeForExactError,
    ZeroDenominatorSampleError,
)
from ballotlab.exactdp import (
    endpoint_window_prob,
    positive_prefix_prob,
)
from ballotlab.montecarlo import (
    McConfig,
    WalkEvent,
    chernoff_rand_check,
    decompose_path,
    estimate_conditional,
    estimate_event,
    level_summary,
    permutation_positive_prob,
    sample_level_decomposition,
)
from ballotlab.walkcore import Multiset, StepDistribution

from oracles import enum_permutation_positive

RAD = builtin("rademacher")
LAZY = builtin("lazy")


class TestMcConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            McConfig(trials=0, seed=1)
        with pytest.raises(ValueError):
            McConfig(trials=10, seed=-1)
        with pytest.raises(ValueError):
            McConfig(trials=4, seed=1, stream_count=8)


class TestDeterminism:
    def test_bit_identical_counts(self):
        cfg = McConfig(trials=100000, seed=99, stream_count=4)
        ev = WalkEvent(positivity="prefix")
        a = estimate_event(RAD, 8, ev, cfg)
        b = estimate_event(RAD, 8, ev, cfg)
        assert a.hits == b.hits and a.value == b.value

    def test_seed_changes_counts(self):
        ev = WalkEvent(positivity="prefix")
        a = estimate_event(RAD, 8, ev, McConfig(trials=100000, seed=1))
        b = estimate_event(RAD, 8, ev, McConfig(trials=100000, seed=2))
        assert a.hits != b.hits

    def test_thread_env_does_not_change_counts(self, monkeypatch):
        cfg = McConfig(trials=50000, seed=5, stream_count=4)
        ev = WalkEvent(endpoint_window=(0, 2))
        base = estimate_event(RAD, 6, ev, cfg)
        monkeypatch.setenv("BALLOTLAB_THREADS", "4")
        threaded = estimate_event(RAD, 6, ev, cfg)
        assert threaded.hits == base.hits


class TestOracleAgreement:
    CASES = [
        (RAD, 4, WalkEvent(endpoint_window=(2, 2)), Fraction(1, 4)),
        (RAD, 4, WalkEvent(positivity="interior", endpoint_window=(2, 2)),
         Fraction(1, 8)),
        (RAD, 6, WalkEvent(barrier_h=0), Fraction(math.comb(6, 3), 64)),
        (LAZY, 5, WalkEvent(positivity="prefix"), None),
        (LAZY, 6, WalkEvent(endpoint_window=(-1, 2)), None),
    ]

    @pytest.mark.parametrize("dist,n,event,known", CASES)
    def test_within_four_stderr(self, dist, n, event, known):
        cfg = McConfig(trials=200000, seed=4242)
        est = estimate_event(dist, n, event, cfg)
        if known is None:
            if event.positivity == "prefix":
                known = positive_prefix_prob(dist, n, mode="exact").exact
            else:
                k, a = event.endpoint_window
                known = endpoint_window_prob(dist, n, k, a, mode="exact").exact
        assert abs(est.value - float(known)) <= 4 * est.stderr + 1e-12

    def test_always_true_event(self):
        est = estimate_event(RAD, 1, WalkEvent(), McConfig(trials=1000, seed=3))
        assert est.value == 1.0

    def test_barrier_plus_window_combo(self):
        # joint constraint exercised against exact DP
        from ballotlab.exactdp import Constraint, constrained_endpoint_law
        law = constrained_endpoint_law(RAD, 6, Constraint.at_least(1),
                                       mode="exact")
        want = law.window_sum(0, 2)
        est = estimate_event(RAD, 6, WalkEvent(barrier_h=1,
                                               endpoint_window=(0, 2)),
                             McConfig(trials=300000, seed=17))
        assert abs(est.value - float(want)) <= 4 * est.stderr


class TestConditional:
    def test_ballot_quarter(self):
        est = estimate_conditional(RAD, 4, 2, 2, McConfig(trials=400000, seed=11))
        assert abs(est.value - 0.5) <= 4 * est.stderr
        assert est.trials < 400000  # denominator hits, not raw trials
        assert "paired" in est.flags

    def test_ballot_long(self):
        est = estimate_conditional(RAD, 100, 10, 2,
                                   McConfig(trials=400000, seed=23))
        assert abs(est.value - 0.1) <= 4 * est.stderr

    def test_parity_miss_raises(self):
        with pytest.raises(ZeroDenominatorSampleError):
            estimate_conditional(RAD, 4, 3, 1, McConfig(trials=10000, seed=2))

    def test_stderr_is_ratio_form(self):
        est = estimate_conditional(RAD, 8, 2, 2, McConfig(trials=200000, seed=8))
        v, d = est.value, est.trials
        assert est.stderr == pytest.approx(math.sqrt(v * (1 - v) / d))


class TestPermutation:
    def test_bertrand_all_small_elections(self):
        for total in range(2, 13):
            for q in range(0, (total - 1) // 2 + 1):
                p = total - q
                if p <= q:
                    continue
                ms = Multiset((1,) * p + (-1,) * q)
                got = permutation_positive_prob(ms, mode="exact").exact
                assert got == Fraction(p - q, p + q), (p, q)

    def test_matches_enumeration(self):
        for elems in [(3, -1, -1), (2, 2, -1, -3), (Fraction(1, 2), -1, 1)]:
            got = permutation_positive_prob(Multiset(elems), mode="exact").exact
            assert got == enum_permutation_positive(elems)

    def test_single_positive(self):
        assert permutation_positive_prob(Multiset((1,)), mode="exact").exact == 1

    def test_exact_cap(self):
        with pytest.raises(TooLargeForExactError):
            permutation_positive_prob(Multiset((1,) * 13), mode="exact")

    def test_mc_agrees(self):
        ms = Multiset((1, 1, 1, -1, -1))
        exact = permutation_positive_prob(ms, mode="exact").exact  # 1/5... checked below
        assert exact == Fraction(1, 5)
        est = permutation_positive_prob(ms, mode="mc",
                                        cfg=McConfig(trials=200000, seed=31))
        assert abs(est.value - 0.2) <= 4 * est.stderr


class TestLevelDecomposition:
    def test_decompose_fixed_path(self):
        d = tower_distribution(3)
        dec = decompose_path(d, [1, -1, 16, 1])
        assert dec.counts == {0: 3, 1: 0, 2: 0, 3: 1}
        assert dec.sums == {0: 1, 1: 0, 2: 0, 3: 16}
        assert dec.truncated_endpoints[0] == 1
        assert dec.truncated_endpoints[3] == 17
        dec.check(4)

    def test_sampled_invariants(self):
        d = tower_distribution(2)
        n = 12
        for dec in sample_level_decomposition(d, n, McConfig(trials=200, seed=6)):
            dec.check(n)

    def test_level3_count_mean(self):
        # N_3 is Binomial(n, f(3)^-4): mean n/65536
        d = tower_distribution(3)
        n, trials = 16, 100000
        summary = level_summary(d, n, McConfig(trials=trials, seed=77))
        p = 1.0 / 65536.0
        want = n * p
        stderr = math.sqrt(n * p * (1 - p) / trials)
        got = summary["levels"][3]["mean_count"]
        assert abs(got - want) <= 3 * stderr

    def test_summary_consistency(self):
        d = tower_distribution(1)
        s = level_summary(d, 8, McConfig(trials=5000, seed=13))
        counts = sum(lv["mean_count"] for lv in s["levels"])
        assert counts == pytest.approx(8.0, abs=1e-9)


class TestChernoffRand:
    def test_bound_formulas(self):
        rec = chernoff_rand_check(100, 0.5, 1.0, 30.0,
                                  McConfig(trials=1000, seed=1))
        # 8mq = 400 and 4tv/3 = 40
        assert rec["upper_bound"] == pytest.approx(
            math.exp(-900 / 440) + math.exp(-50 / 3), rel=1e-12)
        assert rec["lower_bound"] == pytest.approx(
            math.exp(-900 / 400) + math.exp(-50 / 3), rel=1e-12)

    def test_empirical_below_bounds(self):
        for (m, q, v) in [(10, 0.5, 1.0), (100, 0.1, 4.0), (100, 0.5, 1.0)]:
            t = 2 * math.sqrt(m * q) * v
            rec = chernoff_rand_check(m, q, v, t, McConfig(trials=100000, seed=9))
            assert rec["upper_emp"] - 3 * rec["upper_stderr"] <= rec["upper_bound"]
            assert rec["lower_emp"] - 3 * rec["lower_stderr"] <= rec["lower_bound"]

    def test_tiny_t_bound_vacuous(self):
        rec = chernoff_rand_check(50, 0.5, 1.0, 1e-9,
                                  McConfig(trials=1000, seed=4))
        assert rec["upper_bound"] > 1.0 >= rec["upper_emp"]

    def test_true_tail_far_below_bound(self):
        rec = chernoff_rand_check(100, 0.5, 1.0, 30.0,
                                  McConfig(trials=1000000, seed=2024))
        # true tail is around P{N(0, sqrt(50)) > 30} ~ 1e-5
        assert rec["upper_emp"] < 1e-3 < rec["upper_bound"]


class TestSamplerOnly:
    def test_gaussian_sampler_event(self):
        dist = StepDistribution.from_sampler(
            lambda rng, size: rng.normal(0.0, 1.0, size), mean=0.0,
            variance=1.0, label="gauss")
        est = estimate_event(dist, 4, WalkEvent(endpoint_window=(0, 100)),
                             McConfig(trials=200000, seed=55))
        # P{S_4 >= 0} = 1/2 by symmetry (window cap is far out)
        assert abs(est.value - 0.5) <= 4 * est.stderr
