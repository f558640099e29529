import json
import math

import pytest

from ballotlab.distributions import builtin, tower_distribution
from ballotlab.harness import (
    ASYMPTOTICS_NOTE,
    counterexample_report,
    load_defaults,
    scan_ballot_ratio,
    scan_second_moment,
    scan_spread,
    scan_stopping,
)
from ballotlab.montecarlo import McConfig
from ballotlab.schemas import validate_report

from oracles import enum_event_prob

RAD = builtin("rademacher")
LAZY = builtin("lazy")


class TestDefaults:
    def test_versioned(self):
        d = load_defaults()
        assert d["defaults_version"] == 1
        assert d["ballot_spread_max"] == 20.0
        assert d["stopping_spread_max"] == 10.0


class TestScanBallot:
    def test_single_cell_ratio(self):
        rep = scan_ballot_ratio(RAD, [4], [2], A=2, seed=1)
        cell = rep.grid[0]
        assert cell.raw_prob == 0.125
        assert cell.normalized_ratio == pytest.approx(0.125 * 8 / 2)

    def test_theta_stability(self):
        rep = scan_ballot_ratio(RAD, [4, 16], [2], A=2, seed=1)
        r4, r16 = [c.normalized_ratio for c in rep.grid]
        assert max(r4, r16) / min(r4, r16) <= 4

    def test_unreachable_flagged(self):
        rep = scan_ballot_ratio(RAD, [4, 8], [{"kind": "fixed", "value": 100},
                                              2], A=2, seed=1)
        flags = {(c.n, c.requested): c.flags for c in rep.grid}
        assert "unreachable" in flags[(4, 100.0)]
        # unreachable cells do not pollute the fitted constants
        assert rep.ratio_min > 0

    def test_snap_recorded(self):
        rep = scan_ballot_ratio(RAD, [16], ["sqrt_n"], A=2, seed=1)
        cell = rep.grid[0]
        assert cell.requested == 4.0 and cell.param == 4.0
        rep2 = scan_ballot_ratio(RAD, [8], [{"kind": "fixed", "value": 3}],
                                 A=2, seed=1)
        c = rep2.grid[0]
        assert c.requested == 3.0 and c.param == 4.0 and "snapped" in c.flags

    def test_report_invariants(self):
        rep = scan_ballot_ratio(RAD, [8, 16, 32], [2, "sqrt_n"], A=2, seed=1)
        ratios = [c.normalized_ratio for c in rep.grid
                  if "unreachable" not in c.flags]
        assert rep.ratio_min == min(ratios)
        assert rep.ratio_max == max(ratios)
        assert rep.passed == (rep.ratio_max / rep.ratio_min <= rep.threshold)
        validate_report(rep.to_json_dict())


class TestScanStopping:
    def test_known_cells(self):
        rep = scan_stopping(RAD, [4, 16], [0], seed=1)
        by_n = {c.n: c for c in rep.grid}
        assert by_n[4].normalized_ratio == pytest.approx(6 / 16 * 2)
        assert by_n[16].normalized_ratio == pytest.approx(
            math.comb(16, 8) / 2 ** 16 * 4)

    def test_h_band(self):
        rep = scan_stopping(RAD, [16], [0, {"kind": "sqrt_n", "scale": 0.5},
                                        "sqrt_n"], seed=1)
        assert len(rep.grid) == 3
        assert rep.ratio_max / rep.ratio_min < 4


class TestScanSpread:
    def test_known_cells(self):
        rep = scan_spread(RAD, [1, 100])
        by_n = {c.n: c for c in rep.grid}
        assert by_n[1].normalized_ratio == pytest.approx(0.5)
        assert by_n[100].normalized_ratio == pytest.approx(
            math.comb(100, 50) / 2 ** 100 * 10)

    def test_lazy_cell(self):
        rep = scan_spread(LAZY, [1])
        assert rep.grid[0].normalized_ratio == pytest.approx(2 / 3)

    def test_max_attained_and_self_consistent(self):
        rep = scan_spread(RAD, list(range(1, 51)))
        assert all(c.normalized_ratio <= rep.fitted_upper_C for c in rep.grid)
        assert math.isfinite(rep.fitted_upper_C)


class TestScanSecondMoment:
    def test_known_cells(self):
        rep = scan_second_moment(RAD, [2], [0])
        assert rep.grid[0].normalized_ratio == pytest.approx(1.0)
        rep_thr = scan_second_moment(RAD, [2], [0],
                                     threshold_rule={"kind": "eps_sqrt_n",
                                                     "eps": 0.5})
        assert rep_thr.grid[0].normalized_ratio == pytest.approx(2.0)

    def test_n1_forced(self):
        rep = scan_second_moment(RAD, [1], [0])
        assert rep.grid[0].normalized_ratio == pytest.approx(1.0)


class TestScanInvariants:
    def test_ballot_spread_full_grid(self):
        # n from 4 through 4096, both walks, generous spread threshold
        grid = [2 ** e for e in range(2, 13)]
        for dist, A in ((RAD, 2), (builtin("skew"), 3)):
            rep = scan_ballot_ratio(dist, grid, [2, "sqrt_n"], A=A, seed=1)
            assert rep.ratio_max / rep.ratio_min <= 20
            assert rep.passed

    def test_stopping_h0_monotone_convergence(self):
        grid = [2 ** e for e in range(2, 13)]
        rep = scan_stopping(RAD, grid, [0], seed=1)
        ratios = [c.normalized_ratio for c in rep.grid]
        assert all(a < b for a, b in zip(ratios, ratios[1:]))
        assert abs(ratios[-1] / math.sqrt(2 / math.pi) - 1) <= 0.02


class TestMcFallback:
    def test_tiny_cap_forces_mc(self):
        rep = scan_stopping(RAD, [64], [0], seed=123, trials=200000,
                            state_cap=10)
        cell = rep.grid[0]
        assert cell.method == "mc" and cell.stderr > 0
        from ballotlab.exactdp import stopping_time_tail
        want = stopping_time_tail(RAD, 64, 0, mode="exact").value
        # cell.stderr is on the normalized scale (factor sqrt(64) = 8)
        assert abs(cell.raw_prob - want) <= 4 * cell.stderr / 8

    def test_mc_needs_seed(self):
        from ballotlab.errors import StateSpaceTooLargeError
        with pytest.raises(StateSpaceTooLargeError):
            scan_stopping(RAD, [64], [0], state_cap=10)

    def test_deterministic_report(self):
        a = scan_stopping(RAD, [64], [0], seed=9, trials=50000, state_cap=10)
        b = scan_stopping(RAD, [64], [0], seed=9, trials=50000, state_cap=10)
        assert json.dumps(a.to_json_dict(), sort_keys=True) == \
            json.dumps(b.to_json_dict(), sort_keys=True)


class TestCounterexample:
    def test_tower_k1_n4_matches_enumeration(self):
        # 6^4 = 1296 paths, enumerated exactly
        d = tower_distribution(1)
        rec = counterexample_report("tower", 1, 4, 1, target_k_rule="n",
                                    cfg=McConfig(trials=20000, seed=5))
        joint = enum_event_prob(d, 4, positivity="interior", window=(4, 1))
        endpoint = enum_event_prob(d, 4, window=(4, 1))
        want = joint / endpoint
        got = rec["conditional_ballot_prob"]
        assert got["exact"] == f"{want.numerator}/{want.denominator}"
        assert rec["label"] == ASYMPTOTICS_NOTE
        validate_report(rec)

    def test_tower_k3_n16_below_bertrand(self):
        rec = counterexample_report("tower", 3, 16, 1, target_k_rule="n",
                                    cfg=McConfig(trials=20000, seed=6))
        assert rec["bertrand_value"] == 1.0
        assert rec["conditional_ballot_prob"]["value"] < 1.0
        assert rec["exact_dp_used"]

    def test_heavy_smoke(self):
        rec = counterexample_report("heavy", 1, 4, 1, target_k_rule="sqrt_n",
                                    cfg=McConfig(trials=20000, seed=7))
        for key in ("endpoint_window_prob", "joint_prob",
                    "conditional_ballot_prob", "bertrand_value",
                    "ratio_to_bertrand", "level_summary", "asymptotics"):
            assert key in rec
        validate_report(rec)

    def test_level_summary_attached(self):
        rec = counterexample_report("tower", 2, 8, 1, target_k_rule="sqrt_n",
                                    cfg=McConfig(trials=5000, seed=8))
        levels = rec["level_summary"]["levels"]
        assert levels[0]["level"] == 0
        assert sum(lv["mean_count"] for lv in levels) == pytest.approx(8.0)
