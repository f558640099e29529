import math
from fractions import Fraction

import pytest

from ballotlab.distributions import (
    LeveledDistribution,
    builtin,
    builtin_names,
    heavy_tower_distribution,
    tower_distribution,
    tower_f,
)
from ballotlab.errors import (
    InvalidGError,
    TowerOverflowError,
    UnknownNameError,
)
from ballotlab.walkcore import lattice_info, moment


class TestTowerF:
    def test_values(self):
        assert [tower_f(k) for k in range(5)] == [1, 2, 4, 16, 65536]
        assert tower_f(5) == 2 ** 65536

    def test_overflow(self):
        with pytest.raises(TowerOverflowError):
            tower_f(6)


class TestTowerDistribution:
    def test_k1_atoms(self):
        d = tower_distribution(1)
        atoms = dict(d.atoms)
        assert atoms[Fraction(1)] == Fraction(15, 32)
        assert atoms[Fraction(-1)] == Fraction(15, 32)
        assert atoms[Fraction(2)] == Fraction(1, 32)

    def test_k2_atoms(self):
        atoms = dict(tower_distribution(2).atoms)
        assert atoms[Fraction(1)] == Fraction(239, 512)
        assert atoms[Fraction(2)] == Fraction(1, 32)
        assert atoms[Fraction(4)] == Fraction(1, 512)

    @pytest.mark.parametrize("K", [1, 2, 3, 4])
    def test_mean_mass_variance(self, K):
        d = tower_distribution(K)
        assert d.cached_mean == 0
        assert sum(d.probs()) == 1
        assert moment(d, 2, absolute=False) < 2

    def test_variance_increases_with_K(self):
        vs = [moment(tower_distribution(K), 2, absolute=False)
              for K in (1, 2, 3, 4)]
        assert all(a < b for a, b in zip(vs, vs[1:]))
        assert abs(float(vs[-1]) - 1.25) < 0.01

    def test_folded_tail(self):
        d = tower_distribution(2)
        assert d.folded_tail_mass == Fraction(1, 16 ** 4)

    def test_levels(self):
        d = tower_distribution(3)
        assert [(k, v) for k, v, _ in d.levels] == [(0, 1), (1, 2), (2, 4), (3, 16)]
        assert d.max_level == 3
        assert d.level_of_value(-16) == 3


class TestHeavyDistribution:
    def test_k1_masses(self):
        d = heavy_tower_distribution(1)
        atoms = {v: float(p) for v, p in d.atoms}
        assert atoms[2] == pytest.approx(2 ** -1.5 / 2, abs=1e-15)
        assert atoms[1] == pytest.approx(0.5 * (1 - 2 ** -1.5), abs=1e-15)

    @pytest.mark.parametrize("K", [1, 2, 3, 4])
    def test_exact_probability_law(self, K):
        d = heavy_tower_distribution(K)
        assert sum(d.probs()) == 1
        assert d.cached_mean == 0

    def test_variance_grows(self):
        # each level adds mass value^2 / value^{3/2} = sqrt(value) > 0
        vs = [float(moment(heavy_tower_distribution(K), 2, absolute=False))
              for K in (1, 2, 3, 4)]
        assert all(a < b for a, b in zip(vs, vs[1:]))

    def test_fractional_moment_reported(self):
        m1 = moment(heavy_tower_distribution(1), 1.4, absolute=True)
        m2 = moment(heavy_tower_distribution(2), 1.4, absolute=True)
        assert math.isfinite(m1) and math.isfinite(m2) and m2 > m1

    def test_exact_levels_above_one(self):
        # every tower value past 2 is a perfect square, so those masses are exact
        d = heavy_tower_distribution(3)
        per = {k: p for k, v, p in d.levels}
        assert per[2] == Fraction(1, 2 * 4 * 2)        # 4^{3/2} = 8
        assert per[3] == Fraction(1, 2 * 16 * 4)       # 16^{3/2} = 64

    def test_invalid_g(self):
        with pytest.raises(InvalidGError):
            heavy_tower_distribution(2, g=lambda k: [1, 2, 3][k] if k < 3 else 99)
        with pytest.raises(InvalidGError):
            heavy_tower_distribution(1, g=lambda k: 2 * k + 2)  # g(0) != 1

    def test_custom_g(self):
        d = heavy_tower_distribution(1, g=lambda k: [1, 4, 16][k])
        per = {k: p for k, v, p in d.levels}
        assert per[1] == Fraction(1, 16)  # 4^{3/2} = 8, per-sign 1/16


class TestBuiltin:
    def test_registry(self):
        assert builtin("rademacher").label == "rademacher"
        assert builtin("skew").cached_mean == 0
        assert lattice_info(builtin("skew")).span_h == 3
        assert builtin("tower", K=1).max_level == 1
        assert set(builtin_names()) == {"lazy", "rademacher", "skew",
                                        "tower", "heavy"}

    def test_unknown(self):
        with pytest.raises(UnknownNameError):
            builtin("nosuch")

    def test_leveled_requires_K(self):
        with pytest.raises(ValueError):
            builtin("tower")


class TestLeveledJson:
    @pytest.mark.parametrize("make", [lambda: tower_distribution(3),
                                      lambda: heavy_tower_distribution(2)])
    def test_round_trip_identity(self, make):
        d = make()
        back = LeveledDistribution.from_json_dict(d.to_json_dict())
        assert back.atoms == d.atoms
        assert back.levels == d.levels
        assert back.max_level == d.max_level
        assert back.folded_tail_mass == d.folded_tail_mass
