"""Built-in step laws: standard test walks plus the two sparse heavy-level
families (tower levels with unit-mass complement), truncated to finite
support with exact renormalization.

Truncation convention: the unit atoms absorb the omitted tail, i.e. the
+-1 mass is (1 - sum of the retained level masses)/2 per sign, so every
constructed law is a genuine probability law with mean exactly zero. The
mass moved relative to the untruncated law is folded_tail_mass (dominated by
the first omitted level), which is negligible for every buildable K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .errors import (
    InvalidGError,
    NegativeMassError,
    TowerOverflowError,
    UnknownNameError,
)
from .walkcore import StepDistribution

# Level index 0 always denotes the +-1 atoms.
MAX_TOWER_ARG = 5  # f(6) has 2^65536 bits; nothing can hold it
MAX_LEVEL_K = 4    # constructors also need f(K+1) for the folded-tail bound


def tower_f(k: int) -> int:
    """Tower function: 1, 2, 4, 16, 65536, 2**65536, ..."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k > MAX_TOWER_ARG:
        raise TowerOverflowError(
            f"tower value for k={k} cannot be materialized (the exponent "
            f"alone has {tower_f(MAX_TOWER_ARG).bit_length()} bits)")
    v = 1
    for _ in range(k):
        v = 2 ** v
    return v


@dataclass(frozen=True)
class LeveledDistribution(StepDistribution):
    """A StepDistribution whose atoms are grouped into levels 0..max_level.

    levels holds (index, absolute value, per-sign probability); index 0 is
    the +-1 pair. folded_tail_mass is the total mass the truncation moved
    into the unit atoms (first omitted level; later levels are smaller than
    any representable float and are ignored).
    """

    levels: tuple = ()
    max_level: int = 0
    folded_tail_mass: Fraction = Fraction(0)

    def level_of_value(self, value) -> int:
        a = abs(value)
        for k, v, _ in self.levels:
            if v == a:
                return k
        raise ValueError(f"{value} is not an atom of {self.label}")

    def to_json_dict(self) -> dict:
        obj = super().to_json_dict()
        obj["levels"] = [
            {"k": k, "value": int(v),
             "per_sign_prob_num": p.numerator,
             "per_sign_prob_den": p.denominator}
            for k, v, p in self.levels
        ]
        obj["max_level"] = self.max_level
        obj["folded_tail_mass_num"] = self.folded_tail_mass.numerator
        obj["folded_tail_mass_den"] = self.folded_tail_mass.denominator
        return obj

    @classmethod
    def from_json_dict(cls, obj: dict) -> "LeveledDistribution":
        base = StepDistribution.from_json_dict(obj)
        levels = tuple(
            (int(e["k"]), int(e["value"]),
             Fraction(int(e["per_sign_prob_num"]), int(e["per_sign_prob_den"])))
            for e in obj["levels"])
        return cls(atoms=base.atoms, kind=base.kind, label=base.label,
                   cached_mean=base.cached_mean,
                   cached_variance=base.cached_variance,
                   levels=levels, max_level=int(obj["max_level"]),
                   folded_tail_mass=Fraction(int(obj["folded_tail_mass_num"]),
                                             int(obj["folded_tail_mass_den"])))


def _leveled_from_masses(label: str, level_values: list,
                         per_sign: list, tail: Fraction) -> LeveledDistribution:
    """Assemble a symmetric leveled law from per-sign level masses."""
    claimed = 2 * sum(per_sign, Fraction(0))
    if claimed >= 1:
        raise NegativeMassError(
            f"level masses sum to {claimed} >= 1; nothing left for the unit atoms")
    unit = (1 - claimed) / 2
    atoms = [(Fraction(-1), unit), (Fraction(1), unit)]
    levels = [(0, 1, unit)]
    for k, (v, p) in enumerate(zip(level_values, per_sign), start=1):
        atoms.append((Fraction(v), p))
        atoms.append((Fraction(-v), p))
        levels.append((k, v, p))
    base = StepDistribution.from_atoms(atoms, label=label)
    return LeveledDistribution(atoms=base.atoms, kind=base.kind, label=label,
                               cached_mean=base.cached_mean,
                               cached_variance=base.cached_variance,
                               levels=tuple(levels),
                               max_level=len(level_values),
                               folded_tail_mass=tail)


def tower_distribution(K: int) -> LeveledDistribution:
    """Atoms +-1 and +-f(k) for 1 <= k <= K, per-sign level mass 1/(2 f(k)^4),
    unit atoms carrying the exact complement."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if K > MAX_LEVEL_K:
        raise TowerOverflowError(f"tower level K={K} exceeds buildable range")
    values = [tower_f(k) for k in range(1, K + 1)]
    per_sign = [Fraction(1, 2 * v ** 4) for v in values]
    tail = Fraction(1, tower_f(K + 1) ** 4)
    return _leveled_from_masses(f"tower(K={K})", values, per_sign, tail)


def _three_halves_mass(v: int) -> Fraction:
    """Exact 1/(2 v^{3/2}) when v is a perfect square, else the nearest
    double as an exact dyadic rational (keeps the law a genuine rational
    probability law; the per-atom deviation is below 2^-53)."""
    r = math.isqrt(v)
    if r * r == v:
        return Fraction(1, 2 * v * r)
    x = 1.0 / (2.0 * v * math.sqrt(v))
    return Fraction(*x.as_integer_ratio())


def heavy_tower_distribution(K: int,
                             g: Optional[Callable[[int], int]] = None
                             ) -> LeveledDistribution:
    """Atoms +-1 and +-g(k) for 1 <= k <= K with per-sign mass 1/(2 g(k)^{3/2}).

    g defaults to the tower function and must satisfy g(0)=1, integer and
    strictly increasing values, and g >= tower pointwise (checked through
    K+1, which the folded-tail bound needs).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if K > MAX_LEVEL_K:
        raise TowerOverflowError(f"heavy level K={K} exceeds buildable range")
    g = g or tower_f
    vals = [g(k) for k in range(K + 2)]
    if vals[0] != 1:
        raise InvalidGError(f"g(0) must be 1, got {vals[0]}")
    for k, v in enumerate(vals):
        if not isinstance(v, int):
            raise InvalidGError(f"g({k})={v!r} is not an integer")
        if k and v <= vals[k - 1]:
            raise InvalidGError("g must be strictly increasing")
        if v < tower_f(k):
            raise InvalidGError(f"g({k})={v} below tower value {tower_f(k)}")
    values = vals[1:K + 1]
    per_sign = [_three_halves_mass(v) for v in values]
    tv = vals[K + 1]
    r = math.isqrt(tv)
    if r * r == tv:
        tail = Fraction(1, tv * r)
    else:
        tail = Fraction(*(1.0 / (tv * math.sqrt(tv))).as_integer_ratio())
    return _leveled_from_masses(f"heavy(K={K})", values, per_sign, tail)


def rademacher() -> StepDistribution:
    return StepDistribution.from_atoms([(-1, Fraction(1, 2)), (1, Fraction(1, 2))],
                                       label="rademacher")


def lazy() -> StepDistribution:
    third = Fraction(1, 3)
    return StepDistribution.from_atoms([(-1, third), (0, third), (1, third)],
                                       label="lazy")


def skew() -> StepDistribution:
    return StepDistribution.from_atoms([(2, Fraction(1, 3)), (-1, Fraction(2, 3))],
                                       label="skew")


_PLAIN = {"rademacher": rademacher, "lazy": lazy, "skew": skew}
_LEVELED = {"tower": tower_distribution, "heavy": heavy_tower_distribution}


def builtin(name: str, K: Optional[int] = None) -> StepDistribution:
    """Look up a named law. tower/heavy require the truncation level K."""
    if name in _PLAIN:
        return _PLAIN[name]()
    if name in _LEVELED:
        if K is None:
            raise ValueError(f"{name} requires a truncation level K")
        return _LEVELED[name](K)
    raise UnknownNameError(f"no built-in distribution named {name!r}")


def builtin_names() -> list:
    return sorted(_PLAIN) + sorted(_LEVELED)
