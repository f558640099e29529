"""Core domain types: step distributions, lattice structure, queries, results.

Finite-support step laws carry exact rational atoms and probabilities, so the
lattice of the walk and all small-n probabilities can be computed exactly.
Laws that cannot be written with rational probabilities (irrational level
masses, continuous steps) are representable as sampler-only distributions and
are reachable by Monte Carlo but not by exact DP.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Union

from .errors import (
    MeanNotZeroError,
    NonIntegerOrderError,
    NotFiniteSupportError,
    SingleAtomError,
    UnacceptableWindowError,
)

Rational = Union[int, Fraction]

FINITE_SUPPORT = "finite-support"
SAMPLER_ONLY = "sampler-only"


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and (num, den) pairs to Fraction. Floats are
    accepted as their exact dyadic value."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(*x.as_integer_ratio())
    if isinstance(x, (tuple, list)) and len(x) == 2:
        return Fraction(int(x[0]), int(x[1]))
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


@dataclass(frozen=True)
class StepDistribution:
    """A step law: finite list of (value, probability) atoms, or a raw sampler.

    Finite-support laws keep everything as exact Fractions; probabilities must
    be strictly positive and sum exactly to 1. Mean zero is *not* required
    here (biased laws can be built and inspected); it is enforced when a
    WalkQuery is formed.
    """

    atoms: tuple  # ((Fraction value, Fraction prob), ...)
    kind: str = FINITE_SUPPORT
    label: str = ""
    cached_mean: Union[Fraction, float] = Fraction(0)
    cached_variance: Union[Fraction, float] = Fraction(0)  # may be math.inf for sampler-only
    sampler: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind == FINITE_SUPPORT:
            if len(self.atoms) < 2:
                raise SingleAtomError(f"{self.label or 'distribution'}: need at least 2 atoms")
            values = [v for v, _ in self.atoms]
            if len(set(values)) != len(values):
                raise ValueError("atom values must be pairwise distinct")
            for v, p in self.atoms:
                if not isinstance(v, Fraction) or not isinstance(p, Fraction):
                    raise TypeError("finite-support atoms must be exact Fractions")
                if p <= 0:
                    raise ValueError(f"atom {v} has non-positive probability {p}")
            total = sum(p for _, p in self.atoms)
            if total != 1:
                raise ValueError(f"probabilities sum to {total}, not 1")
        elif self.kind == SAMPLER_ONLY:
            if self.sampler is None:
                raise ValueError("sampler-only distribution needs a sampler callable")
        else:
            raise ValueError(f"unknown kind {self.kind!r}")

    @classmethod
    def from_atoms(cls, atoms: Iterable, label: str = "") -> "StepDistribution":
        """Build a finite-support law from (value, prob) pairs; values and
        probs are coerced to exact Fractions."""
        norm = tuple(sorted(((as_fraction(v), as_fraction(p)) for v, p in atoms),
                            key=lambda a: a[0]))
        mean = sum((v * p for v, p in norm), Fraction(0))
        var = sum((v * v * p for v, p in norm), Fraction(0)) - mean * mean
        return cls(atoms=norm, kind=FINITE_SUPPORT, label=label,
                   cached_mean=mean, cached_variance=var)

    @classmethod
    def from_sampler(cls, sampler: Callable, mean: float, variance: float,
                     label: str = "") -> "StepDistribution":
        """Wrap a raw sampler `f(rng, size) -> float array`. Variance may be
        math.inf."""
        return cls(atoms=(), kind=SAMPLER_ONLY, label=label,
                   cached_mean=mean, cached_variance=variance, sampler=sampler)

    @property
    def is_finite(self) -> bool:
        return self.kind == FINITE_SUPPORT

    def values(self) -> list:
        return [v for v, _ in self.atoms]

    def probs(self) -> list:
        return [p for _, p in self.atoms]

    def mean_is_zero(self) -> bool:
        return self.cached_mean == 0

    def to_json_dict(self) -> dict:
        """Mandated literal format: exact rationals as integer pairs."""
        if not self.is_finite:
            raise NotFiniteSupportError("sampler-only laws have no literal form")
        return {
            "label": self.label,
            "atoms": [[v.numerator, v.denominator, p.numerator, p.denominator]
                      for v, p in self.atoms],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "StepDistribution":
        atoms = [(Fraction(int(vn), int(vd)), Fraction(int(pn), int(pd)))
                 for vn, vd, pn, pd in obj["atoms"]]
        return cls.from_atoms(atoms, label=obj.get("label", ""))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "StepDistribution":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class LatticeInfo:
    """Arithmetic structure of a finite-support law: values lie on
    offset_z + span_h * Z with span_h maximal (gcd of pairwise differences).

    period_d = 1/span_h is the reciprocal period; a window width A is
    acceptable exactly when A >= span_h, which guarantees [k, k+A) always
    contains a lattice point of the walk.
    """

    is_lattice: bool
    span_h: Fraction
    offset_z: Fraction
    period_d: Fraction

    def walk_offset(self, n: int) -> Fraction:
        """Offset of the lattice of S_n: (n * offset_z) mod span_h."""
        return (n * self.offset_z) % self.span_h

    def acceptable(self, window_a) -> bool:
        return as_fraction(window_a) >= self.span_h

    def contains_step_value(self, x) -> bool:
        return (as_fraction(x) - self.offset_z) % self.span_h == 0

    def walk_contains(self, n: int, x) -> bool:
        """True iff x is on the lattice of the n-step partial sum."""
        return (as_fraction(x) - n * self.offset_z) % self.span_h == 0

    def snap_up(self, n: int, k) -> Fraction:
        """Smallest lattice point of S_n that is >= k."""
        k = as_fraction(k)
        base = n * self.offset_z
        m = math.ceil((k - base) / self.span_h)
        return base + m * self.span_h


def lattice_info(dist: StepDistribution) -> LatticeInfo:
    """Compute span, offset and period of a finite-support law.

    span_h is the gcd of consecutive differences of the sorted atom values
    (equal to the gcd of all pairwise differences); offset_z is any atom
    value reduced mod span_h into [0, span_h).
    """
    if not dist.is_finite:
        raise NotFiniteSupportError("lattice_info requires a finite-support law")
    values = sorted(dist.values())
    if len(values) < 2:
        raise SingleAtomError("lattice_info needs at least 2 atoms")
    den = math.lcm(*(v.denominator for v in values))
    scaled = [v.numerator * (den // v.denominator) for v in values]
    g = 0
    for a, b in zip(scaled, scaled[1:]):
        g = math.gcd(g, b - a)
    span = Fraction(g, den)
    offset = values[0] % span
    return LatticeInfo(is_lattice=True, span_h=span, offset_z=offset,
                       period_d=1 / span)


@dataclass(frozen=True)
class WalkQuery:
    """A joint window-positivity query: steps dist, horizon n, target level k,
    window width A, optional barrier depth h.

    The step law must have mean exactly zero, and for a finite-support law the
    window must be acceptable (A >= span), otherwise the half-open window
    [k, k+A) could miss the lattice of S_n entirely.
    """

    dist: StepDistribution
    n: int
    k: Fraction
    window_a: Fraction
    barrier_h: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "k", as_fraction(self.k))
        object.__setattr__(self, "window_a", as_fraction(self.window_a))
        object.__setattr__(self, "barrier_h", as_fraction(self.barrier_h))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.window_a <= 0:
            raise ValueError("window_a must be positive")
        if self.barrier_h < 0:
            raise ValueError("barrier_h must be nonnegative")
        if not self.dist.mean_is_zero():
            raise MeanNotZeroError(
                f"walk queries need a mean-zero step law; got mean {self.dist.cached_mean}")
        if self.dist.is_finite:
            lat = lattice_info(self.dist)
            if not lat.acceptable(self.window_a):
                raise UnacceptableWindowError(
                    f"window {self.window_a} below lattice span {lat.span_h}")


EXACT_RATIONAL = "exact-rational"
EXACT_FLOAT = "exact-float"
MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class ProbResult:
    """A probability with provenance.

    For monte-carlo results value = hits/trials and
    stderr = sqrt(value*(1-value)/trials). Paired conditional estimates store
    the denominator-event hit count in `trials`, which keeps both identities
    valid for the ratio estimator.
    """

    value: float
    method: str
    stderr: float = 0.0
    trials: int = 0
    hits: int = 0
    seed: Optional[int] = None
    exact: Optional[Fraction] = None
    flags: tuple = ()

    def __post_init__(self):
        if self.method not in (EXACT_RATIONAL, EXACT_FLOAT, MONTE_CARLO):
            raise ValueError(f"unknown method {self.method!r}")
        if not -1e-12 <= self.value <= 1 + 1e-12:
            raise ValueError(f"probability {self.value} out of [0,1]")

    @classmethod
    def from_exact(cls, value: Fraction, flags: tuple = ()) -> "ProbResult":
        value = as_fraction(value)
        return cls(value=float(value), method=EXACT_RATIONAL, exact=value, flags=flags)

    @classmethod
    def from_float(cls, value: float, flags: tuple = ()) -> "ProbResult":
        return cls(value=float(value), method=EXACT_FLOAT, flags=flags)

    @classmethod
    def from_counts(cls, hits: int, trials: int, seed: int,
                    flags: tuple = ()) -> "ProbResult":
        p = hits / trials
        se = math.sqrt(p * (1.0 - p) / trials)
        return cls(value=p, method=MONTE_CARLO, stderr=se, trials=trials,
                   hits=hits, seed=seed, flags=flags)

    def to_json_dict(self, query: Optional[dict] = None) -> dict:
        rec = {
            "ballotlab_schema": 1,
            "value": self.value,
            "mode": self.method,
            "stderr": self.stderr,
            "trials": self.trials,
            "hits": self.hits,
            "seed": self.seed,
            "flags": list(self.flags),
        }
        if self.exact is not None:
            rec["exact"] = f"{self.exact.numerator}/{self.exact.denominator}"
        if query is not None:
            rec["query"] = query
        return rec


@dataclass(frozen=True)
class Multiset:
    """A nonempty multiset of rationals with its total."""

    elements: tuple
    total: Fraction = Fraction(0)

    def __post_init__(self):
        if not self.elements:
            raise ValueError("multiset must be nonempty")
        object.__setattr__(self, "elements",
                           tuple(as_fraction(e) for e in self.elements))
        object.__setattr__(self, "total", sum(self.elements, Fraction(0)))

    def __len__(self):
        return len(self.elements)


def moment(dist: StepDistribution, order, absolute: bool = False):
    """Moment of the step law: sum p*v^order, or sum p*|v|^order if absolute.

    Exact Fraction when the order is a positive integer; float otherwise
    (absolute only). Signed fractional moments are undefined for negative
    values, hence NonIntegerOrderError.
    """
    if not dist.is_finite:
        raise NotFiniteSupportError("moment requires a finite-support law")
    order_f = as_fraction(order) if not isinstance(order, float) else order
    if isinstance(order_f, Fraction) and order_f.denominator == 1:
        r = int(order_f)
        if r <= 0:
            raise ValueError("order must be positive")
        if absolute:
            return sum((p * abs(v) ** r for v, p in dist.atoms), Fraction(0))
        return sum((p * v ** r for v, p in dist.atoms), Fraction(0))
    if not absolute:
        raise NonIntegerOrderError(
            f"order {order} is not an integer; use absolute=True")
    r = float(order)
    if r <= 0:
        raise ValueError("order must be positive")
    return float(sum(float(p) * abs(float(v)) ** r for v, p in dist.atoms))
