"""Exact constrained-path probabilities by dynamic programming.

The walk of a finite-support rational law lives on a shifted lattice:
S_i = i*z + h*M with M an integer coordinate. Each DP pass convolves the mass
over M with the step law and zeroes coordinates violating the active path
constraint. Two arithmetic modes:

* exact: integer numerators over a common power-of-D denominator (D = lcm of
  the atom probability denominators). Ground truth, cost grows with n.
* float: double precision via the kernel backend, with a crude accumulated
  rounding bound reported alongside.

"auto" picks exact while the predicted bigint workload is small.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate
from typing import Iterator, Optional, Union

import numpy as np

from . import _kernels
from .errors import (
    NotFiniteSupportError,
    StateSpaceTooLargeError,
    ZeroDenominatorError,
)
from .walkcore import (
    EXACT_FLOAT,
    EXACT_RATIONAL,
    LatticeInfo,
    ProbResult,
    StepDistribution,
    WalkQuery,
    as_fraction,
    lattice_info,
)

DEFAULT_STATE_CAP = 20_000_000
AUTO_EXACT_COST = 8_000_000  # rough bigint-limb budget before auto switches to float

CONSTRAINT_NONE = "none"
CONSTRAINT_INTERIOR = "strictly-positive-interior"
CONSTRAINT_AT_LEAST = "at-least"

_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class Constraint:
    """Path constraint applied during the DP passes."""

    kind: str
    h: Optional[Fraction] = None  # barrier depth for at-least(-h)

    @classmethod
    def none(cls) -> "Constraint":
        return cls(CONSTRAINT_NONE)

    @classmethod
    def interior_positive(cls) -> "Constraint":
        return cls(CONSTRAINT_INTERIOR)

    @classmethod
    def at_least(cls, h) -> "Constraint":
        h = as_fraction(h)
        if h < 0:
            raise ValueError("barrier depth h must be >= 0")
        return cls(CONSTRAINT_AT_LEAST, h)

    def describe(self) -> str:
        if self.kind == CONSTRAINT_AT_LEAST:
            return f"at-least(-{self.h})"
        return self.kind


class _WalkLattice:
    """Precomputed integer-coordinate view of a finite-support law."""

    def __init__(self, dist: StepDistribution):
        if not dist.is_finite:
            raise NotFiniteSupportError("exact DP requires a finite-support law")
        self.dist = dist
        self.lat: LatticeInfo = lattice_info(dist)
        self.z = self.lat.offset_z
        self.h = self.lat.span_h
        self.shifts = [int((v - self.z) / self.h) for v in dist.values()]
        self.probs = dist.probs()
        self.m_min = min(self.shifts)
        self.m_max = max(self.shifts)
        self.denom = math.lcm(*(p.denominator for p in self.probs))
        self.numer = [int(p * self.denom) for p in self.probs]

    def value_at(self, n: int, m: int) -> Fraction:
        return n * self.z + m * self.h

    def min_coord(self, n: int, x, strict: bool) -> int:
        """Smallest integer M with n*z + h*M > x (strict) or >= x."""
        r = (as_fraction(x) - n * self.z) / self.h
        if strict:
            return math.floor(r) + 1
        return math.ceil(r)

    def step_thresholds(self, n: int, constraint: Constraint):
        """Per-step minimum coordinate, or None when unconstrained."""
        if constraint.kind == CONSTRAINT_NONE:
            return None
        t = [None] * n
        if constraint.kind == CONSTRAINT_INTERIOR:
            for i in range(1, n):
                t[i - 1] = self.min_coord(i, 0, strict=True)
        elif constraint.kind == CONSTRAINT_AT_LEAST:
            for i in range(1, n + 1):
                t[i - 1] = self.min_coord(i, -constraint.h, strict=False)
        else:
            raise ValueError(f"unknown constraint {constraint.kind!r}")
        return t


@dataclass
class PathLawTable:
    """Mass of S_n over its lattice after constrained DP passes.

    Index j corresponds to M = gmin + j, i.e. the walk value
    origin + j*span_h. Exact mode stores integer numerators over
    denominator; float mode stores a float64 array plus a rounding bound.
    """

    n: int
    constraint: Constraint
    span_h: Fraction
    origin: Fraction  # walk value at index 0
    gmin: int
    mode: str  # EXACT_RATIONAL or EXACT_FLOAT
    numerators: Optional[list] = None
    denominator: Optional[int] = None
    mass_float: Optional[np.ndarray] = None
    float_err_bound: float = 0.0

    def __len__(self):
        if self.mode == EXACT_RATIONAL:
            return len(self.numerators)
        return len(self.mass_float)

    def point(self, j: int) -> Fraction:
        return self.origin + j * self.span_h

    def mass(self, j: int) -> Union[Fraction, float]:
        if self.mode == EXACT_RATIONAL:
            return Fraction(self.numerators[j], self.denominator)
        return float(self.mass_float[j])

    def total(self) -> Union[Fraction, float]:
        if self.mode == EXACT_RATIONAL:
            return Fraction(sum(self.numerators), self.denominator)
        return float(self.mass_float.sum())

    def _index_range(self, lo, hi) -> tuple:
        """Indices j with lo <= point(j) < hi; exact rational bounds."""
        w = len(self)
        j0 = 0 if lo is None else max(0, math.ceil((as_fraction(lo) - self.origin) / self.span_h))
        if hi is None:
            j1 = w
        else:
            r = (as_fraction(hi) - self.origin) / self.span_h
            j1 = math.ceil(r) if r != int(r) else int(r)
            j1 = min(w, max(0, j1))
        return j0, j1

    def window_sum(self, k, width) -> Union[Fraction, float]:
        """Mass of the half-open window [k, k+width)."""
        k = as_fraction(k)
        j0, j1 = self._index_range(k, k + as_fraction(width))
        if j0 >= j1:
            return Fraction(0) if self.mode == EXACT_RATIONAL else 0.0
        if self.mode == EXACT_RATIONAL:
            return Fraction(sum(self.numerators[j0:j1]), self.denominator)
        return float(self.mass_float[j0:j1].sum())

    def sum_from(self, lo, strict: bool = False) -> Union[Fraction, float]:
        """Mass at points >= lo (or > lo when strict)."""
        lo = as_fraction(lo)
        r = (lo - self.origin) / self.span_h
        j0 = math.floor(r) + 1 if strict else math.ceil(r)
        j0 = max(0, j0)
        if self.mode == EXACT_RATIONAL:
            return Fraction(sum(self.numerators[j0:]), self.denominator)
        return float(self.mass_float[j0:].sum())

    def second_moment_pair(self, threshold=None):
        """(sum x^2 * mass, sum mass) over points >= threshold (all if None)."""
        j0 = 0
        if threshold is not None:
            j0 = max(0, math.ceil((as_fraction(threshold) - self.origin) / self.span_h))
        if self.mode == EXACT_RATIONAL:
            num = Fraction(0)
            den_num = 0
            for j in range(j0, len(self.numerators)):
                c = self.numerators[j]
                if c:
                    x = self.point(j)
                    num += x * x * c
                    den_num += c
            return num / self.denominator, Fraction(den_num, self.denominator)
        idx = np.arange(j0, len(self.mass_float))
        xs = float(self.origin) + idx * float(self.span_h)
        m = self.mass_float[j0:]
        return float((xs * xs * m).sum()), float(m.sum())

    def write_csv(self, fileobj) -> None:
        """Columns: lattice point as an exact pair, mass to 17 significant
        digits; the mass header names the active constraint."""
        writer = csv.writer(fileobj, lineterminator="\r\n")
        writer.writerow(["lattice_point_num", "lattice_point_den",
                         f"mass:{self.constraint.describe()}"])
        for j in range(len(self)):
            m = self.mass(j)
            if not m:
                continue
            x = self.point(j)
            writer.writerow([x.numerator, x.denominator, format(float(m), ".17g")])


def _dp_exact(lw: _WalkLattice, n: int, thresholds, gmin: int, gmax: int) -> list:
    width = gmax - gmin + 1
    cur = [0] * width
    cur[-gmin] = 1
    for i in range(1, n + 1):
        new = [0] * width
        # reachable coordinate range after i steps, clipped to the buffer
        rlo = max(0, i * lw.m_min - gmin)
        rhi = min(width, i * lw.m_max - gmin + 1)
        for s, c in zip(lw.shifts, lw.numer):
            lo = max(rlo, s + (i - 1) * lw.m_min - gmin)
            hi = min(rhi, s + (i - 1) * lw.m_max - gmin + 1)
            if lo >= hi:
                continue
            seg = cur[lo - s:hi - s]
            if c == 1:
                new[lo:hi] = [a + b for a, b in zip(new[lo:hi], seg)]
            else:
                new[lo:hi] = [a + c * b for a, b in zip(new[lo:hi], seg)]
        if thresholds is not None and thresholds[i - 1] is not None:
            cut = min(width, thresholds[i - 1] - gmin)
            if cut > 0:
                new[:cut] = [0] * cut
        cur = new
    return cur


def _estimate_exact_cost(lw: _WalkLattice, n: int, width: int) -> float:
    bits_per_pass = max(1.0, math.log2(lw.denom))
    limbs = max(1.0, n * bits_per_pass / 64.0)
    return n * width * limbs / 2.0


def _resolve_mode(mode: str, lw: _WalkLattice, n: int, width: int) -> str:
    if mode == "exact":
        return EXACT_RATIONAL
    if mode == "float":
        return EXACT_FLOAT
    if mode == "auto":
        if _estimate_exact_cost(lw, n, width) <= AUTO_EXACT_COST:
            return EXACT_RATIONAL
        return EXACT_FLOAT
    raise ValueError(f"unknown mode {mode!r}; expected exact|float|auto")


def constrained_endpoint_law(dist: StepDistribution, n: int,
                             constraint: Constraint, mode: str = "auto",
                             state_cap: int = DEFAULT_STATE_CAP) -> PathLawTable:
    """Mass of S_n at each lattice point, restricted to paths satisfying the
    constraint at every step it covers (interior: steps 1..n-1; at-least:
    steps 1..n; none: no restriction)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lw = _WalkLattice(dist)
    gmin = min(0, n * lw.m_min)
    gmax = max(0, n * lw.m_max)
    width = gmax - gmin + 1
    if width > state_cap:
        raise StateSpaceTooLargeError(
            f"{width} lattice states exceed cap {state_cap}; "
            "fall back to Monte Carlo")
    thresholds = lw.step_thresholds(n, constraint)
    resolved = _resolve_mode(mode, lw, n, width)
    origin = lw.value_at(n, gmin)
    if resolved == EXACT_RATIONAL:
        nums = _dp_exact(lw, n, thresholds, gmin, gmax)
        return PathLawTable(n=n, constraint=constraint, span_h=lw.h,
                            origin=origin, gmin=gmin, mode=EXACT_RATIONAL,
                            numerators=nums, denominator=lw.denom ** n)
    tmin = None
    if thresholds is not None:
        tmin = np.array([_kernels.I64_MIN if t is None else t
                         for t in thresholds], dtype=np.int64)
    probs = np.array([float(p) for p in lw.probs])
    shifts = np.array(lw.shifts, dtype=np.int64)
    mass = _kernels.dp_float_law(probs, shifts, n, gmin, gmax, tmin)
    err = 2.0 * len(lw.shifts) * n * _EPS
    return PathLawTable(n=n, constraint=constraint, span_h=lw.h,
                        origin=origin, gmin=gmin, mode=EXACT_FLOAT,
                        mass_float=mass, float_err_bound=err)


def _as_result(value, mode: str, flags: tuple = ()) -> ProbResult:
    if mode == EXACT_RATIONAL:
        return ProbResult.from_exact(value, flags=flags)
    return ProbResult.from_float(value, flags=flags)


def positive_path_window_prob(q: WalkQuery, mode: str = "auto",
                              state_cap: int = DEFAULT_STATE_CAP) -> ProbResult:
    """P{k <= S_n < k+A and S_i > 0 for all 0 < i < n}."""
    if q.k <= 0:
        raise ValueError("target level k must be positive")
    law = constrained_endpoint_law(q.dist, q.n, Constraint.interior_positive(),
                                   mode=mode, state_cap=state_cap)
    return _as_result(law.window_sum(q.k, q.window_a), law.mode)


def endpoint_window_prob(dist: StepDistribution, n: int, k, A,
                         mode: str = "auto",
                         state_cap: int = DEFAULT_STATE_CAP) -> ProbResult:
    """P{k <= S_n < k+A}, no path constraint."""
    law = constrained_endpoint_law(dist, n, Constraint.none(), mode=mode,
                                   state_cap=state_cap)
    return _as_result(law.window_sum(k, A), law.mode)


def conditional_ballot_prob(q: WalkQuery, mode: str = "auto",
                            state_cap: int = DEFAULT_STATE_CAP) -> ProbResult:
    """P{S_i > 0 for all 0 < i < n | k <= S_n < k+A}."""
    joint = positive_path_window_prob(q, mode=mode, state_cap=state_cap)
    endpoint = endpoint_window_prob(q.dist, q.n, q.k, q.window_a, mode=mode,
                                    state_cap=state_cap)
    if endpoint.method == EXACT_RATIONAL:
        if endpoint.exact == 0:
            raise ZeroDenominatorError(
                f"window [{q.k}, {q.k}+{q.window_a}) has zero mass at n={q.n}")
        return ProbResult.from_exact(joint.exact / endpoint.exact)
    if endpoint.value == 0.0:
        raise ZeroDenominatorError(
            f"window [{q.k}, {q.k}+{q.window_a}) has zero mass at n={q.n}")
    return ProbResult.from_float(joint.value / endpoint.value)


def positive_prefix_prob(dist: StepDistribution, m: int, mode: str = "auto",
                         state_cap: int = DEFAULT_STATE_CAP) -> ProbResult:
    """P{S_i > 0 for all 1 <= i <= m}."""
    if m < 1:
        raise ValueError("m must be >= 1")
    law = constrained_endpoint_law(dist, m, Constraint.interior_positive(),
                                   mode=mode, state_cap=state_cap)
    return _as_result(law.sum_from(0, strict=True), law.mode)


def stopping_time_tail(dist: StepDistribution, n: int, h, mode: str = "auto",
                       state_cap: int = DEFAULT_STATE_CAP) -> ProbResult:
    """P{T_h > n} where T_h is the first step at which the walk drops
    strictly below -h; equivalently P{S_i >= -h for all 1 <= i <= n}."""
    law = constrained_endpoint_law(dist, n, Constraint.at_least(h), mode=mode,
                                   state_cap=state_cap)
    return _as_result(law.total(), law.mode)


def conditional_second_moment(dist: StepDistribution, n: int, h,
                              threshold=None, mode: str = "auto",
                              state_cap: int = DEFAULT_STATE_CAP) -> float:
    """E[S_n^2 | T_h > n] or, with a threshold, E[S_n^2 | T_h > n, S_n >= threshold]."""
    law = constrained_endpoint_law(dist, n, Constraint.at_least(h), mode=mode,
                                   state_cap=state_cap)
    num, den = law.second_moment_pair(threshold)
    if den == 0:
        raise ZeroDenominatorError(
            f"no surviving path with S_{n} >= {threshold} above barrier -{h}")
    return float(num / den)


def _window_point_count(span_h: Fraction) -> int:
    """Extra lattice points a closed width-1 window can reach past its left
    edge: floor(1/span)."""
    return math.floor(Fraction(1) / span_h)


def _spread_from_exact_row(nums: list, w: int):
    if w == 0:
        return max(nums)
    pref = list(accumulate(nums, initial=0))
    width = len(nums)
    return max(pref[min(width, j + w + 1)] - pref[j] for j in range(width))


def _spread_from_float_row(mass: np.ndarray, w: int) -> float:
    if w == 0:
        return float(mass.max())
    c = np.cumsum(mass)
    c = np.concatenate(([0.0], c))
    width = len(mass)
    hi = np.minimum(np.arange(width) + w + 1, width)
    return float((c[hi] - c[:-1]).max())


def spread_sup(dist: StepDistribution, n: int, mode: str = "auto",
               state_cap: int = DEFAULT_STATE_CAP):
    """sup over x of P{x <= S_n <= x+1} (closed window of width 1).

    The supremum is attained with the window's left edge at a support point
    (such a window covers every maximal cluster), so a sliding scan over
    support suffices. Returns a Fraction in exact mode, float otherwise.
    """
    law = constrained_endpoint_law(dist, n, Constraint.none(), mode=mode,
                                   state_cap=state_cap)
    w = _window_point_count(law.span_h)
    if law.mode == EXACT_RATIONAL:
        return Fraction(_spread_from_exact_row(law.numerators, w),
                        law.denominator)
    return _spread_from_float_row(law.mass_float, w)


def iter_spread_sups(dist: StepDistribution, n_max: int, mode: str = "exact",
                     state_cap: int = DEFAULT_STATE_CAP) -> Iterator:
    """Yield (n, spread_sup(n)) for n = 1..n_max with one incremental DP row
    per n instead of a fresh DP per n. Exact mode yields Fractions."""
    lw = _WalkLattice(dist)
    gmin = min(0, n_max * lw.m_min)
    gmax = max(0, n_max * lw.m_max)
    width = gmax - gmin + 1
    if width > state_cap:
        raise StateSpaceTooLargeError(f"{width} states exceed cap {state_cap}")
    w = _window_point_count(lw.h)
    exact = mode == "exact" or (mode == "auto" and
                                _estimate_exact_cost(lw, n_max, width) <= AUTO_EXACT_COST)
    if exact:
        cur = [0] * width
        cur[-gmin] = 1
        denom = 1
        for i in range(1, n_max + 1):
            new = [0] * width
            rlo = max(0, i * lw.m_min - gmin)
            rhi = min(width, i * lw.m_max - gmin + 1)
            for s, c in zip(lw.shifts, lw.numer):
                lo = max(rlo, s + (i - 1) * lw.m_min - gmin)
                hi = min(rhi, s + (i - 1) * lw.m_max - gmin + 1)
                if lo >= hi:
                    continue
                seg = cur[lo - s:hi - s]
                if c == 1:
                    new[lo:hi] = [a + b for a, b in zip(new[lo:hi], seg)]
                else:
                    new[lo:hi] = [a + c * b for a, b in zip(new[lo:hi], seg)]
            cur = new
            denom *= lw.denom
            row = cur[rlo:rhi]
            yield i, Fraction(_spread_from_exact_row(row, w), denom)
    else:
        probs = np.array([float(p) for p in lw.probs])
        cur = np.zeros(width)
        cur[-gmin] = 1.0
        for i in range(1, n_max + 1):
            new = np.zeros(width)
            for p, s in zip(probs, lw.shifts):
                if s >= 0:
                    new[s:] += p * cur[:width - s]
                else:
                    new[:width + s] += p * cur[-s:]
            cur = new
            rlo = max(0, i * lw.m_min - gmin)
            rhi = min(width, i * lw.m_max - gmin + 1)
            yield i, _spread_from_float_row(cur[rlo:rhi], w)
