"""Closed-form approximations and bounds: Gaussian local window/lattice
approximators and the classical binomial concentration bounds.

The lattice point-mass form carries the lattice span as a prefactor: the
window form describes mass per unit length, and consecutive walk values are
span apart, so the point mass is span times the density. Dropping the factor
makes the simple +-1 walk comparison fail by exactly that factor (the
negative control in the acceptance suite).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import OffLatticeError
from .exactdp import DEFAULT_STATE_CAP, endpoint_window_prob
from .walkcore import StepDistribution, as_fraction, lattice_info, moment


def stone_window_approx(sigma2: float, n: int, x: float, hwindow: float) -> float:
    """Gaussian window approximation of P{x <= S_n < x+h}:
    h * exp(-x^2/(2 n sigma^2)) / sqrt(2 pi sigma^2 n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if hwindow <= 0:
        raise ValueError("window width must be positive")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    return hwindow * math.exp(-x * x / (2.0 * n * sigma2)) / math.sqrt(
        2.0 * math.pi * sigma2 * n)


def stone_lattice_approx(dist: StepDistribution, n: int, x) -> float:
    """Gaussian point-mass approximation of P{S_n = x} for x on the walk's
    lattice, including the span prefactor."""
    lat = lattice_info(dist)
    x = as_fraction(x)
    if not lat.walk_contains(n, x):
        raise OffLatticeError(
            f"{x} is not on the lattice of the {n}-step walk "
            f"(offset {lat.walk_offset(n)}, span {lat.span_h})")
    sigma2 = float(moment(dist, 2, absolute=False))
    return float(lat.span_h) * stone_window_approx(sigma2, n, float(x), 1.0)


def chernoff_binomial_bounds(n: int, p: float, c: float):
    """Upper/lower deviation bounds for Bin(n, p) with mean mu = n p:
    P{X > (1+c)mu} <= exp(-c^2 mu/(2(1+c/3))) and
    P{X < (1-c)mu} <= exp(-c^2 mu/2)."""
    if n < 1 or not 0 < p < 1 or c <= 0:
        raise ValueError("need n >= 1, 0 < p < 1, c > 0")
    mu = n * p
    upper = math.exp(-c * c * mu / (2.0 * (1.0 + c / 3.0)))
    lower = math.exp(-c * c * mu / 2.0)
    return upper, lower


@dataclass(frozen=True)
class CltRow:
    n: int
    x: Fraction
    exact: float
    approx: float
    rel_error: float


def _resolve_x_rule(dist: StepDistribution, n: int, x_rule) -> list:
    lat = lattice_info(dist)
    if x_rule == "zero" or x_rule is None:
        xs = [Fraction(0)]
    elif isinstance(x_rule, dict) and x_rule.get("kind") == "sigma_multiple":
        sigma = math.sqrt(float(moment(dist, 2, absolute=False)))
        xs = [as_fraction(float(x_rule["c"]) * sigma * math.sqrt(n))]
    elif isinstance(x_rule, (list, tuple)):
        xs = [as_fraction(v) for v in x_rule]
    else:
        raise ValueError(f"unrecognized x_rule {x_rule!r}")
    return [lat.snap_up(n, x) for x in xs]


def clt_compare(dist: StepDistribution, n_grid: Sequence[int], x_rule="zero",
                mode: str = "auto",
                state_cap: int = DEFAULT_STATE_CAP) -> list:
    """Exact point mass vs Gaussian lattice approximation over a grid.

    x_rule: "zero", an explicit list of values, or
    {"kind": "sigma_multiple", "c": c} for x ~ c*sigma*sqrt(n); every x is
    snapped up to the walk's lattice. rel_error = |approx/exact - 1|
    (inf when the exact mass vanishes).
    """
    lat = lattice_info(dist)
    rows = []
    for n in n_grid:
        for x in _resolve_x_rule(dist, n, x_rule):
            exact = endpoint_window_prob(dist, n, x, lat.span_h, mode=mode,
                                         state_cap=state_cap).value
            approx = stone_lattice_approx(dist, n, x)
            rel = abs(approx / exact - 1.0) if exact > 0 else math.inf
            rows.append(CltRow(n=n, x=x, exact=exact, approx=approx,
                               rel_error=rel))
    return rows


def clt_rows_to_csv(rows: Sequence[CltRow], fileobj) -> None:
    writer = csv.writer(fileobj, lineterminator="\r\n")
    writer.writerow(["n", "x_num", "x_den", "exact", "approx", "rel_error"])
    for r in rows:
        writer.writerow([r.n, r.x.numerator, r.x.denominator,
                         format(r.exact, ".17g"), format(r.approx, ".17g"),
                         format(r.rel_error, ".17g")])
