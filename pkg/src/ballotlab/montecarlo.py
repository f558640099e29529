"""Seeded, reproducible Monte Carlo estimation of walk-event probabilities.

Randomness is organized as counter-based streams: stream s draws from a
Philox generator keyed by SeedSequence(seed, spawn_key=(s,)), and trial j
belongs to stream j mod stream_count. Hit counts are therefore bit-identical
for a fixed (seed, trials, stream_count) regardless of batching, and streams
can run in parallel (BALLOTLAB_THREADS) without changing any output.

Event evaluation happens on exact integer lattice coordinates, so constraint
and window checks never involve float comparisons for finite-support laws.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from . import _kernels
from .distributions import LeveledDistribution
from .errors import (
    TooLargeForExactError,
    ZeroDenominatorSampleError,
)
from .walkcore import (
    Multiset,
    ProbResult,
    StepDistribution,
    as_fraction,
)
from .exactdp import _WalkLattice

_CHUNK_ELEMS = 1 << 22  # fixed batching constant; part of the draw order contract

POSITIVITY_KINDS = ("none", "interior", "prefix")


@dataclass(frozen=True)
class McConfig:
    """Trial budget, master seed and stream layout."""

    trials: int
    seed: int
    stream_count: int = 8
    min_hits: int = 25

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 1 <= self.stream_count <= self.trials:
            raise ValueError("need 1 <= stream_count <= trials")
        if self.min_hits < 0:
            raise ValueError("min_hits must be >= 0")


@dataclass(frozen=True)
class WalkEvent:
    """Conjunction of a path-positivity condition, an optional barrier and an
    optional endpoint window [k, k+A)."""

    positivity: str = "none"
    barrier_h: Optional[Fraction] = None
    endpoint_window: Optional[tuple] = None

    def __post_init__(self):
        if self.positivity not in POSITIVITY_KINDS:
            raise ValueError(f"positivity must be one of {POSITIVITY_KINDS}")
        if self.barrier_h is not None:
            object.__setattr__(self, "barrier_h", as_fraction(self.barrier_h))
            if self.barrier_h < 0:
                raise ValueError("barrier_h must be >= 0")
        if self.endpoint_window is not None:
            k, a = self.endpoint_window
            k, a = as_fraction(k), as_fraction(a)
            if a <= 0:
                raise ValueError("window width must be positive")
            object.__setattr__(self, "endpoint_window", (k, a))

    def describe(self) -> dict:
        d = {"positivity": self.positivity}
        if self.barrier_h is not None:
            d["barrier_h"] = str(self.barrier_h)
        if self.endpoint_window is not None:
            d["window"] = [str(self.endpoint_window[0]),
                           str(self.endpoint_window[1])]
        return d


@dataclass(frozen=True)
class LevelDecomposition:
    """Per-path split of the steps by level: counts N_i, signed sums S_{n,i},
    and the truncated endpoints S_n^{(K)} = sum of level sums up to K."""

    counts: dict
    sums: dict
    truncated_endpoints: dict

    def check(self, n: int) -> None:
        assert sum(self.counts.values()) == n
        total = sum(self.sums.values())
        top = max(self.truncated_endpoints)
        assert self.truncated_endpoints[top] == total


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    """Counter-based generator for one stream."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(stream,))))


def _stream_trials(cfg: McConfig) -> list:
    base, rem = divmod(cfg.trials, cfg.stream_count)
    return [base + (1 if s < rem else 0) for s in range(cfg.stream_count)]


def _thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("BALLOTLAB_THREADS", "1")))
    except ValueError:
        return 1


def _map_streams(cfg: McConfig, worker):
    """Run worker(stream_index, trial_count) for every stream, in parallel if
    BALLOTLAB_THREADS allows; results are reduced in stream order either way."""
    counts = _stream_trials(cfg)
    threads = min(_thread_cap(), cfg.stream_count)
    if threads <= 1:
        return [worker(s, t) for s, t in enumerate(counts)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futs = [pool.submit(worker, s, t) for s, t in enumerate(counts)]
        return [f.result() for f in futs]


def _finite_sampler_tables(dist: StepDistribution):
    lw = _WalkLattice(dist)
    cdf = np.cumsum(np.array([float(p) for p in lw.probs]))
    cdf[-1] = 1.0
    shifts = np.array(lw.shifts, dtype=np.int64)
    return lw, cdf, shifts


def _event_coords(lw: _WalkLattice, n: int, event: WalkEvent):
    """Integer thresholds for the event on the coordinate scale."""
    tmin = None
    need = event.positivity != "none" or event.barrier_h is not None
    if need:
        tmin = np.full(n, _kernels.I64_MIN, dtype=np.int64)
        last = n - 1 if event.positivity == "interior" else n
        if event.positivity != "none":
            for i in range(1, last + 1):
                tmin[i - 1] = max(tmin[i - 1], lw.min_coord(i, 0, strict=True))
        if event.barrier_h is not None:
            for i in range(1, n + 1):
                tmin[i - 1] = max(tmin[i - 1],
                                  lw.min_coord(i, -event.barrier_h, strict=False))
    wlo, whi = _kernels.I64_MIN, _kernels.I64_MAX
    if event.endpoint_window is not None:
        k, a = event.endpoint_window
        wlo = lw.min_coord(n, k, strict=False)
        r = (k + a - n * lw.z) / lw.h
        whi = math.ceil(r) if r != math.floor(r) else int(r)
    return tmin, wlo, whi


def _count_event(dist: StepDistribution, n: int, event: WalkEvent,
                 cfg: McConfig):
    """(joint_hits, window_hits) over all trials."""
    if dist.is_finite:
        lw, cdf, shifts = _finite_sampler_tables(dist)
        tmin, wlo, whi = _event_coords(lw, n, event)
        chunk = max(1, _CHUNK_ELEMS // max(1, n))

        def worker(s, t):
            rng = stream_rng(cfg.seed, s)
            joint = window = 0
            done = 0
            while done < t:
                c = min(chunk, t - done)
                u = rng.random((c, n))
                msteps = shifts[np.searchsorted(cdf, u, side="right")]
                j, w = _kernels.mc_count_pair(msteps, tmin, wlo, whi)
                joint += j
                window += w
                done += c
            return joint, window
    else:
        smin = None
        if event.positivity != "none" or event.barrier_h is not None:
            smin = np.full(n, -np.inf)
            last = n - 1 if event.positivity == "interior" else n
            if event.positivity != "none":
                smin[:last] = np.maximum(smin[:last], 0.0)
            if event.barrier_h is not None:
                smin = np.maximum(smin, -float(event.barrier_h))
        wlo, whi = -np.inf, np.inf
        if event.endpoint_window is not None:
            k, a = event.endpoint_window
            wlo, whi = float(k), float(k + a)
        chunk = max(1, _CHUNK_ELEMS // max(1, n))

        def worker(s, t):
            rng = stream_rng(cfg.seed, s)
            joint = window = 0
            done = 0
            while done < t:
                c = min(chunk, t - done)
                steps = dist.sampler(rng, (c, n))
                j, w = _kernels.mc_count_pair_float(steps, smin, wlo, whi)
                joint += j
                window += w
                done += c
            return joint, window

    parts = _map_streams(cfg, worker)
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


def estimate_event(dist: StepDistribution, n: int, event: WalkEvent,
                   cfg: McConfig) -> ProbResult:
    """hits/trials estimate of P{event} with binomial standard error."""
    if n < 1:
        raise ValueError("n must be >= 1")
    joint, _ = _count_event(dist, n, event, cfg)
    flags = ("low_precision",) if joint < cfg.min_hits else ()
    return ProbResult.from_counts(joint, cfg.trials, cfg.seed, flags=flags)


def estimate_conditional(dist: StepDistribution, n: int, k, A,
                         cfg: McConfig) -> ProbResult:
    """Paired estimate of P{S_i > 0 for 0 < i < n | k <= S_n < k+A}: the
    numerator and denominator events are counted on the same sample, and the
    reported trials/hits are the denominator/joint counts, which makes the
    binomial identities of ProbResult hold for the ratio estimator."""
    event = WalkEvent(positivity="interior", endpoint_window=(k, A))
    joint, window = _count_event(dist, n, event, cfg)
    if window == 0:
        raise ZeroDenominatorSampleError(
            f"no sample landed in [{k}, {k}+{A}) at n={n}")
    flags = ["paired"]
    if window < cfg.min_hits:
        flags.append("low_precision")
    return ProbResult.from_counts(joint, window, cfg.seed, flags=tuple(flags))


def permutation_positive_prob(ms: Multiset, mode: str = "exact",
                              cfg: Optional[McConfig] = None) -> ProbResult:
    """Probability that all partial sums of a uniformly random permutation of
    the multiset are strictly positive. Exact enumeration (over distinct
    values with multiplicities, memoized) up to 12 elements; Monte Carlo via
    random permutations otherwise."""
    if mode == "exact":
        if len(ms) > 12:
            raise TooLargeForExactError(
                f"{len(ms)} elements exceed the exact enumeration cap of 12")
        values = sorted(set(ms.elements))
        counts = tuple(ms.elements.count(v) for v in values)
        memo = {}

        def walk(counts, prefix):
            rem = sum(counts)
            if rem == 0:
                return Fraction(1)
            key = (counts, prefix)
            if key in memo:
                return memo[key]
            p = Fraction(0)
            for i, c in enumerate(counts):
                if not c:
                    continue
                nxt = prefix + values[i]
                if nxt > 0:
                    taken = counts[:i] + (c - 1,) + counts[i + 1:]
                    p += Fraction(c, rem) * walk(taken, nxt)
            memo[key] = p
            return p

        return ProbResult.from_exact(walk(counts, Fraction(0)))

    if mode != "mc":
        raise ValueError("mode must be 'exact' or 'mc'")
    if cfg is None:
        raise ValueError("Monte Carlo mode needs an McConfig")
    den = math.lcm(*(e.denominator for e in ms.elements))
    scaled = np.array([int(e * den) for e in ms.elements], dtype=np.int64)
    n = len(scaled)
    chunk = max(1, _CHUNK_ELEMS // max(1, n))

    def worker(s, t):
        rng = stream_rng(cfg.seed, s)
        hits = 0
        done = 0
        while done < t:
            c = min(chunk, t - done)
            keys = rng.random((c, n))
            order = np.argsort(keys, axis=1, kind="stable")
            sums = np.cumsum(scaled[order], axis=1)
            hits += int((sums > 0).all(axis=1).sum())
            done += c
        return hits

    hits = sum(_map_streams(cfg, worker))
    flags = ("low_precision",) if hits < cfg.min_hits else ()
    return ProbResult.from_counts(hits, cfg.trials, cfg.seed, flags=flags)


def decompose_path(dist: LeveledDistribution, steps) -> LevelDecomposition:
    """Split one explicit step sequence by level: counts N_i, sums S_{n,i},
    truncated endpoints."""
    if not isinstance(dist, LeveledDistribution):
        raise TypeError("level decomposition needs a leveled distribution")
    counts = {k: 0 for k, _, _ in dist.levels}
    sums = {k: 0 for k, _, _ in dist.levels}
    for x in steps:
        ell = dist.level_of_value(as_fraction(x))
        counts[ell] += 1
        sums[ell] += int(x)
    trunc = {}
    acc = 0
    for ell in sorted(counts):
        acc += sums[ell]
        trunc[ell] = acc
    return LevelDecomposition(counts=counts, sums=sums,
                              truncated_endpoints=trunc)


def _level_tables(dist: LeveledDistribution):
    if not isinstance(dist, LeveledDistribution):
        raise TypeError("level decomposition needs a leveled distribution")
    lw, cdf, _ = _finite_sampler_tables(dist)
    lev = np.array([dist.level_of_value(v) for v in dist.values()],
                   dtype=np.int64)
    vals = np.array([int(v) for v in dist.values()], dtype=np.int64)
    n_lev = dist.max_level + 1
    return cdf, lev, vals, n_lev


def sample_level_decomposition(dist: LeveledDistribution, n: int,
                               cfg: McConfig) -> Iterator[LevelDecomposition]:
    """Yield one LevelDecomposition per sampled path (streams in order)."""
    cdf, lev, vals, n_lev = _level_tables(dist)
    chunk = max(1, _CHUNK_ELEMS // max(1, n))
    for s, t in enumerate(_stream_trials(cfg)):
        rng = stream_rng(cfg.seed, s)
        done = 0
        while done < t:
            c = min(chunk, t - done)
            idx = np.searchsorted(cdf, rng.random((c, n)), side="right")
            levels = lev[idx]
            values = vals[idx]
            counts = np.zeros((c, n_lev), dtype=np.int64)
            sums = np.zeros((c, n_lev), dtype=np.int64)
            for ell in range(n_lev):
                mask = levels == ell
                counts[:, ell] = mask.sum(axis=1)
                sums[:, ell] = np.where(mask, values, 0).sum(axis=1)
            trunc = np.cumsum(sums, axis=1)
            for r in range(c):
                dec = LevelDecomposition(
                    counts={ell: int(counts[r, ell]) for ell in range(n_lev)},
                    sums={ell: int(sums[r, ell]) for ell in range(n_lev)},
                    truncated_endpoints={ell: int(trunc[r, ell])
                                         for ell in range(n_lev)})
                dec.check(n)
                yield dec
            done += c


def level_summary(dist: LeveledDistribution, n: int, cfg: McConfig) -> dict:
    """Aggregate level statistics over cfg.trials sampled paths: mean and max
    of |S_{n,i}| per level, the empirical distribution of N_i, and moments of
    the truncated endpoints."""
    cdf, lev, vals, n_lev = _level_tables(dist)
    chunk = max(1, _CHUNK_ELEMS // max(1, n))
    abs_sum = np.zeros(n_lev)
    abs_max = np.zeros(n_lev, dtype=np.int64)
    count_sum = np.zeros(n_lev, dtype=np.int64)
    count_hist = [dict() for _ in range(n_lev)]
    trunc_sum = np.zeros(n_lev)
    trunc_sq = np.zeros(n_lev)

    def worker(s, t):
        rng = stream_rng(cfg.seed, s)
        a_sum = np.zeros(n_lev)
        a_max = np.zeros(n_lev, dtype=np.int64)
        c_sum = np.zeros(n_lev, dtype=np.int64)
        hists = [dict() for _ in range(n_lev)]
        t_sum = np.zeros(n_lev)
        t_sq = np.zeros(n_lev)
        done = 0
        while done < t:
            c = min(chunk, t - done)
            idx = np.searchsorted(cdf, rng.random((c, n)), side="right")
            levels = lev[idx]
            values = vals[idx]
            for ell in range(n_lev):
                mask = levels == ell
                cnts = mask.sum(axis=1)
                sums = np.where(mask, values, 0).sum(axis=1)
                a_sum[ell] += np.abs(sums).sum()
                a_max[ell] = max(a_max[ell], np.abs(sums).max(initial=0))
                c_sum[ell] += cnts.sum()
                for val, freq in zip(*np.unique(cnts, return_counts=True)):
                    hists[ell][int(val)] = hists[ell].get(int(val), 0) + int(freq)
                if ell == 0:
                    trunc = sums.astype(np.float64)
                else:
                    trunc = trunc + sums
                t_sum[ell] += trunc.sum()
                t_sq[ell] += (trunc * trunc).sum()
            done += c
        return a_sum, a_max, c_sum, hists, t_sum, t_sq

    for a_sum, a_max, c_sum, hists, t_sum, t_sq in _map_streams(cfg, worker):
        abs_sum += a_sum
        abs_max = np.maximum(abs_max, a_max)
        count_sum += c_sum
        trunc_sum += t_sum
        trunc_sq += t_sq
        for ell in range(n_lev):
            for val, freq in hists[ell].items():
                count_hist[ell][val] = count_hist[ell].get(val, 0) + freq

    T = cfg.trials
    return {
        "trials": T,
        "seed": cfg.seed,
        "levels": [
            {
                "level": ell,
                "mean_abs_sum": abs_sum[ell] / T,
                "max_abs_sum": int(abs_max[ell]),
                "mean_count": count_sum[ell] / T,
                "count_distribution": {str(k): v for k, v in
                                       sorted(count_hist[ell].items())},
                "truncated_endpoint_mean": trunc_sum[ell] / T,
                "truncated_endpoint_second_moment": trunc_sq[ell] / T,
            }
            for ell in range(n_lev)
        ],
    }


def chernoff_rand_check(m: int, q: float, v: float, t: float,
                        cfg: McConfig) -> dict:
    """Empirical tails of Y = V_1 + ... + V_U against the closed-form bounds,
    where U ~ Bin(m, q) and the V_i are independent +-v fair signs.

    Bounds: P{Y > t} <= exp(-t^2/(8mq v^2 + 4tv/3)) + exp(-mq/3) and
    P{Y < -t} <= exp(-t^2/(8mq v^2)) + exp(-mq/3), valid for every v > 0.
    The 8mq v^2 term is the one the conditional-count derivation actually
    yields (each summand has variance v^2, and the count is capped at 2mq by
    the exp(-mq/3) term); a v^2-free denominator is only correct at v = 1 and
    is empirically violated for larger v.
    """
    if m < 1 or not 0 < q < 1 or v <= 0 or t <= 0:
        raise ValueError("need m >= 1, 0 < q < 1, v > 0, t > 0")
    mqv2 = m * q * v * v
    mq = m * q
    upper_bound = math.exp(-t * t / (8 * mqv2 + 4 * t * v / 3)) + math.exp(-mq / 3)
    lower_bound = math.exp(-t * t / (8 * mqv2)) + math.exp(-mq / 3)
    chunk = _CHUNK_ELEMS

    def worker(s, trials):
        rng = stream_rng(cfg.seed, s)
        up = lo = 0
        done = 0
        while done < trials:
            c = min(chunk, trials - done)
            u = rng.binomial(m, q, size=c)
            heads = rng.binomial(u, 0.5)
            y = v * (2.0 * heads - u)
            up += int((y > t).sum())
            lo += int((y < -t).sum())
            done += c
        return up, lo

    parts = _map_streams(cfg, worker)
    up = sum(p[0] for p in parts)
    lo = sum(p[1] for p in parts)
    T = cfg.trials
    pu, pl = up / T, lo / T
    return {
        "m": m, "q": q, "v": v, "t": t,
        "trials": T, "seed": cfg.seed,
        "upper_emp": pu,
        "upper_stderr": math.sqrt(pu * (1 - pu) / T),
        "upper_bound": upper_bound,
        "lower_emp": pl,
        "lower_stderr": math.sqrt(pl * (1 - pl) / T),
        "lower_bound": lower_bound,
    }
