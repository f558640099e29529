"""Pure-numpy implementations of the hot kernels.

These are the reference implementations; ballotlab._speedups (Cython) mirrors
them exactly. Both operate on integer lattice coordinates M, where a walk
value is recovered as S_i = i*z + h*M, so all constraint checks are exact
integer comparisons and the two backends produce identical results.
"""

from __future__ import annotations

import numpy as np

I64_MIN = np.iinfo(np.int64).min
I64_MAX = np.iinfo(np.int64).max


def dp_float_law(probs: np.ndarray, shifts: np.ndarray, n: int,
                 gmin: int, gmax: int, tmin) -> np.ndarray:
    """Run n convolution passes of the step law in float64.

    probs/shifts: atom probabilities and integer lattice shifts.
    gmin/gmax: global integer coordinate range of the state buffer (must
    contain 0 and every reachable coordinate).
    tmin: int64 array of length n, minimum allowed coordinate after each pass
    (entries equal to I64_MIN mean unconstrained); or None.

    Returns the mass array indexed by M - gmin.
    """
    width = gmax - gmin + 1
    cur = np.zeros(width, dtype=np.float64)
    cur[-gmin] = 1.0
    for i in range(1, n + 1):
        new = np.zeros(width, dtype=np.float64)
        for p, s in zip(probs, shifts):
            s = int(s)
            if s >= 0:
                new[s:] += p * cur[: width - s]
            else:
                new[: width + s] += p * cur[-s:]
        if tmin is not None:
            t = int(tmin[i - 1])
            if t > gmin:
                cut = min(width, t - gmin)
                new[:cut] = 0.0
        cur = new
    return cur


def mc_count_pair(msteps: np.ndarray, tmin, wlo: int, whi: int):
    """Count event hits over a batch of sampled paths.

    msteps: (trials, n) int64 lattice increments.
    tmin: per-step minimum for the running coordinate (I64_MIN = free), or
    None for no path constraint.
    [wlo, whi): half-open window on the final coordinate (I64_MIN/I64_MAX
    sentinels disable each side).

    Returns (joint_hits, window_hits): paths passing constraint-and-window,
    and paths passing the window alone.
    """
    cum = np.cumsum(msteps, axis=1)
    end = cum[:, -1]
    win = np.ones(len(msteps), dtype=bool)
    if wlo != I64_MIN:
        win &= end >= wlo
    if whi != I64_MAX:
        win &= end < whi
    if tmin is None:
        joint = win
    else:
        joint = win & (cum >= np.asarray(tmin)[None, :]).all(axis=1)
    return int(joint.sum()), int(win.sum())


def mc_count_pair_float(steps: np.ndarray, smin, wlo: float, whi: float):
    """Float variant of mc_count_pair for sampler-only laws.

    smin: per-step minimum for the running sum (-inf = free), or None.
    Window bounds are -inf/+inf when absent.
    """
    cum = np.cumsum(steps, axis=1)
    end = cum[:, -1]
    win = np.ones(len(steps), dtype=bool)
    if wlo != -np.inf:
        win &= end >= wlo
    if whi != np.inf:
        win &= end < whi
    if smin is None:
        joint = win
    else:
        joint = win & (cum >= np.asarray(smin)[None, :]).all(axis=1)
    return int(joint.sum()), int(win.sum())
