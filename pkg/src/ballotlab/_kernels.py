"""Kernel dispatch: compiled extension when available, numpy fallback otherwise.

Set BALLOTLAB_NO_SPEEDUPS=1 to force the fallback; set_backend() switches at
runtime (used by the kernel-equivalence tests and the benchmark).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py
from ._kernels_py import I64_MAX, I64_MIN  # noqa: F401  (re-exported)

try:
    from . import _speedups  # type: ignore[attr-defined]
except ImportError:
    _speedups = None

_active = "numpy"
if _speedups is not None and not os.environ.get("BALLOTLAB_NO_SPEEDUPS"):
    _active = "compiled"


def compiled_available() -> bool:
    return _speedups is not None


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in ("compiled", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "compiled" and _speedups is None:
        raise RuntimeError("compiled kernels are not installed")
    _active = name


def dp_float_law(probs, shifts, n, gmin, gmax, tmin):
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    shifts = np.ascontiguousarray(shifts, dtype=np.int64)
    if tmin is not None:
        tmin = np.ascontiguousarray(tmin, dtype=np.int64)
    if _active == "compiled":
        return _speedups.dp_float_law(probs, shifts, n, gmin, gmax, tmin)
    return _kernels_py.dp_float_law(probs, shifts, n, gmin, gmax, tmin)


def mc_count_pair(msteps, tmin, wlo, whi):
    msteps = np.ascontiguousarray(msteps, dtype=np.int64)
    if tmin is not None:
        tmin = np.ascontiguousarray(tmin, dtype=np.int64)
    if _active == "compiled":
        return _speedups.mc_count_pair(msteps, tmin, int(wlo), int(whi))
    return _kernels_py.mc_count_pair(msteps, tmin, int(wlo), int(whi))


def mc_count_pair_float(steps, smin, wlo, whi):
    # Sampler-only laws are not hot enough to warrant a compiled path.
    steps = np.ascontiguousarray(steps, dtype=np.float64)
    if smin is not None:
        smin = np.ascontiguousarray(smin, dtype=np.float64)
    return _kernels_py.mc_count_pair_float(steps, smin, wlo, whi)
