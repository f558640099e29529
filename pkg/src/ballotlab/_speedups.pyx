# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: float DP convolution passes and Monte Carlo path
event counting. Mirrors ballotlab._kernels_py exactly; both work on integer
lattice coordinates so results agree bit for bit (the float DP keeps the same
per-element add order and is compiled with -ffp-contract=off)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef long long I64_MIN_C = np.iinfo(np.int64).min
cdef long long I64_MAX_C = np.iinfo(np.int64).max


def dp_float_law(double[::1] probs, long long[::1] shifts, int n,
                 long long gmin, long long gmax, tmin):
    cdef Py_ssize_t width = <Py_ssize_t>(gmax - gmin + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf_a = np.zeros(width, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf_b = np.zeros(width, dtype=np.float64)
    cdef double[::1] cur = buf_a
    cdef double[::1] new = buf_b
    cdef double[::1] tmp
    cdef long long[::1] tview
    cdef bint has_t = tmin is not None
    if has_t:
        tview = tmin
    cdef Py_ssize_t n_atoms = probs.shape[0]
    cdef Py_ssize_t i, j, a, lo, hi, cut
    cdef long long s, t
    cdef double p

    cur[<Py_ssize_t>(-gmin)] = 1.0
    for i in range(1, n + 1):
        for j in range(width):
            new[j] = 0.0
        for a in range(n_atoms):
            p = probs[a]
            s = shifts[a]
            if s >= 0:
                lo = <Py_ssize_t>s
                hi = width
            else:
                lo = 0
                hi = width + <Py_ssize_t>s
            for j in range(lo, hi):
                new[j] += p * cur[j - s]
        if has_t:
            t = tview[i - 1]
            if t > gmin:
                cut = <Py_ssize_t>(t - gmin)
                if cut > width:
                    cut = width
                for j in range(cut):
                    new[j] = 0.0
        tmp = cur
        cur = new
        new = tmp
    # cur aliases buf_a when n is even, buf_b when n is odd
    if n % 2 == 0:
        return buf_a
    return buf_b


def mc_count_pair(long long[:, ::1] msteps, tmin, long long wlo, long long whi):
    cdef Py_ssize_t trials = msteps.shape[0]
    cdef Py_ssize_t n = msteps.shape[1]
    cdef long long[::1] tview
    cdef bint has_t = tmin is not None
    if has_t:
        tview = tmin
    cdef Py_ssize_t r, i
    cdef long long cum
    cdef bint ok
    cdef long joint = 0, window = 0

    for r in range(trials):
        cum = 0
        ok = True
        if has_t:
            for i in range(n):
                cum += msteps[r, i]
                if cum < tview[i]:
                    ok = False
                    i += 1
                    break
            if not ok:
                # finish the running sum for the window count
                for i in range(i, n):
                    cum += msteps[r, i]
        else:
            for i in range(n):
                cum += msteps[r, i]
        if cum >= wlo and cum < whi:
            window += 1
            if ok:
                joint += 1
    return joint, window
