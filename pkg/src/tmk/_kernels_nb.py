"""Numba-compiled versions of the hot kernels (same signatures as ``_kernels_np``)."""

import numpy as np
from numba import njit


@njit(cache=True)
def _cell_index_row(a, n):
    mx = 0
    for i in range(n):
        v = abs(a[i])
        if v > mx:
            mx = v
    if mx == 0:
        return 0
    r = 0
    while (mx >> (r + 1)) > 0:
        r += 1
    scale = 1 << r
    last = 0
    for i in range(n):
        if abs(a[i]) >= scale:
            last = i + 1
    return n * r + last


@njit(cache=True)
def cell_indices(points):
    npts, n = points.shape
    out = np.empty(npts, dtype=np.int64)
    for p in range(npts):
        out[p] = _cell_index_row(points[p], n)
    return out


@njit(cache=True)
def _cell_histogram(lo, hi, dmax):
    n = lo.size
    hist = np.zeros(dmax + 1, dtype=np.int64)
    cur = lo.copy()
    while True:
        d = _cell_index_row(cur, n)
        if d <= dmax:
            hist[d] += 1
        # odometer increment, last axis fastest
        ax = n - 1
        while ax >= 0:
            cur[ax] += 1
            if cur[ax] <= hi[ax]:
                break
            cur[ax] = lo[ax]
            ax -= 1
        if ax < 0:
            break
    return hist


def cell_histogram(lo, hi, dmax):
    return _cell_histogram(np.asarray(lo, dtype=np.int64), np.asarray(hi, dtype=np.int64), dmax)


@njit(cache=True)
def _diff_axis(b):
    pre, length, post = b.shape
    for i in range(pre):
        for t in range(length - 1, 0, -1):
            for k in range(post):
                b[i, t, k] -= b[i, t - 1, k]


def corner_differences(a, naxes):
    out = np.ascontiguousarray(a, dtype=np.complex128).copy()
    shape = out.shape
    for ax in range(naxes):
        pre = int(np.prod(shape[:ax], dtype=np.int64))
        post = int(np.prod(shape[ax + 1:], dtype=np.int64))
        _diff_axis(out.reshape(pre, shape[ax], post))
    return out


@njit(cache=True)
def _opnorms(a):
    count, m, _ = a.shape
    out = np.empty(count)
    for p in range(count):
        if m == 1:
            out[p] = abs(a[p, 0, 0])
        elif m == 2:
            fro2 = 0.0
            for i in range(2):
                for j in range(2):
                    fro2 += a[p, i, j].real ** 2 + a[p, i, j].imag ** 2
            det = a[p, 0, 0] * a[p, 1, 1] - a[p, 0, 1] * a[p, 1, 0]
            disc = fro2 * fro2 - 4.0 * (det.real ** 2 + det.imag ** 2)
            if disc < 0.0:
                disc = 0.0
            out[p] = np.sqrt(0.5 * (fro2 + np.sqrt(disc)))
        else:
            _, s, _ = np.linalg.svd(np.ascontiguousarray(a[p]))
            out[p] = s[0]
    return out


def opnorms(a):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.shape[0] == 0:
        return np.zeros(0)
    if a.shape[1] > 2:
        # one LAPACK call per matrix loses to numpy's batched SVD
        return np.linalg.svd(a, compute_uv=False)[:, 0]
    return _opnorms(a)


def opnorm_sum(a):
    return float(np.sum(opnorms(a)))


@njit(cache=True)
def _smooth_step(t):
    out = np.empty_like(t)
    for i in range(t.size):
        x = t[i]
        g0 = np.exp(-1.0 / x) if x > 0.0 else 0.0
        g1 = np.exp(-1.0 / (1.0 - x)) if x < 1.0 else 0.0
        out[i] = g0 / (g0 + g1)
    return out


def smooth_step(t):
    t = np.asarray(t, dtype=np.float64)
    return _smooth_step(t.ravel()).reshape(t.shape)


@njit(cache=True)
def _solve_small(lhs, rhs):
    """In-place Gaussian elimination with partial pivoting; the solution ends up in ``rhs``."""
    m = rhs.shape[0]
    for c in range(m):
        piv = c
        best = abs(lhs[c, c])
        for r in range(c + 1, m):
            if abs(lhs[r, c]) > best:
                piv, best = r, abs(lhs[r, c])
        if piv != c:
            for j in range(m):
                lhs[c, j], lhs[piv, j] = lhs[piv, j], lhs[c, j]
            rhs[c], rhs[piv] = rhs[piv], rhs[c]
        for r in range(c + 1, m):
            f = lhs[r, c] / lhs[c, c]
            for j in range(c, m):
                lhs[r, j] -= f * lhs[c, j]
            rhs[r] -= f * rhs[c]
    for c in range(m - 1, -1, -1):
        acc = rhs[c]
        for j in range(c + 1, m):
            acc -= lhs[c, j] * rhs[j]
        rhs[c] = acc / lhs[c, c]


@njit(cache=True)
def trbdf2(a_nodes, a_stage, f_nodes, f_stage, u0, h, gamma):
    steps = a_stage.shape[0]
    nmodes, m = u0.shape
    w = (1.0 - gamma) / (2.0 - gamma)
    c1 = 1.0 / (gamma * (2.0 - gamma))
    c2 = (1.0 - gamma) ** 2 / (gamma * (2.0 - gamma))
    half = 0.5 * gamma * h
    u = np.empty((steps + 1, nmodes, m), dtype=np.complex128)
    u[0] = u0
    lhs = np.empty((m, m), dtype=np.complex128)
    rhs = np.empty(m, dtype=np.complex128)
    ug = np.empty(m, dtype=np.complex128)
    for s in range(steps):
        for k in range(nmodes):
            for i in range(m):
                acc = u[s, k, i] + half * (f_nodes[s, k, i] + f_stage[s, k, i])
                for j in range(m):
                    acc -= half * a_nodes[s, k, i, j] * u[s, k, j]
                    lhs[i, j] = half * a_stage[s, k, i, j]
                lhs[i, i] += 1.0
                rhs[i] = acc
            _solve_small(lhs, rhs)
            for i in range(m):
                ug[i] = rhs[i]
            for i in range(m):
                rhs[i] = c1 * ug[i] - c2 * u[s, k, i] + w * h * f_nodes[s + 1, k, i]
                for j in range(m):
                    lhs[i, j] = w * h * a_nodes[s + 1, k, i, j]
                lhs[i, i] += 1.0
            _solve_small(lhs, rhs)
            for i in range(m):
                u[s + 1, k, i] = rhs[i]
    return u
