"""Pure-numpy implementations of the hot kernels."""

import numpy as np


def cell_indices(points):
    points = np.asarray(points, dtype=np.int64)
    npts, n = points.shape
    a = np.abs(points)
    mx = a.max(axis=1)
    out = np.zeros(npts, dtype=np.int64)
    nz = mx > 0
    if not nz.any():
        return out
    r = np.zeros(npts, dtype=np.int64)
    # exact floor(log2) for positive ints via frexp
    r[nz] = np.frexp(mx[nz].astype(np.float64))[1] - 1
    scale = np.left_shift(np.int64(1), r)
    reached = a >= scale[:, None]
    # last axis (1-based) whose coordinate reaches the dyadic scale
    last = n - np.argmax(reached[:, ::-1], axis=1)
    out[nz] = n * r[nz] + last[nz]
    return out


def cell_histogram(lo, hi, dmax):
    lo = np.asarray(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    n = lo.size
    hist = np.zeros(dmax + 1, dtype=np.int64)
    axes = [np.arange(lo[i], hi[i] + 1, dtype=np.int64) for i in range(n)]
    # slab over the first axis so memory stays bounded
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, n - 1) \
        if n > 1 else np.zeros((1, 0), dtype=np.int64)
    for x0 in axes[0]:
        pts = np.empty((rest.shape[0], n), dtype=np.int64)
        pts[:, 0] = x0
        pts[:, 1:] = rest
        d = cell_indices(pts)
        hist += np.bincount(d, minlength=dmax + 1)[: dmax + 1]
    return hist


def corner_differences(a, naxes):
    out = np.asarray(a)
    for ax in range(naxes):
        out = np.diff(out, axis=ax, prepend=0)
    return out


def opnorms(a):
    a = np.asarray(a)
    if a.shape[0] == 0:
        return np.zeros(0)
    m = a.shape[-1]
    if m == 1:
        return np.abs(a[:, 0, 0])
    if m == 2:
        fro2 = np.sum(np.abs(a) ** 2, axis=(1, 2))
        det = a[:, 0, 0] * a[:, 1, 1] - a[:, 0, 1] * a[:, 1, 0]
        disc = np.maximum(fro2 * fro2 - 4.0 * np.abs(det) ** 2, 0.0)
        return np.sqrt(0.5 * (fro2 + np.sqrt(disc)))
    return np.linalg.norm(a, ord=2, axis=(1, 2))


def opnorm_sum(a):
    # pairwise summation keeps the reduction order fixed
    return float(np.sum(opnorms(a)))


def smooth_step(t):
    t = np.asarray(t, dtype=np.float64)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        g0 = np.where(t > 0.0, np.exp(-1.0 / np.where(t > 0.0, t, 1.0)), 0.0)
        s = 1.0 - t
        g1 = np.where(s > 0.0, np.exp(-1.0 / np.where(s > 0.0, s, 1.0)), 0.0)
    return g0 / (g0 + g1)


def trbdf2(a_nodes, a_stage, f_nodes, f_stage, u0, h, gamma):
    steps = a_stage.shape[0]
    nmodes, m = u0.shape
    eye = np.eye(m)
    w = (1.0 - gamma) / (2.0 - gamma)
    c1 = 1.0 / (gamma * (2.0 - gamma))
    c2 = (1.0 - gamma) ** 2 / (gamma * (2.0 - gamma))
    u = np.empty((steps + 1, nmodes, m), dtype=np.complex128)
    u[0] = u0
    half = 0.5 * gamma * h
    for s in range(steps):
        un = u[s]
        rhs = un - half * np.einsum("kij,kj->ki", a_nodes[s], un) \
            + half * (f_nodes[s] + f_stage[s])
        ug = np.linalg.solve(eye + half * a_stage[s], rhs[..., None])[..., 0]
        rhs2 = c1 * ug - c2 * un + w * h * f_nodes[s + 1]
        u[s + 1] = np.linalg.solve(eye + w * h * a_nodes[s + 1], rhs2[..., None])[..., 0]
    return u
