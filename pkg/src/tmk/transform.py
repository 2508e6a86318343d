"""E-valued trigonometric polynomials on T^n, L^p norms and Fourier multipliers.

A polynomial ``f = sum_k e_k (x) x_k`` is stored sparsely as an ``(K, n)``
integer frequency array (lexicographically sorted, unique) and a ``(K, m)``
complex coefficient array.  Norms use the normalized measure
``(2 pi)^(-n) dx`` and the rectangle rule on uniform grids, evaluated by FFT.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .lattice import Box, as_point

#: Upper bound on grid points (N^n) for adaptive L^p refinement.
GRID_CAP = 1 << 24
#: Complex grid entries materialized at once when evaluating a batch.
BATCH_BUDGET = 1 << 22


class TrigPolynomial:
    """Finite sum ``sum_k e^{i k.x} x_k`` with ``x_k`` in C^m."""

    def __init__(self, freqs, coefs, n: int | None = None):
        freqs = np.asarray(freqs, dtype=np.int64)
        coefs = np.asarray(coefs, dtype=np.complex128)
        if freqs.ndim == 1:
            freqs = freqs.reshape(-1, 1) if n in (None, 1) else freqs.reshape(-1, n)
        if coefs.ndim == 1:
            coefs = coefs.reshape(-1, 1)
        if freqs.shape[0] != coefs.shape[0]:
            raise ValueError("frequency and coefficient counts differ")
        if n is not None and freqs.shape[1] != n:
            raise ValueError("frequency dimension mismatch")
        self.n = int(freqs.shape[1])
        self.dim_E = int(coefs.shape[1])
        if freqs.shape[0]:
            order = np.lexsort(freqs.T[::-1])
            freqs, coefs = freqs[order], coefs[order]
            uniq, inv = np.unique(freqs, axis=0, return_inverse=True)
            if uniq.shape[0] != freqs.shape[0]:
                summed = np.zeros((uniq.shape[0], self.dim_E), dtype=np.complex128)
                np.add.at(summed, inv.ravel(), coefs)
                freqs, coefs = uniq, summed
        self.freqs = freqs
        self.coefs = coefs
        self.freqs.flags.writeable = False
        self.coefs.flags.writeable = False

    @classmethod
    def from_dict(cls, entries: dict, n: int, dim_E: int) -> "TrigPolynomial":
        if not entries:
            return cls.zero(n, dim_E)
        ks = [as_point(k) for k in entries]
        vs = [np.asarray(v, dtype=np.complex128).reshape(dim_E) for v in entries.values()]
        return cls(np.array(ks).reshape(-1, n), np.array(vs), n)

    @classmethod
    def zero(cls, n: int, dim_E: int) -> "TrigPolynomial":
        return cls(np.zeros((0, n), dtype=np.int64), np.zeros((0, dim_E)), n)

    @classmethod
    def monomial(cls, k, x) -> "TrigPolynomial":
        k = as_point(k)
        x = np.atleast_1d(np.asarray(x, dtype=np.complex128))
        return cls(np.array([k]), x[None, :], len(k))

    def __repr__(self):
        return f"TrigPolynomial(n={self.n}, dim_E={self.dim_E}, terms={len(self)})"

    def __len__(self):
        return self.freqs.shape[0]

    @property
    def max_frequency(self) -> int:
        """``max_k |k|_inf`` over the stored terms (0 for the zero polynomial)."""
        return int(np.abs(self.freqs).max()) if len(self) else 0

    def coefficient(self, k) -> np.ndarray:
        k = np.asarray(as_point(k), dtype=np.int64)
        hit = np.nonzero(np.all(self.freqs == k, axis=1))[0]
        if hit.size == 0:
            return np.zeros(self.dim_E, dtype=np.complex128)
        return self.coefs[hit[0]].copy()

    def evaluate(self, x) -> np.ndarray:
        """``f(x)`` for ``x`` of shape ``(n,)`` or ``(..., n)``."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.n:
            raise ValueError("point dimension mismatch")
        phase = np.exp(1j * (x[..., None, :] * self.freqs).sum(axis=-1))
        return phase @ self.coefs

    def _combine(self, other, a, b):
        if self.n != other.n or self.dim_E != other.dim_E:
            raise ValueError("incompatible trigonometric polynomials")
        return TrigPolynomial(np.vstack([self.freqs, other.freqs]),
                              np.vstack([a * self.coefs, b * other.coefs]), self.n)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, c):
        return TrigPolynomial(self.freqs, complex(c) * self.coefs, self.n)

    __rmul__ = __mul__

    def with_coefs(self, coefs) -> "TrigPolynomial":
        return TrigPolynomial(self.freqs, coefs, self.n)

    def coef_norms(self) -> np.ndarray:
        return np.linalg.norm(self.coefs, axis=1)

    def support_box(self) -> Box | None:
        if not len(self):
            return None
        return Box(tuple(self.freqs.min(axis=0)), tuple(self.freqs.max(axis=0)))

    def grid_values(self, N: int) -> np.ndarray:
        """Samples at ``x_m = 2 pi m / N``, shape ``(N,)*n + (m,)``."""
        return _grid_values(self.freqs, self.coefs[None], N)[0]


def synthesize(coeffs: dict, n: int | None = None, dim_E: int | None = None) -> TrigPolynomial:
    """Polynomial from a ``{k: x_k}`` mapping."""
    if n is None or dim_E is None:
        k0, v0 = next(iter(coeffs.items()))
        n = len(as_point(k0)) if n is None else n
        dim_E = np.atleast_1d(v0).size if dim_E is None else dim_E
    return TrigPolynomial.from_dict(coeffs, n, dim_E)


def fourier_coefficient(f: TrigPolynomial, k) -> np.ndarray:
    return f.coefficient(k)


def evaluate(f: TrigPolynomial, x) -> np.ndarray:
    return f.evaluate(x)


@dataclass
class GridFunction:
    """Samples of an E-valued function on the uniform grid ``2 pi m / N``."""

    values: np.ndarray  # shape (N,)*n + (dim_E,)

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.ndim - 1

    @property
    def dim_E(self) -> int:
        return self.values.shape[-1]

    def fourier_coefficient(self, k) -> np.ndarray:
        """Discrete transform; exact for polynomials when ``N > 2 max|k|``."""
        idx = tuple(int(x) % self.N for x in as_point(k))
        axes = tuple(range(self.n))
        return np.fft.fftn(self.values, axes=axes)[idx] / self.N ** self.n


def _grid_values(freqs, coefs_batch, N: int) -> np.ndarray:
    """Batched grid samples: ``coefs_batch`` is ``(B, K, m)``; returns ``(B,) + (N,)*n + (m,)``."""
    freqs = np.asarray(freqs, dtype=np.int64)
    B, K, m = coefs_batch.shape
    n = freqs.shape[1]
    spec = np.zeros((B,) + (N,) * n + (m,), dtype=np.complex128)
    if K:
        wrapped = freqs % N
        idx = tuple(wrapped.T)
        if np.unique(wrapped, axis=0).shape[0] == K:
            spec[(slice(None),) + idx] = coefs_batch
        else:
            for b in range(B):
                np.add.at(spec[b], idx, coefs_batch[b])
    axes = tuple(range(1, n + 1))
    return np.fft.ifftn(spec, axes=axes) * float(N) ** n


def _lp_from_grid(vals, p, n):
    norms = np.linalg.norm(vals, axis=-1).reshape(vals.shape[0], -1)
    if np.isinf(p):
        return norms.max(axis=1)
    if p == 2:
        return np.sqrt(np.mean(norms ** 2, axis=1))
    return np.mean(norms ** p, axis=1) ** (1.0 / p)


def _lp_on_grid(freqs, coefs_batch, N: int, p, n) -> np.ndarray:
    """:func:`_lp_from_grid` over chunks of the batch, bounded by :data:`BATCH_BUDGET` grid entries."""
    B, _, m = coefs_batch.shape
    chunk = max(1, BATCH_BUDGET // (N ** n * max(m, 1)))
    out = np.empty(B)
    for a in range(0, B, chunk):
        out[a:a + chunk] = _lp_from_grid(_grid_values(freqs, coefs_batch[a:a + chunk], N), p, n)
    return out


@dataclass
class LpResult:
    values: np.ndarray
    N: int
    converged: bool
    parseval: np.ndarray | None = None


def _check_p(p):
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    return p


def lp_norms_batch(freqs, coefs_batch, p, N: int | None = None, rtol: float = 1e-8) -> LpResult:
    """L^p norms of several polynomials sharing one frequency array.

    Even integer ``p`` uses ``N = p K + 1`` (exact); ``p = inf`` uses the grid
    maximum with ``N = 8 K + 1``; other ``p`` double ``N`` from
    ``max(4K + 2, 16)`` until successive values differ by less than ``rtol``.
    """
    p = _check_p(p)
    freqs = np.asarray(freqs, dtype=np.int64)
    freqs = freqs.reshape(-1, freqs.shape[-1] if freqs.ndim > 1 else 1)
    coefs_batch = np.asarray(coefs_batch, dtype=np.complex128)
    n = freqs.shape[1]
    K = int(np.abs(freqs).max()) if freqs.size else 0
    parseval = np.sqrt(np.sum(np.abs(coefs_batch) ** 2, axis=(1, 2)))
    if freqs.shape[0] == 0:
        return LpResult(np.zeros(coefs_batch.shape[0]), 1, True, parseval)
    if N is not None:
        vals = _lp_on_grid(freqs, coefs_batch, int(N), p, n)
        return LpResult(vals, int(N), True, parseval if p == 2 else None)
    even = float(p).is_integer() and int(p) % 2 == 0
    if even or np.isinf(p):
        N = int(p) * K + 1 if even else 8 * K + 1
        vals = _lp_on_grid(freqs, coefs_batch, N, p, n)
        return LpResult(vals, N, True, parseval if p == 2 else None)
    N = max(4 * K + 2, 16)
    prev = _lp_on_grid(freqs, coefs_batch, N, p, n)
    while (2 * N) ** n <= GRID_CAP:
        N *= 2
        cur = _lp_on_grid(freqs, coefs_batch, N, p, n)
        diff = np.max(np.abs(cur - prev) / np.maximum(np.abs(cur), 1e-300))
        prev = cur
        if diff < rtol:
            return LpResult(cur, N, True, None)
    warnings.warn(f"L^{p} quadrature did not reach rtol={rtol} below the grid cap (N={N})")
    return LpResult(prev, N, False, None)


def lp_norm(f, p, N: int | None = None) -> float:
    """Normalized L^p norm of a :class:`TrigPolynomial` or :class:`GridFunction`."""
    p = _check_p(p)
    if isinstance(f, GridFunction):
        return float(_lp_from_grid(f.values[None], p, f.n)[0])
    return float(lp_norms_batch(f.freqs, f.coefs[None], p, N).values[0])


def lp_norm_report(f: TrigPolynomial, p, N: int | None = None) -> LpResult:
    """Like :func:`lp_norm` but also returns the grid size and, for ``p = 2``, the Parseval value."""
    p = _check_p(p)
    return lp_norms_batch(f.freqs, f.coefs[None], p, N)


def apply_multiplier(M, f: TrigPolynomial) -> TrigPolynomial:
    """``S_M f = sum_k e_k (x) M(k) f^(k)``."""
    if M.n != f.n or M.dim_E != f.dim_E:
        raise ValueError(f"symbol (n={M.n}, dim_E={M.dim_E}) does not act on "
                         f"polynomials with n={f.n}, dim_E={f.dim_E}")
    if not len(f):
        return f
    new = np.einsum("kij,kj->ki", M.batch(f.freqs), f.coefs)
    return TrigPolynomial(f.freqs, new, f.n)


def box_frequencies(n: int, K: int) -> np.ndarray:
    return Box.cube(n, K).grid()


def random_trig_family(count: int, n: int, K: int, dim_E: int, seed: int) -> list:
    """I.i.d. complex standard normal coefficients on ``[-K, K]^n``."""
    rng = np.random.default_rng(seed)
    freqs = box_frequencies(n, K)
    shape = (count, freqs.shape[0], dim_E)
    c = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return [TrigPolynomial(freqs, c[i], n) for i in range(count)]


def stack_family(fs) -> tuple:
    """Common frequency array and ``(B, K, m)`` coefficients; unions supports if needed."""
    fs = list(fs)
    if not fs:
        raise ValueError("empty family")
    f0 = fs[0]
    if all(f.freqs.shape == f0.freqs.shape and np.array_equal(f.freqs, f0.freqs) for f in fs):
        return f0.freqs, np.stack([f.coefs for f in fs])
    freqs = np.unique(np.vstack([f.freqs for f in fs]), axis=0)
    lookup = {tuple(k): i for i, k in enumerate(freqs.tolist())}
    out = np.zeros((len(fs), freqs.shape[0], f0.dim_E), dtype=np.complex128)
    for b, f in enumerate(fs):
        for k, c in zip(f.freqs.tolist(), f.coefs):
            out[b, lookup[tuple(k)]] = c
    return freqs, out


# --- Young-type bound ------------------------------------------------------

@dataclass
class YoungConstant:
    value: float
    grid: int
    change: float
    converged: bool


def young_constant(phi, n: int, radius: float, rtol: float = 1e-6, max_points: int = 1 << 22) -> YoungConstant:
    """``|| F^{-1} phi ||_{L^1(R^n)}`` with ``F^{-1} phi(y) = (2 pi)^(-n) int phi(xi) e^{i y xi} dxi``.

    ``phi`` maps ``(..., n)`` arrays to reals and vanishes outside the ball of
    ``radius``.  The inverse transform is computed by FFT quadrature on a box
    ``[-W, W]^n`` with ``W = pad * radius``; the ``y`` grid then has spacing
    ``pi / W`` and extent ``pi / h``.  Both are refined together until the L^1
    value changes by less than ``rtol`` relative.
    """
    if n > 2:
        raise ValueError("young_constant supports n <= 2")
    pad, per = 4, 32
    prev, change = None, np.inf
    while True:
        W = pad * radius
        h = radius / per
        M = int(round(2 * W / h))
        if M ** n > max_points:
            break
        xi1 = -W + h * np.arange(M)
        mesh = np.stack(np.meshgrid(*([xi1] * n), indexing="ij"), axis=-1)
        vals = np.asarray(phi(mesh), dtype=np.float64)
        spec = np.abs(np.fft.fftn(vals)) * (h / (2 * np.pi)) ** n
        dy = np.pi / W
        cur = float(spec.sum() * dy ** n)
        if prev is not None:
            change = abs(cur - prev) / cur
            if change < rtol:
                return YoungConstant(cur, M, change, True)
        prev = cur
        pad, per = pad * 2, per * 2
    return YoungConstant(prev, M, change, False)


def young_bound_experiment(phi_at, fs, p, bound: float) -> dict:
    """Largest ``||sum e_k phi(k) f^(k)||_p / ||f||_p`` over ``fs`` against ``bound``."""
    freqs, coefs = stack_family(fs)
    w = np.asarray(phi_at(freqs.astype(np.float64)), dtype=np.float64)
    num = lp_norms_batch(freqs, coefs * w[None, :, None], p).values
    den = lp_norms_batch(freqs, coefs, p).values
    ratio = num / den
    return {"p": float(p), "max_ratio": float(ratio.max()), "bound": float(bound),
            "holds": bool(ratio.max() <= bound * (1 + 1e-9))}


# --- CSV -------------------------------------------------------------------

def write_trig_csv(path, f: TrigPolynomial) -> None:
    """Columns ``k1..kn`` then ``x{i}_re, x{i}_im`` for each component."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"k{i + 1}" for i in range(f.n)]
                   + [c for i in range(f.dim_E) for c in (f"x{i}_re", f"x{i}_im")])
        for k, c in zip(f.freqs.tolist(), f.coefs):
            w.writerow(k + [repr(float(v)) for z in c for v in (z.real, z.imag)])


def read_trig_csv(path, n: int | None = None) -> TrigPolynomial:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = rows[0]
    if n is None:
        n = sum(1 for h in header if h.strip().startswith("k"))
    data = [[float(x) for x in r] for r in rows[1:]]
    m2 = len(header) - n
    if m2 <= 0 or m2 % 2:
        raise ValueError(f"{path}: expected {n} index columns then re/im pairs")
    if not data:
        return TrigPolynomial.zero(n, m2 // 2)
    arr = np.array(data)
    return TrigPolynomial(arr[:, :n].astype(np.int64), arr[:, n::2] + 1j * arr[:, n + 1::2], n)
