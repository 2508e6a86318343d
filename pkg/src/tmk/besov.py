"""Periodic Besov norms, Littlewood-Paley blocks and multiplier experiments.

For a trigonometric polynomial ``f`` and a resolution ``(phi_j)``

    ||f||_{B^s_{p,q}} = ( sum_j 2^(s j q) || sum_k e_k phi_j(k) f^(k) ||_p^q )^(1/q),

with the supremum over ``j`` when ``q = inf``.  Block norms do not depend on
``s`` or ``q``, so they are computed once per ``(family, resolution, p)`` and
aggregated afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import cells_up_to_radius, cover_start
from .symbol_calculus import OperatorSymbol, bv_certificate, box_symbol
from .transform import (TrigPolynomial, apply_multiplier, lp_norms_batch, stack_family)
from .lattice import Box

@dataclass(frozen=True)
class BesovParams:
    s: float
    p: float
    q: float
    J: int | None = None

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must be > 1, got {self.p}")
        if not self.q >= 1:
            raise ValueError(f"q must be >= 1, got {self.q}")
        if self.J is not None and self.J < 3:
            raise ValueError(f"J must be >= 3, got {self.J}")


def radius_of(freqs) -> float:
    freqs = np.asarray(freqs)
    if freqs.size == 0:
        return 0.0
    return float(np.sqrt((freqs.astype(np.float64) ** 2).sum(axis=1)).max())


def required_J(radius: float) -> int:
    """Smallest admissible truncation: ``2^(J-1) > radius`` and ``J >= 3``."""
    J = 3
    while 2.0 ** (J - 1) <= radius:
        J += 1
    return J


def default_J(radius: float) -> int:
    """``ceil(log2 R) + 2`` (at least 3); always satisfies :func:`required_J`."""
    if radius < 1:
        return 3
    return max(3, math.ceil(math.log2(radius)) + 2)


def _resolve_J(freqs, J):
    R = radius_of(freqs)
    if J is None:
        return default_J(R)
    need = required_J(R)
    if J < need:
        raise ValueError(f"truncation J={J} too small for frequencies up to |k|={R:.6g}; "
                         f"need J >= {need}")
    return J


def block_weights(res, freqs, J: int) -> np.ndarray:
    """``(J+1, K)`` array of ``phi_j(k)``."""
    r = np.sqrt((np.asarray(freqs, dtype=np.float64) ** 2).sum(axis=1))
    if hasattr(res, "blocks_radius"):
        return res.blocks_radius(r, J)
    f = np.asarray(freqs, dtype=np.float64)
    return np.stack([np.asarray(res.eval(j, f)) for j in range(J + 1)])


def lp_block(f: TrigPolynomial, res, j: int) -> TrigPolynomial:
    """``sum_k e_k phi_j(k) f^(k)``; terms with ``phi_j(k) = 0`` are dropped."""
    if j < 0:
        raise ValueError("block index must be >= 0")
    if not len(f):
        return f
    w = np.asarray(res.eval(j, f.freqs.astype(np.float64)), dtype=np.float64).reshape(-1)
    keep = w != 0.0
    return TrigPolynomial(f.freqs[keep], f.coefs[keep] * w[keep, None], f.n)


def block_norms(freqs, coefs, res, p, J: int) -> np.ndarray:
    """``(B, J+1)`` array of block L^p norms for a stacked family."""
    coefs = np.asarray(coefs, dtype=np.complex128)
    B, K, m = coefs.shape
    W = block_weights(res, freqs, J)
    rows = (coefs[:, None, :, :] * W[None, :, :, None]).reshape(B * (J + 1), K, m)
    return lp_norms_batch(freqs, rows, p).values.reshape(B, J + 1)


def aggregate(bn: np.ndarray, s: float, q: float) -> np.ndarray:
    """Combine block norms ``(B, J+1)`` into Besov norms ``(B,)``."""
    bn = np.atleast_2d(bn)
    w = 2.0 ** (s * np.arange(bn.shape[1]))
    t = bn * w
    if np.isinf(q):
        return t.max(axis=1)
    return (t ** q).sum(axis=1) ** (1.0 / q)


def besov_norms(fs, params: BesovParams, res) -> np.ndarray:
    freqs, coefs = stack_family(fs)
    J = _resolve_J(freqs, params.J)
    if freqs.shape[0] == 0:
        return np.zeros(len(coefs))
    return aggregate(block_norms(freqs, coefs, res, params.p, J), params.s, params.q)


def besov_norm(f: TrigPolynomial, params: BesovParams, res) -> float:
    """Besov norm of one polynomial, truncated at ``params.J`` (exact under the precondition)."""
    if not len(f):
        _resolve_J(f.freqs, params.J)
        return 0.0
    return float(besov_norms([f], params, res)[0])


# --- norm equivalence ---------------------------------------------------------

@dataclass
class EquivalenceResult:
    c_hat: float
    C_hat: float
    ratios: np.ndarray = field(repr=False)

    def __iter__(self):
        return iter((self.c_hat, self.C_hat))


def norm_equivalence_experiment(fs, params: BesovParams, res1, res2) -> EquivalenceResult:
    """Empirical ``min`` and ``max`` of ``||f||_{res1} / ||f||_{res2}`` over nonzero ``f``."""
    fs = [f for f in fs if len(f) and np.any(f.coefs != 0)]
    if not fs:
        raise ValueError("need at least one nonzero function")
    a = besov_norms(fs, params, res1)
    b = a if res1 is res2 else besov_norms(fs, params, res2)
    r = a / b
    return EquivalenceResult(float(r.min()), float(r.max()), r)


def equivalence_from_blocks(bn1, bn2, s, q) -> tuple:
    r = aggregate(bn1, s, q) / aggregate(bn2, s, q)
    return float(r.min()), float(r.max())


# --- multiplier experiments ---------------------------------------------------

@dataclass
class RieszResult:
    p: float
    constant: float
    ratios: np.ndarray = field(repr=False)


def riesz_box_experiment(fs, p) -> RieszResult:
    """Sup over ``fs`` of ``||sum_{k in [0, beta]} e_k x_k||_p / ||f||_p`` with ``beta = (K,...,K)``."""
    p = float(p)
    if not 1 < p < np.inf:
        raise ValueError("p must lie in (1, inf)")
    freqs, coefs = stack_family(fs)
    n = freqs.shape[1]
    K = int(np.abs(freqs).max()) if freqs.size else 0
    mask = box_symbol(Box((0,) * n, (K,) * n)).batch(freqs)[:, 0, 0].real
    num = lp_norms_batch(freqs, coefs * mask[None, :, None], p).values
    den = lp_norms_batch(freqs, coefs, p).values
    ok = den > 0
    r = num[ok] / den[ok]
    return RieszResult(p, float(r.max()) if r.size else 0.0, r)


def proof_constant(K_p: float, n: int) -> float:
    """``2 K_p n (m + 2)`` with ``m`` the smallest integer such that ``sqrt(n) <= 2^m``."""
    return 2.0 * K_p * n * (cover_start(1, n) + 2)


def default_dmax(freqs, n: int) -> int:
    K = int(np.abs(freqs).max()) if np.size(freqs) else 0
    return cells_up_to_radius(K, n) + n


@dataclass
class MultiplierReport:
    symbol: str
    params: BesovParams
    op_ratio: float
    op_ratio_half: float
    bv_sup: float
    bv_argmax: int
    tail_norm: float
    empirical_C: float
    growth: float
    grows: bool

    def row(self) -> dict:
        return {"symbol": self.symbol, "s": self.params.s, "p": self.params.p, "q": self.params.q,
                "op_ratio": self.op_ratio, "bv_sup": self.bv_sup, "bv_argmax": self.bv_argmax,
                "tail_norm": self.tail_norm, "empirical_C": self.empirical_C,
                "growth": self.growth, "grows": int(self.grows)}


def multiplier_ratios(M: OperatorSymbol, fs, params: BesovParams, res) -> np.ndarray:
    """``||S_M f||_B / ||f||_B`` for each nonzero ``f``."""
    freqs, coefs = stack_family(fs)
    J = _resolve_J(freqs, params.J)
    mk = M.batch(freqs)
    out = np.einsum("kij,bkj->bki", mk, coefs)
    both = np.concatenate([coefs, out])
    bn = block_norms(freqs, both, res, params.p, J)
    norms = aggregate(bn, params.s, params.q)
    B = coefs.shape[0]
    den, num = norms[:B], norms[B:]
    ok = den > 0
    return num[ok] / den[ok]


def multiplier_bound_certificate(M: OperatorSymbol, fs, params: BesovParams, res,
                                 d_max: int | None = None, growth_tol: float = 0.1) -> MultiplierReport:
    """Empirical operator ratio of ``S_M`` against the BV certificate of ``M``.

    The sample is resampled twice (first half, full set); ``grows`` flags a
    relative increase of the sup above ``growth_tol``.
    """
    fs = list(fs)
    if not fs:
        raise ValueError("need at least one function")
    r = multiplier_ratios(M, fs, params, res)
    half = max(1, len(r) // 2)
    op, op_half = float(r.max()), float(r[:half].max())
    freqs, _ = stack_family(fs)
    if d_max is None:
        d_max = default_dmax(freqs, M.n)
    cert = bv_certificate(M, d_max)
    emp = op / cert.sup if cert.sup > 0 else (0.0 if op == 0 else np.inf)
    growth = op / op_half - 1.0 if op_half > 0 else 0.0
    return MultiplierReport(M.name, params, op, op_half, cert.sup, cert.argmax, cert.tail_norm,
                            emp, growth, growth > growth_tol)


# --- converse-direction identity ----------------------------------------------

def segment_test_polynomial(j: int, n: int, x) -> TrigPolynomial:
    """``h = sum e_{k1 delta_1} x_k`` over ``7*2^(j-3) <= k1 <= 3*2^(j-1)``.

    ``x`` is an array of shape ``(count, dim_E)`` with ``count = 3*2^(j-1) - 7*2^(j-3) + 1``.
    """
    lo, hi = 7 * 2 ** (j - 3), 3 * 2 ** (j - 1)
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[0] != hi - lo + 1:
        raise ValueError(f"need {hi - lo + 1} coefficients for j={j}")
    k = np.zeros((hi - lo + 1, n), dtype=np.int64)
    k[:, 0] = np.arange(lo, hi + 1)
    return TrigPolynomial(k, x, n)


def identity_449(j: int, h: TrigPolynomial, params: BesovParams, res) -> tuple:
    """Both sides of ``||S_{M_j} h||_B = 2^(s j) || sum_{7*2^(j-3) <= k1 <= 2^j} e_k x_k ||_p``.

    The left side runs the full Besov computation on ``S_{M_j} h``; the
    right side is a single L^p norm.
    """
    from .symbol_calculus import segment_symbol
    from .transform import lp_norm
    M = segment_symbol(j, h.n, h.dim_E)
    lhs = besov_norm(apply_multiplier(M, h), params, res)
    # zeroed rather than dropped, so both sides share one quadrature grid
    drop = h.freqs[:, 0] > 2 ** j
    trunc = TrigPolynomial(h.freqs, np.where(drop[:, None], 0, h.coefs), h.n)
    rhs = 2.0 ** (params.s * j) * lp_norm(trunc, params.p)
    return lhs, rhs
