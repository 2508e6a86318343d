"""Spectral solvers for the periodic Cauchy problems.

Initial-value problem on T^n:  ``u' + A(t) u = f(t)``, ``u(0) = u0``.  Each
spatial mode ``k`` obeys ``u_k' + a(t, k) u_k = f_k(t)``.  Constant symbols
with constant forcing are solved exactly with a matrix exponential of the
augmented system; everything else is stepped with TR-BDF2 (L-stable, second
order).

Time-periodic problem:  ``u' + (omega + A) u = f`` on ``[0, 2 pi]`` with
``u(0) = u(2 pi)``.  For joint trigonometric data the solution is
``u^(l, k) = (i l + omega + a(k))^(-1) f^(l, k)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from . import kernels
from .besov import BesovParams, besov_norm
from .elliptic import (COND_LIMIT, EllipticSymbol, Sector, SingularSymbolError, ellipticity_check,
                       scaled_condition)
from .transform import TrigPolynomial, lp_norm

GAMMA = 2.0 - math.sqrt(2.0)


@dataclass
class IvpSpec:
    """Data for ``u' + A(t) u = f(t)`` on ``[0, T]``.

    ``f`` is ``None``, a time-independent :class:`TrigPolynomial`, or a
    callable ``t -> TrigPolynomial``.  ``freqs`` optionally declares the
    frequency box the data live in; otherwise it is read off ``u0`` and
    ``f(0)``.  ``times`` are output times (default: the step grid).
    """

    A: EllipticSymbol
    u0: TrigPolynomial
    T: float
    steps: int = 100
    f: TrigPolynomial | Callable | None = None
    times: list | None = None
    freqs: np.ndarray | None = None
    method: str = "auto"
    check_ellipticity: bool = True

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.method not in ("auto", "exact", "trbdf2"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class IvpSolution:
    times: np.ndarray
    freqs: np.ndarray
    coefs: np.ndarray  # (len(times), K, m)
    method: str
    holder: dict = field(default_factory=dict)

    def at(self, i: int) -> TrigPolynomial:
        return TrigPolynomial(self.freqs, self.coefs[i], self.freqs.shape[1])

    def final(self) -> TrigPolynomial:
        return self.at(len(self.times) - 1)


def _union_freqs(n, *polys):
    arrs = [p.freqs for p in polys if p is not None and len(p)]
    if not arrs:
        return np.zeros((1, n), dtype=np.int64)
    return np.unique(np.vstack(arrs), axis=0)


def _coefs_on(poly: TrigPolynomial | None, freqs, m):
    out = np.zeros((freqs.shape[0], m), dtype=np.complex128)
    if poly is None or not len(poly):
        return out
    lookup = {tuple(k): i for i, k in enumerate(freqs.tolist())}
    for k, c in zip(poly.freqs.tolist(), poly.coefs):
        idx = lookup.get(tuple(k))
        if idx is None:
            if np.any(c != 0):
                raise ValueError(f"frequency {tuple(k)} lies outside the declared box")
            continue
        out[idx] += c
    return out


def holder_estimate(A: EllipticSymbol, rho: float = 0.5, samples: int = 33) -> dict:
    """Finite-difference Hoelder quotients ``||a(t) - a(s)|| / |t - s|^rho`` of the coefficients.

    Returns the largest quotient at a coarse and at a fine spacing; ``suspect``
    is set when the fine one is over ten times the coarse one.
    """
    if A.time_constant:
        return {"coarse": 0.0, "fine": 0.0, "suspect": False}
    t0, t1 = A.time_domain
    ts = np.linspace(t0, t1, samples)
    out = {}
    for label, h in (("coarse", (t1 - t0) / 8), ("fine", (t1 - t0) / 1024)):
        q = 0.0
        for t in ts[ts + h <= t1 + 1e-15]:
            for alpha in A.coeffs:
                d = np.linalg.norm(A.coeff(alpha, t + h) - A.coeff(alpha, t), 2)
                q = max(q, d / h ** rho)
        out[label] = float(q)
    out["suspect"] = out["fine"] > 10 * max(out["coarse"], 1e-300)
    return out


def _forcing_at(spec: IvpSpec, t, freqs, m):
    f = spec.f
    if f is None:
        return np.zeros((freqs.shape[0], m), dtype=np.complex128)
    if isinstance(f, TrigPolynomial):
        return _coefs_on(f, freqs, m)
    return _coefs_on(f(t), freqs, m)


def _symbol_on(A, t, freqs):
    return A.eval_symbol(t, freqs.astype(np.float64))


def _check_matrices(mats, what):
    s = np.linalg.svd(mats, compute_uv=False)
    cond = scaled_condition(s)
    bad = np.argwhere(~(cond <= COND_LIMIT))
    if bad.size:
        raise SingularSymbolError(f"near-singular {what} matrix; step rejected", tuple(bad[0].tolist()))


def solve_ivp(spec: IvpSpec) -> IvpSolution:
    """Solve mode by mode; see the module docstring for the two paths."""
    A = spec.A
    n, m = A.n, A.dim_E
    if spec.u0.dim_E != m or spec.u0.n != n:
        raise ValueError("initial data do not match the symbol")
    if spec.check_ellipticity:
        res = ellipticity_check(A, Sector(math.pi / 2, kappa=1e300), sphere_samples=64, t_samples=5)
        if not res.passed:
            raise ValueError(f"symbol is not normally elliptic: {res.witness}")
    holder = holder_estimate(A)
    if holder["suspect"]:
        warnings.warn("time coefficients look rougher than Hoelder continuous")
    f0 = spec.f if isinstance(spec.f, TrigPolynomial) else (spec.f(0.0) if callable(spec.f) else None)
    freqs = np.asarray(spec.freqs, dtype=np.int64) if spec.freqs is not None else _union_freqs(n, spec.u0, f0)
    u0 = _coefs_on(spec.u0, freqs, m)
    const_f = spec.f is None or isinstance(spec.f, TrigPolynomial)
    exact_ok = A.time_constant and const_f
    method = spec.method
    if method == "auto":
        method = "exact" if exact_ok else "trbdf2"
    if method == "exact" and not exact_ok:
        raise ValueError("the exact path needs a time-constant symbol and forcing")
    h = spec.T / spec.steps
    grid = np.linspace(0.0, spec.T, spec.steps + 1)
    times = grid if spec.times is None else np.asarray(spec.times, dtype=float)

    if method == "exact":
        a = _symbol_on(A, A.time_domain[0], freqs)
        fc = _forcing_at(spec, 0.0, freqs, m)
        K = freqs.shape[0]
        aug = np.zeros((K, m + 1, m + 1), dtype=np.complex128)
        aug[:, :m, :m] = -a
        aug[:, :m, m] = fc
        v0 = np.concatenate([u0, np.ones((K, 1))], axis=1)
        out = np.empty((len(times), K, m), dtype=np.complex128)
        for i, t in enumerate(times):
            E = expm(aug * t)
            out[i] = np.einsum("kij,kj->ki", E, v0)[:, :m]
        return IvpSolution(times, freqs, out, "exact", holder)

    idx = np.rint(times / h).astype(int)
    if np.any(np.abs(idx * h - times) > 1e-9 * max(1.0, spec.T)) or idx.min() < 0 or idx.max() > spec.steps:
        raise ValueError("output times must lie on the step grid for the implicit path")
    stage_t = grid[:-1] + GAMMA * h
    a_nodes = np.stack([_symbol_on(A, t, freqs) for t in grid])
    a_stage = np.stack([_symbol_on(A, t, freqs) for t in stage_t])
    f_nodes = np.stack([_forcing_at(spec, t, freqs, m) for t in grid])
    f_stage = np.stack([_forcing_at(spec, t, freqs, m) for t in stage_t])
    eye = np.eye(m)
    _check_matrices(eye + 0.5 * GAMMA * h * a_stage, "first-stage")
    w = (1 - GAMMA) / (2 - GAMMA)
    _check_matrices(eye + w * h * a_nodes[1:], "second-stage")
    u = kernels.trbdf2(a_nodes, a_stage, f_nodes, f_stage, u0, h, GAMMA)
    return IvpSolution(times, freqs, u[idx], "trbdf2", holder)


# --- periodic problem -----------------------------------------------------------

@dataclass
class PeriodicSpec:
    """``u' + (omega + A) u = f`` with ``f`` a joint polynomial in ``(t, x)`` (time axis first)."""

    A: EllipticSymbol
    omega: float
    f: TrigPolynomial
    omega0: float | None = None

    def __post_init__(self):
        if not self.A.time_constant:
            raise ValueError("the periodic problem needs a time-constant symbol")
        if self.f.n != self.A.n + 1:
            raise ValueError("forcing must have one time axis plus n space axes")
        if self.omega0 is not None and self.omega < self.omega0:
            raise ValueError(f"omega={self.omega} is below omega0={self.omega0}")


def solve_periodic(spec: PeriodicSpec) -> TrigPolynomial:
    """``u^(l, k) = (i l + omega + a(k))^(-1) f^(l, k)`` for every joint mode."""
    f = spec.f
    m = spec.A.dim_E
    if not len(f):
        return f
    l = f.freqs[:, 0].astype(np.float64)
    k = f.freqs[:, 1:]
    mats = (1j * l + spec.omega)[:, None, None] * np.eye(m) + _symbol_on(spec.A, spec.A.time_domain[0], k)
    s = np.linalg.svd(mats, compute_uv=False)
    cond = scaled_condition(s)
    bad = np.nonzero(~(cond <= COND_LIMIT))[0]
    if bad.size:
        raise SingularSymbolError("i l + omega + a(k) is singular", tuple(int(v) for v in f.freqs[bad[0]]))
    u = np.linalg.solve(mats, f.coefs[..., None])[..., 0]
    return TrigPolynomial(f.freqs, u, f.n)


def periodic_residual(u: TrigPolynomial, spec: PeriodicSpec) -> np.ndarray:
    """Coefficient-wise ``(i l + omega + a(k)) u^(l, k) - f^(l, k)`` on the joint spectrum."""
    m = spec.A.dim_E
    fr = _union_freqs(u.n, u, spec.f)
    uc, fc = _coefs_on(u, fr, m), _coefs_on(spec.f, fr, m)
    l = fr[:, 0].astype(np.float64)
    mats = (1j * l + spec.omega)[:, None, None] * np.eye(m) + _symbol_on(spec.A, spec.A.time_domain[0], fr[:, 1:])
    return np.einsum("kij,kj->ki", mats, uc) - fc


def slice_time(u: TrigPolynomial, t: float) -> TrigPolynomial:
    """Spatial polynomial ``u(t, .)`` from a joint polynomial."""
    if not len(u):
        return TrigPolynomial.zero(u.n - 1, u.dim_E)
    phase = np.exp(1j * u.freqs[:, 0] * t)
    return TrigPolynomial(u.freqs[:, 1:], u.coefs * phase[:, None], u.n - 1)


# --- norms of solutions -----------------------------------------------------------

def residual_norms(u, spec, params: BesovParams, res) -> dict:
    """Norms of the solution and its residual.

    For the initial-value problem the residual at the final time is the gap to
    a re-solve with twice the steps (zero on the exact path up to roundoff,
    about ``2^order`` times smaller per halving on the implicit path).  For
    the periodic problem it is the coefficient-wise equation residual, and the
    weighted spectral ratio ``||(1 + |l|) u^|| / ||f^||`` is reported.
    """
    if isinstance(spec, PeriodicSpec):
        r = periodic_residual(u, spec)
        fnorm = float(np.linalg.norm(spec.f.coefs))
        w = (1 + np.abs(u.freqs[:, 0]))[:, None] * u.coefs
        return {"residual_max": float(np.abs(r).max()) if r.size else 0.0,
                "residual_l2": float(np.linalg.norm(r)), "f_l2": fnorm,
                "u_l2": float(np.linalg.norm(u.coefs)),
                "regularity_ratio": float(np.linalg.norm(w) / fnorm) if fnorm > 0 else 0.0}
    sol: IvpSolution = u
    uT = sol.final()
    fine = solve_ivp(IvpSpec(spec.A, spec.u0, spec.T, 2 * spec.steps, spec.f, [spec.T], sol.freqs,
                             sol.method, False))
    r = uT - fine.final()
    return {"method": sol.method,
            "u_lp": lp_norm(uT, params.p), "u_besov": besov_norm(uT, params, res),
            "residual_lp": lp_norm(r, params.p), "residual_besov": besov_norm(r, params, res),
            "residual_max": float(np.abs(r.coefs).max()) if len(r) else 0.0}


def convergence_order(errors, factor: float = 2.0) -> np.ndarray:
    e = np.asarray(errors, dtype=float)
    return np.log(e[:-1] / e[1:]) / np.log(factor)
