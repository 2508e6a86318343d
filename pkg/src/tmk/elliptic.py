"""Polynomial symbols of differential operators with matrix coefficients.

``A(t) = sum_{|alpha| <= m} a_alpha(t) D^alpha`` with ``D = -i d/dx`` has the
symbol ``a(t, xi) = sum a_alpha(t) xi^alpha``; the negative Laplacian has
``a_{2 e_i} = I`` and symbol ``|xi|^2``.  This module checks sectorial
ellipticity, searches the resolvent shift ``omega_0``, builds the resolvent
multiplier ``lambda (lambda + a(t, k))^(-1)`` and verifies the discrete
Leibniz formula for differences of inverses.
"""

from __future__ import annotations

import ast
import cmath
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lattice import Box, as_point
from .kernels import opnorms
from .symbol_calculus import OperatorSymbol, bv_certificate

#: Condition numbers above this are treated as singular.
COND_LIMIT = 1e12


class SingularSymbolError(ValueError):
    """Raised when ``lambda + a`` is (numerically) singular; carries the witness."""

    def __init__(self, msg, witness):
        super().__init__(f"{msg}: witness {witness}")
        self.witness = witness


@dataclass(frozen=True)
class Sector:
    """``omega0 + Sigma_theta`` with ``Sigma_theta = {|arg lambda| <= theta} u {0}``."""

    theta: float
    omega0: float = 0.0
    kappa: float = 1.0

    def __post_init__(self):
        if not 0 <= self.theta < math.pi:
            raise ValueError("theta must lie in [0, pi)")
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if self.omega0 < 0:
            raise ValueError("omega0 must be >= 0")

    def contains(self, lam: complex, tol: float = 1e-12) -> bool:
        z = complex(lam) - self.omega0
        return abs(z) <= tol or abs(cmath.phase(z)) <= self.theta + tol


class EllipticSymbol:
    """``a(t, xi) = sum_alpha a_alpha(t) xi^alpha`` of even order ``m``.

    Parameters
    ----------
    order : int
        Even order ``m``.
    n : int
        Space dimension.
    coeffs : dict
        ``{alpha: matrix or callable t -> matrix}``, ``|alpha| <= m``.
    time_domain : tuple
        Closed interval of admissible ``t``.
    """

    def __init__(self, order: int, n: int, coeffs: dict, time_domain=(0.0, 1.0), name: str = "A"):
        if order <= 0 or order % 2:
            raise ValueError("order must be a positive even integer")
        self.order = int(order)
        self.n = int(n)
        self.coeffs = {}
        dims = set()
        for alpha, c in coeffs.items():
            alpha = as_point(alpha)
            if len(alpha) != n or min(alpha) < 0 or sum(alpha) > order:
                raise ValueError(f"bad multi-index {alpha} for n={n}, m={order}")
            if not callable(c):
                c = np.atleast_2d(np.asarray(c, dtype=np.complex128))
                dims.add(c.shape[0])
            self.coeffs[alpha] = c
        t0 = float(time_domain[0])
        for c in self.coeffs.values():
            if callable(c):
                dims.add(np.atleast_2d(np.asarray(c(t0))).shape[0])
        if len(dims) != 1:
            raise ValueError("coefficients must share one matrix size")
        self.dim_E = dims.pop()
        self.time_domain = (float(time_domain[0]), float(time_domain[1]))
        self.name = name

    def __repr__(self):
        return f"EllipticSymbol({self.name!r}, m={self.order}, n={self.n}, dim_E={self.dim_E})"

    @property
    def time_constant(self) -> bool:
        return not any(callable(c) for c in self.coeffs.values())

    def _check_t(self, t):
        a, b = self.time_domain
        if not a - 1e-12 <= t <= b + 1e-12:
            raise ValueError(f"t={t} outside the time domain [{a}, {b}]")

    def coeff(self, alpha, t: float) -> np.ndarray:
        c = self.coeffs.get(as_point(alpha))
        if c is None:
            return np.zeros((self.dim_E, self.dim_E), dtype=np.complex128)
        if callable(c):
            return np.atleast_2d(np.asarray(c(t), dtype=np.complex128))
        return c

    def _eval(self, t, xi, principal_only):
        self._check_t(float(t))
        xi = np.asarray(xi, dtype=np.float64)
        single = xi.ndim == 1
        pts = xi.reshape(-1, self.n)
        out = np.zeros((pts.shape[0], self.dim_E, self.dim_E), dtype=np.complex128)
        for alpha, _ in self.coeffs.items():
            if principal_only and sum(alpha) != self.order:
                continue
            mono = np.prod(pts ** np.asarray(alpha), axis=1)
            out += mono[:, None, None] * self.coeff(alpha, t)[None]
        return out[0] if single else out.reshape(xi.shape[:-1] + (self.dim_E, self.dim_E))

    def eval_symbol(self, t, xi) -> np.ndarray:
        """``a(t, xi)`` for ``xi`` of shape ``(n,)`` or ``(..., n)``."""
        return self._eval(t, xi, False)

    def eval_principal(self, t, xi) -> np.ndarray:
        """Principal part ``a0(t, xi) = sum_{|alpha| = m} a_alpha(t) xi^alpha``."""
        return self._eval(t, xi, True)

    def scaled(self, c: float) -> "EllipticSymbol":
        """The symbol ``c * a``."""
        new = {}
        for alpha, v in self.coeffs.items():
            new[alpha] = (lambda f: (lambda t: c * np.asarray(f(t))))(v) if callable(v) else c * v
        return EllipticSymbol(self.order, self.n, new, self.time_domain, f"{c}*{self.name}")

    def time_samples(self, count: int = 9) -> np.ndarray:
        if self.time_constant:
            return np.array([self.time_domain[0]])
        return np.linspace(*self.time_domain, count)


def eval_symbol(A: EllipticSymbol, t, xi):
    return A.eval_symbol(t, xi)


def eval_principal(A: EllipticSymbol, t, xi):
    return A.eval_principal(t, xi)


def laplacian(n: int, dim_E: int = 1, shift=None, first_order=None) -> EllipticSymbol:
    """Symbol of ``-Delta`` (times ``I``), optionally plus ``shift * I``-type and first-order terms.

    ``shift`` is a matrix (or scalar) zero-order coefficient; ``first_order``
    maps an axis ``i`` to the coefficient of ``xi_i``.
    """
    eye = np.eye(dim_E)
    coeffs = {tuple(2 * int(i == j) for j in range(n)): eye for i in range(n)}
    if shift is not None:
        s = shift
        coeffs[(0,) * n] = s if callable(s) else np.asarray(s, dtype=np.complex128) * (
            eye if np.ndim(s) == 0 else 1)
    for i, c in (first_order or {}).items():
        coeffs[tuple(int(i == j) for j in range(n))] = c
    return EllipticSymbol(2, n, coeffs, name="laplacian")


# --- sampling -----------------------------------------------------------------

def sphere_points(n: int, count: int = 512, seed: int = 0) -> np.ndarray:
    """Points on the unit sphere: ``{-1, 1}`` for n=1, equal angles for n=2, Fibonacci for n=3."""
    if n == 1:
        return np.array([[-1.0], [1.0]])
    if n == 2:
        a = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    if n == 3:
        i = np.arange(count) + 0.5
        z = 1 - 2 * i / count
        r = np.sqrt(1 - z * z)
        phi = np.pi * (1 + 5 ** 0.5) * i
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    x = np.random.default_rng(seed).standard_normal((count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def lambda_samples(theta: float, omega: float = 0.0, magnitudes=None, interior: int = 2,
                   small=(1e-3, 1e-2, 1e-1)) -> np.ndarray:
    """``omega + rho e^{i phi}`` on the rays ``phi = +-theta``, the real axis and interior angles, plus ``omega``."""
    if magnitudes is None:
        magnitudes = np.logspace(0, 4, 17)
    rho = np.concatenate([np.asarray(small, dtype=float), np.asarray(magnitudes, dtype=float)])
    angles = {0.0, theta, -theta}
    for i in range(1, interior + 1):
        a = theta * i / (interior + 1)
        angles |= {a, -a}
    lam = [omega + r * np.exp(1j * a) for a in sorted(angles) for r in rho]
    return np.array([complex(omega)] + lam)


def scaled_condition(s):
    """``max(s_max, 1) / s_min`` from singular values (last axis, descending).

    The floor of 1 keeps a vanishing scalar or a tiny matrix from looking
    well conditioned.
    """
    s = np.asarray(s)
    smin = s[..., -1]
    with np.errstate(divide="ignore"):
        return np.where(smin > 0, np.maximum(s[..., 0], 1.0) / np.where(smin > 0, smin, 1.0), np.inf)


def _inverse_norms(mats):
    """``||X^{-1}||`` and scaled condition numbers for a stack of matrices."""
    s = np.linalg.svd(mats, compute_uv=False)
    smin = s[..., -1]
    with np.errstate(divide="ignore"):
        inv = np.where(smin > 0, 1.0 / np.where(smin > 0, smin, 1.0), np.inf)
    return inv, scaled_condition(s)


def _resolvent_table(A, ts, xis, lams, principal):
    """Array ``(T, X, L)`` of ``||(lambda + a)^(-1)||`` plus condition numbers."""
    m = A.dim_E
    eye = np.eye(m)
    norms = np.empty((len(ts), len(xis), len(lams)))
    conds = np.empty_like(norms)
    for it, t in enumerate(ts):
        a = A.eval_principal(t, xis) if principal else A.eval_symbol(t, xis)
        mats = lams[None, :, None, None] * eye + a[:, None]
        norms[it], conds[it] = _inverse_norms(mats)
    return norms, conds


def _singular_witness(conds, ts, xis, lams):
    bad = np.argwhere(~(conds <= COND_LIMIT))
    if bad.size == 0:
        return None
    i, j, k = bad[0]
    return {"t": float(ts[i]), "xi": tuple(float(v) for v in xis[j]), "lambda": complex(lams[k])}


@dataclass
class EllipticityResult:
    passed: bool
    kappa: float
    scaled_error: float
    witness: dict | None = None
    argmax: dict | None = None


def ellipticity_check(A: EllipticSymbol, sector: Sector, sphere_samples: int = 512,
                      lambda_samples_: np.ndarray | None = None, t_samples: int = 9,
                      radii=(0.25, 3.0, 17.0)) -> EllipticityResult:
    """Measure ``kappa = max (1 + |lambda|) ||(lambda + a0(t, xi))^(-1)||`` on ``|xi| = 1``.

    ``lambda`` runs over ``Sigma_theta`` samples (boundary rays, real axis,
    interior angles, ``0``).  Passes iff nothing is singular and the measured
    ``kappa`` is at most ``sector.kappa``.  The scaled form
    ``(|xi|^m + |lambda|) ||(lambda + a0)^(-1)||`` is re-evaluated at ``xi = c w``,
    ``lambda = c^m mu`` for off-sphere radii ``c``; by homogeneity it must
    reproduce the on-sphere values, and ``scaled_error`` is the worst relative gap.
    """
    ts = A.time_samples(t_samples)
    xis = sphere_points(A.n, sphere_samples)
    lams = lambda_samples(sector.theta) if lambda_samples_ is None else np.asarray(lambda_samples_, complex)
    norms, conds = _resolvent_table(A, ts, xis, lams, principal=True)
    w = _singular_witness(conds, ts, xis, lams)
    if w is not None:
        return EllipticityResult(False, np.inf, np.nan, w)
    vals = (1 + np.abs(lams))[None, None, :] * norms
    kappa = float(vals.max())
    i, j, k = np.unravel_index(np.argmax(vals), vals.shape)
    arg = {"t": float(ts[i]), "xi": tuple(xis[j].tolist()), "lambda": complex(lams[k])}
    base = vals
    err = 0.0
    m = A.order
    for c in radii:
        nc, cc = _resolvent_table(A, ts, c * xis, c ** m * lams, principal=True)
        if not np.all(cc <= COND_LIMIT):
            w = _singular_witness(cc, ts, c * xis, c ** m * lams)
            return EllipticityResult(False, kappa, np.nan, w, arg)
        scaled = (c ** m + np.abs(c ** m * lams))[None, None, :] * nc
        err = max(err, float(np.max(np.abs(scaled - base) / base)))
    return EllipticityResult(kappa <= sector.kappa * (1 + 1e-12), kappa, err, None, arg)


def omega_xi_samples(n: int, sphere: int = 64, radii=None, window: int = 4) -> np.ndarray:
    """Sphere directions at several radii (and the origin) plus a lattice window."""
    if radii is None:
        radii = np.logspace(-2, 3, 11)
    dirs = sphere_points(n, sphere)
    pts = [np.zeros((1, n))] + [r * dirs for r in radii]
    pts.append(Box.cube(n, window).grid().astype(np.float64))
    return np.vstack(pts)


@dataclass
class Omega0Result:
    omega0: float
    kappa: float
    max_ratio: float
    grid: np.ndarray = field(repr=False)


def resolvent_ratio_max(A, omega, theta, ts, xis, magnitudes=None) -> tuple:
    """Max of ``(|xi|^m + |lambda|) ||(lambda + a)^(-1)||`` over ``lambda`` in ``omega + Sigma_theta`` samples."""
    lams = lambda_samples(theta, omega, magnitudes)
    norms, conds = _resolvent_table(A, ts, xis, lams, principal=False)
    w = _singular_witness(conds, ts, xis, lams)
    if w is not None:
        return np.inf, w
    xm = np.linalg.norm(xis, axis=1) ** A.order
    vals = (xm[None, :, None] + np.abs(lams)[None, None, :]) * norms
    return float(vals.max()), None


def omega0_search(A: EllipticSymbol, sector: Sector, grid=None, t_samples: int = 9,
                  xi_samples: np.ndarray | None = None) -> Omega0Result:
    """Smallest grid ``omega`` with ``(|xi|^m + |lambda|) ||(lambda + a)^(-1)|| <= 2 kappa``.

    ``kappa`` is ``sector.kappa``; ``lambda`` samples ``omega + Sigma_theta``.
    The default grid is ``logspace(-3, 4, 71)`` (``omega_0 > 0``).
    """
    grid = np.logspace(-3, 4, 71) if grid is None else np.sort(np.asarray(grid, dtype=float))
    ts = A.time_samples(t_samples)
    xis = omega_xi_samples(A.n) if xi_samples is None else np.asarray(xi_samples, float)
    bound = 2 * sector.kappa
    for w in grid:
        r, _ = resolvent_ratio_max(A, float(w), sector.theta, ts, xis)
        if r <= bound:
            return Omega0Result(float(w), sector.kappa, r, grid)
    raise ValueError(f"no omega <= {grid[-1]:g} satisfies the 2*kappa={bound:g} resolvent bound")


# --- resolvent multiplier -------------------------------------------------------

def resolvent_multiplier(A: EllipticSymbol, lam: complex, t: float, sector: Sector | None = None) -> OperatorSymbol:
    """``M(k) = lambda (lambda + a(t, k))^(-1)``; raises with a witness ``k`` on singularity."""
    lam = complex(lam)
    if sector is not None and not sector.contains(lam):
        raise ValueError(f"lambda={lam} is not in omega0 + Sigma_theta "
                         f"(omega0={sector.omega0}, theta={sector.theta})")
    A._check_t(float(t))
    m = A.dim_E
    eye = np.eye(m)

    def batch(p):
        mats = lam * eye + A.eval_symbol(t, p.astype(np.float64))
        _, cond = _inverse_norms(mats)
        bad = np.nonzero(~(cond <= COND_LIMIT))[0]
        if bad.size:
            raise SingularSymbolError("lambda + a(t, k) is singular", tuple(int(v) for v in p[bad[0]]))
        return lam * np.linalg.inv(mats)

    return OperatorSymbol(A.n, m, batch, None, name=f"resolvent({A.name},{lam},{t})")


# --- discrete Leibniz formula ---------------------------------------------------

def additive_decompositions(alpha) -> list:
    """All ordered tuples of nonzero multi-indices ``<= alpha`` summing to ``alpha``; ``[()]`` for 0."""
    alpha = as_point(alpha)
    if min(alpha, default=0) < 0:
        raise ValueError("alpha must be >= 0")
    memo = {}

    def rec(a):
        if a in memo:
            return memo[a]
        if not any(a):
            return [()]
        out = []
        for w in itertools.product(*(range(x + 1) for x in a)):
            if not any(w):
                continue
            rest = tuple(x - y for x, y in zip(a, w))
            out.extend((w,) + tail for tail in rec(rest))
        memo[a] = out
        return out

    return rec(alpha)


def _sym_eval(S, k):
    return np.asarray(S(tuple(k)), dtype=np.complex128)


def _checked_inverse(S, k):
    X = _sym_eval(S, k)
    s = np.linalg.svd(X, compute_uv=False)
    if not scaled_condition(s) <= COND_LIMIT:
        raise SingularSymbolError("S(k) is singular", tuple(int(v) for v in k))
    return np.linalg.inv(X)


def difference(S, w, k) -> np.ndarray:
    """Unrestricted ``Delta^w S(k)`` (backward differences, ``w_j`` times along axis ``j``)."""
    k = np.asarray(as_point(k))
    w = as_point(w)
    total = 0
    for eps in itertools.product(*(range(x + 1) for x in w)):
        c = np.prod([math.comb(x, e) * (-1) ** e for x, e in zip(w, eps)])
        total = total + c * _sym_eval(S, k - np.asarray(eps))
    return np.asarray(total, dtype=np.complex128)


def direct_inverse_difference(S, alpha, k) -> np.ndarray:
    """``Delta^alpha (S^{-1})(k)`` computed straight from the differences of the inverses."""
    k = np.asarray(as_point(k))
    alpha = as_point(alpha)
    total = 0
    for eps in itertools.product(*(range(x + 1) for x in alpha)):
        c = np.prod([math.comb(x, e) * (-1) ** e for x, e in zip(alpha, eps)])
        total = total + c * _checked_inverse(S, k - np.asarray(eps))
    return np.asarray(total, dtype=np.complex128)


def inverse_difference(S, alpha, k) -> np.ndarray:
    """``Delta^alpha (S^{-1})(k)`` via the sum over additive decompositions.

    ``sum_W (-1)^r S^{-1}(k - alpha) prod_{j=1..r} ((Delta^{w^j} S) S^{-1})(k - w_*^j)``
    with ``w_*^j = w^{j+1} + ... + w^r``; ``S`` is any callable ``point -> matrix``.
    """
    k = np.asarray(as_point(k))
    alpha = as_point(alpha)
    base = _checked_inverse(S, k - np.asarray(alpha))
    total = np.zeros_like(base)
    for W in additive_decompositions(alpha):
        prod = base
        r = len(W)
        for j in range(r):
            wstar = np.sum(W[j + 1:], axis=0) if j + 1 < r else np.zeros(len(alpha), dtype=int)
            at = k - wstar
            prod = prod @ (difference(S, W[j], at) @ _checked_inverse(S, at))
        total = total + (-1) ** r * prod
    return total


# --- BV sweep -------------------------------------------------------------------

def remark_quantity(M: OperatorSymbol, window: int) -> float:
    """``max |k|^{|gamma|} ||Delta^gamma M(k)||`` over ``k`` in ``[-window, window]^n``, ``gamma`` in ``{0,1}^n``."""
    n = M.n
    vals = M.on_box(Box.cube(n, window + 1))
    inner = tuple(slice(1, -1) for _ in range(n))
    best = 0.0
    kn = np.linalg.norm(Box.cube(n, window).grid().astype(float), axis=1).reshape((2 * window + 1,) * n)
    for gamma in itertools.product((0, 1), repeat=n):
        d = vals
        for ax, g in enumerate(gamma):
            if g:
                d = np.diff(d, axis=ax, prepend=np.zeros_like(np.take(d, [0], axis=ax)))
        d = d[inner]
        nrm = opnorms(np.ascontiguousarray(d).reshape(-1, M.dim_E, M.dim_E)).reshape(kn.shape)
        best = max(best, float(np.max(kn ** sum(gamma) * nrm)))
    return best


@dataclass
class SweepReport:
    rows: list
    sup: float
    remark_sup: float
    soft_bound: float
    cap: float | None
    flagged: bool

    @property
    def within_soft_bound(self) -> bool:
        return self.sup <= self.soft_bound


def resolvent_bv_sweep(A: EllipticSymbol, sector: Sector, lams, ts, d_max: int,
                       cap: float | None = None, window: int = 8) -> SweepReport:
    """BV certificates of ``M_{lambda,t}`` over the ``(lambda, t)`` samples.

    Singular resolvents count as an infinite certificate.  ``flagged`` is set
    when any value is infinite or exceeds ``cap``.  The report also carries
    the largest ``|k|^{|gamma|} ||Delta^gamma M(k)||`` and the soft bound
    ``2^(3n+1)``.
    """
    rows = []
    for t in ts:
        for lam in lams:
            lam = complex(lam)
            try:
                M = resolvent_multiplier(A, lam, float(t))
                cert = bv_certificate(M, d_max)
                rq = remark_quantity(M, window)
                rows.append({"t": float(t), "lambda": lam, "bv_sup": cert.sup, "bv_argmax": cert.argmax,
                             "tail_norm": cert.tail_norm, "remark": rq})
            except SingularSymbolError as e:
                rows.append({"t": float(t), "lambda": lam, "bv_sup": np.inf, "bv_argmax": -1,
                             "tail_norm": np.inf, "remark": np.inf, "witness": e.witness})
    sup = max(r["bv_sup"] for r in rows)
    rem = max(r["remark"] for r in rows)
    flagged = not np.isfinite(sup) or (cap is not None and sup > cap)
    return SweepReport(rows, float(sup), float(rem), 2.0 ** (3 * A.n + 1), cap, flagged)


# --- spec files -------------------------------------------------------------------

_SAFE = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt, "pi": np.pi, "log": np.log,
         "abs": abs}


def _time_expr(src: str) -> Callable:
    code = compile(ast.parse(src, mode="eval"), "<coeff>", "eval")
    for node in ast.walk(ast.parse(src, mode="eval")):
        if isinstance(node, (ast.Attribute, ast.Lambda, ast.comprehension)):
            raise ValueError(f"disallowed construct in expression {src!r}")
        if isinstance(node, ast.Name) and node.id not in _SAFE and node.id != "t":
            raise ValueError(f"unknown name {node.id!r} in expression {src!r}")
    return lambda t: np.asarray(eval(code, {"__builtins__": {}}, dict(_SAFE, t=t)), dtype=np.complex128)


def parse_symbol_spec(text: str) -> EllipticSymbol:
    """Parse the key=value symbol format.

    ::

        order = 2
        n = 2
        time = 0, 1
        coeff 2,0 = [[1, 0], [0, 1]]
        coeff 0,0 = expr: [[1 + t, 0], [0, 1]]

    Matrices are Python literals (complex allowed as ``1j``); ``expr:`` values
    are expressions in ``t`` using sin, cos, exp, sqrt, log, abs, pi.
    """
    meta, coeffs = {}, {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ValueError(f"cannot parse line {raw!r}")
        key, val = key.strip(), val.strip()
        if key.startswith("coeff"):
            alpha = tuple(int(x) for x in key[5:].replace(" ", "").split(","))
            if val.startswith("expr:"):
                coeffs[alpha] = _time_expr(val[5:].strip())
            else:
                coeffs[alpha] = np.asarray(ast.literal_eval(val), dtype=np.complex128)
        else:
            meta[key] = val
    if "n" not in meta or "order" not in meta:
        raise ValueError("symbol spec needs 'order' and 'n'")
    time = tuple(float(x) for x in meta.get("time", "0,1").split(","))
    return EllipticSymbol(int(meta["order"]), int(meta["n"]), coeffs, time, meta.get("name", "A"))


def read_symbol_spec(path) -> EllipticSymbol:
    with open(path) as fh:
        return parse_symbol_spec(fh.read())
