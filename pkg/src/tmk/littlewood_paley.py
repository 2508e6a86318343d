"""Smooth dyadic resolution of unity on R^n (Littlewood-Paley partition).

The bumps are radial and built from the C^infinity transition

    h(t) = g(t) / (g(t) + g(1 - t)),    g(t) = exp(-1/t) for t > 0, else 0,

which is exactly 0 for t <= 0 and exactly 1 for t >= 1.  The base bump
``phi0`` equals 1 for ``|xi| <= 13/8`` and vanishes from ``r0_out < 2`` on; the
annular bump ``phi`` rises on ``(a1, 13/8)``, equals 1 on ``[13/8, 13/4]`` and
falls on ``(13/4, b1)``.  With ``phi_j(xi) = phi(xi / 2^(j-1))`` and
``Psi = sum_j phi_j`` the normalized family ``phi_j / Psi`` sums to one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels


def _ramp(t):
    return kernels.smooth_step(t)


class UnityResolution:
    """Radial resolution of unity with configurable radii.

    Parameters
    ----------
    n : int
        Dimension of R^n.
    r0_in, r0_out : float
        ``phi0`` is 1 on ``r <= r0_in`` and 0 on ``r >= r0_out``.
    a1, p_lo, p_hi, b1 : float
        ``phi`` is 0 on ``r <= a1``, 1 on ``[p_lo, p_hi]``, 0 on ``r >= b1``.
    smoothness_order : int
        Highest derivative order exercised by :func:`verify_resolution`.
    """

    def __init__(self, n: int, r0_in=13 / 8, r0_out=15 / 8, a1=25 / 16, p_lo=13 / 8,
                 p_hi=13 / 4, b1=27 / 8, smoothness_order: int = 2, name: str = "standard"):
        eps = 1e-12
        if not (0 < r0_in < r0_out <= 2 and 1 <= a1 < p_lo <= p_hi < b1 <= 4):
            raise ValueError("inconsistent radii")
        if p_lo > r0_in + eps or 2 * p_lo > p_hi + eps:
            raise ValueError("plateaus leave a gap, Psi would vanish")
        if 4 * a1 < b1 or 2 * a1 < r0_out:
            raise ValueError("phi_j and phi_{j+2} would overlap")
        self.n = int(n)
        self.r0_in, self.r0_out = float(r0_in), float(r0_out)
        self.a1, self.p_lo, self.p_hi, self.b1 = map(float, (a1, p_lo, p_hi, b1))
        self.smoothness_order = int(smoothness_order)
        self.name = name

    def __repr__(self):
        return f"UnityResolution({self.name!r}, n={self.n})"

    # -- unnormalized bumps, functions of the radius ------------------------
    def base_bump(self, r):
        r = np.asarray(r, dtype=np.float64)
        return 1.0 - _ramp((r - self.r0_in) / (self.r0_out - self.r0_in))

    def annular_bump(self, r):
        r = np.asarray(r, dtype=np.float64)
        up = _ramp((r - self.a1) / (self.p_lo - self.a1))
        down = 1.0 - _ramp((r - self.p_hi) / (self.b1 - self.p_hi))
        return up * down

    def unnormalized(self, j: int, r):
        if j < 0:
            raise ValueError("block index must be >= 0")
        if j == 0:
            return self.base_bump(r)
        return self.annular_bump(np.asarray(r, dtype=np.float64) / 2.0 ** (j - 1))

    def support_radii(self, j: int) -> tuple:
        """Open radial interval outside of which ``phi_j`` vanishes."""
        if j == 0:
            return (0.0, self.r0_out)
        s = 2.0 ** (j - 1)
        return (self.a1 * s, self.b1 * s)

    def _jmax(self, r):
        rmax = float(np.max(r)) if np.size(r) else 0.0
        return max(1, int(np.ceil(np.log2(max(rmax, 1.0) / self.a1))) + 2)

    def psi(self, r):
        r = np.asarray(r, dtype=np.float64)
        return sum(self.unnormalized(k, r) for k in range(self._jmax(r) + 1))

    # -- normalized family ---------------------------------------------------
    def eval_radius(self, j: int, r):
        r = np.asarray(r, dtype=np.float64)
        num = self.unnormalized(j, r)
        return np.where(num > 0.0, num / np.where(num > 0.0, self.psi(r), 1.0), 0.0)

    def eval(self, j: int, xi):
        """``phi_j(xi)`` for ``xi`` of shape ``(n,)`` or ``(..., n)``."""
        xi = np.asarray(xi, dtype=np.float64)
        if xi.shape[-1] != self.n:
            raise ValueError(f"expected points of dimension {self.n}")
        out = self.eval_radius(j, np.linalg.norm(xi, axis=-1))
        return float(out) if out.ndim == 0 else out

    def __call__(self, j, xi):
        return self.eval(j, xi)

    def blocks_radius(self, r, J: int) -> np.ndarray:
        """Array ``(J+1, len(r))`` of ``phi_j(r)`` for ``j = 0..J``, sharing one ``Psi``."""
        r = np.asarray(r, dtype=np.float64).ravel()
        ps = self.psi(r)
        out = np.stack([self.unnormalized(j, r) for j in range(J + 1)])
        return out / ps


def make_standard_resolution(n: int) -> UnityResolution:
    """The family with plateau radii 13/8 and 13/4 used throughout."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return UnityResolution(n)


def make_shifted_resolution(n: int, factor: float = 1.2) -> UnityResolution:
    """A second admissible family: plateau radii scaled by ``factor``.

    Supports stay inside ``Omega_j``: ``phi0`` lives in ``r < 1.99`` and
    ``phi_j`` in ``(1.8, 3.99) * 2^(j-1)``.
    """
    p_lo = 13 / 8 * factor
    return UnityResolution(n, r0_in=p_lo, r0_out=1.99, a1=1.8, p_lo=p_lo, p_hi=13 / 4 * factor,
                           b1=3.99, name=f"shifted{factor:g}")


@dataclass
class ResolutionReport:
    J: int
    samples: int
    partition_deviation: float
    support_violations: int
    plateau_violations: int
    plateau_deviation: float
    part_d_violations: int
    negativity_violations: int
    max_active: int
    derivative_ratios: dict = field(default_factory=dict)
    derivative_ratios_by_j: dict = field(default_factory=dict, repr=False)
    ratio_tol: float = 1e5
    partition_tol: float = 1e-12

    @property
    def ok(self) -> bool:
        return (self.partition_deviation <= self.partition_tol and self.support_violations == 0
                and self.plateau_violations == 0 and self.part_d_violations == 0
                and self.negativity_violations == 0 and self.max_active <= 3
                and all(v < self.ratio_tol for v in self.derivative_ratios.values()))

    def rows(self) -> list:
        """``(check, max deviation, violation count)`` rows."""
        rows = [
            ("partition", self.partition_deviation, int(self.partition_deviation > self.partition_tol)),
            ("support", 0.0, self.support_violations),
            ("plateau", self.plateau_deviation, self.plateau_violations),
            ("part_d", 0.0, self.part_d_violations),
            ("nonnegative", 0.0, self.negativity_violations),
            ("local_finiteness", float(self.max_active), int(self.max_active > 3)),
        ]
        for order, v in sorted(self.derivative_ratios.items()):
            rows.append((f"derivative_order_{order}", v, int(v >= self.ratio_tol)))
        return rows


def _sample_points(n, J, samples, rng):
    """Half uniform in the ball of radius 2^(J-1), half log-uniform in the radius."""
    R = 2.0 ** (J - 1)
    d = rng.standard_normal((samples, n))
    d /= np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-300)
    h = samples // 2
    r = np.empty(samples)
    r[:h] = R * rng.random(h) ** (1.0 / n)
    r[h:] = 2.0 ** rng.uniform(-3.0, J - 1, samples - h)
    pts = d * r[:, None]
    pts[0] = 0.0
    return pts


def _radial_points(n, radii, rng):
    d = rng.standard_normal((radii.size, n))
    d /= np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-300)
    return d * radii[:, None]


def verify_resolution(res, J: int, samples: int = 10_000, seed: int = 0,
                      plateau_points: int = 2000) -> ResolutionReport:
    """Check the resolution properties on sampled points.

    ``res`` needs only ``res.n`` and ``res.eval(j, xi)``, so modified families
    can be checked too.  Checks: partition of unity for ``j <= J`` at points
    with ``|xi| <= 2^(J-1)``; supports inside ``Omega_j``; the plateau
    ``phi_j = 1`` on ``|xi| in [7*2^(j-3), 3*2^(j-1)]`` for ``3 <= j <= J``; on
    that plateau ``phi_{j-1}`` and ``phi_{j+1}`` are not both nonzero; at most
    three active blocks; and finite-difference derivative ratios
    ``|D_h^a phi_j| * 2^(j|a|)`` for ``|a| <= smoothness_order``.
    """
    if J < 3:
        raise ValueError("J must be >= 3")
    rng = np.random.default_rng(seed)
    n = res.n
    pts = _sample_points(n, J, samples, rng)
    r = np.linalg.norm(pts, axis=1)
    vals = np.stack([np.asarray(res.eval(j, pts), dtype=np.float64) for j in range(J + 2)])
    part_dev = float(np.max(np.abs(vals[: J + 1].sum(axis=0) - 1.0)))

    support_viol = 0
    for j in range(J + 2):
        lo, hi = (0.0, 2.0) if j == 0 else (2.0 ** (j - 1), 2.0 ** (j + 1))
        outside = (r < lo) | (r > hi)
        support_viol += int(np.count_nonzero(vals[j][outside] != 0.0))
        # points on the boundary sphere of Omega_j must already be zero (strict inclusion)
        edge = np.array([hi] if j == 0 else [lo, hi])
        support_viol += int(np.count_nonzero(np.asarray(res.eval(j, _radial_points(n, edge, rng))) != 0.0))
    neg = int(np.count_nonzero(vals < 0.0))
    active = int(np.max(np.count_nonzero(vals > 0.0, axis=0)))

    plat_viol = 0
    plat_dev = 0.0
    d_viol = 0
    for j in range(3, J + 1):
        radii = np.linspace(7 * 2.0 ** (j - 3), 3 * 2.0 ** (j - 1), plateau_points)
        xp = _radial_points(n, radii, rng)
        pj = np.asarray(res.eval(j, xp))
        dev = np.abs(pj - 1.0)
        plat_dev = max(plat_dev, float(dev.max()))
        plat_viol += int(np.count_nonzero(dev > 1e-12))
        both = (np.asarray(res.eval(j - 1, xp)) != 0.0) & (np.asarray(res.eval(j + 1, xp)) != 0.0)
        d_viol += int(np.count_nonzero(both))

    ratios, by_j = _derivative_ratios(res, J, max(64, samples // (4 * (J + 1))), rng)
    return ResolutionReport(J, samples, part_dev, support_viol, plat_viol, plat_dev, d_viol, neg,
                            active, ratios, by_j)


def _derivative_ratios(res, J, per_j, rng):
    """Central finite differences of order 1 and 2, scaled by ``2^(j|a|)``."""
    n = res.n
    order = getattr(res, "smoothness_order", 2)
    by_j = {o: np.zeros(J + 1) for o in range(1, order + 1)}
    eye = np.eye(n)
    for j in range(J + 1):
        lo, hi = (0.0, 2.0) if j == 0 else (2.0 ** (j - 1), 2.0 ** (j + 1))
        x = _radial_points(n, rng.uniform(lo, hi, per_j), rng)
        h = 1e-3 * 2.0 ** j
        f0 = np.asarray(res.eval(j, x))
        shifted = {}

        def f(*offs):
            key = offs
            if key not in shifted:
                y = x.copy()
                for s, i in offs:
                    y = y + s * h * eye[i]
                shifted[key] = np.asarray(res.eval(j, y))
            return shifted[key]

        if order >= 1:
            d1 = max(float(np.max(np.abs(f((1, i)) - f((-1, i))) / (2 * h))) for i in range(n))
            by_j[1][j] = d1 * 2.0 ** j
        if order >= 2:
            d2 = 0.0
            for i in range(n):
                d2 = max(d2, float(np.max(np.abs(f((1, i)) - 2 * f0 + f((-1, i))) / h ** 2)))
                for k in range(i + 1, n):
                    mixed = (f((1, i), (1, k)) - f((1, i), (-1, k)) - f((-1, i), (1, k))
                             + f((-1, i), (-1, k))) / (4 * h * h)
                    d2 = max(d2, float(np.max(np.abs(mixed))))
            by_j[2][j] = d2 * 4.0 ** j
    return {o: float(v.max()) for o, v in by_j.items()}, by_j
