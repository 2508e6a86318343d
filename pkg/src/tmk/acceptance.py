"""Acceptance criteria 1-12 as runnable checks.

Each check returns ``(passed, detail)``; :func:`run_suite` times them and
:func:`format_result` renders one line per criterion.  Tolerances are the
stated ones; ``quick`` only trims sample counts where a criterion names no
size.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import besov as B
from . import elliptic as E
from . import lattice as L
from . import pde_solver as P
from . import littlewood_paley as R
from . import symbol_calculus as S
from .transform import TrigPolynomial, random_trig_family


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float


# --- 1 ----------------------------------------------------------------------------

def check_partition_of_unity(quick: bool = False):
    parts = []
    ok = True
    for n in (1, 2, 3):
        rep = R.verify_resolution(R.make_standard_resolution(n), J=10, samples=10_000, seed=n)
        ok &= rep.ok
        bad = [name for name, _, count in rep.rows() if count]
        parts.append(f"n={n} dev={rep.partition_deviation:.1e} violations={bad or 'none'}")
    return ok, "; ".join(parts)


# --- 2 ----------------------------------------------------------------------------

def _cover_counts(n: int, radius: int) -> np.ndarray:
    """How many cells ``D_d`` (with both halves) contain each point of ``[-radius, radius]^n``."""
    counts = np.zeros((2 * radius + 1,) * n, dtype=np.int16)
    counts[(radius,) * n] += 1  # D_0
    d = 1
    while True:
        cell = L.coarse_cell(d, n)
        if cell.r > 0 and 2 ** cell.r > radius:
            break
        for box in cell.boxes:
            lo = np.maximum(box.lo, -radius)
            hi = np.minimum(box.hi, radius)
            if np.any(lo > hi):
                continue
            counts[tuple(slice(a + radius, b + radius + 1) for a, b in zip(lo, hi))] += 1
        d += 1
    return counts


def _support_cover_violations(n: int, j: int, res) -> int:
    """Lattice points with ``phi_j(k) != 0`` whose cell is outside the cover of ``j``."""
    lo_r, hi_r = res.support_radii(j)
    R_ = int(math.floor(hi_r))
    allowed = np.zeros(L.cells_up_to_radius(R_, n) + n + 2, dtype=bool)
    allowed[[d for d in L.dyadic_support_cover(j, n) if d < allowed.size]] = True
    axis = np.arange(-R_, R_ + 1)
    rest = np.stack(np.meshgrid(*([axis] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1) \
        if n > 1 else np.zeros((1, 0), dtype=np.int64)
    bad = 0
    for k1 in axis:
        pts = np.concatenate([np.full((rest.shape[0], 1), k1), rest], axis=1).astype(np.int64)
        r2 = (pts.astype(np.float64) ** 2).sum(axis=1)
        pts = pts[(r2 > lo_r ** 2) & (r2 < hi_r ** 2)] if j > 0 else pts[r2 < hi_r ** 2]
        if not pts.size:
            continue
        pts = pts[np.asarray(res.eval(j, pts.astype(np.float64))) != 0.0]
        d = L.cell_indices(pts)
        bad += int(np.count_nonzero(~allowed[np.minimum(d, allowed.size - 1)]))
    return bad


def check_coarse_decomposition(quick: bool = False):
    parts = []
    ok = True
    for n in (1, 2, 3):
        counts = _cover_counts(n, 128)
        holes, overlaps = int(np.count_nonzero(counts == 0)), int(np.count_nonzero(counts > 1))
        # the fast cell index must agree with box membership
        sample = np.random.default_rng(n).integers(-128, 129, size=(4000, n))
        mism = sum(tuple(k) not in L.coarse_cell(int(d), n) if d else any(k)
                   for k, d in zip(sample, L.cell_indices(sample)))
        res = R.make_standard_resolution(n)
        viol = sum(_support_cover_violations(n, j, res) for j in range(8))
        ok &= holes == 0 and overlaps == 0 and mism == 0 and viol == 0
        parts.append(f"n={n} holes={holes} overlaps={overlaps} index_mismatch={mism} cover_violations={viol}")
    return ok, "; ".join(parts)


# --- 3 ----------------------------------------------------------------------------

def _random_box(rng, n, size=4):
    lo = rng.integers(-6, 6, size=n)
    return Box_(lo, lo + rng.integers(0, size, size=n))


def Box_(lo, hi):
    return L.Box(tuple(int(v) for v in lo), tuple(int(v) for v in hi))


def _random_table_symbol(rng, n, m, box):
    entries = {k: rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)) for k in box}
    return S.table_symbol(entries, n, m)


def check_telescoping_abel(quick: bool = False):
    rng = np.random.default_rng(3)
    tele_err = abel_err = 0.0
    for _ in range(100):
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        box = _random_box(rng, n)
        M = _random_table_symbol(rng, n, m, box)
        target = M(box.hi)
        for method in ("direct", "fast"):
            got = S.telescoping_reconstruct(M, box.lo, box.hi, method)
            tele_err = max(tele_err, float(np.abs(got - target).max() / max(1.0, np.abs(target).max())))
    for _ in range(100):
        n = int(rng.integers(1, 4))
        shape = tuple(int(v) for v in rng.integers(1, 7, size=n))
        a = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        b = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        lhs, rhs = S.abel_sides(a, b)
        abel_err = max(abel_err, abs(lhs - rhs) / max(1.0, abs(lhs)))
    ok = tele_err <= 1e-10 and abel_err <= 1e-10
    return ok, f"telescoping max rel err={tele_err:.1e}; Abel max rel err={abel_err:.1e}"


# --- 4 ----------------------------------------------------------------------------

def _count_decompositions_brute(alpha) -> int:
    """Exhaustive count of ordered tuples of nonzero multi-indices summing to ``alpha``."""
    parts = [w for w in itertools.product(*(range(a + 1) for a in alpha)) if any(w)]
    total = 0
    for r in range(1, sum(alpha) + 1):
        total += sum(1 for tup in itertools.product(parts, repeat=r)
                     if tuple(map(sum, zip(*tup))) == tuple(alpha))
    return total


def random_smooth_symbol(rng, n, m, base=3.0, amp=0.5, terms=3):
    """``base I + amp sum_r C_r e^{i k.v_r}`` with ``||C_r|| <= 1/terms``: well conditioned."""
    C = []
    for _ in range(terms):
        X = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        C.append(X / (np.linalg.norm(X, 2) * terms))
    V = rng.uniform(-1.5, 1.5, size=(terms, n))
    eye = np.eye(m) * base

    def S_(k):
        k = np.asarray(k, dtype=np.float64)
        return eye + amp * sum(c * np.exp(1j * k @ v) for c, v in zip(C, V))

    return S_


def check_inverse_difference(quick: bool = False):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        S_ = random_smooth_symbol(rng, n, m)
        alpha = tuple(int(v) for v in rng.integers(0, 2, size=n))
        k = tuple(int(v) for v in rng.integers(-6, 7, size=n))
        direct = E.direct_inverse_difference(S_, alpha, k)
        formula = E.inverse_difference(S_, alpha, k)
        worst = max(worst, float(np.linalg.norm(formula - direct) / np.linalg.norm(direct)))
    z2, z3 = len(E.additive_decompositions((1, 1))), len(E.additive_decompositions((1, 1, 1)))
    b2, b3 = _count_decompositions_brute((1, 1)), _count_decompositions_brute((1, 1, 1))
    ok = worst <= 1e-10 and (z2, z3) == (b2, b3) == (3, 13)
    return ok, f"max rel err={worst:.1e}; |Z(1,1)|={z2} (brute {b2}); |Z(1,1,1)|={z3} (brute {b3})"


# --- 5 ----------------------------------------------------------------------------

def check_segment_certificate(quick: bool = False):
    ok = True
    parts = []
    for n in (1, 2, 3):
        for j in (3, 4, 5):
            cert = S.bv_certificate(S.segment_symbol(j, n), n * j + 2 * n)
            cells = cert.nonzero_cells()
            good = cert.sup <= 1.0 and cells == [n * j + 1]
            ok &= good
            if not good:
                parts.append(f"n={n} j={j}: sup={cert.sup:g} cells={cells} (want <=1 at [{n * j + 1}])")
    return ok, "; ".join(parts) if parts else "all certificates <= 1 at d = n*j+1"


# --- 6 ----------------------------------------------------------------------------

def check_besov_sanity(quick: bool = False):
    rng = np.random.default_rng(6)
    triples = [(0.0, 2, 2), (1.0, 3, 1), (-0.5, 1.5, np.inf), (2.0, 4, 3)]
    e0 = plateau = parseval = 0.0
    for n in (1, 2):
        res = R.make_standard_resolution(n)
        x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        nx = float(np.linalg.norm(x))
        for s, p, q in triples:
            prm = B.BesovParams(s, p, q)
            f = TrigPolynomial.monomial((0,) * n, x)
            e0 = max(e0, abs(B.besov_norm(f, prm, res) - nx) / nx)
            for j in range(1, 6):
                k = (2 ** j,) + (0,) * (n - 1)
                got = B.besov_norm(TrigPolynomial.monomial(k, x), prm, res)
                want = 2.0 ** (s * j) * nx
                plateau = max(plateau, abs(got - want) / want)
        prm = B.BesovParams(0.0, 2, 2)
        for f in random_trig_family(5, n, 16 if n == 1 else 8, 2, seed=n):
            J = B.default_J(B.radius_of(f.freqs))
            w = np.stack([np.asarray(res.eval(j, f.freqs.astype(float))) for j in range(J + 1)])
            oracle = math.sqrt(float(np.sum(w[:, :, None] ** 2 * np.abs(f.coefs[None]) ** 2)))
            parseval = max(parseval, abs(B.besov_norm(f, prm, res) - oracle) / oracle)
    ok = e0 <= 1e-12 and plateau <= 1e-10 and parseval <= 1e-10
    return ok, f"e0 rel err={e0:.1e}; plateau rel err={plateau:.1e}; Parseval rel err={parseval:.1e}"


# --- 7 ----------------------------------------------------------------------------

def check_norm_equivalence(quick: bool = False):
    res1, res2 = R.make_standard_resolution(1), R.make_shifted_resolution(1)
    fs = random_trig_family(400, 1, 32, 1, seed=7)
    freqs = fs[0].freqs
    coefs = np.stack([f.coefs for f in fs])
    J = B.default_J(B.radius_of(freqs))
    worst = 0.0
    where = None
    brackets = []
    for p in (1.5, 2, 3):
        bn1 = B.block_norms(freqs, coefs, res1, p, J)
        bn2 = B.block_norms(freqs, coefs, res2, p, J)
        for s in (-1.0, 0.0, 1.5):
            for q in (1, 2, np.inf):
                small = B.equivalence_from_blocks(bn1[:200], bn2[:200], s, q)
                full = B.equivalence_from_blocks(bn1, bn2, s, q)
                change = max(abs(a - b) / b for a, b in zip(full, small))
                brackets.append((s, p, q, *full))
                if change > worst:
                    worst, where = change, (s, p, q)
    lo = min(b[3] for b in brackets)
    hi = max(b[4] for b in brackets)
    return worst < 0.1, f"max bracket change={worst:.3%} at (s,p,q)={where}; c_hat>={lo:.3f}, C_hat<={hi:.3f}"


# --- 8 ----------------------------------------------------------------------------

MAIN_TRIPLES = ((0.0, 2.0, 2.0), (0.5, 1.5, 1.0), (-1.0, 3.0, np.inf))


def bv_battery(dim_E: int = 2) -> list:
    """Riesz, segment, shifted, two products and a random diagonal symbol."""
    riesz = S.riesz_symbol(1, dim_E)
    rand = S.random_diagonal_symbol(1, dim_E, seed=11)
    return [
        riesz,
        S.segment_symbol(3, 1, dim_E),
        S.shift_symbol(riesz, (5,)),
        S.product_symbol(riesz, S.shift_symbol(S.neg_symbol(1, dim_E), (6,))),
        S.product_symbol(rand, S.shift_symbol(riesz, (-3,))),
        rand,
    ]


def check_main_theorem(quick: bool = False):
    res = R.make_standard_resolution(1)
    symbols_ = bv_battery(2)
    count = 60 if quick else 120
    ok = True
    parts = []
    for s, p, q in MAIN_TRIPLES:
        prm = B.BesovParams(s, p, q)
        Cs = []
        worst = 0.0
        for seed in (0, 1, 2):
            fs = random_trig_family(count, 1, 16, 2, seed=100 + seed)
            C = B.proof_constant(B.riesz_box_experiment(fs, p).constant, 1)
            Cs.append(C)
            for M in symbols_:
                rep = B.multiplier_bound_certificate(M, fs, prm, res)
                ratio = rep.op_ratio / (C * rep.bv_sup)
                worst = max(worst, ratio)
                ok &= rep.op_ratio <= C * rep.bv_sup
        spread = max(Cs) / min(Cs) - 1
        ok &= spread < 0.1
        parts.append(f"(s,p,q)=({s:g},{p:g},{q:g}) C={np.mean(Cs):.3f} spread={spread:.2%} "
                     f"max ratio/(C*Var)={worst:.3f}")
    return ok, "; ".join(parts)


# --- 9 ----------------------------------------------------------------------------

def check_identity_449(quick: bool = False):
    rng = np.random.default_rng(9)
    worst = 0.0
    for n in (1, 2):
        res = R.make_standard_resolution(n)
        for s, p, q in ((0.5, 3, 2), (-1.0, 1.5, np.inf), (1.0, 2, 1)):
            prm = B.BesovParams(s, p, q)
            for j in (3, 4, 5):
                count = 3 * 2 ** (j - 1) - 7 * 2 ** (j - 3) + 1
                x = rng.standard_normal((count, 2)) + 1j * rng.standard_normal((count, 2))
                lhs, rhs = B.identity_449(j, B.segment_test_polynomial(j, n, x), prm, res)
                worst = max(worst, abs(lhs - rhs) / rhs)
    return worst <= 1e-10, f"max rel gap={worst:.1e}"


# --- 10 ---------------------------------------------------------------------------

def first_order_laplacian(n: int = 2) -> E.EllipticSymbol:
    """``-Delta`` on ``C^2`` plus ``sum_i i B_i xi_i`` with fixed non-normal ``B_i``."""
    Bs = {0: np.array([[0.5, 1.0], [0.0, -0.3]]), 1: np.array([[0.2, 0.0], [0.7, 0.4]])}
    A = E.laplacian(n, 2, first_order={i: 1j * Bs[i % 2] for i in range(n)})
    A.name = "laplacian+first-order"
    return A


def check_resolvent_sweep(quick: bool = False):
    n = 2
    ok = True
    parts = []
    theta = math.pi / 2
    lattice_xi = L.Box.cube(n, 24).grid().astype(np.float64)
    for A in (E.laplacian(n, 1), first_order_laplacian(n)):
        kappa = E.ellipticity_check(A, E.Sector(theta, kappa=np.inf)).kappa
        om = E.omega0_search(A, E.Sector(theta, kappa=kappa))
        sector = E.Sector(theta, om.omega0, kappa)
        ts = A.time_samples(3)
        ratio, wit = E.resolvent_ratio_max(A, om.omega0, theta, ts, lattice_xi,
                                           magnitudes=np.logspace(0, 6, 25))
        ok &= wit is None and ratio <= 2 * kappa
        lams = E.lambda_samples(theta, om.omega0, magnitudes=np.logspace(0, 4, 5 if quick else 9))
        sweep = E.resolvent_bv_sweep(A, sector, lams, ts[:1], d_max=2 * 5 + 2)
        wide = E.resolvent_bv_sweep(A, sector, E.lambda_samples(theta, om.omega0, np.logspace(4, 7, 4)),
                                    ts[:1], d_max=2 * 5 + 2)
        capped = np.isfinite(sweep.sup) and wide.sup <= 1.1 * sweep.sup
        ok &= capped and not sweep.flagged
        parts.append(f"{A.name}: kappa={kappa:.4f} omega0={om.omega0:.3g} ratio={ratio:.4f}<=2kappa; "
                     f"BV cap={sweep.sup:.3f} (large |lambda| {wide.sup:.3f}) vs soft bound "
                     f"{sweep.soft_bound:g} {'within' if sweep.within_soft_bound else 'ABOVE'}")
    return ok, "; ".join(parts)


# --- 11 ---------------------------------------------------------------------------

def manufactured_problem(steps: int, k=(1, 1), x0=(1.0, 0.5j), T: float = 1.0):
    """Time-dependent heat problem with exact solution ``e^{-t} e^{ik.x} x0``."""
    n = len(k)
    c = lambda t: (1.0 + 0.5 * np.sin(2 * np.pi * t)) * np.eye(len(x0))  # noqa: E731
    coeffs = {tuple(2 * int(i == j) for j in range(n)): c for i in range(n)}
    coeffs[(0,) * n] = lambda t: 0.3 * np.cos(t) * np.array([[1.0, 1.0], [0.0, 1.0]])
    A = E.EllipticSymbol(2, n, coeffs, (0.0, T), name="manufactured")
    x0 = np.asarray(x0, dtype=np.complex128)
    kk = np.asarray([k], dtype=np.float64)

    def f(t):
        a = A.eval_symbol(t, kk)[0]
        return TrigPolynomial.monomial(k, np.exp(-t) * ((a - np.eye(len(x0))) @ x0))

    spec = P.IvpSpec(A, TrigPolynomial.monomial(k, x0), T, steps, f)
    return spec, np.exp(-T) * x0


def check_heat(quick: bool = False):
    A = E.laplacian(2)
    worst = 0.0
    for k in ((0, 0), (1, 0), (1, 2), (3, -1), (4, 4)):
        sol = P.solve_ivp(P.IvpSpec(A, TrigPolynomial.monomial(k, np.array([1.0])), 1.0, 1))
        worst = max(worst, float(np.abs(sol.final().coefficient(k)[0] - math.exp(-(k[0] ** 2 + k[1] ** 2)))))
    errs = []
    for steps in (20, 40, 80):
        spec, exact = manufactured_problem(steps)
        sol = P.solve_ivp(spec)
        errs.append(float(np.linalg.norm(sol.final().coefficient((1, 1)) - exact)))
    orders = P.convergence_order(errs)
    ok = worst <= 1e-10 and float(orders.min()) >= 1.9
    return ok, (f"exact-path max err={worst:.1e}; implicit errors={['%.2e' % e for e in errs]} "
                f"orders={np.round(orders, 3).tolist()}")


# --- 12 ---------------------------------------------------------------------------

def check_periodic(quick: bool = False):
    A = first_order_laplacian(1)
    om0 = E.omega0_search(A, E.Sector(math.pi / 2, kappa=E.ellipticity_check(
        A, E.Sector(math.pi / 2, kappa=np.inf)).kappa)).omega0
    worst = per = 0.0
    for omega in (om0, 2 * om0, 10.0):
        for f in random_trig_family(50, 2, 8, 2, seed=12):
            spec = P.PeriodicSpec(A, omega, f, omega0=om0)
            u = P.solve_periodic(spec)
            fn = float(np.linalg.norm(f.coefs))
            worst = max(worst, float(np.abs(P.periodic_residual(u, spec)).max()) / fn)
            gap = P.slice_time(u, 0.0) - P.slice_time(u, 2 * math.pi)
            per = max(per, float(np.abs(gap.coefs).max()) / fn)
    ok = worst <= 1e-12 and per <= 1e-12
    return ok, f"omega0={om0:.3g}; residual/||f||={worst:.1e}; periodicity gap/||f||={per:.1e}"


CRITERIA = {
    1: ("partition of unity", check_partition_of_unity),
    2: ("coarse decomposition and support cover", check_coarse_decomposition),
    3: ("telescoping and Abel identities", check_telescoping_abel),
    4: ("inverse-difference formula", check_inverse_difference),
    5: ("segment symbol certificate", check_segment_certificate),
    6: ("Besov norm sanity", check_besov_sanity),
    7: ("norm equivalence stability", check_norm_equivalence),
    8: ("multiplier bound certificate", check_main_theorem),
    9: ("segment identity", check_identity_449),
    10: ("resolvent sweep", check_resolvent_sweep),
    11: ("heat equation", check_heat),
    12: ("periodic problem", check_periodic),
}


def run_criterion(number: int, quick: bool = False) -> CriterionResult:
    title, fn = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        passed, detail = fn(quick)
    except Exception as exc:  # a crash is a failure with the message as witness
        passed, detail = False, f"error: {type(exc).__name__}: {exc}"
    return CriterionResult(number, title, bool(passed), detail, time.perf_counter() - t0)


def run_suite(quick: bool = False, only=None) -> list:
    return [run_criterion(i, quick) for i in (only or sorted(CRITERIA))]


def format_result(r: CriterionResult) -> str:
    return f"criterion {r.number:2d} {'PASS' if r.passed else 'FAIL'}  {r.title} ({r.seconds:.1f}s): {r.detail}"
