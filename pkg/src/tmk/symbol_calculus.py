"""Operator-valued symbols on Z^n and their discrete variation.

A symbol ``M`` maps lattice points to complex ``m x m`` matrices.  It is held
as a batched closed-form evaluator ``batch(points) -> (N, m, m)``, so cells are
never stored as tables.  The variation of ``M`` on a box ``[a, b]`` is

    Var_[a,b] M = sum_{xi in [a,b]} || Delta^{gamma_xi} M_[a,b](xi) ||,

where ``gamma_xi`` flags the axes with ``xi_j != a_j``.  Differencing with a zero
prepended along every axis produces exactly these corner-adapted differences,
which gives the vectorized path in :func:`variation_on_box`.  The pointwise
definitions (:func:`forward_difference`, :func:`mixed_difference`) are kept as
reference implementations.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from ._parallel import pmap
from .lattice import Box, CoarseCell, as_point, coarse_cell

#: Boxes larger than this are variation-summed slab by slab.
SLAB_THRESHOLD = 1 << 20


def opnorm(a: np.ndarray) -> float:
    """Operator 2-norm of one matrix."""
    a = np.asarray(a, dtype=np.complex128)
    return float(kernels.opnorms(a.reshape(1, *a.shape))[0])


class OperatorSymbol:
    """Matrix-valued function on Z^n given by a batched evaluator.

    Parameters
    ----------
    n : int
        Lattice dimension.
    dim_E : int
        Matrix size ``m_E``.
    batch : callable
        ``batch(points)`` with ``points`` an ``(N, n)`` int64 array returns an
        ``(N, dim_E, dim_E)`` complex array.
    support_hint : Box, optional
        Box outside of which the symbol vanishes.  ``None`` means no claim.
    name : str
        Label used in reports.
    """

    def __init__(self, n: int, dim_E: int, batch: Callable, support_hint: Box | None = None,
                 name: str = "symbol"):
        self.n = int(n)
        self.dim_E = int(dim_E)
        self._batch = batch
        if support_hint is not None and support_hint.n != self.n:
            raise ValueError("support hint has the wrong dimension")
        self.support_hint = support_hint
        self.name = name

    def __repr__(self):
        return f"OperatorSymbol({self.name!r}, n={self.n}, dim_E={self.dim_E})"

    def batch(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.int64).reshape(-1, self.n)
        if pts.shape[0] == 0:
            return np.zeros((0, self.dim_E, self.dim_E), dtype=np.complex128)
        out = np.asarray(self._batch(pts), dtype=np.complex128)
        return out.reshape(pts.shape[0], self.dim_E, self.dim_E)

    def __call__(self, k) -> np.ndarray:
        k = as_point(k)
        if len(k) != self.n:
            raise ValueError(f"expected a point of dimension {self.n}, got {k}")
        return self.batch(np.array([k]))[0]

    def on_box(self, box: Box) -> np.ndarray:
        """Values on ``box`` as an array of shape ``box.shape + (m, m)``."""
        m = self.dim_E
        out = np.zeros(box.shape + (m, m), dtype=np.complex128)
        sub = box if self.support_hint is None else box.intersect(self.support_hint)
        if sub is None:
            return out
        vals = self.batch(sub.grid()).reshape(sub.shape + (m, m))
        sl = tuple(slice(a - b, a - b + s) for a, b, s in zip(sub.lo, box.lo, sub.shape))
        out[sl] = vals
        return out


def _check_same(M1: OperatorSymbol, M2: OperatorSymbol):
    if M1.n != M2.n or M1.dim_E != M2.dim_E:
        raise ValueError(
            f"incompatible symbols: (n={M1.n}, dim_E={M1.dim_E}) vs (n={M2.n}, dim_E={M2.dim_E})")


def _bounding(b1: Box | None, b2: Box | None) -> Box | None:
    if b1 is None or b2 is None:
        return None
    return Box(tuple(map(min, b1.lo, b2.lo)), tuple(map(max, b1.hi, b2.hi)))


def _eye_batch(npts, m):
    return np.broadcast_to(np.eye(m, dtype=np.complex128), (npts, m, m)).copy()


# --- restriction and differences -------------------------------------------

def restrict(M: OperatorSymbol, G: Box | CoarseCell | None) -> OperatorSymbol:
    """``M_G``: equal to ``M`` on ``G`` and zero elsewhere; ``G=None`` means all of Z^n."""
    if G is None:
        return M
    if isinstance(G, CoarseCell):
        boxes = G.boxes
    else:
        boxes = (G,)

    def batch(pts):
        mask = np.zeros(pts.shape[0], dtype=bool)
        for b in boxes:
            mask |= b.contains_array(pts)
        out = np.zeros((pts.shape[0], M.dim_E, M.dim_E), dtype=np.complex128)
        if mask.any():
            out[mask] = M.batch(pts[mask])
        return out

    hint = boxes[0] if len(boxes) == 1 else _bounding(*boxes)
    if M.support_hint is not None:
        hint = hint.intersect(M.support_hint) or Box(M.support_hint.lo, M.support_hint.lo)
    return OperatorSymbol(M.n, M.dim_E, batch, hint, name=f"{M.name}|restricted")


def forward_difference(M, box: Box, j: int, x) -> np.ndarray:
    """``Delta^{delta_j} M_box(x)`` with the corner convention (zero when ``x_j = lo_j``).

    ``M`` may be an :class:`OperatorSymbol` or any callable ``point -> matrix``;
    the callable is evaluated as given (it is assumed already restricted).
    ``j`` is 1-based.
    """
    x = as_point(x)
    if not 1 <= j <= len(x):
        raise ValueError(f"axis {j} out of range 1..{len(x)}")
    f = (lambda k: restrict(M, box)(k)) if isinstance(M, OperatorSymbol) else M
    if x[j - 1] == box.lo[j - 1]:
        return np.zeros_like(np.asarray(f(x), dtype=np.complex128))
    y = list(x)
    y[j - 1] -= 1
    return np.asarray(f(x), dtype=np.complex128) - np.asarray(f(tuple(y)), dtype=np.complex128)


def gamma_at(xi, alpha) -> tuple:
    """Sign pattern with component ``1`` exactly where ``xi_j != alpha_j``."""
    xi, alpha = as_point(xi), as_point(alpha)
    if any(a > x for x, a in zip(xi, alpha)):
        raise ValueError(f"need alpha <= xi, got {alpha} and {xi}")
    return tuple(int(x != a) for x, a in zip(xi, alpha))


def mixed_difference(M: OperatorSymbol, box: Box, gamma: Sequence[int], xi) -> np.ndarray:
    """``Delta^gamma M_box(xi)`` built by literally composing forward differences."""
    xi = as_point(xi)
    if xi not in box:
        raise ValueError(f"{xi} is not in the box")
    if any(g not in (0, 1) for g in gamma):
        raise ValueError("gamma entries must be 0 or 1")
    Mb = restrict(M, box)
    f = Mb.__call__
    # innermost operator acts on the last axis
    for j in reversed([i + 1 for i, g in enumerate(gamma) if g]):
        f = (lambda g, jj: (lambda k: forward_difference(g, box, jj, k)))(f, j)
    return np.asarray(f(xi), dtype=np.complex128)


def variation_on_box_reference(M: OperatorSymbol, box: Box) -> float:
    """Pointwise evaluation of the variation definition; slow, for checks only."""
    return float(sum(opnorm(mixed_difference(M, box, gamma_at(xi, box.lo), xi)) for xi in box))


def _corner_box(M: OperatorSymbol, box: Box) -> Box | None:
    """Sub-box carrying every nonzero corner difference of ``M_box``."""
    if M.support_hint is None:
        return box
    s = box.intersect(M.support_hint)
    if s is None:
        return None
    hi = tuple(min(h + 1, bh) for h, bh in zip(s.hi, box.hi))
    return Box(s.lo, hi)


def variation_on_box(M: OperatorSymbol, box: Box) -> float:
    """Variation of ``M`` on ``box`` (vectorized corner differences).

    When ``M`` carries a support hint the sum is taken over the part of the
    box where differences can be nonzero.  Large boxes are processed one slab
    of the first axis at a time, carrying the previous slab.
    """
    sub = _corner_box(M, box)
    if sub is None:
        return 0.0
    m = M.dim_E
    # sub lies inside box, and the zero prepended below sub.lo is either
    # outside the box or outside the support, so M itself can be sampled
    if len(sub) <= SLAB_THRESHOLD or sub.n == 1:
        vals = M.on_box(sub)
        diffs = kernels.corner_differences(vals, sub.n)
        return kernels.opnorm_sum(np.ascontiguousarray(diffs).reshape(-1, m, m))
    total = 0.0
    prev = None
    rest = Box(sub.lo[1:], sub.hi[1:])
    for x0 in range(sub.lo[0], sub.hi[0] + 1):
        slab = M.on_box(Box((x0,) + rest.lo, (x0,) + rest.hi))[0]
        cur = kernels.corner_differences(slab, sub.n - 1)
        d = cur if prev is None else cur - prev
        total += kernels.opnorm_sum(np.ascontiguousarray(d).reshape(-1, m, m))
        prev = cur
    return float(total)


def variation_on_cell(M: OperatorSymbol, d: int) -> float:
    """``Var_{D_d} M``: sum of half-cell variations of the restricted symbol; ``||M(0)||`` for d=0."""
    cell = coarse_cell(d, M.n)
    if d == 0:
        return opnorm(M((0,) * M.n))
    return float(sum(variation_on_box(M, b) for b in cell.boxes))


@dataclass
class BVCertificate:
    """Result of :func:`bv_certificate`.

    ``sup`` and ``argmax`` describe the largest cell variation up to ``d_max``;
    ``values[d]`` is ``Var_{D_d} M``; ``tail_norm`` is the largest ``||M(k)||``
    seen on a shell just outside the cells checked.
    """

    sup: float
    argmax: int
    values: np.ndarray = field(repr=False)
    tail_norm: float
    d_max: int

    def nonzero_cells(self, tol: float = 1e-14) -> list:
        return [int(d) for d in np.nonzero(self.values > tol)[0]]


def _tail_norm(M: OperatorSymbol, d_max: int, seed: int = 0) -> float:
    n = M.n
    r = (d_max - 1) // n if d_max >= 1 else 0
    inner = 2 ** (r + 1) - 1 if d_max >= 1 else 0
    outer = 2 * inner + 1
    if (2 * outer + 1) ** n <= 1 << 18:
        pts = Box.cube(n, outer).grid()
        pts = pts[np.abs(pts).max(axis=1) > inner]
    else:
        rng = np.random.default_rng(seed)
        pts = rng.integers(-outer, outer + 1, size=(1 << 15, n))
        ax = rng.integers(0, n, size=pts.shape[0])
        sign = rng.choice([-1, 1], size=pts.shape[0])
        pts[np.arange(pts.shape[0]), ax] = sign * rng.integers(inner + 1, outer + 1, size=pts.shape[0])
    if pts.shape[0] == 0:
        return 0.0
    return float(kernels.opnorms(M.batch(pts)).max())


def bv_certificate(M: OperatorSymbol, d_max: int) -> BVCertificate:
    """Largest cell variation over ``d = 0..d_max`` and the cell attaining it."""
    if d_max < 0:
        raise ValueError("d_max must be >= 0")
    vals = np.array(pmap(lambda d: variation_on_cell(M, d), range(d_max + 1)))
    arg = int(np.argmax(vals))
    return BVCertificate(float(vals[arg]), arg, vals, _tail_norm(M, d_max), int(d_max))


def telescoping_reconstruct(M: OperatorSymbol, alpha, beta, method: str = "direct") -> np.ndarray:
    """Sum of ``Delta^{gamma_xi} M_[alpha,beta](xi)`` over the box; equals ``M(beta)``.

    ``method="direct"`` composes pointwise differences, ``"fast"`` uses the
    vectorized kernel.
    """
    box = Box(alpha, beta)
    if method == "fast":
        diffs = kernels.corner_differences(M.on_box(box), box.n)
        return np.asarray(diffs).reshape(-1, M.dim_E, M.dim_E).sum(axis=0)
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    return sum(mixed_difference(M, box, gamma_at(xi, box.lo), xi) for xi in box)


def abel_sides(a: np.ndarray, b: np.ndarray) -> tuple:
    """Both sides of ``sum_k b_k sum_{l<=k} a_l = sum_k a_k sum_{l>=k} b_l`` on a box array."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("a and b must live on the same box")
    ca = a
    rb = b
    for ax in range(a.ndim):
        ca = np.cumsum(ca, axis=ax)
        rb = np.flip(np.cumsum(np.flip(rb, axis=ax), axis=ax), axis=ax)
    return np.sum(b * ca), np.sum(a * rb)


def abel_identity_check(a, b, alpha=None, beta=None, tol: float = 1e-12) -> bool:
    """Summation-by-parts self-test; ``a``, ``b`` are arrays indexed by the box ``[alpha, beta]``."""
    a = np.asarray(a)
    if alpha is not None and beta is not None and Box(alpha, beta).shape != a.shape:
        raise ValueError("array shape does not match the box")
    lhs, rhs = abel_sides(a, b)
    return bool(abs(lhs - rhs) <= tol * max(1.0, abs(lhs), abs(rhs)))


# --- named symbols ---------------------------------------------------------

def zero_symbol(n: int, dim_E: int = 1) -> OperatorSymbol:
    z = (0,) * n
    return OperatorSymbol(n, dim_E, lambda p: np.zeros((p.shape[0], dim_E, dim_E)), Box(z, z), "zero")


def identity_symbol(n: int, dim_E: int = 1) -> OperatorSymbol:
    return OperatorSymbol(n, dim_E, lambda p: _eye_batch(p.shape[0], dim_E), None, "identity")


def constant_symbol(c, n: int) -> OperatorSymbol:
    c = np.atleast_2d(np.asarray(c, dtype=np.complex128))
    m = c.shape[0]
    return OperatorSymbol(n, m, lambda p: np.broadcast_to(c, (p.shape[0], m, m)).copy(), None, "constant")


def indicator_symbol(mask_fn: Callable, n: int, dim_E: int, hint=None, name="indicator") -> OperatorSymbol:
    def batch(p):
        out = np.zeros((p.shape[0], dim_E, dim_E), dtype=np.complex128)
        idx = np.arange(dim_E)
        out[:, idx, idx] = mask_fn(p)[:, None]
        return out
    return OperatorSymbol(n, dim_E, batch, hint, name)


def riesz_symbol(n: int, dim_E: int = 1) -> OperatorSymbol:
    """``R(k) = I`` iff ``k >= 0`` componentwise."""
    return indicator_symbol(lambda p: np.all(p >= 0, axis=1), n, dim_E, name="riesz")


def neg_symbol(n: int, dim_E: int = 1) -> OperatorSymbol:
    """``N(k) = I`` iff ``k <= 0`` componentwise."""
    return indicator_symbol(lambda p: np.all(p <= 0, axis=1), n, dim_E, name="neg")


def box_symbol(box: Box, dim_E: int = 1) -> OperatorSymbol:
    """Indicator of ``box`` times ``I``; equals ``N_beta R_alpha`` for ``box = [alpha, beta]``."""
    return indicator_symbol(box.contains_array, box.n, dim_E, box, name="box")


def segment_symbol(j: int, n: int, dim_E: int = 1) -> OperatorSymbol:
    """``M_j``: ``I`` on ``k = k_1 delta_1`` with ``7*2^(j-3) <= k_1 <= 2^j``, zero elsewhere."""
    if j < 3:
        raise ValueError(f"segment symbol needs j >= 3, got {j}")
    lo = (7 * 2 ** (j - 3),) + (0,) * (n - 1)
    hi = (2 ** j,) + (0,) * (n - 1)
    s = box_symbol(Box(lo, hi), dim_E)
    s.name = f"segment:{j}"
    return s


def shift_symbol(M: OperatorSymbol, alpha) -> OperatorSymbol:
    """``M_alpha(k) = M(k - alpha)``."""
    a = np.asarray(as_point(alpha), dtype=np.int64)
    if a.size != M.n:
        raise ValueError("shift has the wrong dimension")
    hint = None
    if M.support_hint is not None:
        hint = Box(tuple(np.add(M.support_hint.lo, a)), tuple(np.add(M.support_hint.hi, a)))
    return OperatorSymbol(M.n, M.dim_E, lambda p: M.batch(p - a), hint, f"{M.name}>>{tuple(a.tolist())}")


def sum_symbol(M1: OperatorSymbol, M2: OperatorSymbol) -> OperatorSymbol:
    _check_same(M1, M2)
    return OperatorSymbol(M1.n, M1.dim_E, lambda p: M1.batch(p) + M2.batch(p),
                          _bounding(M1.support_hint, M2.support_hint), f"({M1.name}+{M2.name})")


def scale_symbol(M: OperatorSymbol, c: complex) -> OperatorSymbol:
    return OperatorSymbol(M.n, M.dim_E, lambda p: c * M.batch(p), M.support_hint, f"{c}*{M.name}")


def product_symbol(M1: OperatorSymbol, M2: OperatorSymbol) -> OperatorSymbol:
    """Pointwise matrix product ``(M1 M2)(k) = M1(k) M2(k)``."""
    _check_same(M1, M2)
    hint = None
    if M1.support_hint is not None and M2.support_hint is not None:
        hint = M1.support_hint.intersect(M2.support_hint)
        if hint is None:
            z = (0,) * M1.n
            return OperatorSymbol(M1.n, M1.dim_E, lambda p: np.zeros((p.shape[0], M1.dim_E, M1.dim_E)),
                                  Box(z, z), f"({M1.name}*{M2.name})")
    else:
        hint = M1.support_hint or M2.support_hint
    return OperatorSymbol(M1.n, M1.dim_E, lambda p: M1.batch(p) @ M2.batch(p), hint,
                          f"({M1.name}*{M2.name})")


def block_diag_symbol(M1: OperatorSymbol, M2: OperatorSymbol) -> OperatorSymbol:
    """Direct sum ``M1 (+) M2`` acting on ``E1 x E2``."""
    if M1.n != M2.n:
        raise ValueError("lattice dimensions differ")
    m1, m2 = M1.dim_E, M2.dim_E

    def batch(p):
        out = np.zeros((p.shape[0], m1 + m2, m1 + m2), dtype=np.complex128)
        out[:, :m1, :m1] = M1.batch(p)
        out[:, m1:, m1:] = M2.batch(p)
        return out
    return OperatorSymbol(M1.n, m1 + m2, batch, _bounding(M1.support_hint, M2.support_hint),
                          f"({M1.name}(+){M2.name})")


def random_diagonal_symbol(n: int, dim_E: int, seed: int) -> OperatorSymbol:
    """Random diagonal symbol of bounded variation.

    Each diagonal entry is ``c1 / (1 + |k|^2 / rho^2) + c2 * 1[k >= v]`` with
    unit complex ``c1, c2``, a random scale ``rho`` and a random corner ``v``.
    Both pieces have uniformly bounded cell variation.
    """
    rng = np.random.default_rng(seed)
    c1 = np.exp(2j * np.pi * rng.random(dim_E))
    c2 = np.exp(2j * np.pi * rng.random(dim_E))
    rho = 2.0 ** rng.uniform(0.0, 4.0, dim_E)
    v = rng.integers(-4, 5, size=(dim_E, n))

    def batch(p):
        k2 = np.sum(p.astype(np.float64) ** 2, axis=1)
        out = np.zeros((p.shape[0], dim_E, dim_E), dtype=np.complex128)
        for i in range(dim_E):
            out[:, i, i] = c1[i] / (1.0 + k2 / rho[i] ** 2) + c2[i] * np.all(p >= v[i], axis=1)
        return out
    return OperatorSymbol(n, dim_E, batch, None, f"randdiag:{seed}")


def table_symbol(entries: dict, n: int, dim_E: int, name: str = "table") -> OperatorSymbol:
    """Finitely supported symbol from ``{point: matrix}``; zero elsewhere."""
    if not entries:
        return zero_symbol(n, dim_E)
    pts = np.array([as_point(k) for k in entries], dtype=np.int64).reshape(-1, n)
    box = Box(tuple(pts.min(axis=0)), tuple(pts.max(axis=0)))
    dense = np.zeros(box.shape + (dim_E, dim_E), dtype=np.complex128)
    for k, v in entries.items():
        dense[tuple(np.subtract(as_point(k), box.lo))] = np.asarray(v, dtype=np.complex128).reshape(dim_E, dim_E)
    lo = np.asarray(box.lo)

    def batch(p):
        out = np.zeros((p.shape[0], dim_E, dim_E), dtype=np.complex128)
        inside = box.contains_array(p)
        if inside.any():
            out[inside] = dense[tuple((p[inside] - lo).T)]
        return out
    return OperatorSymbol(n, dim_E, batch, box, name)


def read_symbol_csv(path, n: int) -> OperatorSymbol:
    """Read a finitely supported symbol.

    Layout: one row per lattice point; ``n`` integer columns ``k1..kn``, then
    ``2*m^2`` real columns holding the matrix row-major with real and
    imaginary parts interleaved.  A header row is optional.
    """
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                continue  # header
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0]) - n
    m = int(round((width / 2) ** 0.5))
    if width <= 0 or 2 * m * m != width or any(len(r) != n + width for r in rows):
        raise ValueError(f"{path}: expected {n} index columns plus 2*m^2 value columns")
    entries = {}
    for r in rows:
        v = np.asarray(r[n:])
        entries[tuple(int(x) for x in r[:n])] = (v[0::2] + 1j * v[1::2]).reshape(m, m)
    return table_symbol(entries, n, m, name=f"custom:{path}")


def write_symbol_csv(path, M: OperatorSymbol, box: Box) -> None:
    m = M.dim_E
    vals = M.on_box(box).reshape(-1, m, m)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        head = [f"k{i + 1}" for i in range(M.n)]
        for a, b in itertools.product(range(m), range(m)):
            head += [f"m{a}{b}_re", f"m{a}{b}_im"]
        w.writerow(head)
        for k, v in zip(box.grid(), vals):
            flat = v.ravel()
            w.writerow([int(x) for x in k] + [repr(float(x)) for z in flat for x in (z.real, z.imag)])


def symbol_from_key(key: str, n: int, dim_E: int = 1) -> OperatorSymbol:
    """Registry lookup.

    Keys: ``riesz``, ``neg``, ``identity``, ``zero``, ``segment:J``,
    ``randdiag:SEED``, ``resolvent:SPECFILE[:LAMBDA[:T]]``, ``custom:CSVFILE``.
    """
    head, _, rest = key.partition(":")
    if head == "riesz":
        return riesz_symbol(n, dim_E)
    if head == "neg":
        return neg_symbol(n, dim_E)
    if head == "identity":
        return identity_symbol(n, dim_E)
    if head == "zero":
        return zero_symbol(n, dim_E)
    if head == "segment":
        return segment_symbol(int(rest or 3), n, dim_E)
    if head == "randdiag":
        return random_diagonal_symbol(n, dim_E, int(rest or 0))
    if head == "custom":
        return read_symbol_csv(rest, n)
    if head == "resolvent":
        from .elliptic import read_symbol_spec, resolvent_multiplier
        parts = rest.split(":")
        A = read_symbol_spec(parts[0])
        lam = complex(parts[1]) if len(parts) > 1 and parts[1] else 1.0
        t = float(parts[2]) if len(parts) > 2 and parts[2] else A.time_domain[0]
        return resolvent_multiplier(A, lam, t)
    raise ValueError(f"unknown symbol key {key!r}")
