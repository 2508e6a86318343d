"""Multi-index geometry on Z^n: boxes, the coarse dyadic decomposition, and
the cover of Littlewood-Paley supports by coarse cells.

Lattice points are plain tuples of Python ints.  Boxes are closed integer
rectangles ``[lo, hi]`` and are enumerated in lexicographic order (last
coordinate fastest), which is also numpy's C order for box-shaped arrays.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import kernels

#: Largest dimension accepted by routines that materialize cells.
MAX_DIM = 4

Point = tuple


def as_point(k: Sequence[int]) -> Point:
    return tuple(int(x) for x in k)


def check_dim(n: int) -> int:
    n = int(n)
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if n > MAX_DIM:
        raise ValueError(f"dimension {n} exceeds the configured cap MAX_DIM={MAX_DIM}")
    return n


@dataclass(frozen=True)
class Box:
    """Closed integer box ``{k : lo <= k <= hi}``."""

    lo: Point
    hi: Point

    def __post_init__(self):
        lo, hi = as_point(self.lo), as_point(self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError(f"corner dimensions differ or are empty: {lo}, {hi}")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"box corners not ordered: {lo} !<= {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, n: int, radius: int) -> "Box":
        return cls((-radius,) * n, (radius,) * n)

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple:
        return tuple(b - a + 1 for a, b in zip(self.lo, self.hi))

    def __len__(self) -> int:
        return int(np.prod(self.shape))

    def __contains__(self, k) -> bool:
        return len(k) == self.n and all(a <= x <= b for x, a, b in zip(k, self.lo, self.hi))

    def __iter__(self) -> Iterator[Point]:
        return itertools.product(*(range(a, b + 1) for a, b in zip(self.lo, self.hi)))

    def points(self) -> list:
        return list(self)

    def grid(self) -> np.ndarray:
        """All points as an ``(len(self), n)`` int64 array in lexicographic order."""
        axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(self.lo, self.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def contains_array(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts)
        return np.all((pts >= np.asarray(self.lo)) & (pts <= np.asarray(self.hi)), axis=-1)

    def intersect(self, other: "Box") -> "Box | None":
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        if any(a > b for a, b in zip(lo, hi)):
            return None
        return Box(lo, hi)


def box_points(b: Box) -> list:
    """Points of ``b`` in lexicographic order."""
    return b.points()


@dataclass(frozen=True)
class CoarseCell:
    """One cell ``D_d`` of the coarse decomposition of Z^n.

    For ``d >= 1`` we have ``d = n*r + l`` with ``l`` in ``1..n``; the cell
    splits into ``plus_box`` (``k_l > 0``) and ``minus_box`` (``k_l < 0``).
    For ``d = 0`` the cell is ``{0}``, stored as ``plus_box`` with no minus half.
    """

    d: int
    n: int
    r: int
    l: int
    plus_box: Box
    minus_box: Box | None

    @property
    def boxes(self) -> tuple:
        return (self.plus_box,) if self.minus_box is None else (self.plus_box, self.minus_box)

    def __len__(self) -> int:
        return sum(len(b) for b in self.boxes)

    def __contains__(self, k) -> bool:
        return any(k in b for b in self.boxes)

    def points(self) -> list:
        return [k for b in self.boxes for k in b]


def split_index(d: int, n: int) -> tuple:
    """Write ``d >= 1`` as ``n*r + l`` with ``r >= 0`` and ``1 <= l <= n``."""
    r, l0 = divmod(d - 1, n)
    return r, l0 + 1


def coarse_cell(d: int, n: int) -> CoarseCell:
    d, n = int(d), check_dim(n)
    if d < 0:
        raise ValueError(f"cell index must be >= 0, got {d}")
    if d == 0:
        zero = (0,) * n
        return CoarseCell(0, n, 0, 0, Box(zero, zero), None)
    r, l = split_index(d, n)
    big, small = 2 ** (r + 1) - 1, 2 ** r - 1
    lo, hi = [], []
    for i in range(1, n + 1):
        if i < l:
            lo.append(-big), hi.append(big)
        elif i > l:
            lo.append(-small), hi.append(small)
        else:
            lo.append(2 ** r), hi.append(big)
    plus = Box(lo, hi)
    lo_m, hi_m = list(lo), list(hi)
    lo_m[l - 1], hi_m[l - 1] = -big, -(2 ** r)
    return CoarseCell(d, n, r, l, plus, Box(lo_m, hi_m))


def cell_index_of(k: Sequence[int]) -> int:
    """The unique ``d`` with ``k`` in ``D_d``."""
    k = as_point(k)
    mx = max(abs(x) for x in k)
    if mx == 0:
        return 0
    r = mx.bit_length() - 1
    l = max(i + 1 for i, x in enumerate(k) if abs(x) >= 2 ** r)
    return len(k) * r + l


def cell_indices(points: np.ndarray) -> np.ndarray:
    """Vectorized :func:`cell_index_of` over an ``(N, n)`` integer array."""
    return kernels.cell_indices(np.ascontiguousarray(points, dtype=np.int64))


def cells_up_to_radius(radius: int, n: int) -> int:
    """Largest cell index meeting the cube ``[-radius, radius]^n``."""
    if radius <= 0:
        return 0
    r = int(radius).bit_length() - 1
    return n * r + n


def cover_start(j: int, n: int) -> int:
    """``m`` = smallest non-negative integer with ``sqrt(n) <= 2**m``."""
    m = 0
    while 4 ** m < n:
        m += 1
    return m


def dyadic_support_cover(j: int, n: int) -> list:
    """Indices ``d`` whose cells cover ``supp(phi_j)`` on the lattice.

    Negative indices of the underlying range are clipped to ``0`` (``D_0``).
    """
    j, n = int(j), int(n)
    if j < 0:
        raise ValueError("block index must be >= 0")
    if j == 0:
        return list(range(0, n + 1))
    m = cover_start(j, n)
    first = max(0, n * (j - m - 1) + 1)
    return list(range(first, n * (j + 1) + 1))
