import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tmk.lattice import (Box, cell_index_of, cell_indices, cells_up_to_radius, coarse_cell, cover_start,
                         dyadic_support_cover, split_index)

points = st.integers(1, 3).flatmap(lambda n: st.tuples(*[st.integers(-200, 200)] * n))


def test_box_basics():
    b = Box((0, -1), (2, 1))
    assert len(b) == 9 and b.shape == (3, 3)
    assert (1, 0) in b and (3, 0) not in b
    assert list(b)[:2] == [(0, -1), (0, 0)]
    assert b.intersect(Box((2, 1), (5, 5))) == Box((2, 1), (2, 1))
    assert b.intersect(Box((3, 3), (4, 4))) is None
    with pytest.raises(ValueError):
        Box((1,), (0,))


def test_first_cells_one_dimension():
    # D_1 = {+-1}, D_2 = {+-2, +-3}, D_3 = {+-4..+-7}
    assert sorted(coarse_cell(1, 1).points()) == [(-1,), (1,)]
    assert sorted(coarse_cell(2, 1).points()) == [(-3,), (-2,), (2,), (3,)]
    assert len(coarse_cell(3, 1)) == 8


def test_cell_shape_two_dimensions():
    c = coarse_cell(3, 2)  # r = 1, l = 1
    assert (c.r, c.l) == (1, 1)
    assert c.plus_box == Box((2, -1), (3, 1))
    assert c.minus_box == Box((-3, -1), (-2, 1))
    c = coarse_cell(4, 2)  # r = 1, l = 2: first axis already runs over the full shell
    assert c.plus_box == Box((-3, 2), (3, 3))


def test_split_index():
    assert split_index(1, 2) == (0, 1)
    assert split_index(6, 3) == (1, 3)


@given(points)
def test_cell_index_matches_membership(k):
    d = cell_index_of(k)
    if d == 0:
        assert not any(k)
    else:
        assert k in coarse_cell(d, len(k))
        assert k not in coarse_cell(d + 1, len(k))


def test_vectorized_cell_indices(rng):
    pts = rng.integers(-70, 71, size=(2000, 3))
    assert [cell_index_of(tuple(p)) for p in pts] == cell_indices(pts).tolist()


@pytest.mark.parametrize("n", [1, 2, 3])
def test_cells_partition_cube(n):
    R = 16
    seen = {}
    for d in range(cells_up_to_radius(R, n) + 1):
        pts = [(0,) * n] if d == 0 else coarse_cell(d, n).points()
        for k in pts:
            if max(map(abs, k)) <= R:
                assert k not in seen
                seen[k] = d
    assert len(seen) == (2 * R + 1) ** n


def test_cover_start():
    assert [cover_start(1, n) for n in (1, 2, 3, 4)] == [0, 1, 1, 1]


def test_support_cover_ranges():
    assert dyadic_support_cover(0, 2) == [0, 1, 2]
    assert dyadic_support_cover(3, 1) == [3, 4]
    assert dyadic_support_cover(3, 2) == [3, 4, 5, 6, 7, 8]
    with pytest.raises(ValueError):
        dyadic_support_cover(-1, 1)
