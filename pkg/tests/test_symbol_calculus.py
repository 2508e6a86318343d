import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tmk import symbol_calculus as S
from tmk.lattice import Box


def _table(rng, box, m=2):
    return S.table_symbol({k: rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
                           for k in box}, box.n, m)


boxes = st.integers(1, 3).flatmap(lambda n: st.tuples(
    st.lists(st.integers(-5, 5), min_size=n, max_size=n),
    st.lists(st.integers(0, 3), min_size=n, max_size=n))).map(
    lambda t: Box(tuple(t[0]), tuple(a + b for a, b in zip(*t))))


@given(boxes, st.integers(0, 10_000))
def test_fast_variation_matches_reference(box, seed):
    rng = np.random.default_rng(seed)
    M = _table(rng, Box(tuple(v - 1 for v in box.lo), tuple(v + 1 for v in box.hi)))
    assert S.variation_on_box(M, box) == pytest.approx(S.variation_on_box_reference(M, box), rel=1e-12)


@given(boxes, st.integers(0, 10_000))
def test_telescoping_recovers_corner_value(box, seed):
    M = _table(np.random.default_rng(seed), box)
    for method in ("direct", "fast"):
        np.testing.assert_allclose(S.telescoping_reconstruct(M, box.lo, box.hi, method), M(box.hi),
                                   atol=1e-12)


@given(st.lists(st.integers(1, 5), min_size=1, max_size=3), st.integers(0, 10_000))
def test_abel_identity(shape, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(shape), rng.standard_normal(shape)
    assert S.abel_identity_check(a, b)


def test_mixed_difference_is_composition():
    M = S.table_symbol({k: np.array([[float(k[0] ** 2 + 3 * k[1])]]) for k in Box((0, 0), (3, 3))}, 2, 1)
    box = Box((0, 0), (3, 3))
    # Delta_1 Delta_2 of k1^2 + 3 k2 vanishes away from the corner
    assert S.mixed_difference(M, box, (1, 1), (2, 2))[0, 0] == 0
    assert S.forward_difference(M, box, 1, (2, 1))[0, 0] == pytest.approx(2 ** 2 - 1)
    # differences vanish on the corner coordinate; gamma_at skips that axis
    assert S.mixed_difference(M, box, (1, 0), (0, 2))[0, 0] == 0
    assert S.gamma_at((0, 2), box.lo) == (0, 1)
    assert S.mixed_difference(M, box, (0, 1), (0, 2))[0, 0] == pytest.approx(3.0)


def test_riesz_variation_is_one_per_cell():
    for n in (1, 2):
        cert = S.bv_certificate(S.riesz_symbol(n), 3 * n)
        assert cert.sup == pytest.approx(1.0)


def test_constant_symbol_keeps_only_corner_terms():
    c = np.array([[2.0, 1.0], [0.0, 1.0]])
    cert = S.bv_certificate(S.constant_symbol(c, 2), 6)
    # one corner term per half-cell, two half-cells per cell
    np.testing.assert_allclose(cert.values, [np.linalg.norm(c, 2)] + [2 * np.linalg.norm(c, 2)] * 6)
    assert S.variation_on_box(S.constant_symbol(c, 2), Box((3, 3), (9, 5))) == pytest.approx(
        np.linalg.norm(c, 2))


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("j", [3, 4, 5])
def test_segment_symbol_true_variation(n, j):
    # measured by enumeration: 2^n at d = n j + 1 and 2^(n-1) at d = n (j-1) + 1
    cert = S.bv_certificate(S.segment_symbol(j, n), n * j + 2 * n)
    assert cert.nonzero_cells() == [n * (j - 1) + 1, n * j + 1]
    assert cert.values[n * j + 1] == pytest.approx(2.0 ** n)
    assert cert.values[n * (j - 1) + 1] == pytest.approx(2.0 ** (n - 1))


def test_segment_rejects_small_j():
    with pytest.raises(ValueError):
        S.segment_symbol(2, 1)


def test_shift_product_and_box():
    r = S.riesz_symbol(1)
    shifted = S.shift_symbol(r, (3,))
    assert shifted((2,))[0, 0] == 0 and shifted((3,))[0, 0] == 1
    box = S.product_symbol(r, S.shift_symbol(S.neg_symbol(1), (4,)))
    vals = [box((k,))[0, 0] for k in range(-2, 7)]
    assert vals == [0, 0, 1, 1, 1, 1, 1, 0, 0]
    direct = S.box_symbol(Box((0,), (4,)))
    assert all(direct((k,))[0, 0] == v for k, v in zip(range(-2, 7), vals))


def test_symbol_keys():
    assert S.symbol_from_key("riesz", 2).name == "riesz"
    assert S.symbol_from_key("segment:4", 1, 2).dim_E == 2
    M = S.symbol_from_key("randdiag:3", 1, 2)
    assert np.allclose(M((5,)), np.diag(np.diag(M((5,)))))
    with pytest.raises(ValueError):
        S.symbol_from_key("nonsense", 1)


def test_symbol_csv_roundtrip(tmp_path, rng):
    box = Box((-2, 0), (1, 2))
    M = _table(rng, box)
    path = tmp_path / "m.csv"
    S.write_symbol_csv(path, M, box)
    back = S.read_symbol_csv(path, 2)
    for k in box:
        np.testing.assert_allclose(back(k), M(k))
    np.testing.assert_allclose(back((5, 5)), 0)


def test_slab_mode_matches_direct(monkeypatch, rng):
    box = Box((0, 0), (20, 20))
    M = _table(rng, Box((-1, -1), (21, 21)))
    want = S.variation_on_box(M, box)
    monkeypatch.setattr(S, "SLAB_THRESHOLD", 50)
    assert S.variation_on_box(M, box) == pytest.approx(want, rel=1e-12)
