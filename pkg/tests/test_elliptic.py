import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tmk import elliptic as E
from tmk.acceptance import first_order_laplacian, random_smooth_symbol


def test_laplacian_symbol_values():
    A = E.laplacian(2, 2)
    a = A.eval_symbol(0.0, np.array([[1.0, 2.0]]))
    np.testing.assert_allclose(a[0], 5 * np.eye(2))
    assert A.time_constant


def test_kappa_of_laplacian_right_half_plane():
    r = E.ellipticity_check(E.laplacian(2), E.Sector(math.pi / 2, kappa=math.inf))
    assert r.kappa == pytest.approx(math.sqrt(2), rel=1e-6)
    assert r.scaled_error < 1e-12
    assert not E.ellipticity_check(E.laplacian(2), E.Sector(math.pi / 2, kappa=1.0)).passed


def test_diagonal_symbol_kappa_one_only_on_real_axis():
    A = E.EllipticSymbol(2, 1, {(2,): np.diag([1.0, 2.0])})
    assert E.ellipticity_check(A, E.Sector(0.0, kappa=1.0)).passed
    assert not E.ellipticity_check(A, E.Sector(math.pi / 4, kappa=1.0)).passed


def test_non_elliptic_symbol_gives_witness():
    # a(xi) = xi_1^2 vanishes on the xi_2 axis
    A = E.EllipticSymbol(2, 2, {(2, 0): np.eye(1)})
    r = E.ellipticity_check(A, E.Sector(math.pi / 2, kappa=10.0))
    assert not r.passed and r.witness is not None


def test_omega0_positive_with_first_order_terms():
    A = first_order_laplacian(2)
    kappa = E.ellipticity_check(A, E.Sector(math.pi / 2, kappa=math.inf)).kappa
    om = E.omega0_search(A, E.Sector(math.pi / 2, kappa=kappa))
    assert om.omega0 > 0.01 and om.max_ratio <= 2 * kappa


def test_resolvent_multiplier_and_sector_check():
    A = E.laplacian(1)
    M = E.resolvent_multiplier(A, 2.0, 0.0)
    assert M((1,))[0, 0] == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        E.resolvent_multiplier(A, -5.0, 0.0, sector=E.Sector(math.pi / 2, 0.1))
    with pytest.raises(E.SingularSymbolError) as exc:
        E.resolvent_multiplier(A, -4.0, 0.0)((2,))
    assert exc.value.witness == (2,)


def test_additive_decompositions():
    assert E.additive_decompositions((0, 0)) == [()]
    assert len(E.additive_decompositions((1, 1))) == 3
    assert len(E.additive_decompositions((1, 1, 1))) == 13
    assert len(E.additive_decompositions((2,))) == 2


def test_inverse_difference_scalar():
    S = lambda k: np.array([[k[0] + 3.0]])  # noqa: E731
    # 1/3 - 1/2
    assert E.inverse_difference(S, (1,), (0,))[0, 0] == pytest.approx(-1 / 6)
    assert E.direct_inverse_difference(S, (1,), (0,))[0, 0] == pytest.approx(-1 / 6)


@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 10_000))
def test_inverse_difference_matches_direct(n, m, seed):
    rng = np.random.default_rng(seed)
    S = random_smooth_symbol(rng, n, m)
    alpha = tuple(int(v) for v in rng.integers(0, 2, size=n))
    k = tuple(int(v) for v in rng.integers(-5, 6, size=n))
    d = E.direct_inverse_difference(S, alpha, k)
    np.testing.assert_allclose(E.inverse_difference(S, alpha, k), d, rtol=1e-10, atol=1e-13)


def test_bv_sweep_reports_soft_bound():
    A = E.laplacian(1)
    sector = E.Sector(math.pi / 2, 1e-3, math.sqrt(2))
    rep = E.resolvent_bv_sweep(A, sector, E.lambda_samples(math.pi / 2, 1e-3, np.logspace(0, 2, 3)),
                               [0.0], d_max=6)
    assert rep.soft_bound == 16 and rep.within_soft_bound and not rep.flagged


def test_parse_symbol_spec():
    text = """
    # heat-like symbol with a time-dependent potential
    order = 2
    n = 1
    time = 0, 2
    coeff 2 = [[1, 0], [0, 1]]
    coeff 0 = expr: [[1 + sin(t), 0], [0, 1]]
    """
    A = E.parse_symbol_spec(text)
    assert A.n == 1 and A.dim_E == 2 and not A.time_constant
    np.testing.assert_allclose(A.eval_symbol(math.pi / 2, np.array([[1.0]]))[0], np.diag([3.0, 2.0]))
    with pytest.raises(ValueError):
        E.parse_symbol_spec("order = 2\nn = 1\ncoeff 0 = expr: __import__('os')")
    with pytest.raises(ValueError):
        E.EllipticSymbol(2, 1, {(2,): np.eye(1)}, (0, 1)).eval_symbol(3.0, np.array([[1.0]]))
