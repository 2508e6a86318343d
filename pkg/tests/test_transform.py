import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tmk.transform import (GridFunction, TrigPolynomial, apply_multiplier, lp_norm, lp_norm_report,
                           lp_norms_batch, random_trig_family, read_trig_csv, write_trig_csv,
                           young_bound_experiment, young_constant)
from tmk.symbol_calculus import riesz_symbol


def test_duplicates_are_summed_and_sorted():
    f = TrigPolynomial([[2], [-1], [2]], [[1.0], [2.0], [3.0]])
    assert f.freqs.ravel().tolist() == [-1, 2]
    assert f.coefficient((2,))[0] == 4.0
    assert f.coefficient((7,))[0] == 0.0


def test_evaluate_and_coefficients_roundtrip(rng):
    f = random_trig_family(1, 2, 3, 2, seed=5)[0]
    g = GridFunction(f.grid_values(8))
    for k in [(0, 0), (3, -2), (-1, 1)]:
        np.testing.assert_allclose(g.fourier_coefficient(k), f.coefficient(k), atol=1e-12)
    x = rng.uniform(0, 2 * math.pi, size=2)
    want = sum(np.exp(1j * (k @ x)) * c for k, c in zip(f.freqs, f.coefs))
    np.testing.assert_allclose(f.evaluate(x), want, atol=1e-12)


def test_arithmetic():
    f = TrigPolynomial.monomial((1,), np.array([1.0]))
    g = TrigPolynomial.monomial((2,), np.array([2.0]))
    h = (f + g) * 3 - f
    assert h.coefficient((1,))[0] == 2 and h.coefficient((2,))[0] == 6


@pytest.mark.parametrize("p", [1.5, 2, 3, 4, math.inf])
def test_monomial_norms(p):
    x = np.array([3.0, 4.0j])
    assert lp_norm(TrigPolynomial.monomial((2, -1), x), p) == pytest.approx(5.0, rel=1e-12)


@given(st.integers(0, 1000))
def test_parseval(seed):
    f = random_trig_family(1, 2, 4, 2, seed=seed)[0]
    rep = lp_norm_report(f, 2)
    assert rep.values[0] == pytest.approx(rep.parseval[0], rel=1e-12)


def test_even_p_exact_grid():
    # |1 + e^{ix}|^4 averages to 6
    f = TrigPolynomial([[0], [1]], [[1.0], [1.0]])
    assert lp_norm(f, 4) == pytest.approx(6 ** 0.25, rel=1e-13)
    assert lp_norm(f, math.inf) == pytest.approx(2.0, rel=1e-12)


def test_odd_p_against_quadrature():
    # ||1 + e^{ix}||_3^3 = mean |2 cos(x/2)|^3 = 32 / (3 pi)
    f = TrigPolynomial([[0], [1]], [[1.0], [1.0]])
    assert lp_norm(f, 3) == pytest.approx((32 / (3 * math.pi)) ** (1 / 3), rel=1e-8)


def test_batched_norms_match_single():
    fs = random_trig_family(4, 1, 6, 1, seed=3)
    coefs = np.stack([f.coefs for f in fs])
    got = lp_norms_batch(fs[0].freqs, coefs, 3).values
    # batch and single calls may stop doubling at different grids; both meet rtol=1e-8
    np.testing.assert_allclose(got, [lp_norm(f, 3) for f in fs], rtol=1e-8)


def test_multiplier_application():
    f = TrigPolynomial([[-1], [0], [2]], [[1.0], [2.0], [3.0]])
    g = apply_multiplier(riesz_symbol(1), f)
    assert g.coefficient((-1,))[0] == 0 and g.coefficient((2,))[0] == 3
    with pytest.raises(ValueError):
        apply_multiplier(riesz_symbol(2), f)


def test_csv_roundtrip(tmp_path):
    f = random_trig_family(1, 2, 2, 3, seed=1)[0]
    write_trig_csv(tmp_path / "f.csv", f)
    g = read_trig_csv(tmp_path / "f.csv")
    np.testing.assert_array_equal(g.freqs, f.freqs)
    np.testing.assert_allclose(g.coefs, f.coefs, rtol=0, atol=0)


@pytest.mark.parametrize("n", [1, 2])
def test_young_constant_gaussian(n):
    # inverse transform of exp(-|xi|^2/2) is positive, so its L^1 norm equals phi(0) = 1
    phi = lambda xi: np.exp(-0.5 * np.sum(xi ** 2, axis=-1))  # noqa: E731
    yc = young_constant(phi, n, radius=10.0)
    assert yc.converged
    assert yc.value == pytest.approx(1.0, rel=1e-6)


def test_young_bound_holds_for_smooth_bump():
    phi = lambda xi: np.exp(-0.5 * np.sum(np.asarray(xi) ** 2, axis=-1) / 4)  # noqa: E731
    fs = random_trig_family(20, 1, 8, 1, seed=0)
    out = young_bound_experiment(phi, fs, 3, bound=1.0)
    assert out["holds"] and out["max_ratio"] <= 1.0
