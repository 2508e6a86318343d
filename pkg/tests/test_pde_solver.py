import math
import warnings

import numpy as np
import pytest

from tmk import elliptic as E
from tmk import pde_solver as P
from tmk.acceptance import first_order_laplacian, manufactured_problem
from tmk.besov import BesovParams
from tmk.littlewood_paley import make_standard_resolution
from tmk.transform import TrigPolynomial, random_trig_family

LAP2 = E.laplacian(2)


def test_heat_mode_exact():
    u0 = TrigPolynomial.monomial((2, -1), np.array([1.0]))
    sol = P.solve_ivp(P.IvpSpec(LAP2, u0, 1.0, 1))
    assert sol.method == "exact"
    assert abs(sol.final().coefficient((2, -1))[0] - math.exp(-5)) <= 1e-14


def test_zero_data_gives_zero():
    sol = P.solve_ivp(P.IvpSpec(LAP2, TrigPolynomial.monomial((0, 0), np.array([0.0])), 1.0, 5))
    assert np.all(sol.coefs == 0)


def test_constant_forcing_steady_state():
    # u' + (1 + |k|^2) u = f  tends to f / (1 + |k|^2)
    A = E.laplacian(1, shift=1.0)
    f = TrigPolynomial.monomial((1,), np.array([4.0]))
    sol = P.solve_ivp(P.IvpSpec(A, TrigPolynomial.zero(1, 1), 30.0, 1, f, times=[30.0], freqs=[[1]]))
    assert sol.final().coefficient((1,))[0] == pytest.approx(2.0, rel=1e-12)


def test_semigroup_property():
    A = first_order_laplacian(1)
    u0 = random_trig_family(1, 1, 4, 2, seed=1)[0]
    s, t = 0.3, 0.45
    full = P.solve_ivp(P.IvpSpec(A, u0, s + t, 1, times=[s + t])).final()
    half = P.solve_ivp(P.IvpSpec(A, u0, s, 1, times=[s])).final()
    two = P.solve_ivp(P.IvpSpec(A, half, t, 1, times=[t])).final()
    np.testing.assert_allclose(two.coefs, full.coefs, atol=1e-10)


def test_mode_decoupling():
    u0 = random_trig_family(1, 2, 2, 1, seed=2)[0]
    full = P.solve_ivp(P.IvpSpec(LAP2, u0, 0.5, 1)).final()
    one = P.solve_ivp(P.IvpSpec(LAP2, TrigPolynomial.monomial((1, -2), u0.coefficient((1, -2))), 0.5, 1)).final()
    np.testing.assert_array_equal(one.coefficient((1, -2)), full.coefficient((1, -2)))


def test_l2_norm_nonincreasing_without_forcing():
    u0 = random_trig_family(1, 2, 3, 1, seed=3)[0]
    sol = P.solve_ivp(P.IvpSpec(LAP2, u0, 1.0, 10))
    norms = np.linalg.norm(sol.coefs.reshape(len(sol.times), -1), axis=1)
    assert np.all(np.diff(norms) <= 1e-15)


def test_manufactured_solution_second_order():
    errs = []
    for steps in (20, 40, 80):
        spec, exact = manufactured_problem(steps)
        sol = P.solve_ivp(spec)
        assert sol.method == "trbdf2"
        errs.append(np.linalg.norm(sol.final().coefficient((1, 1)) - exact))
    assert P.convergence_order(errs).min() >= 1.9


def test_exact_method_refuses_time_dependent_symbol():
    spec, _ = manufactured_problem(10)
    spec.method = "exact"
    with pytest.raises(ValueError):
        P.solve_ivp(spec)


def test_implicit_path_rejects_off_grid_times():
    spec, _ = manufactured_problem(10)
    spec.times = [0.123]
    with pytest.raises(ValueError):
        P.solve_ivp(spec)


def test_residual_norms_ivp():
    u0 = TrigPolynomial.monomial((1, 1), np.array([1.0]))
    spec = P.IvpSpec(LAP2, u0, 1.0, 4)
    rep = P.residual_norms(P.solve_ivp(spec), spec, BesovParams(0, 2, 2), make_standard_resolution(2))
    assert rep["residual_max"] <= 1e-10
    spec2, _ = manufactured_problem(20)
    r20 = P.residual_norms(P.solve_ivp(spec2), spec2, BesovParams(0, 2, 2), make_standard_resolution(2))
    spec4, _ = manufactured_problem(40)
    r40 = P.residual_norms(P.solve_ivp(spec4), spec4, BesovParams(0, 2, 2), make_standard_resolution(2))
    assert 3.0 < r20["residual_max"] / r40["residual_max"] < 5.0


def test_rough_coefficient_warns():
    A = E.EllipticSymbol(2, 1, {(2,): np.eye(1), (0,): lambda t: np.eye(1) * np.sign(t - 0.5004)})
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        P.solve_ivp(P.IvpSpec(A, TrigPolynomial.monomial((1,), np.array([1.0])), 1.0, 8))
    assert any("Hoelder" in str(x.message) for x in w)


def test_periodic_closed_form():
    f = TrigPolynomial.monomial((3, 1, -2), np.array([1.0]))
    u = P.solve_periodic(P.PeriodicSpec(LAP2, 1.0, f))
    assert u.coefficient((3, 1, -2))[0] == pytest.approx(1 / (3j + 1 + 5), rel=1e-15)


def test_periodic_preserves_realness():
    # conjugate-symmetric forcing and a real symbol give a conjugate-symmetric solution
    g = random_trig_family(1, 3, 2, 1, seed=4)[0]
    flipped = TrigPolynomial(-g.freqs, np.conj(g.coefs), 3)
    f = (g + flipped) * 0.5
    u = P.solve_periodic(P.PeriodicSpec(LAP2, 2.0, f))
    for k, c in zip(u.freqs, u.coefs):
        np.testing.assert_allclose(u.coefficient(tuple(-k)), np.conj(c), atol=1e-15)


def test_periodic_zero_and_residual():
    A = first_order_laplacian(1)
    z = P.solve_periodic(P.PeriodicSpec(A, 1.0, TrigPolynomial.zero(2, 2)))
    assert len(z) == 0
    f = random_trig_family(1, 2, 5, 2, seed=5)[0]
    spec = P.PeriodicSpec(A, 1.0, f)
    rep = P.residual_norms(P.solve_periodic(spec), spec, BesovParams(0, 2, 2), None)
    assert rep["residual_max"] <= 1e-12 * rep["f_l2"]


def test_periodic_guards():
    f = TrigPolynomial.monomial((0, 0), np.array([1.0]))
    with pytest.raises(ValueError):
        P.PeriodicSpec(E.laplacian(1), 0.1, f, omega0=0.5)
    with pytest.raises(E.SingularSymbolError):
        P.solve_periodic(P.PeriodicSpec(E.laplacian(1), 0.0, f))
