import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tmk import besov as B
from tmk.littlewood_paley import make_shifted_resolution, make_standard_resolution
from tmk.symbol_calculus import identity_symbol, riesz_symbol
from tmk.transform import TrigPolynomial, random_trig_family

RES1 = make_standard_resolution(1)


def test_params_validation():
    with pytest.raises(ValueError):
        B.BesovParams(0, 1, 2)
    with pytest.raises(ValueError):
        B.BesovParams(0, 2, 0.5)
    with pytest.raises(ValueError):
        B.BesovParams(0, 2, 2, J=2)


def test_truncation_levels():
    assert B.required_J(0) == 3 and B.required_J(4) == 4 and B.required_J(3.9) == 3
    assert B.default_J(100) == 9
    f = TrigPolynomial.monomial((40,), np.array([1.0]))
    with pytest.raises(ValueError, match="J >= 7"):
        B.besov_norm(f, B.BesovParams(0, 2, 2, J=5), RES1)


@given(st.floats(-2, 2), st.sampled_from([1.5, 2, 3]), st.sampled_from([1, 2, math.inf]))
def test_constant_function(s, p, q):
    x = np.array([1.0, -2.0j])
    f = TrigPolynomial.monomial((0,), x)
    assert B.besov_norm(f, B.BesovParams(s, p, q), RES1) == pytest.approx(math.sqrt(5), rel=1e-12)


@pytest.mark.parametrize("j", [1, 3, 6])
def test_plateau_mode(j):
    x = np.array([2.0])
    prm = B.BesovParams(1.5, 3, 2)
    got = B.besov_norm(TrigPolynomial.monomial((2 ** j,), x), prm, RES1)
    assert got == pytest.approx(2.0 ** (1.5 * j) * 2.0, rel=1e-10)


def test_parseval_oracle():
    f = random_trig_family(1, 1, 20, 2, seed=4)[0]
    J = B.default_J(20)
    w = np.stack([RES1.eval(j, f.freqs.astype(float)) for j in range(J + 1)])
    oracle = math.sqrt(float(np.sum(w[:, :, None] ** 2 * np.abs(f.coefs) ** 2)))
    assert B.besov_norm(f, B.BesovParams(0, 2, 2), RES1) == pytest.approx(oracle, rel=1e-12)


def test_lp_block_drops_zero_weights():
    f = random_trig_family(1, 1, 20, 1, seed=0)[0]
    blk = B.lp_block(f, RES1, 2)
    lo, hi = RES1.support_radii(2)
    assert np.all((np.abs(blk.freqs) > lo) & (np.abs(blk.freqs) < hi))


def test_aggregate_q_inf():
    bn = np.array([[1.0, 1.0, 1.0]])
    assert B.aggregate(bn, 1, math.inf)[0] == 4.0
    assert B.aggregate(bn, 0, 1)[0] == 3.0


def test_equivalence_same_resolution_is_one():
    fs = random_trig_family(10, 1, 8, 1, seed=1)
    r = B.norm_equivalence_experiment(fs, B.BesovParams(0.5, 3, 2), RES1, RES1)
    assert tuple(r) == (1.0, 1.0)


def test_equivalence_bracket_is_finite():
    fs = random_trig_family(30, 1, 16, 1, seed=2)
    c, C = B.norm_equivalence_experiment(fs, B.BesovParams(0, 2, 2), RES1, make_shifted_resolution(1))
    assert 0.3 < c <= C < 3


def test_identity_multiplier_ratio_is_one():
    fs = random_trig_family(8, 1, 8, 2, seed=3)
    r = B.multiplier_ratios(identity_symbol(1, 2), fs, B.BesovParams(1, 3, 1), RES1)
    np.testing.assert_allclose(r, 1.0, rtol=1e-12)


def test_riesz_experiment_p2_at_most_one():
    fs = random_trig_family(20, 1, 8, 2, seed=4)
    assert B.riesz_box_experiment(fs, 2).constant <= 1 + 1e-12


def test_proof_constant():
    assert B.proof_constant(1.0, 1) == 4.0
    assert B.proof_constant(1.0, 2) == 2 * 2 * 3


def test_multiplier_certificate_report():
    fs = random_trig_family(20, 1, 16, 2, seed=5)
    rep = B.multiplier_bound_certificate(riesz_symbol(1, 2), fs, B.BesovParams(0, 2, 2), RES1)
    assert rep.bv_sup == pytest.approx(1.0)
    assert 0 < rep.op_ratio <= 1 + 1e-12
    assert set(rep.row()) >= {"symbol", "op_ratio", "bv_sup", "empirical_C"}


@pytest.mark.parametrize("j", [3, 4, 5])
def test_segment_identity(j):
    rng = np.random.default_rng(j)
    count = 3 * 2 ** (j - 1) - 7 * 2 ** (j - 3) + 1
    h = B.segment_test_polynomial(j, 2, rng.standard_normal((count, 2)))
    lhs, rhs = B.identity_449(j, h, B.BesovParams(-0.5, 1.5, 3), make_standard_resolution(2))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_segment_test_polynomial_length():
    with pytest.raises(ValueError):
        B.segment_test_polynomial(3, 1, np.ones((3, 1)))
