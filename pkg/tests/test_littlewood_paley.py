import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tmk.littlewood_paley import UnityResolution, make_shifted_resolution, make_standard_resolution, verify_resolution


@pytest.mark.parametrize("n", [1, 2, 3])
def test_standard_resolution_passes(n):
    rep = verify_resolution(make_standard_resolution(n), J=10, samples=3000, seed=n)
    assert rep.ok, rep.rows()
    assert rep.partition_deviation <= 1e-12


@given(st.floats(0, 600), st.integers(1, 3))
def test_partition_sums_to_one(r, n):
    res = make_standard_resolution(n)
    xi = np.zeros(n)
    xi[0] = r
    assert sum(res.eval(j, xi) for j in range(12)) == pytest.approx(1.0, abs=1e-12)


def test_plateau_and_supports():
    res = make_standard_resolution(1)
    for j in range(1, 8):
        assert res.eval(j, np.array([2.0 ** j])) == 1.0
        lo, hi = res.support_radii(j)
        assert res.eval(j, np.array([lo])) == 0.0 and res.eval(j, np.array([hi])) == 0.0
    assert res.eval(0, np.array([0.0])) == 1.0


def test_blocks_radius_matches_eval():
    res = make_standard_resolution(2)
    r = np.linspace(0, 300, 401)
    blocks = res.blocks_radius(r, 9)
    for j in (0, 3, 8):
        np.testing.assert_allclose(blocks[j], res.eval_radius(j, r), atol=1e-15)


def test_shifted_resolution_is_a_partition():
    rep = verify_resolution(make_shifted_resolution(1), J=10, samples=2000)
    assert rep.partition_deviation <= 1e-12 and rep.support_violations == 0


class _Scaled:
    """Negative control: phi_0 shrunk by 10%, everything else unchanged."""

    def __init__(self, res):
        self.res, self.n = res, res.n
        self.smoothness_order = 1

    def support_radii(self, j):
        return self.res.support_radii(j)

    def eval(self, j, xi):
        v = self.res.eval(j, xi)
        return 0.9 * v if j == 0 else v


def test_broken_partition_is_detected():
    rep = verify_resolution(_Scaled(make_standard_resolution(1)), J=8, samples=2000)
    assert not rep.ok
    assert rep.partition_deviation > 0.05


@pytest.mark.parametrize("kw", [dict(r0_out=2.5), dict(a1=0.5), dict(p_lo=1.4, r0_in=1.2),
                                dict(b1=7.0)])
def test_invalid_radii_rejected(kw):
    with pytest.raises(ValueError):
        UnityResolution(1, **kw)


def test_derivative_ratios_stay_bounded_in_j():
    rep = verify_resolution(make_standard_resolution(1), J=12, samples=6000)
    by_j = rep.derivative_ratios_by_j
    for order, vals in by_j.items():
        assert vals[1:].max() < 1e5
        # no growth with the scale
        assert vals[-4:].max() < 10 * vals[1:5].max()
