import math

import mpmath as mp
import numpy as np
import pytest
from numpy.testing import assert_allclose

from implosion import jets
from implosion.cutoffs import (
    STEP_MAX_SLOPE,
    chi1_jet,
    chi2_jet,
    cutoff_tables,
    frak_x_jet,
    step,
    step_jet,
    xhat_jet,
)


def mp_step(t):
    f = lambda x: mp.exp(-1 / x) if x > 0 else mp.mpf(0)
    return f(t) / (f(t) + f(1 - t))


@pytest.mark.parametrize("t0", [0.2, 0.5, 0.73])
def test_step_jet_matches_mpmath_derivatives(t0):
    mp.mp.dps = 30
    j = step_jet(t0, 4)[:, 0]
    ref = [float(mp.diff(mp_step, t0, k)) / math.factorial(k) for k in range(5)]
    assert_allclose(j, ref, rtol=1e-9, atol=1e-12)


def test_step_values_and_slope():
    assert_allclose(step(np.array([-1.0, 0.0, 0.5, 1.0, 2.0])), [0.0, 0.0, 0.5, 1.0, 1.0])
    t = np.linspace(0.01, 0.99, 981)
    slope = step_jet(t, 1)[1]
    assert_allclose(slope.max(), STEP_MAX_SLOPE, rtol=1e-6)
    assert_allclose(step_jet(0.5, 1)[1, 0], 2.0, rtol=1e-14)


def test_chi_plateaus_and_supports():
    C0 = 10.0
    R = np.array([0.0, 5.0, 10.0, 15.0, 19.9, 20.0, 25.0, 30.0])
    assert_allclose(chi1_jet(R, C0)[0], [1, 1, 1, 0, 0, 0, 0, 0])
    c2 = chi2_jet(R, C0)[0]
    assert_allclose(c2[:6], 1.0)
    assert c2[6] == 0.0 and c2[7] == 0.0
    assert np.all(chi2_jet(np.array([21.0, 24.0]), C0)[0] > 0)
    tab = cutoff_tables(np.linspace(0, 30, 61), C0)
    assert np.all(tab.dchi1 <= 0) and np.all(tab.dchi2 <= 0)


def test_frak_x_gradient_bound():
    z = np.linspace(0.0, 1.5, 30001)
    j = frak_x_jet(z, 1)
    assert_allclose(j[0][z <= 0.5], 1.0)
    assert_allclose(j[0][z >= 1.0], 0.0)
    assert np.max(np.abs(j[1])) <= 4.0 + 1e-9
    assert np.max(np.abs(j[1])) > 3.99


def test_xhat_scaling():
    s = 3.0
    R = np.linspace(0.0, 2.0 * math.exp(s), 1001)
    j = xhat_jet(R, s, 1)
    assert_allclose(j[0], frak_x_jet(R * math.exp(-s))[0])
    assert np.max(np.abs(j[1])) <= 4.0 * math.exp(-s) * (1 + 1e-9)


def test_jet_arithmetic_against_closed_forms():
    x0 = np.array([0.3, 1.1])
    K = 6
    x = jets.variable(x0, K)
    one = jets.constant(np.ones(2), K)
    # exp(x) / (1 + x^2)
    f = jets.div(jets.exp(x), one + jets.mul(x, x))
    for k, xv in enumerate(x0):
        ref = mp.taylor(lambda t: mp.exp(t) / (1 + t * t), xv, K)
        assert_allclose(f[:, k], [float(c) for c in ref], rtol=1e-12)
    d = jets.derivatives(f)
    assert_allclose(d[1], f[1])
    assert_allclose(d[3], 6.0 * f[3])


def test_jet_compose_and_shift():
    K = 5
    x0 = np.array([0.4])
    # log(1 + h / x0) composed into exp gives 1 + h / x0
    logser = np.zeros((K + 1, 1))
    for k in range(1, K + 1):
        logser[k] = (-1.0) ** (k + 1) / k / x0 ** k
    e = jets.compose(jets.exp(jets.variable(np.zeros(1), K)), logser)
    expect = np.zeros((K + 1, 1))
    expect[0], expect[1] = 1.0, 1.0 / x0
    assert_allclose(e, expect, atol=1e-12)
    s = jets.shift(jets.variable(x0, K))
    assert s.shape[0] == K + 1
