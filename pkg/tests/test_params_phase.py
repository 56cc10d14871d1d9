import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from implosion.errors import NegativeRadicand, OutOfRange, ValidationError
from implosion.params_phase import (
    FluidParams,
    admissible_grid,
    admissibility,
    auxiliary_inequalities,
    dz_at_pstar_threshold,
    eval_phase_polynomials,
    phase_gradients,
    r_star,
    r_star_lower,
    r_star_upper,
    sonic_data,
    sonic_residuals,
    sum_barrier_us,
)

# Frozen from an independent 40-digit mpmath oracle that solves N_Z = D_Z = 0,
# N_W = N_Z = 0 and the eigenproblem of the desingularised field directly.
ORACLE = {
    (5.0 / 3.0, 1.15): dict(
        P_s=(2.0, -2.5), P_s_bar=(-0.6, -1.2),
        P_star=(0.42092921435210444, -1.5709292143521044),
        W1=-1.95, Z1=(1.4284161637422508, 3.0715838362577492), kappa=2.096583836 / 0.4534161637),
    (1.4, 1.18): dict(
        P_s=(1.5881317235396026, -2.7254211490264018), P_s_bar=(0.25186827646039737, -1.8345788509735982),
        P_star=(0.539887470582047, -2.014887470582047),
        W1=-1.3508422980528035, Z1=(0.97130471480002595, 3.2631516826037121), kappa=1.222938904 / 0.03661853511),
    (3.0, 1.3): dict(
        P_s=(0.63245553203367587, -1.0), P_s_bar=(-0.63245553203367587, -1.0),
        P_star=(0.23791651245988512, -0.88791651245988512),
        W1=-0.56491106406735173, Z1=(0.24566658836071863, 1.4543334116392814), kappa=2.374134623 / 0.4010397812),
    (1.2, 1.111): dict(
        P_s=(2.6812609382769812, -4.0119407676811664), P_s_bar=(0.8242390617230188, -2.4925592323188336),
        P_star=(0.62562188246847898, -2.3348526516992482),
        W1=-2.460581108872796, Z1=(2.0687805498554878, 4.4839885373909057), kappa=0.9095607296 / 0.02045964741),
}


@pytest.mark.parametrize("key", list(ORACLE), ids=str)
def test_sonic_points_match_oracle(key):
    o = ORACLE[key]
    sd = sonic_data(FluidParams(*key))
    assert_allclose([sd.P_s.W, sd.P_s.Z], o["P_s"], rtol=1e-12, atol=1e-12)
    assert_allclose([sd.P_s_bar.W, sd.P_s_bar.Z], o["P_s_bar"], rtol=1e-12, atol=1e-12)
    assert_allclose([sd.P_star.W, sd.P_star.Z], o["P_star"], rtol=1e-13)
    assert_allclose(sd.W1, o["W1"], rtol=1e-12)
    # both roots of the slope quadratic are eigen-directions; the profile uses the slow one
    assert_allclose(sorted([sd.Z1, sd.Z1_other]), o["Z1"], rtol=1e-12)
    assert_allclose(sd.Z1, o["Z1"][0], rtol=1e-12)


@pytest.mark.parametrize("key", list(ORACLE), ids=str)
def test_node_exponent_matches_oracle_eigen_ratio(key):
    from implosion.profile_solver import node_exponent

    p = FluidParams(*key)
    assert_allclose(node_exponent(p, sonic_data(p)), ORACLE[key]["kappa"], rtol=1e-8)


def test_r_star_branches_agree_at_five_thirds():
    g = 5.0 / 3.0
    assert abs(r_star_lower(g) - (3.0 - math.sqrt(3.0))) <= 1e-12
    assert abs(r_star_upper(g) - (3.0 - math.sqrt(3.0))) <= 1e-12
    assert r_star(g) == r_star_upper(g)


def test_r_star_branch_selection():
    assert r_star(1.4) == r_star_lower(1.4)
    assert r_star(2.0) == r_star_upper(2.0)
    # the branches differ away from 5/3
    assert abs(r_star_lower(1.4) - r_star_upper(1.4)) > 1e-3
    with pytest.raises(ValidationError):
        r_star(1.0)


def test_sonic_residuals_on_admissible_grid():
    worst = 0.0
    for g, r in admissible_grid(50, 20):
        worst = max(worst, max(sonic_residuals(FluidParams(g, r)).values()))
    assert worst <= 1e-10


def test_auxiliary_inequalities_on_grid():
    grid = admissible_grid(50, 20)
    assert len(grid) == 1000
    for g, r in grid:
        res = auxiliary_inequalities(FluidParams(g, r))
        assert len(res) == 7
        assert all(h for _, _, h in res), (g, r, [x for x in res if not x[2]])


def test_item7_alternate_branch():
    p = FluidParams(1.2, 1.111)
    sd = sonic_data(p)
    assert eval_phase_polynomials(sd.P_star.W, sd.P_star.Z, p)[3] < 0
    assert p.r > dz_at_pstar_threshold(p.gamma)
    name, value, holds = auxiliary_inequalities(p)[6]
    assert "P_s_bar" in name and holds and value > 0


def test_params_validation():
    with pytest.raises(ValidationError):
        FluidParams(1.0, 1.2)
    with pytest.raises(ValidationError):
        FluidParams(1.4, 0.9)
    with pytest.raises(ValidationError):
        FluidParams(1.4, 1.1, nu=2)
    with pytest.raises(OutOfRange):
        FluidParams.admissible(5.0 / 3.0, 1.3)
    with pytest.raises(OutOfRange):
        auxiliary_inequalities(FluidParams(5.0 / 3.0, 1.3))


def test_negative_radicand_beyond_window():
    with pytest.raises(NegativeRadicand):
        sonic_data(FluidParams(5.0 / 3.0, 1.34))


def test_dissipation_constants():
    p = FluidParams(1.4, 1.18, 1)
    assert_allclose(p.alpha, 0.2)
    assert_allclose(p.delta_dis, 0.18 / 0.2 + 1.18 - 2.0)
    assert_allclose(p.c_dis, 1.18 ** 6 / 0.2 ** 5)
    rep = admissibility(p)
    assert rep.in_range_r and rep.rough_bounds and rep.ns_ok


coords = st.floats(-3.0, 3.0, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(W=coords, Z=coords, g=st.floats(1.05, 3.0), t=st.floats(0.05, 0.95))
def test_polynomials_swap_symmetry(W, Z, g, t):
    p = FluidParams(g, 1.0 + t * (r_star(g) - 1.0))
    nw, dw, nz, dz = eval_phase_polynomials(W, Z, p)
    nw2, dw2, nz2, dz2 = eval_phase_polynomials(Z, W, p)
    assert_allclose([nw, dw], [nz2, dz2], rtol=1e-13, atol=1e-13)
    assert_allclose([nz, dz], [nw2, dw2], rtol=1e-13, atol=1e-13)


@settings(max_examples=200, deadline=None)
@given(W=coords, Z=coords)
def test_gradients_match_central_differences(W, Z):
    p = FluidParams(1.4, 1.18)
    h = 1e-6
    (a, b), (c, d) = phase_gradients(W, Z, p)
    fd = []
    for dW, dZ in ((h, 0.0), (0.0, h)):
        plus = eval_phase_polynomials(W + dW, Z + dZ, p)
        minus = eval_phase_polynomials(W - dW, Z - dZ, p)
        fd.append(((plus[0] - minus[0]) / (2 * h), (plus[2] - minus[2]) / (2 * h)))
    assert_allclose([a, b, c, d], [fd[0][0], fd[1][0], fd[0][1], fd[1][1]], rtol=1e-6, atol=1e-6)


@settings(max_examples=200, deadline=None)
@given(U=coords, S=st.floats(0.01, 3.0))
def test_sum_barrier_in_us_form(U, S):
    p = FluidParams(5.0 / 3.0, 1.15)
    W, Z = U + S, U - S
    nw, dw, nz, dz = eval_phase_polynomials(W, Z, p)
    assert_allclose(sum_barrier_us(U, S, p), nw * dz + nz * dw, rtol=1e-10, atol=1e-10)


def test_eval_vectorises():
    p = FluidParams(1.4, 1.18)
    W = np.linspace(-1, 1, 5)
    out = eval_phase_polynomials(W, -W, p)
    assert all(np.shape(x) == (5,) for x in out)
