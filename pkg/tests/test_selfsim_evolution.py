import math
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import reference_profile
from implosion.errors import TimeBeyondBlowup, UnsupportedOrder, ValidationError
from implosion.linear_modes import CutoffConfig
from implosion.selfsim_evolution import (
    TransformSpec,
    Weight,
    _divergence,
    cfl_step,
    density_to_sigma,
    diagnostics,
    diagnostics_csv,
    energy_ek,
    evolve,
    from_selfsimilar,
    profile_state,
    radial_bump,
    rhs_selfsimilar,
    sigma_to_density,
    to_selfsimilar,
    truncated_vs_extended,
    truncation_decay,
    truncation_terms,
    weight_phi,
)


def test_transform_closed_form():
    spec = TransformSpec(T=1.0, r=1.5)
    x = np.array([0.1, 0.5])
    U, S, y, s = to_selfsimilar(np.array([1.0, -2.0]), np.array([2.0, 3.0]), x, 0.9, spec)
    tau = 0.1
    assert_allclose(s, -math.log(tau) / 1.5, rtol=1e-15)
    assert_allclose(y, x * tau ** (-1.0 / 1.5), rtol=1e-15)
    assert_allclose(U, 1.5 * tau ** (1.0 - 1.0 / 1.5) * np.array([1.0, -2.0]), rtol=1e-15)
    assert_allclose(S, 1.5 * tau ** (1.0 - 1.0 / 1.5) * np.array([2.0, 3.0]), rtol=1e-15)


def test_transform_round_trip():
    spec = TransformSpec(T=2.0, r=1.18)
    rng = np.random.default_rng(5)
    u, sig, x = rng.standard_normal(50), rng.uniform(0.1, 2.0, 50), rng.uniform(0, 3, 50)
    t = 1.3
    U, S, y, s = to_selfsimilar(u, sig, x, t, spec)
    u2, sig2, x2, t2 = from_selfsimilar(U, S, y, s, spec)
    assert_allclose(u2, u, rtol=1e-13)
    assert_allclose(sig2, sig, rtol=1e-13)
    assert_allclose(x2, x, rtol=1e-13)
    assert_allclose(t2, t, rtol=1e-13)
    with pytest.raises(TimeBeyondBlowup):
        to_selfsimilar(u, sig, x, 2.0, spec)
    with pytest.raises(ValidationError):
        TransformSpec(T=1.0, r=1.2, direction="sideways")


def test_density_sigma_round_trip():
    rho = np.linspace(0.1, 5.0, 20)
    a = 0.2
    assert_allclose(sigma_to_density(density_to_sigma(rho, a), a), rho, rtol=1e-13)
    assert_allclose(density_to_sigma(1.0, a), 1.0 / a)


def test_weight_phi_shape():
    w = Weight(R0=5.0, eta=0.1)
    R = np.linspace(0.0, 40.0, 40001)
    phi = weight_phi(R, w)
    assert_allclose(phi[R <= 5.0], 1.0)
    far = R >= 20.0
    assert_allclose(phi[far], R[far] ** 1.8 / (2.0 * 5.0 ** 1.8), rtol=1e-13)
    # C^2 across both joins
    h = R[1] - R[0]
    d1 = np.diff(phi) / h
    d2 = np.diff(phi, 2) / h ** 2
    assert np.max(np.abs(np.diff(d1))) < 1e-3
    assert np.max(np.abs(np.diff(d2))) < 1e-2
    with pytest.raises(ValidationError):
        Weight(eta=0.7)


def test_divergence_exact_on_polynomials():
    R = np.linspace(0.0, 2.0, 201)
    h = R[1] - R[0]
    assert_allclose(_divergence(R, R, h)[:-1], 3.0, rtol=1e-13)
    # for U = R^3 the volume-weighted quotient is (5R^4 + 10R^2h^2 + h^4)/(R^2 + h^2/3)
    d = _divergence(R ** 3, R, h)
    Ri = R[1:-1]
    assert_allclose(d[1:-1], (5 * Ri ** 4 + 10 * Ri ** 2 * h ** 2 + h ** 4) / (Ri ** 2 + h ** 2 / 3), rtol=1e-12)
    assert np.max(np.abs(d[1:-1] - 5.0 * Ri ** 2)) <= 12.0 * h * h


def test_profile_rhs_second_order():
    prof = reference_profile(5.0 / 3.0, 1.15)
    sups = []
    for n in (1024, 2048, 4096):
        st = profile_state(prof, 10.0, n, s=20.0)
        du, ds = rhs_selfsimilar(st)
        sups.append(max(np.max(np.abs(du)), np.max(np.abs(ds))))
    assert 3.5 <= sups[0] / sups[1] <= 4.5
    assert 3.5 <= sups[1] / sups[2] <= 4.5


def test_short_evolution_and_diagnostics():
    prof = reference_profile(1.4, 1.18)
    st = profile_state(prof, 10.0, 256, s=20.0)
    st1, rows = evolve(st, 20.2, n_out=3)
    assert len(rows) == 3
    assert rows[0]["supU_dev"] == 0.0
    assert rows[-1]["supU_dev"] < 1e-2
    assert rows[-1]["minS"] > 0
    assert st1.s == pytest.approx(20.2)
    text = diagnostics_csv(rows)
    assert text.splitlines()[0] == "s,supU_dev,supS_dev,minS,E_K"
    d = diagnostics(st1, K=2)
    assert d["E_K"] > 0
    with pytest.raises(UnsupportedOrder):
        energy_ek(st1, 3)


def test_cfl_step_scales_with_h():
    prof = reference_profile(1.4, 1.18)
    a = cfl_step(profile_state(prof, 10.0, 256))
    b = cfl_step(profile_state(prof, 10.0, 512))
    assert a > 0 and b > 0
    assert_allclose(a / b, 2.0, rtol=0.05)
    c = cfl_step(profile_state(prof, 10.0, 256, nu=1, s=0.0))
    assert c <= a


def test_state_validation():
    prof = reference_profile(1.4, 1.18)
    st = profile_state(prof, 10.0, 64)
    with pytest.raises(ValidationError):
        replace(st, R_grid=st.R_grid + 0.1)
    with pytest.raises(ValidationError):
        replace(st, R_grid=st.R_grid ** 2)
    with pytest.raises(ValidationError):
        replace(st, scheme="spectral")


def test_truncation_terms_vanish_inside_cutoff_support():
    prof = reference_profile(1.4, 1.18)
    cfg = CutoffConfig(C0=10.0)
    s0 = math.log(2.0 * 3.0 * cfg.C0) + 0.01
    E_u, E_s = truncation_terms(prof, cfg.radii, s0)
    assert np.all(E_u == 0.0) and np.all(E_s == 0.0)
    # but not once the truncation region reaches the grid
    E_u, _ = truncation_terms(prof, cfg.radii, math.log(20.0))
    assert np.any(E_u != 0.0)


@pytest.mark.parametrize("key", [(5.0 / 3.0, 1.15), (1.4, 1.18), (3.0, 1.3)], ids=str)
def test_truncation_decay_rate(key):
    prof = reference_profile(*key)
    d = truncation_decay(prof, 5.0)
    assert abs(d["rate_Eu"] / d["expected"] - 1.0) <= 0.1


def test_truncated_extended_agree_inside():
    prof = reference_profile(1.4, 1.18)
    cfg = CutoffConfig(C0=10.0, grid_n=256)
    R = cfg.radii
    bump = radial_bump(R, 2.0, 6.0)
    ext = (bump, -0.5 * bump)
    # data agree on B(0, C0) but differ outside
    tail = radial_bump(R, 12.0, 20.0)
    trunc = (bump + tail, -0.5 * bump - tail)
    res = truncated_vs_extended(prof, cfg, s0=math.log(61.0), s_end=math.log(61.0) + 1.0,
                                data_ext=ext, data_trunc=trunc)
    assert res["holds"]
    assert res["sup_diff_inside"] <= res["bound"]
    with pytest.raises(ValidationError):
        truncated_vs_extended(prof, cfg, s0=1.0, s_end=2.0, data_ext=ext, data_trunc=ext)


def test_radial_bump():
    R = np.linspace(0, 3, 301)
    b = radial_bump(R)
    assert np.all(b[(R <= 1.0) | (R >= 2.0)] == 0.0)
    assert_allclose(b.max(), 1.0, rtol=1e-12)
