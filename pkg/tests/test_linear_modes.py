import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import reference_profile
from implosion.errors import ProfileTooShort, UnsupportedOrder, ValidationError, ZeroVector
from implosion.linear_modes import (
    CutoffConfig,
    assemble_mode,
    block_weights,
    coupling_cancellation,
    coupling_skew_residual,
    eigenvalues,
    eigenvector,
    energy_identity_residual,
    mode_spectrum,
    rayleigh_probe,
    spherical_energy,
)


@pytest.fixture(scope="module")
def prof():
    return reference_profile(1.4, 1.18)


@pytest.fixture(scope="module")
def cfg():
    return CutoffConfig(C0=10.0, J=40.0, delta_g=0.1, grid_n=512)


def conjugate_mismatch(ev):
    ev = np.asarray(ev)
    return max(np.min(np.abs(ev - np.conj(z))) for z in ev)


def test_n1_zero_has_no_angular_unknowns(prof, cfg):
    ms = assemble_mode(prof, cfg, n1=0)
    assert ms.fields == ("W", "Z")
    assert ms.operator_matrix.shape == (2 * cfg.grid_n, 2 * cfg.grid_n)


@pytest.mark.parametrize("n1", [1, 3, 8])
def test_u_phi_block_decoupled(prof, cfg, n1):
    ms = assemble_mode(prof, cfg, n1=n1)
    A = ms.operator_matrix
    phi = ms.block("U_Phi")
    others = np.ones(A.shape[0], dtype=bool)
    others[phi] = False
    assert np.all(A[phi][:, others] == 0.0)
    assert np.all(A[others][:, phi] == 0.0)


@pytest.mark.parametrize("n1", [0, 2])
def test_outer_rows_are_minus_j_identity(prof, cfg, n1):
    ms = assemble_mode(prof, cfg, n1=n1)
    A = ms.operator_matrix
    outer = np.nonzero(ms.radial_grid >= 2.5 * cfg.C0)[0]
    assert outer.size > 0
    for f in ms.fields:
        rows = ms.block(f).start + outer
        expect = np.zeros((rows.size, A.shape[1]))
        expect[np.arange(rows.size), rows] = -cfg.J
        assert np.array_equal(A[rows], expect)


@pytest.mark.parametrize("n1", [0, 1, 5])
def test_spectrum_conjugate_symmetric(prof, cfg, n1):
    sp = mode_spectrum(assemble_mode(prof, cfg, n1=n1))
    assert conjugate_mismatch(sp.eigenvalues) <= 1e-8
    assert len(sp.eigenvalues) == len(assemble_mode(prof, cfg, n1=n1).fields) * cfg.grid_n


def test_block_eigenvalues_trace(prof):
    cfg = CutoffConfig(grid_n=256)
    A = assemble_mode(prof, cfg, n1=2).operator_matrix
    ev, nb, big = eigenvalues(A)
    assert nb > 1 and big < A.shape[0]
    assert len(ev) == A.shape[0]
    assert_allclose(ev.sum().real, np.trace(A), rtol=1e-10)
    assert abs(ev.sum().imag) < 1e-8


def test_block_eigenvalues_on_planted_reducible_matrix():
    # permuted block upper-triangular matrix with well-conditioned diagonal blocks
    rng = np.random.default_rng(11)
    sizes = [1, 4, 7, 3]
    n = sum(sizes)
    T = np.triu(rng.standard_normal((n, n)))
    k = 0
    for m in sizes:
        T[k:k + m, k:k + m] = rng.standard_normal((m, m))
        k += m
    perm = rng.permutation(n)
    A = T[np.ix_(perm, perm)]
    ev, nb, big = eigenvalues(A)
    assert nb == len(sizes) and big == max(sizes)
    ref = np.concatenate([np.linalg.eigvals(T[a:a + m, a:a + m])
                          for a, m in zip(np.cumsum([0] + sizes[:-1]), sizes)])
    assert_allclose(np.sort_complex(ev), np.sort_complex(ref), rtol=1e-10, atol=1e-12)


def test_census_grid_independent(prof):
    counts = {}
    for gn in (1024, 2048):
        c = CutoffConfig(grid_n=gn)
        counts[gn] = [mode_spectrum(assemble_mode(prof, c, n1=n1)).dim_unstable for n1 in range(9)]
    assert counts[1024] == counts[2048]


def test_coupling_cancellation_scalar():
    rng = np.random.default_rng(7)
    a, b, c = (rng.standard_normal(10_000) + 1j * rng.standard_normal(10_000) for _ in range(3))
    res = coupling_cancellation(a, b, c)
    scale = (np.abs(a) + np.abs(b)) * np.abs(c)
    assert np.all(np.abs(res) <= 8 * np.finfo(float).eps * scale)


@pytest.mark.parametrize("n1", [1, 4])
def test_coupling_skew_exact(prof, cfg, n1):
    ms = assemble_mode(prof, cfg, n1=n1)
    assert coupling_skew_residual(ms) == 0.0
    assert coupling_skew_residual(assemble_mode(prof, cfg, n1=0)) == 0.0


def test_coupling_energy_vanishes_for_random_vectors(prof, cfg):
    ms = assemble_mode(prof, cfg, n1=3)
    A = ms.operator_matrix
    W, Z, P = ms.block("W"), ms.block("Z"), ms.block("U_Psi")
    B = np.zeros_like(A)
    for X in (W, Z):
        B[X, P] = A[X, P]
        B[P, X] = A[P, X]
    w = block_weights(ms)
    rng = np.random.default_rng(3)
    for _ in range(5):
        v = rng.standard_normal(A.shape[0]) + 1j * rng.standard_normal(A.shape[0])
        num = np.real(np.vdot(v, w * (B @ v)))
        assert abs(num) <= 1e-12 * np.real(np.vdot(v, w * v)) * np.max(np.abs(B))


def test_rayleigh_probe_and_zero_vector(prof, cfg):
    ms = assemble_mode(prof, cfg, n1=0)
    v = np.zeros(ms.operator_matrix.shape[0])
    with pytest.raises(ZeroVector):
        rayleigh_probe(ms, v)
    # a vector supported in the damped outer region sees exactly -J
    outer = ms.radial_grid >= 2.5 * cfg.C0
    v[ms.block("W")] = np.where(outer, 1.0, 0.0)
    assert_allclose(rayleigh_probe(ms, v), -cfg.J, rtol=1e-14)


def test_energy_identity_shrinks_with_grid(prof):
    res = []
    for gn in (512, 1024):
        c = CutoffConfig(grid_n=gn)
        ms = assemble_mode(prof, c, n1=1)
        lam = mode_spectrum(ms).eigenvalues[0]
        v = eigenvector(ms, lam)
        res.append(energy_identity_residual(ms, v, lam))
    assert res[1] < res[0]


def test_spherical_energy_orders(prof, cfg):
    ms = assemble_mode(prof, cfg, n1=1)
    v = np.ones(ms.operator_matrix.shape[0])
    assert spherical_energy(ms, v, 0).shape == (cfg.grid_n,)
    with pytest.raises(UnsupportedOrder):
        spherical_energy(ms, v, 3)


def test_config_validation(prof):
    with pytest.raises(ValidationError):
        CutoffConfig(grid_n=100)
    with pytest.raises(ValidationError):
        CutoffConfig(delta_g=1.5)
    with pytest.raises(ValidationError):
        CutoffConfig(chi1_radii=(1.0, 2.0))
    with pytest.raises(ValidationError):
        assemble_mode(prof, CutoffConfig(), n1=-1)
    with pytest.raises(ValidationError):
        assemble_mode(prof, CutoffConfig(), lower_order="other")
    with pytest.raises(ProfileTooShort):
        assemble_mode(prof, CutoffConfig(C0=1e6))
