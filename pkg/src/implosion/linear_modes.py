"""Spherical-harmonic mode operators of the cut-off linearised problem.

For degree n1 the perturbation is written with the vector spherical
harmonics (e_n R_hat, R grad e_n, y ^ grad e_n) and W = U_R + S, Z = U_R - S.
The eigenvalue problem lambda v = A v is discretised on R_i = i h,
i = 1..grid_n, h = 3 C0 / grid_n, with first-order upwind differences
oriented by the sign of each transport speed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .cutoffs import CutoffTables, cutoff_tables
from .errors import NoConvergence, ProfileTooShort, UnsupportedOrder, ValidationError, ZeroVector
from .params_phase import FluidParams
from .profile_solver import Profile

LOWER_ORDER_FORMS = ("displayed", "consistent")


@dataclass(frozen=True)
class CutoffConfig:
    C0: float = 10.0
    J: float = 40.0
    delta_g: float = 0.1
    grid_n: int = 1024
    chi1_radii: tuple = (1.0, 1.5)   # plateau and support radius in units of C0
    chi2_radii: tuple = (2.0, 2.5)
    chi2_off: bool = False           # test configuration with chi2 = 0

    def __post_init__(self):
        if not self.C0 > 0:
            raise ValidationError(f"C0 must be positive, got {self.C0}")
        if not self.J >= 1:
            raise ValidationError(f"J must be >= 1, got {self.J}")
        if not 0 < self.delta_g < 1:
            raise ValidationError(f"delta_g must be in (0, 1), got {self.delta_g}")
        if self.grid_n < 256:
            raise ValidationError(f"grid_n must be >= 256, got {self.grid_n}")
        if tuple(self.chi1_radii) != (1.0, 1.5) or tuple(self.chi2_radii) != (2.0, 2.5):
            raise ValidationError("only the standard cutoff radii (1, 3/2) and (2, 5/2) are supported")

    @property
    def h(self) -> float:
        return 3.0 * self.C0 / self.grid_n

    @property
    def radii(self) -> np.ndarray:
        return self.h * np.arange(1, self.grid_n + 1)

    def descriptors(self) -> dict:
        return {"chi1": {"plateau": self.C0 * self.chi1_radii[0], "support": self.C0 * self.chi1_radii[1],
                         "smoothness": "C-infinity"},
                "chi2": {"plateau": self.C0 * self.chi2_radii[0], "support": self.C0 * self.chi2_radii[1],
                         "smoothness": "C-infinity"}}


def build_cutoffs(cfg: CutoffConfig) -> CutoffTables:
    """chi1, chi2 and analytic first derivatives on the mode grid."""
    tab = cutoff_tables(cfg.radii, cfg.C0)
    if cfg.chi2_off:
        z = np.zeros_like(tab.chi2)
        tab = CutoffTables(tab.R, tab.chi1, z, tab.dchi1, z)
    return tab


@dataclass
class ModeSystem:
    n1: int
    radial_grid: np.ndarray
    fields: tuple
    coefficients: dict
    operator_matrix: np.ndarray
    lower_order: str
    cfg: CutoffConfig
    params: FluidParams
    coupling: np.ndarray = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return len(self.radial_grid)

    def block(self, name: str) -> slice:
        k = self.fields.index(name)
        return slice(k * self.n, (k + 1) * self.n)

    def split(self, vec):
        vec = np.asarray(vec)
        return {f: vec[self.block(f)] for f in self.fields}


def _lower_order_coeffs(form, a, R, Ub, Sb, dU, dS):
    """(p, q) such that E = p U_R + q S for the W and Z rows."""
    if form == "displayed":
        pW = -dU - 2 * a * Sb / R - a * dS
        qW = -a * dU - 2 * a * Ub / R - a * dS
        pZ = -dU - 2 * a * Sb / R + a * dS
        qZ = a * dU - 2 * a * Ub / R - a * dS
    else:
        pW = -dU - dS - 2 * a * Sb / R
        qW = -a * dU - a * dS - 2 * a * Ub / R
        pZ = -dU + dS + 2 * a * Sb / R
        qZ = a * dU - a * dS + 2 * a * Ub / R
    return pW, qW, pZ, qZ


def _transport(speed, h, neumann_left):
    """Upwind matrix for -speed * d/dR on R_i = i h (ghost value 0 past both ends)."""
    n = len(speed)
    T = np.zeros((n, n))
    idx = np.arange(n)
    pos = speed > 0
    neg = speed < 0
    c = speed / h
    # backward difference where speed > 0
    T[idx[pos], idx[pos]] -= c[pos]
    ip = idx[pos & (idx > 0)]
    T[ip, ip - 1] += c[ip]
    if neumann_left and pos[0]:
        T[0, 0] += c[0]  # ghost at R = 0 equals the first value
    # forward difference where speed < 0
    T[idx[neg], idx[neg]] += c[neg]
    im = idx[neg & (idx < n - 1)]
    T[im, im + 1] -= c[im]
    return T


def profile_tables(prof: Profile, R: np.ndarray) -> dict:
    Ub, Sb, dU, dS = prof.evaluate(R)
    return {"U_bar": Ub, "S_bar": Sb, "dU_dR": dU, "dS_dR": dS}


def assemble_mode(prof: Profile, cfg: CutoffConfig, params: FluidParams | None = None, n1: int = 0,
                  lower_order: str = "displayed", tables: dict | None = None) -> ModeSystem:
    """Assemble A with lambda v = A v for spherical-harmonic degree n1."""
    params = params or prof.params
    if n1 < 0:
        raise ValidationError(f"n1 must be >= 0, got {n1}")
    if lower_order not in LOWER_ORDER_FORMS:
        raise ValidationError(f"lower_order must be one of {LOWER_ORDER_FORMS}")
    if prof.R[-1] < 3.0 * cfg.C0:
        raise ProfileTooShort(f"profile reaches R={prof.R[-1]:.4g} < 3 C0 = {3 * cfg.C0:.4g}")
    R = cfg.radii
    h = cfg.h
    a, r = params.alpha, params.r
    cut = build_cutoffs(cfg)
    t = tables if tables is not None else profile_tables(prof, R)
    Ub, Sb, dU, dS = t["U_bar"], t["S_bar"], t["dU_dR"], t["dS_dR"]
    chi2 = cut.chi2
    damp = -cfg.J * (1.0 - cut.chi1)
    speed_w = chi2 * (R + Ub + a * Sb)
    speed_z = chi2 * (R + Ub - a * Sb)
    speed_p = chi2 * (R + Ub)
    cpl = chi2 * (a * Sb / R)
    nn = float(n1 * (n1 + 1))
    fields = ("W", "Z") if n1 == 0 else ("W", "Z", "U_Psi", "U_Phi")
    n = len(R)
    A = np.zeros((len(fields) * n, len(fields) * n))
    I = np.arange(n)

    def blk(i, j):
        return A[i * n:(i + 1) * n, j * n:(j + 1) * n]

    pW, qW, pZ, qZ = _lower_order_coeffs(lower_order, a, R, Ub, Sb, dU, dS)
    # W row
    blk(0, 0)[...] += _transport(speed_w, h, n1 == 0)
    blk(0, 0)[I, I] += damp + chi2 * (-(r - 1.0) + 0.5 * (pW + qW))
    blk(0, 1)[I, I] += chi2 * 0.5 * (pW - qW)
    # Z row
    blk(1, 1)[...] += _transport(speed_z, h, n1 == 0)
    blk(1, 1)[I, I] += damp + chi2 * (-(r - 1.0) + 0.5 * (pZ - qZ))
    blk(1, 0)[I, I] += chi2 * 0.5 * (pZ + qZ)
    if n1 > 0:
        # coupling entered from one table so that diag(1/2, 1/2, n1(n1+1)) B is skew
        blk(0, 2)[I, I] = cpl * nn
        blk(1, 2)[I, I] = -(cpl * nn)
        blk(2, 0)[I, I] = -(cpl / 2.0)
        blk(2, 1)[I, I] = cpl / 2.0
        zero_order_psi = -chi2 * ((r - 1.0) + Ub / R)
        blk(2, 2)[...] += _transport(speed_p, h, False)
        blk(2, 2)[I, I] += damp + zero_order_psi
        blk(3, 3)[...] += _transport(speed_p, h, False)
        blk(3, 3)[I, I] += damp + zero_order_psi
    coeffs = {"speed_W": speed_w, "speed_Z": speed_z, "speed_Psi": speed_p, "alpha_S_over_R": a * Sb / R,
              "dS_dR": dS, "dU_dR": dU, "U_over_R": Ub / R, "chi1": cut.chi1, "chi2": chi2, "damping": damp,
              "U_bar": Ub, "S_bar": Sb}
    return ModeSystem(n1, R, fields, coeffs, A, lower_order, cfg, params, coupling=cpl)


@dataclass
class Spectrum:
    n1: int
    eigenvalues: np.ndarray
    unstable: np.ndarray
    dim_unstable: int
    n_blocks: int = 0
    largest_block: int = 0

    def to_dict(self) -> dict:
        return {"n1": self.n1, "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
                "unstable_count": self.dim_unstable}


def _irreducible_blocks(A):
    """Strongly connected components of the sparsity graph of A."""
    g = csr_matrix(A != 0)
    return connected_components(g, directed=True, connection="strong")


def eigenvalues(A):
    """All eigenvalues of a real matrix, one LAPACK geev per irreducible block.

    Permuting to block-triangular form leaves the spectrum unchanged and is
    the same isolation step as LAPACK balancing, done over the whole graph.
    """
    ncomp, labels = _irreducible_blocks(A)
    out = []
    sizes = np.bincount(labels, minlength=ncomp)
    order = np.argsort(labels, kind="stable")
    starts = np.concatenate([[0], np.cumsum(sizes)])
    for c in range(ncomp):
        idx = order[starts[c]:starts[c + 1]]
        if len(idx) == 1:
            out.append(np.array([A[idx[0], idx[0]]], dtype=complex))
            continue
        try:
            out.append(scipy.linalg.eigvals(A[np.ix_(idx, idx)]))
        except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise NoConvergence(f"geev failed on a block of size {len(idx)}: {exc}") from exc
    return np.concatenate(out), int(ncomp), int(sizes.max())


def mode_spectrum(ms: ModeSystem, cfg: CutoffConfig | None = None) -> Spectrum:
    """Eigenvalues of the mode operator and the census Re(lambda) > -delta_g/2."""
    cfg = cfg or ms.cfg
    ev, nb, big = eigenvalues(ms.operator_matrix)
    ev = ev[np.lexsort((ev.imag, -ev.real))]
    unstable = ev[ev.real > -cfg.delta_g / 2.0]
    return Spectrum(ms.n1, ev, unstable, int(len(unstable)), nb, big)


def block_weights(ms: ModeSystem) -> np.ndarray:
    """Diagonal weights of the plain L2 inner product on the ball for one mode."""
    R = ms.radial_grid
    base = R * R * ms.cfg.h
    nn = ms.n1 * (ms.n1 + 1)
    per = {"W": 0.5, "Z": 0.5, "U_Psi": nn, "U_Phi": nn}
    return np.concatenate([per[f] * base for f in ms.fields])


def rayleigh_probe(ms: ModeSystem, vec) -> float:
    """Re <A v, v> / <v, v> in the L2(ball) inner product of the mode."""
    vec = np.asarray(vec)
    w = block_weights(ms)
    den = float(np.real(np.vdot(vec, w * vec)))
    if not den > 0:
        raise ZeroVector("probe vector is zero")
    return float(np.real(np.vdot(vec, w * (ms.operator_matrix @ vec))) / den)


def coupling_skew_residual(ms: ModeSystem) -> float:
    """max |M B + (M B)^T| over the W/Z/U_Psi coupling, M = diag(1/2, 1/2, n1(n1+1))."""
    if ms.n1 == 0:
        return 0.0
    A = ms.operator_matrix
    W, Z, P = ms.block("W"), ms.block("Z"), ms.block("U_Psi")
    nn = ms.n1 * (ms.n1 + 1)
    res = []
    for X in (W, Z):
        mb = 0.5 * np.diag(A[X, P])
        mbt = nn * np.diag(A[P, X])
        res.append(np.max(np.abs(mb + mbt)))
    return float(max(res))


def coupling_cancellation(a, b, c):
    """Re(conj(a) c - conj(b) c - conj(c) (a - b)).

    With a = W, b = Z, c = U_Psi this is, up to the factor n1(n1+1) coef / 2,
    what the coupling contributes to the mode energy; it vanishes identically.
    """
    a, b, c = np.asarray(a), np.asarray(b), np.asarray(c)
    return np.real(np.conj(a) * c - np.conj(b) * c - np.conj(c) * (a - b))


def _radial_derivative(f, h, k):
    for _ in range(k):
        f = np.gradient(f, h, edge_order=2)
    return f


def spherical_energy(ms: ModeSystem, vec, k: int = 0) -> np.ndarray:
    """E_{n,k}(R) on the grid; derivatives by repeated discrete differentiation."""
    if k < 0 or k > 2:
        raise UnsupportedOrder(f"spherical energy supports k <= 2, got {k}")
    parts = ms.split(vec)
    c = ms.coefficients
    a = ms.params.alpha
    R = ms.radial_grid
    Ub, Sb = c["U_bar"], c["S_bar"]
    h = ms.cfg.h
    d = {f: _radial_derivative(v, h, k) for f, v in parts.items()}
    E = (R + Ub + a * Sb) * np.abs(d["W"]) ** 2 / 2.0 + (R + Ub - a * Sb) * np.abs(d["Z"]) ** 2 / 2.0
    if ms.n1 > 0:
        nn = ms.n1 * (ms.n1 + 1)
        E = E + (R + Ub) * (np.abs(d["U_Psi"]) ** 2 + np.abs(d["U_Phi"]) ** 2) * (nn + 1)
    return E


def energy_identity_residual(ms: ModeSystem, vec, lam) -> float:
    """Discrete check of the k = 0 energy identity along an eigenvector.

    dE/dR computed by differencing E is compared with the same derivative
    assembled from the mode equations (product rule plus the equations for
    the transport terms), where the W/Z/U_Psi coupling cancels.  Returned
    relative to max E on [C0, 2 C0]; it should shrink with the grid spacing.
    """
    cfg = ms.cfg
    R = ms.radial_grid
    h = cfg.h
    m = (R >= cfg.C0) & (R <= 2.0 * cfg.C0)
    a = ms.params.alpha
    c = ms.coefficients
    Ub, Sb, dU, dS = c["U_bar"], c["S_bar"], c["dU_dR"], c["dS_dR"]
    parts = ms.split(vec)
    Av = ms.operator_matrix @ np.asarray(vec)
    Aparts = ms.split(Av)
    E = spherical_energy(ms, vec, 0)
    dE_num = np.gradient(E, h, edge_order=2)
    # chi2 = 1 on [C0, 2C0]
    speeds = {"W": R + Ub + a * Sb, "Z": R + Ub - a * Sb, "U_Psi": R + Ub, "U_Phi": R + Ub}
    weights = {"W": 0.5, "Z": 0.5, "U_Psi": 0.0, "U_Phi": 0.0}
    if ms.n1 > 0:
        nn = ms.n1 * (ms.n1 + 1)
        weights["U_Psi"] = weights["U_Phi"] = nn + 1.0
    dspeed = {"W": 1 + dU + a * dS, "Z": 1 + dU - a * dS, "U_Psi": 1 + dU, "U_Phi": 1 + dU}
    dE_eq = np.zeros_like(E)
    for f, v in parts.items():
        # lambda v = A v = -speed v' + rest, so speed v' = rest - lambda v
        transport = _transport(speeds[f] * c["chi2"], h, ms.n1 == 0 and f in ("W", "Z")) @ v
        rest = Aparts[f] - transport
        sv = rest - lam * v
        dE_eq += weights[f] * (dspeed[f] * np.abs(v) ** 2 + 2.0 * np.real(np.conj(v) * sv))
    scale = float(np.max(E[m])) if np.any(E[m] > 0) else 1.0
    return float(np.max(np.abs(dE_num[m] - dE_eq[m])) / scale)


def eigenvector(ms: ModeSystem, lam, iterations: int = 4) -> np.ndarray:
    """Eigenvector for a computed eigenvalue by shifted inverse iteration."""
    A = ms.operator_matrix
    n = A.shape[0]
    sigma = complex(lam) + 1e-9 * (1.0 + abs(lam))
    M = A.astype(complex) - sigma * np.eye(n)
    lu = scipy.linalg.lu_factor(M)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n) + 0j
    for _ in range(iterations):
        v = scipy.linalg.lu_solve(lu, v)
        v /= np.linalg.norm(v)
    if abs(complex(lam).imag) == 0.0:
        k = int(np.argmax(np.abs(v)))
        v = np.real(v * np.exp(-1j * np.angle(v[k])))
    return v
