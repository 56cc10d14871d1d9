"""Repulsivity and barrier certificates for a computed profile.

All checks are floating-point certificates on the sampled trajectory: an
inequality "holds" when its minimum over the samples exceeds ``HOLD_TOL``,
which absorbs the exact zeros at the sonic point.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from . import jets
from .cutoffs import xhat_jet
from .errors import GridTooCoarse, ValidationError
from .params_phase import FluidParams, SonicData, eval_phase_polynomials, sonic_data, sum_barrier_us
from .profile_solver import Profile, profile_jets, w1_nearorigin

HOLD_TOL = -1e-9
C2 = 100.0


@dataclass
class BarrierResult:
    name: str
    min_margin: float
    location: float
    holds: bool


@dataclass
class RepulsivityReport:
    eta_radial: float = float("nan")
    eta_angular: float = float("nan")
    eta_integrated: float = float("nan")
    barrier_checks: list = field(default_factory=list)
    dz_pattern_ok: bool = False
    argmin_radial: float = float("nan")
    argmin_angular: float = float("nan")
    argmin_integrated: float = float("nan")
    limit_R0: float = float("nan")
    limit_Rinf: float = 1.0
    value_at_sonic: float = float("nan")

    @property
    def certified(self) -> bool:
        return (self.eta_radial > 0 and self.eta_angular > 0 and self.eta_integrated > 0
                and all(b.holds for b in self.barrier_checks) and self.dz_pattern_ok)

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "barrier_checks"}
        d["barrier_checks"] = [b.__dict__ for b in self.barrier_checks]
        d["certified"] = self.certified
        return d


# --- closed forms -----------------------------------------------------------

def xi1(W, Z, params: FluidParams):
    """D_W^2 D_Z + (alpha/2) N_W D_Z - (alpha/2) N_Z D_W."""
    nw, dw, nz, dz = eval_phase_polynomials(W, Z, params)
    a = params.alpha
    return dw * dw * dz + 0.5 * a * (nw * dz - nz * dw)


def xi1_companion(W, Z, params: FluidParams):
    """D_Z^2 D_W + (alpha/2) N_Z D_W - (alpha/2) N_W D_Z."""
    nw, dw, nz, dz = eval_phase_polynomials(W, Z, params)
    a = params.alpha
    return dz * dz * dw + 0.5 * a * (nz * dw - nw * dz)


def xi1_us(U, S, params: FluidParams):
    g, r = params.gamma, params.r
    return (U + 1.0) ** 3 + S / 4.0 * (g - 1.0) * (
        r * ((g - 3.0) * U - 2.0) - 2.0 * (g - 1.0) * U * U + (5.0 - 3.0 * g) * U + 2.0) \
        - 0.25 * (g - 1.0) ** 2 * (U + 1.0) * S * S


def xi2(W, Z, params: FluidParams):
    """N_Z D_W - N_W D_Z."""
    nw, dw, nz, dz = eval_phase_polynomials(W, Z, params)
    return nz * dw - nw * dz


def xi2_over_s_us(U, S, params: FluidParams):
    g, r = params.gamma, params.r
    return r * (2.0 - (g - 3.0) * U) + U * (2.0 * g * U + 3.0 * g - 1.0) - 0.5 * (g - 1.0) ** 2 * S * S


def barrier_sum(W, Z, params: FluidParams):
    """N_W D_Z + N_Z D_W."""
    nw, dw, nz, dz = eval_phase_polynomials(W, Z, params)
    return nw * dz + nz * dw


def p_w(Z, params: FluidParams):
    """Right branch W = p_W(Z) of N_W = 0."""
    g, r = params.gamma, params.r
    rad = 9 * g * g * Z * Z - 8 * g * r * Z - 14 * g * Z * Z + 16 * r * r + 24 * r * Z + 9 * Z * Z
    return (np.sqrt(rad) + g * Z - 4.0 * r - 3.0 * Z) / (4.0 * g)


def barrier_curve_b(b_u, params: FluidParams):
    """S along the curve b as a function of U."""
    g, r = params.gamma, params.r
    b_u = np.asarray(b_u, dtype=float)
    return 2.0 / (g - 1.0) * np.sqrt(b_u + 1.0) * np.sqrt(r + b_u) * np.sqrt(
        b_u / (3.0 * b_u + 2.0 * (r - 1.0) / (g - 1.0)))


def xi3_along_b(t, params: FluidParams, sd: SonicData | None = None):
    """N_W D_Z + N_Z D_W on the segment (W_bar0 - t, Z_bar0 + t) from P_s_bar."""
    sd = sd or sonic_data(params)
    t = np.asarray(t, dtype=float)
    return barrier_sum(sd.P_s_bar.W - t, sd.P_s_bar.Z + t, params)


def xi3_over_t_closed(t, params: FluidParams, sd: SonicData | None = None):
    """Affine closed form of Xi_3 / t."""
    g, r = params.gamma, params.r
    sd = sd or sonic_data(params)
    R1 = sd.R1
    item4 = 3 * g * g * (r - 3) + g * (-14 * r - 3 * R1 + 22) + 15 * r + 5 * R1 - 17
    return -(r - 1.0) * item4 / (4.0 * (g - 1.0)) - t * (g - 1.0) * (-3 * g * (r - 3) + r + 3 * R1 - 7) / 8.0


# --- checks ------------------------------------------------------------------

def check_pointwise_repulsivity(prof: Profile, params: FluidParams | None = None) -> RepulsivityReport:
    """Radial and angular repulsivity margins on the profile grid."""
    params = params or prof.params
    a = params.alpha
    rad = 1.0 + prof.dU_dR - a * np.abs(prof.dS_dR)
    ang = 1.0 + prof.U_bar / prof.R - a * np.abs(prof.dS_dR)
    i, j = int(np.argmin(rad)), int(np.argmin(ang))
    rep = RepulsivityReport(eta_radial=float(rad[i]), eta_angular=float(ang[j]),
                            argmin_radial=float(prof.R[i]), argmin_angular=float(prof.R[j]))
    # R -> 0: U_bar ~ w1 R and dS_bar/dR -> 0, so both margins tend to 1 + w1
    if math.isfinite(prof.w0) and np.any(prof.S_bar != 0):
        rep.limit_R0 = 1.0 + w1_nearorigin(params)
    else:
        rep.limit_R0 = float(min(rad[0], ang[0]))
    rep.limit_Rinf = 1.0
    xi = prof.xi_grid
    _, _, _, dz = eval_phase_polynomials(prof.W, prof.Z, params)
    rep.dz_pattern_ok = bool(np.all(dz[xi < 0] < 0) and np.all(dz[xi > 0] > 0))
    return rep


def check_integrated_repulsivity(prof: Profile, params: FluidParams | None = None):
    """min over R > 1 of (R + U_bar - alpha S_bar)/(R - 1).

    Returns (eta_integrated, argmin R, value of R + U_bar - alpha S_bar at R=1).
    """
    params = params or prof.params
    a = params.alpha
    R = prof.R
    if R[-1] <= 1.0:
        raise ValidationError("profile does not extend past R = 1")
    n_12 = int(np.count_nonzero((R > 1.0) & (R < 2.0)))
    if n_12 < 64:
        raise GridTooCoarse(f"only {n_12} samples in R in (1, 2); need 64")
    Ub, Sb, _, _ = prof.evaluate(np.array([1.0]))
    at_one = float(1.0 + Ub[0] - a * Sb[0])
    m = R > 1.0
    ratio = (R[m] + prof.U_bar[m] - a * prof.S_bar[m]) / (R[m] - 1.0)
    k = int(np.argmin(ratio))
    return float(ratio[k]), float(R[m][k]), at_one


def _barrier(name, values, xi, mask):
    v = values[mask]
    if v.size == 0:
        return BarrierResult(name, float("nan"), float("nan"), False)
    k = int(np.argmin(v))
    return BarrierResult(name, float(v[k]), float(xi[mask][k]), bool(v[k] > HOLD_TOL))


def check_phase_barriers(prof: Profile, sd: SonicData | None = None,
                         params: FluidParams | None = None) -> list:
    """The five trajectory barriers, each with its minimum margin and location (xi)."""
    params = params or prof.params
    sd = sd or sonic_data(params)
    W, Z, xi = prof.W, prof.Z, prof.xi_grid
    neg, pos = xi < 0, xi > 0
    nw, _, _, _ = eval_phase_polynomials(W, Z, params)
    U = 0.5 * (W + Z)
    S = 0.5 * (W - Z)
    return [
        _barrier("N_W D_Z + N_Z D_W > 0 (xi < 0)", barrier_sum(W, Z, params), xi, neg),
        _barrier("N_W < 0 (xi > 0)", -nw, xi, pos),
        _barrier("Xi_1 > 0 (xi > 0)", xi1(W, Z, params), xi, pos),
        _barrier("Xi_2 / S > 0 (xi > 0)", xi2(W, Z, params) / S, xi, pos),
        _barrier("U > U(P_s_bar) (xi > 0)", U - sd.P_s_bar.U, xi, pos),
    ]


def certify(prof: Profile, params: FluidParams | None = None) -> RepulsivityReport:
    """Full repulsivity report: pointwise, integrated and barrier checks."""
    params = params or prof.params
    rep = check_pointwise_repulsivity(prof, params)
    rep.eta_integrated, rep.argmin_integrated, rep.value_at_sonic = check_integrated_repulsivity(prof, params)
    rep.barrier_checks = check_phase_barriers(prof, sonic_data(params), params)
    return rep


# --- cutoff-radius conditions -----------------------------------------------

def c1_from_relation(r: float, c2: float = C2) -> float:
    """Solve 1/C2 = (32/(r-1)) (1/C1) (1/C2)^(1/20) for C1."""
    return 32.0 / (r - 1.0) * c2 * (1.0 / c2) ** (1.0 / 20.0)


def _lap_vec(j, R0):
    """Jet of u'' + 2u'/R - 2u/R^2 (vector Laplacian of u(R) R_hat)."""
    K = j.shape[0] - 1
    invR = jets.div(jets.constant(np.ones_like(R0), K), jets.variable(R0, K))
    d1 = jets.shift(j)
    d2 = jets.shift(d1)
    return d2 + 2.0 * jets.mul(invR, d1) - 2.0 * jets.mul(jets.mul(invR, invR), j)


def _lap_scal(j, R0):
    K = j.shape[0] - 1
    invR = jets.div(jets.constant(np.ones_like(R0), K), jets.variable(R0, K))
    d1 = jets.shift(j)
    return jets.shift(d1) + 2.0 * jets.mul(invR, d1)


def _vec_grad_sq(j, R):
    """|grad(u R_hat)|^2 = u'^2 + 2 u^2/R^2 at the base point."""
    return j[1] ** 2 + 2.0 * (j[0] / R) ** 2


def _vec_hess_sq(j, R):
    """|grad^2(u R_hat)|^2 for u R_hat = g(R) y, g = u/R.

    The tensor is a n_i n_j n_k + b (delta_ij n_k + delta_jk n_i + delta_ik n_j)
    with b = g', a = R^2 (g'/R)', so the squared norm is a^2 + 6ab + 15b^2.
    """
    u0, u1, u2 = j[0], j[1], 2.0 * j[2]
    g1 = (u1 - u0 / R) / R
    g2 = (u2 - 2.0 * g1) / R
    a = R * g2 - g1
    b = g1
    return a * a + 6.0 * a * b + 15.0 * b * b


def _scal_hess_sq(j, R):
    return (2.0 * j[2]) ** 2 + 2.0 * (j[1] / R) ** 2


def lemma_c0_conditions(prof: Profile, C0: float, s0: float, C: float = 1.0, n_per_unit: int = 400,
                        max_doublings: int = 60) -> dict:
    """Evaluate the cutoff-radius conditions at s = s0.

    Conditions (all over |y| >= C0, with X_hat(y, s0) = frak_X(e^{-s0} y)):
      1. sup |alpha X S|, |X U|, |alpha grad(X S)|, |grad(X U)| <= 1/(100 C1)
      4. sup|grad(X U)| + sup|grad(X S)| <= 1/(C C2)
      2. ||grad^2(X U)||_L8 + ||grad^2(X S)||_L8 <= 1/(C C2)
      3. sum_{j=3..5} ||X U||_Hdot^j + ||X S||_Hdot^j <= 1/(C C2)
    C is the unspecified universal constant (default 1).  Also reported: the
    smallest C0 on the grid {10, 20, 40, ...} where everything holds, and the
    far-field estimate of the threshold when X_hat is replaced by 1 (the
    all-s >= s0 reading of condition 1).
    """
    if C0 < 10.0 or s0 < 1.0:
        raise ValidationError("need C0 >= 10 and s0 >= 1")
    params = prof.params
    a, r = params.alpha, params.r
    C1 = c1_from_relation(r)
    thr1 = 1.0 / (100.0 * C1)
    thr2 = 1.0 / (C * C2)
    K = 6
    lo, hi = math.log(10.0), s0
    n = max(int((hi - lo) * n_per_unit), 64)
    xi = np.linspace(lo, hi, n)
    R = np.exp(xi)
    uj, sj = profile_jets(prof, R, K)
    xj = xhat_jet(R, s0, K)
    XU, XS = jets.mul(xj, uj), jets.mul(xj, sj)

    q = {}
    q["|alpha X S|"] = np.abs(a * XS[0])
    q["|X U|"] = np.abs(XU[0])
    q["|alpha grad(X S)|"] = np.abs(a * XS[1])
    q["|grad(X U)|"] = np.sqrt(_vec_grad_sq(XU, R))
    gradS = np.abs(XS[1])
    hessU = np.sqrt(_vec_hess_sq(XU, R))
    hessS = np.sqrt(_scal_hess_sq(XS, R))
    # H^j densities through Laplacians: j = 3: grad Lap, 4: Lap^2, 5: grad Lap^2
    LU, LS = _lap_vec(XU, R), _lap_scal(XS, R)
    LLU, LLS = _lap_vec(LU, R), _lap_scal(LS, R)
    dens = {3: _vec_grad_sq(LU, R) + LS[1] ** 2,
            4: LLU[0] ** 2 + LLS[0] ** 2,
            5: _vec_grad_sq(LLU, R) + LLS[1] ** 2}
    w = 4.0 * math.pi * R ** 3  # dy = 4 pi R^2 dR = 4 pi R^3 dxi

    def tail_int(f):
        # integral over [xi_k, hi] for every k (trapezoid, cumulative from the top)
        seg = 0.5 * (f[1:] + f[:-1]) * np.diff(xi)
        return np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])

    def tail_sup(f):
        return np.maximum.accumulate(f[::-1])[::-1]

    def at(C0v):
        k = int(np.searchsorted(R, C0v))
        if k >= n:
            return {"cond1": {name: 0.0 for name in q}, "cond4": 0.0, "cond2": 0.0, "cond3": 0.0}
        c1 = {name: float(tail_sup(v)[k]) for name, v in q.items()}
        c4 = float(tail_sup(q["|grad(X U)|"])[k] + tail_sup(gradS)[k])
        c2 = float(tail_int(w * hessU ** 8)[k] ** 0.125 + tail_int(w * hessS ** 8)[k] ** 0.125)
        c3 = float(sum(math.sqrt(tail_int(w * dens[j])[k]) for j in (3, 4, 5)))
        return {"cond1": c1, "cond4": c4, "cond2": c2, "cond3": c3}

    def holds(v):
        return (all(x <= thr1 for x in v["cond1"].values()) and v["cond4"] <= thr2
                and v["cond2"] <= thr2 and v["cond3"] <= thr2)

    vals = at(C0)
    smallest = None
    for k in range(max_doublings):
        c = 10.0 * 2.0 ** k
        if holds(at(c)):
            smallest = c
            break

    # far field without the truncation: |U_bar| and alpha S_bar decay like R^(1-r)
    Rt = float(prof.R[-1])
    Ub, Sb, _, _ = prof.evaluate(np.array([Rt]))
    amp = max(abs(Ub[0]), abs(a * Sb[0])) * Rt ** (r - 1.0)
    c0_untruncated = (amp / thr1) ** (1.0 / (r - 1.0))
    return {
        "C0": C0, "s0": s0, "C": C, "C1": C1, "C2": C2,
        "threshold_cond1": thr1, "threshold_cond234": thr2,
        "values": vals, "holds": holds(vals),
        "smallest_C0_on_grid": smallest,
        "C0_estimate_untruncated": c0_untruncated,
        "max_grad_xhat_times_es": float(np.max(np.abs(xj[1])) * math.exp(s0)),
    }
