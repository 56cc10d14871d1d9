"""Radial method-of-lines evolution of the self-similar equations.

Radial velocity amplitude U(R, s) and rescaled sound speed S(R, s) obey

  dU/ds = -(r-1) U - (R + U) U_R - alpha S S_R
          + nu C_dis e^{-delta_dis s} (U_RR + 2 U_R/R - 2 U/R^2) / S^(1/alpha)
  dS/ds = -(r-1) S - (R + U) S_R - alpha S (U_R + 2 U/R)

on a uniform grid R_i = i h, i = 0..N, with centred second-order differences.
At R = 0 the parities U odd, S even are imposed through ghost values.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.sparse import csr_matrix

from .cutoffs import xhat_jet
from .errors import CflViolation, TimeBeyondBlowup, UnsupportedOrder, ValidationError, VacuumEncountered
from .linear_modes import CutoffConfig, _lower_order_coeffs, _transport, build_cutoffs
from .params_phase import FluidParams
from .profile_solver import Profile

SCHEMES = ("centered", "upwind")


# --- transforms --------------------------------------------------------------

@dataclass(frozen=True)
class TransformSpec:
    T: float
    r: float
    direction: str = "physical->selfsimilar"

    def __post_init__(self):
        if not self.T > 0 or not self.r > 1:
            raise ValidationError("need T > 0 and r > 1")
        if self.direction not in ("physical->selfsimilar", "selfsimilar->physical"):
            raise ValidationError(f"unknown direction {self.direction!r}")


def to_selfsimilar(u, sigma, x, t, spec: TransformSpec):
    """(u, sigma)(x, t) -> (U, S)(y, s)."""
    if np.any(np.asarray(t) >= spec.T):
        raise TimeBeyondBlowup(f"t must be < T = {spec.T}")
    tau = spec.T - np.asarray(t, dtype=float)
    amp = spec.r * tau ** (1.0 - 1.0 / spec.r)
    s = -np.log(tau) / spec.r
    y = np.asarray(x) * np.exp(s)
    return amp * np.asarray(u), amp * np.asarray(sigma), y, s


def from_selfsimilar(U, S, y, s, spec: TransformSpec):
    """(U, S)(y, s) -> (u, sigma)(x, t)."""
    tau = np.exp(-spec.r * np.asarray(s, dtype=float))
    amp = tau ** (1.0 / spec.r - 1.0) / spec.r
    return amp * np.asarray(U), amp * np.asarray(S), np.asarray(y) * tau ** (1.0 / spec.r), spec.T - tau


def density_to_sigma(rho, alpha: float):
    return np.asarray(rho, dtype=float) ** alpha / alpha


def sigma_to_density(sigma, alpha: float):
    return (alpha * np.asarray(sigma, dtype=float)) ** (1.0 / alpha)


# --- weight ------------------------------------------------------------------

@dataclass(frozen=True)
class Weight:
    R0: float = 5.0
    eta: float = 0.1

    def __post_init__(self):
        if not self.R0 > 0 or not 0 < self.eta < 1:
            raise ValidationError("weight needs R0 > 0 and 0 < eta < 1")
        band = weight_phi(np.linspace(self.R0, 4.0 * self.R0, 2001), self)
        if np.any(np.diff(band) < 0):
            raise ValidationError(f"phi blend is not monotone for eta={self.eta} (needs eta below about 2/3)")


def weight_phi(R, w: Weight):
    """1 on [0, R0], |y|^{2(1-eta)}/(2 R0^{2(1-eta)}) beyond 4 R0, C^2 quintic blend between."""
    R = np.asarray(R, dtype=float)
    p = 2.0 * (1.0 - w.eta)
    c = 0.5 / w.R0 ** p
    a, b = w.R0, 4.0 * w.R0
    fb = c * b ** p
    db = c * p * b ** (p - 1)
    d2b = c * p * (p - 1) * b ** (p - 2)
    L = b - a
    # quintic Hermite in t = (R - a)/L with (f, f', f'') = (1, 0, 0) and (fb, db L, d2b L^2)
    t = np.clip((R - a) / L, 0.0, 1.0)
    h0 = 1 - 10 * t ** 3 + 15 * t ** 4 - 6 * t ** 5
    h1 = 10 * t ** 3 - 15 * t ** 4 + 6 * t ** 5
    g1 = -4 * t ** 3 + 7 * t ** 4 - 3 * t ** 5
    k1 = 0.5 * t ** 3 - t ** 4 + 0.5 * t ** 5
    blend = h0 * 1.0 + h1 * fb + g1 * db * L + k1 * d2b * L * L
    out = np.where(R <= a, 1.0, np.where(R >= b, c * np.maximum(R, b) ** p, blend))
    return out


# --- state and right-hand side ----------------------------------------------

@dataclass
class SimState:
    s: float
    R_grid: np.ndarray
    U: np.ndarray
    S: np.ndarray
    params: FluidParams
    nu: int = 0
    torus_L: float | None = None
    weight: Weight = field(default_factory=Weight)
    profile: Profile | None = None
    floor: float = 1e-12
    scheme: str = "centered"
    ko_eps: float = 0.0
    valid: bool = True
    held_boundary: tuple | None = None

    def __post_init__(self):
        R = self.R_grid
        if R.ndim != 1 or len(R) < 8 or R[0] != 0.0 or np.any(np.diff(R) <= 0):
            raise ValidationError("R_grid must start at 0 and be strictly increasing")
        if not np.allclose(np.diff(R), R[1] - R[0], rtol=1e-9, atol=0):
            raise ValidationError("R_grid must be uniform")
        if self.scheme not in SCHEMES:
            raise ValidationError(f"scheme must be one of {SCHEMES}")
        if self.nu not in (0, 1):
            raise ValidationError("nu must be 0 or 1")

    @property
    def h(self) -> float:
        return float(self.R_grid[1] - self.R_grid[0])


def profile_state(prof: Profile, R_max: float, grid_n: int, s: float = 0.0, **kw) -> SimState:
    """Uniform grid of grid_n intervals on [0, R_max] carrying the profile."""
    R = np.linspace(0.0, R_max, grid_n + 1)
    U, S = prof.evaluate(R)[:2]
    return SimState(s, R, U, S, prof.params, profile=prof, **kw)


def _d1(f, h, parity):
    """Centred first derivative with ghost f(-h) = parity f(h) and one-sided closure at the end."""
    d = np.empty_like(f)
    d[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    d[0] = (f[1] - parity * f[1]) / (2 * h)
    d[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    return d


def _d2(f, h, parity):
    d = np.empty_like(f)
    d[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / (h * h)
    d[0] = (f[1] - 2 * f[0] + parity * f[1]) / (h * h)
    d[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / (h * h)
    return d


def _d1_upwind(f, h, speed, parity):
    d = np.empty_like(f)
    back = np.empty_like(f)
    fwd = np.empty_like(f)
    back[1:] = (f[1:] - f[:-1]) / h
    back[0] = (f[0] - parity * f[1]) / h
    fwd[:-1] = (f[1:] - f[:-1]) / h
    fwd[-1] = back[-1]
    d[:] = np.where(speed > 0, back, fwd)
    return d


def _divergence(U, R, h):
    """U_R + 2U/R = R^-2 (R^2 U)_R in the volume-weighted (Evans) form, regular at R = 0."""
    q = R * R * U
    qg = np.concatenate([[-q[1]], q])  # (R^2 U) is odd
    Rg = np.concatenate([[-R[1]], R])
    d = np.empty_like(U)
    d[1:-1] = 3.0 * (qg[3:] - qg[1:-2]) / (Rg[3:] ** 3 - Rg[1:-2] ** 3)
    d[0] = 3.0 * (q[1] + q[1]) / (2.0 * R[1] ** 3)
    d[-1] = _d1(U, h, -1.0)[-1] + 2.0 * U[-1] / R[-1]
    return d


def _ko4(f, parity):
    """Fourth undivided difference with parity ghosts at R = 0 (zero in the last two points)."""
    g = np.concatenate([parity * f[2:0:-1], f])
    d = np.zeros_like(f)
    d[:-2] = g[4:] - 4 * g[3:-1] + 6 * g[2:-2] - 4 * g[1:-3] + g[:-4]
    return d


def dissipation_term(state: SimState, U=None, S=None):
    """nu C_dis e^{-delta_dis s} (vector Laplacian of U) / S^(1/alpha); also returns floor flag."""
    p = state.params
    U = state.U if U is None else U
    S = state.S if S is None else S
    h = state.h
    R = state.R_grid
    Ur = _d1(U, h, -1.0)
    Urr = _d2(U, h, -1.0)
    lap = np.zeros_like(U)
    lap[1:] = Urr[1:] + 2.0 * Ur[1:] / R[1:] - 2.0 * U[1:] / R[1:] ** 2
    floored = bool(np.any(S < state.floor))
    Sf = np.maximum(S, state.floor)
    coef = state.nu * p.c_dis * math.exp(-p.delta_dis * state.s)
    return coef * lap / Sf ** (1.0 / p.alpha), floored


def rhs_selfsimilar(state: SimState, U=None, S=None):
    """(dU/ds, dS/ds) on the grid."""
    p = state.params
    a, r = p.alpha, p.r
    U = state.U if U is None else U
    S = state.S if S is None else S
    R = state.R_grid
    h = state.h
    if state.scheme == "upwind":
        Ur = _d1_upwind(U, h, R + U, -1.0)
        Sr = _d1_upwind(S, h, R + U, 1.0)
    else:
        Ur = _d1(U, h, -1.0)
        Sr = _d1(S, h, 1.0)
    div = _divergence(U, R, h)
    dU = -(r - 1.0) * U - (R + U) * Ur - a * S * Sr
    dS = -(r - 1.0) * S - (R + U) * Sr - a * S * div
    if state.scheme == "centered" and state.ko_eps > 0:
        # fourth-difference damping of the odd-even mode, O(h^3) on smooth data
        spd = (np.abs(R + U) + a * np.abs(S)) * (state.ko_eps / (16.0 * h))
        dU = dU - spd * _ko4(U, -1.0)
        dS = dS - spd * _ko4(S, 1.0)
    if state.nu:
        if np.any(S < state.floor):
            raise VacuumEncountered(f"S fell below the floor {state.floor:g} at s={state.s:.6g}")
        diss, _ = dissipation_term(state, U, S)
        dU = dU + diss
    dU[0] = 0.0
    if state.torus_L is not None:
        dU[-1] = 0.0
        dS[-1] = 0.0
    else:
        # outflow closure that keeps the far-field decay exponent 1 - r
        q = (R[-1] / R[-2]) ** (1.0 - r)
        dU[-1] = q * dU[-2]
        dS[-1] = q * dS[-2]
    return dU, dS


def cfl_step(state: SimState, cfl: float = 0.5) -> float:
    """Explicit stability bound from transport (and dissipation when nu = 1)."""
    p = state.params
    h = state.h
    speed = float(np.max(np.abs(state.R_grid + state.U) + p.alpha * np.abs(state.S)))
    dt = cfl * h / max(speed, 1e-300)
    if state.nu:
        smin = max(float(np.min(state.S)), state.floor)
        D = p.c_dis * math.exp(-p.delta_dis * state.s) / smin ** (1.0 / p.alpha)
        dt = min(dt, cfl * h * h / (2.0 * D))
    return dt


# --- diagnostics -------------------------------------------------------------

def _vec_grad2(u, h, R, k):
    """|grad^k (u R_hat)|^2 for k = 0, 1, 2 on the radial grid (R > 0 entries)."""
    if k == 0:
        return u * u
    du = np.gradient(u, h, edge_order=2)
    if k == 1:
        return du ** 2 + 2.0 * (u / R) ** 2
    d2u = np.gradient(du, h, edge_order=2)
    g1 = (du - u / R) / R
    g2 = (d2u - 2.0 * g1) / R
    A = R * g2 - g1
    return A * A + 6.0 * A * g1 + 15.0 * g1 * g1


def _scal_grad2(f, h, R, k):
    if k == 0:
        return f * f
    df = np.gradient(f, h, edge_order=2)
    if k == 1:
        return df ** 2
    d2f = np.gradient(df, h, edge_order=2)
    return d2f ** 2 + 2.0 * (df / R) ** 2


def energy_ek(state: SimState, K: int = 1) -> float:
    """int (|grad^K U|^2 + |grad^K S|^2) phi^K dy for the radial fields, K <= 2."""
    if K < 0 or K > 2:
        raise UnsupportedOrder(f"E_K supports K <= 2 for radial fields, got {K}")
    h = state.h
    Rs = np.where(state.R_grid > 0, state.R_grid, h)
    dens = (_vec_grad2(state.U, h, Rs, K) + _scal_grad2(state.S, h, Rs, K))[1:]
    R = state.R_grid[1:]
    phi = weight_phi(R, state.weight) ** K
    return float(np.trapezoid(4.0 * math.pi * R * R * dens * phi, R))


def _xhat_profile(state: SimState):
    prof = state.profile
    R = state.R_grid
    Ub, Sb, _, _ = prof.evaluate(R)
    X = xhat_jet(R, state.s, 0)[0]
    return X * Ub, X * Sb


def diagnostics(state: SimState, K: int = 1) -> dict:
    out = {"s": state.s, "minS": float(np.min(state.S)), "E_K": energy_ek(state, K)}
    if state.profile is not None:
        XU, XS = _xhat_profile(state)
        out["supU_dev"] = float(np.max(np.abs(state.U - XU)))
        out["supS_dev"] = float(np.max(np.abs(state.S - XS)))
    else:
        out["supU_dev"] = out["supS_dev"] = float("nan")
    return out


# --- time stepping -----------------------------------------------------------

def _extend_torus(state: SimState) -> SimState:
    """Grow the grid toward e^s L, filling new points with the held far-field state."""
    target = math.exp(state.s) * state.torus_L
    h = state.h
    n_new = int(math.floor((target - state.R_grid[-1]) / h + 1e-9))
    if n_new <= 0:
        return state
    held = state.held_boundary or (state.U[-1], state.S[-1])
    R = np.concatenate([state.R_grid, state.R_grid[-1] + h * np.arange(1, n_new + 1)])
    U = np.concatenate([state.U, np.full(n_new, held[0])])
    S = np.concatenate([state.S, np.full(n_new, held[1])])
    return replace(state, R_grid=R, U=U, S=S, held_boundary=held)


def evolve(state: SimState, s_end: float, rtol: float = 1e-8, n_out: int = 11, K: int = 1,
           cfl: float = 0.5, min_dt: float = 1e-10):
    """Adaptive explicit (RK45) evolution to s_end with a CFL-limited step.

    Returns the final state and a list of diagnostic rows (one per output time).
    """
    if not s_end > state.s:
        raise ValidationError("s_end must exceed the current s")
    if state.torus_L is not None:
        if state.held_boundary is None:
            state = replace(state, held_boundary=(float(state.U[-1]), float(state.S[-1])))
        if state.R_grid[-1] > math.exp(state.s) * state.torus_L + state.h:
            raise ValidationError("torus domain e^s L is smaller than the initial grid")
    times = np.linspace(state.s, s_end, n_out)
    rows = [diagnostics(state, K)]
    for s_a, s_b in zip(times[:-1], times[1:]):
        if state.torus_L is not None:
            state = _extend_torus(replace(state, s=s_a))
        dt = cfl_step(state, cfl)
        if dt < min_dt:
            raise CflViolation(f"CFL step {dt:.3g} below {min_dt:.3g} at s={s_a:.6g}")
        n = len(state.R_grid)

        def f(s, y, st=state):
            cur = replace(st, s=s) if st.nu else st
            dU, dS = rhs_selfsimilar(cur, y[:n], y[n:])
            return np.concatenate([dU, dS])

        sol = solve_ivp(f, (s_a, s_b), np.concatenate([state.U, state.S]), method="RK45", rtol=rtol,
                        atol=rtol * 1e-3, max_step=dt)
        if sol.status != 0:
            raise CflViolation(f"integrator failed at s={sol.t[-1]:.6g}: {sol.message}")
        y = sol.y[:, -1]
        state = replace(state, s=s_b, U=y[:n], S=y[n:])
        if np.min(state.S) < state.floor:
            state = replace(state, valid=False)
            raise VacuumEncountered(f"S fell below the floor at s={s_b:.6g}")
        rows.append(diagnostics(state, K))
    return state, rows


def diagnostics_csv(rows) -> str:
    lines = ["s,supU_dev,supS_dev,minS,E_K"]
    for d in rows:
        lines.append(",".join(f"{d[k]:.12e}" for k in ("s", "supU_dev", "supS_dev", "minS", "E_K")))
    return "\n".join(lines) + "\n"


# --- truncation error terms ---------------------------------------------------

def truncation_terms(prof: Profile, R, s: float):
    """E_u and E_s (simplified forms) at radii R and self-similar time s."""
    R = np.asarray(R, dtype=float)
    a = prof.params.alpha
    Ub, Sb, dU, dS = prof.evaluate(R)
    xj = xhat_jet(R, s, 1)
    X, dX = xj[0], xj[1]
    X2X = X * X - X
    # U_bar / R tends to dU_bar/dR at the origin
    UbR = np.divide(Ub, R, out=dU.copy(), where=R > 0)
    E_u = -X2X * Ub * dU - X * dX * Ub * Ub - a * X2X * Sb * dS - a * X * dX * Sb * Sb
    E_s = -X2X * Ub * dS - (a + 1.0) * X * dX * Ub * Sb - a * X2X * Sb * (dU + 2.0 * UbR)
    return E_u, E_s


def truncation_decay(prof: Profile, s0: float, span: float = 3.0, n_s: int = 13, n_R: int = 4000):
    """sup|E_u| and sup|E_s| over s in [s0, s0+span] and fitted exponential rates."""
    ss = np.linspace(s0, s0 + span, n_s)
    su, ses = [], []
    for s in ss:
        R = np.linspace(0.5 * math.exp(s), math.exp(s), n_R)
        E_u, E_s = truncation_terms(prof, R, s)
        su.append(np.max(np.abs(E_u)))
        ses.append(np.max(np.abs(E_s)))
    su, ses = np.array(su), np.array(ses)
    return {"s": ss, "sup_Eu": su, "sup_Es": ses,
            "rate_Eu": float(np.polyfit(ss, np.log(su), 1)[0]),
            "rate_Es": float(np.polyfit(ss, np.log(ses), 1)[0]),
            "expected": 1.0 - 2.0 * prof.params.r}


# --- dissipation decay ----------------------------------------------------------

def dissipation_decay(prof: Profile, s0: float = 300.0, span: float = 3.0, R_max: float = 10.0,
                      grid_n: int = 1024, n_out: int = 13, rtol: float = 1e-8, sonic_band: float = 0.1):
    """Evolve the profile with nu = 1 from s0 and fit the decay of sup|F_dis|.

    The fit uses the sup over |R - 1| >= sonic_band: inside the band the
    profile has a steep layer (see profile construction) whose discrete drift
    dominates the Laplacian.  The full-domain sup is returned as well.
    """
    st = profile_state(prof, R_max, grid_n, s=s0, nu=1)
    away = np.abs(st.R_grid - 1.0) >= sonic_band
    times, sup, sup_all = [], [], []
    floored = False
    ts = np.linspace(s0, s0 + span, n_out)
    for k, s_b in enumerate(ts):
        if k:
            st, _ = evolve(st, s_b, rtol=rtol, n_out=2)
        F, fl = dissipation_term(st)
        floored = floored or fl
        times.append(st.s)
        sup.append(float(np.max(np.abs(F[away]))))
        sup_all.append(float(np.max(np.abs(F))))
    times, sup, sup_all = np.array(times), np.array(sup), np.array(sup_all)
    return {"s": times, "sup_Fdis": sup, "sup_Fdis_all": sup_all,
            "rate": float(np.polyfit(times, np.log(sup), 1)[0]),
            "rate_all": float(np.polyfit(times, np.log(sup_all), 1)[0]),
            "expected": -prof.params.delta_dis, "valid": not floored, "minS": float(np.min(st.S))}


# --- stationarity ----------------------------------------------------------------

def stationarity_drift(prof: Profile, grid_ns=(1024, 2048, 4096), R_max: float = 10.0, ds: float = 1.0,
                       rtol: float = 1e-10, s0: float = 20.0):
    """sup deviation from the profile after evolving it for ds, for several grids.

    s0 is taken large so that X_hat = 1 on the whole grid.
    """
    out = []
    for n in grid_ns:
        st = profile_state(prof, R_max, n, s=s0)
        res_u, res_s = rhs_selfsimilar(st)
        st1, rows = evolve(st, st.s + ds, rtol=rtol, n_out=2)
        dev = max(rows[-1]["supU_dev"], rows[-1]["supS_dev"])
        out.append({"grid_n": n, "h": st.h, "sup_dev": dev,
                    "rhs_sup": float(max(np.max(np.abs(res_u)), np.max(np.abs(res_s)))),
                    "minS": rows[-1]["minS"]})
    for a, b in zip(out[:-1], out[1:]):
        b["ratio"] = a["sup_dev"] / b["sup_dev"] if b["sup_dev"] > 0 else float("inf")
        b["rhs_ratio"] = a["rhs_sup"] / b["rhs_sup"] if b["rhs_sup"] > 0 else float("inf")
    return out


def radial_bump(R, lo: float = 1.0, hi: float = 2.0):
    """Smooth bump supported in [lo, hi], maximum 1."""
    R = np.asarray(R, dtype=float)
    out = np.zeros_like(R)
    m = (R > lo) & (R < hi)
    t = (R[m] - lo) / (hi - lo)
    out[m] = np.exp(-1.0 / (t * (1.0 - t)) + 4.0)
    return out


def perturbation_response(prof: Profile, eps: float = 1e-4, ds: float = 1.5, R_max: float = 10.0,
                          grid_n: int = 1024, n_out: int = 7, s0: float = 20.0, rtol: float = 1e-8):
    """Evolve profile and profile + eps*bump side by side (nu = 0); fit the rate of their sup difference.

    Subtracting the unperturbed run removes the discrete stationarity drift,
    leaving the linear response.  ds should end before the bump, carried
    outward by the R d/dR transport, reaches R_max.
    """
    base = profile_state(prof, R_max, grid_n, s=s0)
    b = radial_bump(base.R_grid)
    pert = replace(base, U=base.U + eps * b, S=base.S + eps * b)
    times = [s0]
    dev = [eps]
    min_s = [float(np.min(pert.S))]
    for s_b in np.linspace(s0, s0 + ds, n_out)[1:]:
        base, _ = evolve(base, s_b, rtol=rtol, n_out=2)
        pert, _ = evolve(pert, s_b, rtol=rtol, n_out=2)
        times.append(s_b)
        dev.append(float(max(np.max(np.abs(pert.U - base.U)), np.max(np.abs(pert.S - base.S)))))
        min_s.append(float(np.min(pert.S)))
    times, dev = np.array(times), np.array(dev)
    return {"s": times, "sup_dev": dev, "rate": float(np.polyfit(times, np.log(dev), 1)[0]),
            "min_S": np.array(min_s), "initial_min_S": float(np.min(profile_state(prof, R_max, grid_n).S))}


# --- linearised truncated vs extended evolution ----------------------------------

def linear_operator_n0(prof: Profile, R, h: float, chi1, chi2, J: float) -> csr_matrix:
    """chi2 L^e - J(1 - chi1) for radial perturbations, as a sparse matrix on (W, Z)."""
    p = prof.params
    a, r = p.alpha, p.r
    Ub, Sb, dU, dS = prof.evaluate(R)
    n = len(R)
    speed_w = chi2 * (R + Ub + a * Sb)
    speed_z = chi2 * (R + Ub - a * Sb)
    damp = -J * (1.0 - chi1)
    pW, qW, pZ, qZ = _lower_order_coeffs("consistent", a, R, Ub, Sb, dU, dS)
    A = np.zeros((2 * n, 2 * n))
    I = np.arange(n)
    A[:n, :n] = _transport(speed_w, h, True)
    A[n:, n:] = _transport(speed_z, h, True)
    A[I, I] += damp + chi2 * (-(r - 1.0) + 0.5 * (pW + qW))
    A[I, n + I] += chi2 * 0.5 * (pW - qW)
    A[n + I, n + I] += damp + chi2 * (-(r - 1.0) + 0.5 * (pZ - qZ))
    A[n + I, I] += chi2 * 0.5 * (pZ + qZ)
    return csr_matrix(A)


def truncated_vs_extended(prof: Profile, cfg: CutoffConfig, s0: float, s_end: float, data_ext, data_trunc,
                          rtol: float = 1e-9) -> dict:
    """Evolve extended and truncated linearised radial problems side by side.

    ``data_*`` are (W, Z) arrays on the mode grid R_i = i h.  The forcing is
    the truncation error (E_u, E_s), which vanishes identically on the grid
    once e^{s0}/2 exceeds 3 C0.
    """
    R = cfg.radii
    h = cfg.h
    if math.exp(s0) / 2.0 <= 3.0 * cfg.C0:
        raise ValidationError("need e^{s0}/2 > 3 C0 so that the truncated profile is exact on the grid")
    cut = build_cutoffs(cfg)
    ones = np.ones_like(R)
    A_ext = linear_operator_n0(prof, R, h, ones, ones, 0.0)
    A_tr = linear_operator_n0(prof, R, h, cut.chi1, cut.chi2, cfg.J)
    n2 = 2 * len(R)
    chi2_2 = np.concatenate([cut.chi2, cut.chi2])

    def forcing(s):
        E_u, E_s = truncation_terms(prof, R, s)
        return np.concatenate([E_u + E_s, E_u - E_s])

    def f(s, y):
        F = forcing(s)
        return np.concatenate([A_ext @ y[:n2] + F, A_tr @ y[n2:] + chi2_2 * F])

    y0 = np.concatenate([np.concatenate(data_ext), np.concatenate(data_trunc)])
    Ub, Sb, _, _ = prof.evaluate(R)
    speed = float(np.max(np.abs(R + Ub) + prof.params.alpha * np.abs(Sb)))
    max_step = 0.5 * h / speed
    sol = solve_ivp(f, (s0, s_end), y0, method="RK45", rtol=rtol, atol=rtol * 1e-3, max_step=max_step,
                    t_eval=np.linspace(s0, s_end, 11))
    if sol.status != 0:
        raise CflViolation(sol.message)
    inside = np.concatenate([R <= cfg.C0, R <= cfg.C0])
    diff = np.abs(sol.y[:n2][inside] - sol.y[n2:][inside])
    scale = float(max(np.max(np.abs(y0)), 1e-300))
    sup_diff = float(np.max(diff)) if diff.size else 0.0
    bound = 10.0 * h * h * scale
    return {"sup_diff_inside": sup_diff, "bound": bound, "h": h, "scale": scale, "holds": sup_diff <= bound,
            "times": sol.t}
