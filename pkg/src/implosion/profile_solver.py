"""Self-similar profile construction.

The profile is a trajectory of the autonomous system

    dW/dxi = N_W/D_W,  dZ/dxi = N_Z/D_Z,   xi = log R,

that starts at the point at infinity P_0 (R -> 0, where W ~ w0/R and
Z ~ -w0/R), crosses the sonic line D_Z = 0 exactly at P_s (placed at R = 1)
and ends at the origin P_inf = (0, 0) as R -> infinity.

Two facts about P_s shape the algorithm.

* P_s is a node of the desingularised flow.  Trajectories through it are
  tangent to the direction (W1, Z1) and differ from the analytic solution by
  c |xi|^kappa with kappa = kappa(gamma, r) > 1 (``node_exponent``).  Away
  from P_s these modes grow like |xi|^kappa, so integrating outward from a
  Taylor seed amplifies every rounding error by (xi/eps)^kappa.
* Integrating toward P_s damps the same modes.

The inner branch (xi < 0) is therefore integrated from the regular
expansion at R = 0 toward P_s and spliced onto the Taylor polynomial close
to the sonic line.  The outer branch (xi > 0) is integrated from the Taylor
seed at xi = +step_eps.  A tiny, recorded offset along Z selects a member of
the outgoing fan that reaches P_inf robustly instead of leaving the choice
to rounding noise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import BPoly
from scipy.optimize import brentq

from . import jets
from .errors import (
    DegenerateOrder,
    DenominatorVanished,
    ProfileTooShort,
    SeedRejected,
    ToleranceNotMet,
    ValidationError,
    ZeroAmplitude,
)
from .params_phase import FluidParams, SonicData, eval_phase_polynomials, phase_gradients, sonic_data

MAX_ORDER = 30


@dataclass
class TaylorSeed:
    order: int
    coeffs_W: np.ndarray
    coeffs_Z: np.ndarray
    step_eps: float = 1e-3
    branch: str = "principal"

    def __call__(self, xi):
        """Evaluate the truncated series at xi."""
        return (np.polynomial.polynomial.polyval(xi, self.coeffs_W),
                np.polynomial.polynomial.polyval(xi, self.coeffs_Z))

    def derivative(self, xi, m: int = 1):
        dW = np.polynomial.polynomial.polyder(self.coeffs_W, m)
        dZ = np.polynomial.polynomial.polyder(self.coeffs_Z, m)
        return (np.polynomial.polynomial.polyval(xi, dW),
                np.polynomial.polynomial.polyval(xi, dZ))


@dataclass
class Profile:
    params: FluidParams
    xi_grid: np.ndarray
    W: np.ndarray
    Z: np.ndarray
    dW: np.ndarray
    dZ: np.ndarray
    R: np.ndarray
    U_bar: np.ndarray
    S_bar: np.ndarray
    dU_dR: np.ndarray
    dS_dR: np.ndarray
    w0: float = float("nan")
    w0_fit: float = float("nan")
    w1_fit: float = float("nan")
    w3_fit: float = float("nan")
    farfield_exponent_fit: float = float("nan")
    farfield_window: tuple = (8.0, 12.0)
    diagnostics: dict = field(default_factory=dict)
    seed: TaylorSeed | None = None
    _tail: object = field(default=None, repr=False, compare=False)
    _interp: object = field(default=None, repr=False, compare=False)

    def csv_rows(self):
        return np.column_stack([self.R, self.U_bar, self.S_bar, self.dU_dR, self.dS_dR])

    def phase_at(self, xi):
        """(W, Z) at arbitrary xi = log R.

        Inside the table: C^2 quintic Hermite interpolation from values and
        exact first and second derivatives.
        Left of it: the regular series at R = 0.  Right of it: continued
        integration of the profile ODE, cached on the instance.
        """
        xi = np.asarray(xi, dtype=float)
        W = np.empty_like(xi)
        Z = np.empty_like(xi)
        lo, hi = self.xi_grid[0], self.xi_grid[-1]
        m_in = (xi >= lo) & (xi <= hi)
        if m_in.any():
            if self._interp is None:
                self._interp = self._build_interp()
            W[m_in] = self._interp[0](xi[m_in])
            Z[m_in] = self._interp[1](xi[m_in])
        m_lo = xi < lo
        if m_lo.any():
            a = origin_series(self.params, self.w0)
            sign = np.array([(-1.0) ** (k + 1) for k in range(len(a))])
            R = np.exp(xi[m_lo])
            W[m_lo] = np.polynomial.polynomial.polyval(R, a) / R
            Z[m_lo] = np.polynomial.polynomial.polyval(R, sign * a) / R
        m_hi = xi > hi
        if m_hi.any():
            top = float(xi[m_hi].max())
            if self._tail is None or self._tail.t_max < top:
                sol = solve_ivp(_rhs(self.params), [hi, max(top, hi + 1.0) + 1.0], [self.W[-1], self.Z[-1]],
                                method="DOP853", rtol=1e-11, atol=1e-15, dense_output=True)
                if sol.status != 0:
                    raise ProfileTooShort(f"profile continuation failed: {sol.message}")
                self._tail = sol.sol
            W[m_hi], Z[m_hi] = self._tail(xi[m_hi])
        return W, Z

    def _build_interp(self):
        W2, Z2 = _second_derivatives(self.W, self.Z, self.params)
        if self.seed is not None:
            near = np.abs(self.xi_grid) < self.seed.step_eps
            W2[near], Z2[near] = self.seed.derivative(self.xi_grid[near], 2)
        bw = BPoly.from_derivatives(self.xi_grid, np.column_stack([self.W, self.dW, W2]))
        bz = BPoly.from_derivatives(self.xi_grid, np.column_stack([self.Z, self.dZ, Z2]))
        return bw, bz

    def evaluate(self, R):
        """(U_bar, S_bar, dU_bar/dR, dS_bar/dR) at radii R >= 0.

        At R = 0 the regular limits (0, a_0, a_1, 0) of the origin series are returned.
        """
        R = np.asarray(R, dtype=float)
        zero = R == 0.0
        if zero.any():
            out = self.evaluate(np.where(zero, 1.0, R))
            a = origin_series(self.params, self.w0)
            return tuple(np.where(zero, v0, v) for v, v0 in zip(out, (0.0, a[0], a[1], 0.0)))
        W, Z = self.phase_at(np.log(R))
        nw, dw, nz, dz = eval_phase_polynomials(W, Z, self.params)
        with np.errstate(divide="ignore", invalid="ignore"):
            dW, dZ = nw / dw, nz / dz
        if self.seed is not None:
            # the sonic line is a removable singularity of N_Z/D_Z
            xi = np.log(R)
            m = np.abs(xi) < self.seed.step_eps
            if m.any():
                dW[m], dZ[m] = self.seed.derivative(xi[m])
        U, S = 0.5 * (W + Z), 0.5 * (W - Z)
        return R * U, R * S, U + 0.5 * (dW + dZ), S + 0.5 * (dW - dZ)


def node_exponent(params: FluidParams, sd: SonicData, Z1: float | None = None) -> float:
    """kappa such that nearby trajectories differ by c|xi|^kappa at P_s."""
    g = params.gamma
    Z1 = sd.Z1 if Z1 is None else Z1
    (_, _), (_, nzz) = phase_gradients(sd.P_s.W, sd.P_s.Z, params)
    d1 = (3.0 - g) / 4.0 * sd.W1 + (1.0 + g) / 4.0 * Z1
    return (nzz - (1.0 + g) / 4.0 * Z1) / d1


def _cauchy(a, b, n):
    return float(np.dot(a[: n + 1], b[n::-1]))


def taylor_seed(sd: SonicData, params: FluidParams, order: int = 6, step_eps: float = 1e-3,
                branch: str = "principal") -> TaylorSeed:
    """Taylor coefficients of (W, Z)(xi) at the sonic point.

    Order n of the W relation D_W W' = N_W gives w_n directly since
    D_W(P_s) != 0.  For Z, D_Z(P_s) = 0, so z_n is read off the relation
    D_Z Z' = N_Z at order n, where it enters linearly with coefficient
    d1 (n - kappa); d1 = dD_Z/dxi at P_s.
    """
    if not (1 <= order <= MAX_ORDER):
        raise ValidationError(f"order must be in [1, {MAX_ORDER}], got {order}")
    if branch not in ("principal", "other"):
        raise ValidationError(f"unknown branch {branch!r}")
    g, r = params.gamma, params.r
    aWw, aWz = (1.0 + g) / 4.0, (3.0 - g) / 4.0
    aZw, aZz = (3.0 - g) / 4.0, (1.0 + g) / 4.0
    w = np.zeros(order + 2)
    z = np.zeros(order + 2)
    w[0], z[0] = sd.P_s.W, sd.P_s.Z
    w[1] = sd.W1
    z[1] = sd.Z1 if branch == "principal" else sd.Z1_other

    def nw(n):
        return -r * w[n] + (g - 1.0) / 4.0 * _cauchy(z, z, n) + (g - 3.0) / 4.0 * _cauchy(w, z, n) \
            - g / 2.0 * _cauchy(w, w, n)

    def nz(n):
        return -r * z[n] + (g - 1.0) / 4.0 * _cauchy(w, w, n) + (g - 3.0) / 4.0 * _cauchy(w, z, n) \
            - g / 2.0 * _cauchy(z, z, n)

    dW0 = 1.0 + aWw * w[0] + aWz * z[0]
    for n in range(2, order + 1):
        dw = aWw * w + aWz * z
        dw[0] = dW0
        s = sum((j + 1) * w[j + 1] * dw[n - 1 - j] for j in range(n - 1))
        w[n] = (nw(n - 1) - s) / (n * dW0)

        def zres(zn):
            z[n] = zn
            dz = aZw * w + aZz * z
            dz[0] = 0.0
            return sum((j + 1) * z[j + 1] * dz[n - j] for j in range(n)) - nz(n)

        f0 = zres(0.0)
        slope = zres(1.0) - f0
        scale = abs(n * (aZw * w[1] + aZz * z[1])) + 1.0
        if abs(slope) < 1e-12 * scale:
            raise DegenerateOrder(f"resonant Taylor order k={n} at (gamma, r)=({g}, {r})")
        z[n] = -f0 / slope
    return TaylorSeed(order, w[: order + 1].copy(), z[: order + 1].copy(), step_eps, branch)


def seed_residual(seed: TaylorSeed, params: FluidParams, xi: float) -> float:
    """max(|W' D_W - N_W|, |Z' D_Z - N_Z|) of the truncated series at xi."""
    W, Z = seed(xi)
    dW, dZ = seed.derivative(xi)
    nw, dw, nz, dz = eval_phase_polynomials(W, Z, params)
    return max(abs(dW * dw - nw), abs(dZ * dz - nz))


def origin_series(params: FluidParams, w0: float, order: int = 8) -> np.ndarray:
    """Coefficients a_k of R W = sum a_k R^k at the regular centre R = 0.

    Z follows from parity: R Z = sum (-1)^(k+1) a_k R^k.  a_1 is the centre
    value w1 of U and a_3 the quadratic coefficient w3.
    """
    if w0 == 0.0:
        raise ZeroAmplitude("w0 must be nonzero")
    g, r = params.gamma, params.r
    c1, c2 = (1.0 + g) / 4.0, (3.0 - g) / 4.0
    a = np.zeros(order + 1)
    a[0] = w0
    sign = np.array([(-1.0) ** (k + 1) for k in range(order + 1)])

    def res(n):
        b = sign * a
        lhs_a = np.arange(order + 1) - 1.0
        f1 = np.convolve(lhs_a * a, c1 * a + c2 * b + np.eye(1, order + 1, 1)[0])[n]
        f2 = -r * (a[n - 1] if n >= 1 else 0.0) + (g - 1.0) / 4.0 * np.convolve(b, b)[n] \
            + (g - 3.0) / 4.0 * np.convolve(a, b)[n] - g / 2.0 * np.convolve(a, a)[n]
        return f1 - f2

    for n in range(1, order + 1):
        a[n] = 0.0
        f0 = res(n)
        a[n] = 1.0
        slope = res(n) - f0
        if abs(slope) < 1e-13 * abs(w0) ** 2:
            raise DegenerateOrder(f"resonant origin order k={n}")
        a[n] = -f0 / slope
    return a


def w3_nearorigin(params: FluidParams, w0: float) -> float:
    """Closed-form quadratic coefficient of W - w0/R - w1 near R = 0."""
    if w0 == 0.0:
        raise ZeroAmplitude("w0 must be nonzero")
    g, r = params.gamma, params.r
    return -8.0 * (r - 1.0) * (3.0 * g - 2.0 * r - 1.0) * ((3.0 * g - 5.0) * r + 2.0) / (
        135.0 * w0 * w0 * (g - 1.0) ** 5)


def w1_nearorigin(params: FluidParams) -> float:
    return -2.0 * (params.r - 1.0) / (3.0 * (params.gamma - 1.0))


def _rhs(params):
    def f(_, y):
        nw, dw, nz, dz = eval_phase_polynomials(y[0], y[1], params)
        return [nw / dw, nz / dz]
    return f


def _denominator_events(params, offset_dz=0.0):
    def ev_dw(_, y):
        return eval_phase_polynomials(y[0], y[1], params)[1]

    def ev_dz(_, y):
        return eval_phase_polynomials(y[0], y[1], params)[3] + offset_dz

    ev_dw.terminal = True
    ev_dz.terminal = True
    return [ev_dw, ev_dz]


def _outer_branch(seed, params, xi_max, tol, offset):
    W, Z = seed(seed.step_eps)
    y0 = [W, Z + offset]
    sol = solve_ivp(_rhs(params), [seed.step_eps, xi_max], y0, method="DOP853", rtol=tol,
                    atol=tol * 1e-3, dense_output=True, events=_denominator_events(params))
    if sol.status == -1:
        raise ToleranceNotMet(sol.message)
    return sol


def _inner_branch(params, seed, xi_start, tol, eta_join, w0=1.0, series_order=8):
    a = origin_series(params, w0, series_order)
    sign = np.array([(-1.0) ** (k + 1) for k in range(len(a))])
    R0 = math.exp(xi_start)
    y0 = [np.polynomial.polynomial.polyval(R0, a) / R0, np.polynomial.polynomial.polyval(R0, sign * a) / R0]
    events = _denominator_events(params, offset_dz=eta_join)
    sol = solve_ivp(_rhs(params), [xi_start, xi_start + 60.0], y0, method="DOP853", rtol=tol,
                    atol=tol * 1e-3, dense_output=True, events=events)
    if sol.status == -1:
        raise ToleranceNotMet(sol.message)
    if len(sol.t_events[1]) == 0:
        raise DenominatorVanished("inner trajectory vanished D_W before reaching the sonic line")
    return sol, a


def _join_xi(seed, params, eta_join):
    """xi < 0 where the seed polynomial has D_Z = -eta_join."""
    def f(x):
        W, Z = seed(x)
        return eval_phase_polynomials(W, Z, params)[3] + eta_join

    lo = -1e-3
    while f(lo) > 0.0 and lo > -0.5:
        lo *= 2.0
    return brentq(f, lo, 0.0, xtol=1e-15)


def integrate_profile(seed: TaylorSeed, params: FluidParams, xi_min: float = -8.0, xi_max: float = 12.0,
                      tol: float = 1e-10, n_grid: int = 4096, fan_offset: float = 1e-9,
                      eta_join: float = 1e-6, farfield_window: tuple | None = None) -> Profile:
    """Integrate both branches and resample onto a uniform xi grid.

    ``fan_offset`` is added to Z at xi = +step_eps.  When the outer trajectory
    falls back onto the sonic line, the offset is raised tenfold (up to 1e-3)
    and the accepted value is recorded in ``diagnostics``.  ``fan_offset=0``
    disables both the offset and the escalation.
    """
    eps = seed.step_eps
    if not (xi_min < -eps < eps < xi_max):
        raise ValidationError("need xi_min < -step_eps < step_eps < xi_max")
    if not (1e-13 <= tol <= 1e-6):
        raise ValidationError(f"tol must be in [1e-13, 1e-6], got {tol}")
    if n_grid < 16:
        raise ValidationError("n_grid too small")
    sd = sonic_data(params)
    diag = {"kappa": node_exponent(params, sd, seed.coeffs_Z[1]), "step_eps": eps, "tol": tol,
            "branch": seed.branch, "eta_join": eta_join}

    # outer branch
    offset = fan_offset
    attempts = []
    while True:
        outer = _outer_branch(seed, params, xi_max, tol, offset)
        attempts.append(offset)
        if outer.status == 0:
            break
        if fan_offset == 0.0 or offset >= 1e-3:
            W, Z = outer.y[:, -1]
            which = "D_W" if len(outer.t_events[0]) else "D_Z"
            raise DenominatorVanished(
                f"outer branch: {which} vanished at xi={outer.t[-1]:.6g} (W, Z)=({W:.6g}, {Z:.6g}); "
                f"offsets tried {attempts}")
        offset *= 10.0
    diag["fan_offset"] = offset
    diag["fan_offsets_tried"] = attempts

    # inner branch, started far enough left that the shifted start precedes xi_min
    xi_start = xi_min - 6.0
    for _ in range(6):
        inner, a_series = _inner_branch(params, seed, xi_start, tol, eta_join)
        t_hit = float(inner.t_events[1][0])
        xi_j = _join_xi(seed, params, eta_join)
        shift = xi_j - t_hit
        if xi_start + shift <= xi_min - 0.5:
            break
        xi_start -= 6.0
    else:
        raise ProfileTooShort("inner branch could not cover xi_min")
    yj = inner.y_events[1][0]
    nw, dw, nz, dz = eval_phase_polynomials(yj[0], yj[1], params)
    slope_in = (nz / dz) / (nw / dw)
    slope_seed = seed.coeffs_Z[1] / seed.coeffs_W[1]
    alt_Z1 = sd.Z1_other if seed.branch == "principal" else sd.Z1
    slope_alt = alt_Z1 / sd.W1
    Wj, Zj = seed(xi_j)
    diag["join_xi"] = xi_j
    diag["join_mismatch"] = float(math.hypot(yj[0] - Wj, yj[1] - Zj))
    diag["join_slope_inner"] = float(slope_in)
    diag["join_slope_seed"] = float(slope_seed)
    if abs(slope_in - slope_seed) > abs(slope_in - slope_alt):
        raise SeedRejected(
            f"inner trajectory enters P_s with slope {slope_in:.6g}, seed slope {slope_seed:.6g}")
    w0 = a_series[0] * math.exp(shift)
    diag["xi_shift"] = shift

    # resample
    xi = np.linspace(xi_min, xi_max, n_grid)
    W = np.empty_like(xi)
    Z = np.empty_like(xi)
    m_in = xi <= xi_j
    m_out = xi >= eps
    m_mid = ~(m_in | m_out)
    W[m_in], Z[m_in] = inner.sol(xi[m_in] - shift)
    W[m_out], Z[m_out] = outer.sol(xi[m_out])
    W[m_mid], Z[m_mid] = seed(xi[m_mid])
    nw, dw, nz, dz = eval_phase_polynomials(W, Z, params)
    with np.errstate(divide="ignore", invalid="ignore"):
        dW = nw / dw
        dZ = nz / dz
    tdW, tdZ = seed.derivative(xi[m_mid])
    dW[m_mid], dZ[m_mid] = tdW, tdZ
    prof = _physical(params, xi, W, Z, dW, dZ)
    prof.w0 = w0
    prof.seed = seed
    prof.diagnostics = diag
    _fit_nearorigin(prof)
    _fit_farfield(prof, farfield_window)
    diag["D_W_min"] = float(np.min(dw))
    return prof


def _physical(params, xi, W, Z, dW, dZ):
    R = np.exp(xi)
    U = 0.5 * (W + Z)
    S = 0.5 * (W - Z)
    dU = 0.5 * (dW + dZ)
    dS = 0.5 * (dW - dZ)
    return Profile(params, xi, W, Z, dW, dZ, R, R * U, R * S, U + dU, S + dS)


def _fit_nearorigin(prof: Profile, lo: float = -5.0, hi: float = -3.0, deg: int = 6):
    # Closer to R = 0 the R^3 term of R W drops below the rounding level of
    # W ~ w0/R, so the window sits where w3 is still resolvable.
    m = (prof.xi_grid >= lo) & (prof.xi_grid <= hi)
    if m.sum() < 2 * deg:
        return
    R = prof.R[m]
    # R W = w0 + w1 R + w2 R^2 + w3 R^3 + ...
    c = np.polynomial.polynomial.polyfit(R, R * prof.W[m], deg)
    prof.w0_fit, prof.w1_fit, prof.w3_fit = float(c[0]), float(c[1]), float(c[3])


def _fit_farfield(prof: Profile, window=None):
    xmax = prof.xi_grid[-1]
    lo, hi = window if window is not None else (max(xmax - 4.0, 0.0), xmax)
    m = (prof.xi_grid >= lo) & (prof.xi_grid <= hi)
    prof.farfield_window = (float(lo), float(hi))
    if m.sum() < 4:
        return
    slope = np.polyfit(prof.xi_grid[m], np.log(np.abs(prof.U_bar[m])), 1)[0]
    prof.farfield_exponent_fit = float(slope)


def build_profile(params: FluidParams, order: int = 6, step_eps: float = 1e-3, xi_min: float = -8.0,
                  xi_max: float = 12.0, tol: float = 1e-10, n_grid: int = 4096, branch: str = "principal",
                  **kw) -> Profile:
    """Convenience pipeline: sonic data, Taylor seed, integration."""
    sd = sonic_data(params)
    seed = taylor_seed(sd, params, order, step_eps, branch)
    return integrate_profile(seed, params, xi_min, xi_max, tol, n_grid, **kw)


def stationarity_residual(R, U_bar, S_bar, dU, dS, params: FluidParams):
    """Pointwise normalised residuals of the radial stationary equations."""
    r, a = params.r, params.alpha
    t1 = ((r - 1.0) * U_bar, (R + U_bar) * dU, a * S_bar * dS)
    t2 = ((r - 1.0) * S_bar, (R + U_bar) * dS, a * S_bar * dU, 2.0 * a * S_bar * U_bar / R)
    res1 = np.abs(sum(t1))
    res2 = np.abs(sum(t2))
    mag1 = sum(np.abs(t) for t in t1)
    mag2 = sum(np.abs(t) for t in t2)
    with np.errstate(invalid="ignore", divide="ignore"):
        e1 = np.where(mag1 > 0, res1 / np.where(mag1 > 0, mag1, 1.0), 0.0)
        e2 = np.where(mag2 > 0, res2 / np.where(mag2 > 0, mag2, 1.0), 0.0)
    return e1, e2


def profile_residual(prof: Profile, params: FluidParams | None = None) -> float:
    params = params or prof.params
    e1, e2 = stationarity_residual(prof.R, prof.U_bar, prof.S_bar, prof.dU_dR, prof.dS_dR, params)
    return float(max(e1.max(), e2.max()))


def _phase_jets(W, Z, params: FluidParams):
    g, r = params.gamma, params.r
    WW, ZZ, WZ = jets.mul(W, W), jets.mul(Z, Z), jets.mul(W, Z)
    one = np.zeros_like(W)
    one[0] = 1.0
    dw = one + (1.0 + g) / 4.0 * W + (3.0 - g) / 4.0 * Z
    dz = one + (3.0 - g) / 4.0 * W + (1.0 + g) / 4.0 * Z
    nw = -r * W + (g - 1.0) / 4.0 * ZZ + (g - 3.0) / 4.0 * WZ - g / 2.0 * WW
    nz = -r * Z + (g - 1.0) / 4.0 * WW + (g - 3.0) / 4.0 * WZ - g / 2.0 * ZZ
    return nw, dw, nz, dz


def _xi_jets(W0, Z0, params: FluidParams, order: int):
    """Taylor coefficients in xi of the trajectory through (W0, Z0)."""
    W = jets.constant(W0, order)
    Z = jets.constant(Z0, order)
    for n in range(order):
        nw, dw, nz, dz = _phase_jets(W, Z, params)
        qw, qz = jets.div(nw, dw), jets.div(nz, dz)
        W[n + 1] = qw[n] / (n + 1)
        Z[n + 1] = qz[n] / (n + 1)
    return W, Z


def _second_derivatives(W0, Z0, params: FluidParams):
    with np.errstate(divide="ignore", invalid="ignore"):
        W, Z = _xi_jets(np.asarray(W0, dtype=float), np.asarray(Z0, dtype=float), params, 2)
    return 2.0 * W[2], 2.0 * Z[2]


def profile_jets(prof: Profile, R, order: int):
    """Jets in R (local variable R - R0) of U_bar and S_bar at radii R0.

    Derivatives in xi come from the ODE itself (exact Taylor recursion), and
    are then re-expanded in R through xi - xi0 = log(1 + (R - R0)/R0).  Not
    valid on the sonic line, where D_Z vanishes.
    """
    R0 = np.atleast_1d(np.asarray(R, dtype=float))
    W0, Z0 = prof.phase_at(np.log(R0))
    W, Z = _xi_jets(W0, Z0, prof.params, order)
    logser = np.zeros((order + 1,) + R0.shape)
    for k in range(1, order + 1):
        logser[k] = (-1.0) ** (k + 1) / k / R0 ** k
    Wr, Zr = jets.compose(W, logser), jets.compose(Z, logser)
    Rj = jets.variable(R0, order)
    return jets.mul(Rj, 0.5 * (Wr + Zr)), jets.mul(Rj, 0.5 * (Wr - Zr))
