"""Closed-form objects of the radial phase portrait.

The self-similar profile ODE is autonomous in xi = log R when written in the
Riemann-type variables W = U + S, Z = U - S, where U = U_bar/R and
S = S_bar/R.  It reads

    dW/dxi = N_W(W, Z) / D_W(W, Z),    dZ/dxi = N_Z(W, Z) / D_Z(W, Z),

with D_W, D_Z affine and N_W, N_Z quadratic.  This module evaluates those
polynomials, the sonic points where N_Z = D_Z = 0, the interior critical
point P_star, the admissible range of the exponent r and a battery of sign
conditions on these quantities.

All functions are pure and vectorise over numpy arrays where that makes sense.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import NegativeRadicand, OutOfRange, ValidationError

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class FluidParams:
    """Adiabatic exponent, self-similar exponent and viscosity flag."""

    gamma: float
    r: float
    nu: int = 0

    def __post_init__(self):
        if not (self.gamma > 1.0):
            raise ValidationError(f"gamma must exceed 1, got {self.gamma}")
        if not (self.r > 1.0):
            raise ValidationError(f"r must exceed 1, got {self.r}")
        if self.nu not in (0, 1):
            raise ValidationError(f"nu must be 0 or 1, got {self.nu}")

    @property
    def alpha(self) -> float:
        return (self.gamma - 1.0) / 2.0

    @property
    def c_dis(self) -> float:
        a = self.alpha
        return self.r ** (1.0 + 1.0 / a) / a ** (1.0 / a)

    @property
    def delta_dis(self) -> float:
        return (self.r - 1.0) / self.alpha + self.r - 2.0

    @classmethod
    def admissible(cls, gamma: float, r: float, nu: int = 0, ns: bool = False) -> "FluidParams":
        """Build parameters, raising OutOfRange unless 1 < r < r_star(gamma).

        With ``ns=True`` the dissipation condition delta_dis > 0 is also enforced.
        """
        p = cls(gamma, r, nu)
        rep = admissibility(p)
        if not rep.in_range_r:
            raise OutOfRange(f"r={r} not in (1, r_star={rep.r_star:.12g}) for gamma={gamma}")
        if ns and not rep.ns_ok:
            raise OutOfRange(f"delta_dis={p.delta_dis:.6g} <= 0 for (gamma, r)=({gamma}, {r})")
        return p


@dataclass(frozen=True)
class PhasePoint:
    W: float
    Z: float

    @property
    def U(self) -> float:
        return 0.5 * (self.W + self.Z)

    @property
    def S(self) -> float:
        return 0.5 * (self.W - self.Z)


@dataclass(frozen=True)
class SonicData:
    R1: float
    R2: float
    P_s: PhasePoint
    P_s_bar: PhasePoint
    P_star: PhasePoint
    W1: float
    Z1: float
    # the other root of the Z1 quadratic; kept for negative tests
    Z1_other: float = field(default=float("nan"))


@dataclass(frozen=True)
class AdmissibilityReport:
    r_star: float
    in_range_r: bool
    rough_bounds: bool
    ns_ok: bool
    margin_r_star: float
    margin_sqrt3: float
    margin_two_minus_inv_gamma: float
    delta_dis: float


def eval_phase_polynomials(W, Z, params: FluidParams):
    """Return (N_W, D_W, N_Z, D_Z) at (W, Z)."""
    g, r = params.gamma, params.r
    D_W = 1.0 + (1.0 + g) / 4.0 * W + (3.0 - g) / 4.0 * Z
    D_Z = 1.0 + (3.0 - g) / 4.0 * W + (1.0 + g) / 4.0 * Z
    N_W = -r * W + (g - 1.0) / 4.0 * Z * Z + (g - 3.0) / 4.0 * W * Z - g * W * W / 2.0
    N_Z = -r * Z + (g - 1.0) / 4.0 * W * W + (g - 3.0) / 4.0 * W * Z - g * Z * Z / 2.0
    return N_W, D_W, N_Z, D_Z


def phase_gradients(W, Z, params: FluidParams):
    """Partial derivatives ((dN_W/dW, dN_W/dZ), (dN_Z/dW, dN_Z/dZ))."""
    g, r = params.gamma, params.r
    dNW = (-r + (g - 3.0) / 4.0 * Z - g * W, (g - 1.0) / 2.0 * Z + (g - 3.0) / 4.0 * W)
    dNZ = ((g - 1.0) / 2.0 * W + (g - 3.0) / 4.0 * Z, -r + (g - 3.0) / 4.0 * W - g * Z)
    return dNW, dNZ


def r_star_lower(gamma: float) -> float:
    """The gamma < 5/3 expression 1 + 2/(1 + sqrt(2/(gamma-1)))^2."""
    return 1.0 + 2.0 / (1.0 + math.sqrt(2.0 / (gamma - 1.0))) ** 2


def r_star_upper(gamma: float) -> float:
    """The gamma >= 5/3 expression (3 gamma - 1)/(2 + sqrt(3)(gamma - 1))."""
    return (3.0 * gamma - 1.0) / (2.0 + SQRT3 * (gamma - 1.0))


def r_star(gamma: float) -> float:
    """Upper end of the admissible window for r."""
    if not gamma > 1.0:
        raise ValidationError(f"gamma must exceed 1, got {gamma}")
    return r_star_lower(gamma) if gamma < 5.0 / 3.0 else r_star_upper(gamma)


def dz_at_pstar_threshold(gamma: float) -> float:
    """Value of r above which D_Z(P_star) < 0."""
    return r_star_upper(gamma)


def admissibility(params: FluidParams) -> AdmissibilityReport:
    g, r = params.gamma, params.r
    rs = r_star(g)
    m1 = rs - r
    m2 = SQRT3 - r
    m3 = 2.0 - 1.0 / g - r
    dd = params.delta_dis
    return AdmissibilityReport(
        r_star=rs,
        in_range_r=bool(r > 1.0 and m1 > 0.0),
        rough_bounds=bool(m2 > 0.0 and m3 > 0.0),
        ns_ok=bool(dd > 0.0),
        margin_r_star=m1,
        margin_sqrt3=m2,
        margin_two_minus_inv_gamma=m3,
        delta_dis=dd,
    )


def _r1(g: float, r: float) -> float:
    rad = g * g * (r - 3.0) ** 2 - 2.0 * g * (3.0 * r * r - 6.0 * r + 7.0) + (9.0 * r * r - 14.0 * r + 9.0)
    if rad < 0.0:
        raise NegativeRadicand(f"R1^2 = {rad:.3e} < 0 at (gamma, r)=({g}, {r})")
    return math.sqrt(rad)


def r2_bracket(g: float, r: float, R1: float) -> float:
    """The radicand of R2 (the 1/(gamma-1) prefactor sits outside the root)."""
    return (
        g * ((76.0 - 27.0 * g) * g - 71.0)
        - (3.0 * g - 5.0) * ((g - 5.0) * g + 2.0) * r * r
        + (g * (g * (18.0 * g - 52.0) + 50.0) - 8.0) * r
        + R1 * (9.0 * (g - 2.0) * g + ((2.0 - 3.0 * g) * g + 5.0) * r + 5.0)
        + 18.0
    )


def z1_quadratic(params: FluidParams, W0: float, Z0: float, W1: float):
    """Coefficients (A, B, C) of A Z1^2 + B Z1 + C = 0.

    Obtained by differentiating D_Z dZ/dxi = N_Z once at the sonic point.
    """
    g = params.gamma
    (_, _), (nzw, nzz) = phase_gradients(W0, Z0, params)
    A = (1.0 + g) / 4.0
    B = (3.0 - g) / 4.0 * W1 - nzz
    C = -nzw * W1
    return A, B, C


def sonic_data(params: FluidParams) -> SonicData:
    """Sonic points, P_star and the first Taylor coefficients at P_s."""
    g, r = params.gamma, params.r
    R1 = _r1(g, r)
    den = 4.0 * (g - 1.0) ** 2
    W0 = (g * g * r + (g + 1.0) * R1 - 3.0 * g * g - 2.0 * g * r + 10.0 * g - 3.0 * r - 3.0) / den
    Z0 = (g * g * r + (g - 3.0) * R1 - 3.0 * g * g - 6.0 * g * r + 6.0 * g + 9.0 * r - 7.0) / den
    Wb = (g * g * r - (g + 1.0) * R1 - 3.0 * g * g - 2.0 * g * r + 10.0 * g - 3.0 * r - 3.0) / den
    Zb = (g * g * r + (3.0 - g) * R1 - 3.0 * g * g - 6.0 * g * r + 6.0 * g + 9.0 * r - 7.0) / den
    rad2 = r2_bracket(g, r, R1)
    if rad2 < 0.0:
        raise NegativeRadicand(f"R2 radicand = {rad2:.3e} < 0 at (gamma, r)=({g}, {r})")
    R2 = math.sqrt(rad2) / (g - 1.0)
    W1 = (g * (-3.0 * (R1 + 6.0) - 3.0 * g * (r - 3.0) + 2.0 * r) + R1 + 5.0 * r + 5.0) / den
    Z1 = (
        -(3.0 * g ** 3 - 7.0 * g * g + g + 11.0) * r
        + g * (g * (9.0 * g - 3.0 * R1 - 25.0) + 10.0 * R1 - 4.0 * (g - 1.0) * R2 + 27.0)
        - 3.0 * R1
        + 4.0 * (g - 1.0) * R2
        - 3.0
    ) / (den * (g + 1.0))
    # the two roots are symmetric about the common midpoint
    Z1_other = Z1 + 2.0 * R2 / (g + 1.0)
    ps = 2.0 * r / (3.0 * g - 1.0)
    P_star = PhasePoint((SQRT3 - 1.0) * ps, -(1.0 + SQRT3) * ps)
    return SonicData(R1, R2, PhasePoint(W0, Z0), PhasePoint(Wb, Zb), P_star, W1, Z1, Z1_other)


def sonic_residuals(params: FluidParams, sd: SonicData | None = None) -> dict:
    """Absolute residuals of the defining equations of P_s, P_s_bar and P_star."""
    sd = sd or sonic_data(params)
    out = {}
    for name, p in (("P_s", sd.P_s), ("P_s_bar", sd.P_s_bar)):
        _, _, nz, dz = eval_phase_polynomials(p.W, p.Z, params)
        out[f"N_Z({name})"] = abs(nz)
        out[f"D_Z({name})"] = abs(dz)
    nw, _, nz, _ = eval_phase_polynomials(sd.P_star.W, sd.P_star.Z, params)
    out["N_W(P_star)"] = abs(nw)
    out["N_Z(P_star)"] = abs(nz)
    return out


def auxiliary_inequalities(params: FluidParams, sd: SonicData | None = None):
    """Evaluate the seven sign conditions; returns a list of (name, value, holds).

    ``value`` is the signed margin, positive when the condition holds.
    """
    g, r = params.gamma, params.r
    if not (1.0 < r < r_star(g)):
        raise OutOfRange(f"r={r} not in (1, r_star(gamma)={r_star(g):.12g})")
    sd = sd or sonic_data(params)
    W0, Z0 = sd.P_s.W, sd.P_s.Z
    R1 = sd.R1
    res = []

    v1 = -(sd.W1 + sd.Z1)
    res.append(("1: W1 + Z1 < 0", v1, v1 > 0))

    v2 = (g * (r - 1.0) + r * (2.0 * Z0 - 1.0) + 2.0 * W0 + 5.0) / 4.0
    res.append(("2: (g(r-1)+r(2Z0-1)+2W0+5)/4 > 0", v2, v2 > 0))

    v3 = (g * g * (-r + 3.0 * Z0 + 2.0) + 4.0 * g * r - 3.0 * r + 12.0 * W0 + 9.0 * Z0 + 22.0) / 8.0
    res.append(("3: (g^2(-r+3Z0+2)+4gr-3r+12W0+9Z0+22)/8 > 0", v3, v3 > 0))

    v4 = -(3.0 * g * g * (r - 3.0) + g * (-14.0 * r - 3.0 * R1 + 22.0) + 15.0 * r + 5.0 * R1 - 17.0)
    res.append(("4: 3g^2(r-3)+g(-14r-3R1+22)+15r+5R1-17 < 0", v4, v4 > 0))

    u_s = sd.P_s.U
    top = -2.0 * (r - 1.0) / (3.0 * (g - 1.0))
    v5 = min(u_s + 1.0, top - u_s, -top)
    res.append(("5: -1 < U(P_s) < -2(r-1)/(3(g-1)) < 0", v5, v5 > 0))

    u_b = sd.P_s_bar.U
    v6 = min(u_b + 1.0, -u_b)
    res.append(("6: -1 < U(P_s_bar) < 0", v6, v6 > 0))

    def item7(u):
        return -1.0 + 3.0 * r + g * (3.0 - r + 4.0 * u)

    v7 = item7(sd.P_star.U)
    _, _, _, dz_star = eval_phase_polynomials(sd.P_star.W, sd.P_star.Z, params)
    if dz_star < 0.0:
        v7 = min(v7, item7(u_b))
        name7 = "7: -1+3r+g(3-r+4U)>0 at P_star and P_s_bar (D_Z(P_star)<0)"
    else:
        name7 = "7: -1+3r+g(3-r+4U)>0 at P_star"
    res.append((name7, v7, v7 > 0))
    return res


def admissible_grid(n_gamma: int, n_r: int, gamma_min: float = 1.05, gamma_max: float = 3.0):
    """Interior (gamma, r) grid: n_r equispaced values strictly inside (1, r_star)."""
    out = []
    for g in np.linspace(gamma_min, gamma_max, n_gamma):
        rs = r_star(float(g))
        for k in range(1, n_r + 1):
            out.append((float(g), 1.0 + (rs - 1.0) * k / (n_r + 1)))
    return out


def sum_barrier_us(U, S, params: FluidParams):
    """N_W D_Z + N_Z D_W written in (U, S)."""
    g, r = params.gamma, params.r
    return (g - 1.0) / 2.0 * S * S * (3.0 * (g - 1.0) * U + 2.0 * r - 2.0) - 2.0 * U * (U + 1.0) * (r + U)
