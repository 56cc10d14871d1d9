"""Smooth cutoff functions built from the exp(-1/t) step.

psi(t) = f(t) / (f(t) + f(1 - t)),  f(t) = exp(-1/t) for t > 0, else 0,

is C-infinity, equal to 0 for t <= 0 and 1 for t >= 1, with max psi' = 2
at t = 1/2.  All derivative tables are computed with jets, not differences.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets

STEP_MAX_SLOPE = 2.0


def step_jet(t0, order: int = 0):
    """Jet (shape (order+1, n)) of psi at base points t0."""
    t0 = np.atleast_1d(np.asarray(t0, dtype=float))
    out = np.zeros((order + 1,) + t0.shape)
    out[0] = (t0 >= 1.0).astype(float)
    m = (t0 > 0.0) & (t0 < 1.0)
    if m.any():
        t = jets.variable(t0[m], order)
        one = jets.constant(np.ones(m.sum()), order)
        fa = jets.exp(jets.div(-one, t))
        fb = jets.exp(jets.div(-one, one - t))
        out[:, m] = jets.div(fa, fa + fb)
    return out


def step(t):
    return step_jet(t, 0)[0]


def _descending_jet(R, start, width, order):
    """Jet in R of 1 - psi((R - start)/width)."""
    jt = step_jet((np.asarray(R, dtype=float) - start) / width, order)
    scale = width ** -np.arange(order + 1, dtype=float)
    out = -jt * scale[:, None]
    out[0] += 1.0
    return out


def chi1_jet(R, C0: float, order: int = 0):
    """chi1: 1 on [0, C0], 0 on [3C0/2, inf)."""
    return _descending_jet(R, C0, 0.5 * C0, order)


def chi2_jet(R, C0: float, order: int = 0):
    """chi2: 1 on [0, 2C0], positive on [0, 5C0/2), 0 beyond."""
    return _descending_jet(R, 2.0 * C0, 0.5 * C0, order)


def frak_x_jet(z, order: int = 0):
    """Truncation profile: 1 on |z| <= 1/2, 0 on |z| >= 1, |grad| <= 4."""
    return _descending_jet(np.abs(z), 0.5, 0.5, order)


def xhat_jet(R, s: float, order: int = 0):
    """X_hat(y, s) = frak_X(e^{-s} y) as a jet in R."""
    scale = np.exp(-s)
    j = frak_x_jet(np.asarray(R, dtype=float) * scale, order)
    return j * (scale ** np.arange(order + 1, dtype=float))[:, None]


@dataclass(frozen=True)
class CutoffTables:
    R: np.ndarray
    chi1: np.ndarray
    chi2: np.ndarray
    dchi1: np.ndarray
    dchi2: np.ndarray


def cutoff_tables(R, C0: float) -> CutoffTables:
    """chi1, chi2 and their first derivatives sampled at R."""
    R = np.asarray(R, dtype=float)
    j1 = chi1_jet(R, C0, 1)
    j2 = chi2_jet(R, C0, 1)
    return CutoffTables(R, j1[0], j2[0], j1[1], j2[1])
