"""Truncated Taylor series ("jets") with vectorised coefficients.

A jet of order K is an array ``c`` of shape (K+1, ...) holding the Taylor
coefficients c[k] = f^(k)(x0)/k! at a batch of base points.  Only the few
operations needed for exact high-order derivatives of the profile and of
the cutoffs are provided.
"""
from __future__ import annotations

import math

import numpy as np


def constant(value, order: int):
    value = np.asarray(value, dtype=float)
    out = np.zeros((order + 1,) + value.shape)
    out[0] = value
    return out


def variable(x0, order: int, scale=1.0):
    """Jet of x -> x0 + scale * x, i.e. the local coordinate."""
    out = constant(x0, order)
    if order >= 1:
        out[1] = scale
    return out


def mul(a, b):
    K = a.shape[0] - 1
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for n in range(K + 1):
        for j in range(n + 1):
            out[n] = out[n] + a[j] * b[n - j]
    return out


def div(a, b):
    K = a.shape[0] - 1
    q = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for n in range(K + 1):
        acc = a[n].copy() if np.ndim(a[n]) else a[n]
        for j in range(n):
            acc = acc - q[j] * b[n - j]
        q[n] = acc / b[0]
    return q


def exp(a):
    """exp of a jet via f' = a' f."""
    K = a.shape[0] - 1
    out = np.zeros_like(a)
    out[0] = np.exp(a[0])
    for n in range(1, K + 1):
        acc = np.zeros_like(a[0])
        for k in range(1, n + 1):
            acc = acc + k * a[k] * out[n - k]
        out[n] = acc / n
    return out


def compose(f, g):
    """Coefficients of f(g(x)) where g has zero constant term.

    ``f`` holds the coefficients of f about the point g(0) = 0 offset, i.e.
    the result is sum_k f[k] g^k.
    """
    K = f.shape[0] - 1
    out = np.zeros(np.broadcast_shapes(f.shape, g.shape))
    power = constant(np.ones(g.shape[1:]), K)
    for k in range(K + 1):
        out = out + f[k] * power
        power = mul(power, g)
    return out


def shift(a):
    """Jet of the derivative (one order lower, padded with zero)."""
    K = a.shape[0] - 1
    out = np.zeros_like(a)
    for k in range(K):
        out[k] = (k + 1) * a[k + 1]
    return out


def derivatives(a):
    """Plain derivatives f^(k)(x0) from a jet."""
    K = a.shape[0] - 1
    fact = np.array([math.factorial(k) for k in range(K + 1)], dtype=float)
    return a * fact.reshape((-1,) + (1,) * (a.ndim - 1))
