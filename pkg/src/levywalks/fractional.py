"""Right-sided Riemann-Liouville integral and half-integer-order derivative.

Both operators act on functions that vanish beyond a finite support bound
``b``.  The half-integral is rewritten with x = y + (b - y) s^2, which
removes the (x - y)^(-1/2) singularity and pins the integration domain to
s in [0, 1]; the y-dependence then enters smoothly, so derivatives in y are
taken with jets through a fixed quadrature rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EndpointUnstable, QuadratureError
from .jets import Jet
from .quadrature import tanh_sinh

ENDPOINT_GAP = 1e-6


def rl_right_integral(f: Callable, beta: float, x: float, support_bound: float,
                      rtol: float = 1e-12) -> float:
    """I_-^beta f (x) = 1/Gamma(beta) * int_x^b f(t) (t - x)^(beta - 1) dt."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if x >= support_bound:
        return 0.0

    def integrand(t, dl, dr):
        return np.asarray(f(t), dtype=float) * dl ** (beta - 1.0)

    val, err = tanh_sinh(integrand, x, support_bound, rtol=rtol, max_level=12)
    return float(val) / math.gamma(beta)


@dataclass(frozen=True)
class HalfIntegralSpec:
    """Integrand for the half-order operators.

    ``taylor(x0, gap, slope, order)`` returns the Taylor coefficients in h
    of f(x0 + slope * h), k = 0..order, stacked on the first axis and
    broadcast over ``x0``.  ``gap = support_bound - x0`` is passed separately
    so endpoint factors keep full precision; expanding along ``slope``
    keeps the coefficients bounded where f^(k) itself would overflow.  It
    is never called at or beyond ``support_bound``, nor closer to it than
    ``min_gap``.
    """

    taylor: Callable[[np.ndarray, np.ndarray, np.ndarray, int], np.ndarray]
    support_bound: float
    order_n: int = 0
    min_gap: float = 1e-280


def power_taylor(mu: float) -> Callable[[np.ndarray, np.ndarray, int], np.ndarray]:
    """Taylor coefficients of (b - x)^mu; handy for tests and self-checks."""

    def taylor(x0, gap, slope, order):
        gap = np.asarray(gap, dtype=float)
        c = np.zeros((order + 1,) + gap.shape)
        c[0] = gap
        if order >= 1:
            c[1] = -np.asarray(slope, dtype=float)
        return (Jet(c) ** mu).c

    return taylor


def half_integral_jet(spec: HalfIntegralSpec, y, order: int,
                      rtol: float = 1e-12, scale=1.0) -> Jet:
    """Jet in h of I_-^(1/2) f (y + scale h), via (2/sqrt(pi)) sqrt(b - y) int_0^1 f(y + (b - y) s^2) ds.

    With ``scale = y`` the k-th derivative is y^k times the k-th derivative
    in y, which stays representable for small y.  ``y`` may be a 1-d array;
    all points then share one quadrature.
    """
    b = spec.support_bound
    scalar = np.ndim(y) == 0
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    sc = np.broadcast_to(np.asarray(scale, dtype=float), ys.shape)
    gap = b - ys
    if np.any((gap > 0) & (gap < ENDPOINT_GAP)):
        bad = ys[(gap > 0) & (gap < ENDPOINT_GAP)][0]
        raise EndpointUnstable(f"y = {bad} lies within {ENDPOINT_GAP} of the support bound {b}")
    live = gap > 0
    coeffs = np.zeros((order + 1,) + ys.shape)
    if np.any(live):
        yl, gl, sl = ys[live], gap[live], sc[live]

        def integrand(s, dl, dr):
            one_minus_s2 = dr * (1.0 + s)
            dist = gl[:, None] * one_minus_s2[None, :]
            # nodes this close to the bound are dropped; their share of an integrable singularity is negligible
            ok = dist > spec.min_gap
            out = np.zeros((order + 1,) + dist.shape)
            if np.any(ok):
                x = (yl[:, None] + gl[:, None] * (s * s)[None, :])[ok]
                slope = (sl[:, None] * one_minus_s2[None, :])[ok]
                vals = np.asarray(spec.taylor(x, dist[ok], slope, order))
                out = out.astype(vals.dtype)
                out[:, ok] = vals
            return out

        inner, _ = tanh_sinh(integrand, 0.0, 1.0, rtol=rtol, max_level=12)
        c = np.zeros((order + 1,) + yl.shape)
        c[0] = gl
        if order >= 1:
            c[1] = -sl
        jet = (Jet(c) ** 0.5) * Jet(np.real_if_close(np.asarray(inner))) * (2.0 / math.sqrt(math.pi))
        coeffs = coeffs.astype(jet.c.dtype)
        coeffs[:, live] = jet.c
    return Jet(coeffs[:, 0] if scalar else coeffs)


def rl_right_derivative_half(spec: HalfIntegralSpec, y: float, rtol: float = 1e-12) -> float:
    """D_-^(n + 1/2) f (y) = (-d/dy)^(n+1) I_-^(1/2) f (y), with n = spec.order_n."""
    m = spec.order_n + 1
    jet = half_integral_jet(spec, y, m, rtol=rtol)
    return float((-1) ** m * jet.derivative(m))


def rl_right_half_integral(spec: HalfIntegralSpec, y: float, rtol: float = 1e-12) -> float:
    return float(half_integral_jet(spec, y, 0, rtol=rtol).value)


def richardson_central_difference(f: Callable[[float], float], x: float, k: int,
                                  h: float = 1e-2, levels: int = 4) -> float:
    """k-th derivative by central differences with Richardson extrapolation in h.

    Kept as an independent check on jet derivatives; never used by the
    density pipeline.
    """
    if k < 1:
        raise ValueError("k must be >= 1")

    def central(step):
        coeffs = [(-1) ** i * math.comb(k, i) for i in range(k + 1)]
        total = math.fsum(c * f(x + (k / 2 - i) * step) for i, c in enumerate(coeffs))
        return total / step ** k

    table = [[central(h / 2 ** j)] for j in range(levels)]
    for col in range(1, levels):
        for row in range(col, levels):
            factor = 4.0 ** col
            table[row].append((factor * table[row][col - 1] - table[row - 1][col - 1]) / (factor - 1))
    if not np.isfinite(table[-1][-1]):
        raise QuadratureError("finite difference produced a non-finite value")
    return table[-1][-1]
