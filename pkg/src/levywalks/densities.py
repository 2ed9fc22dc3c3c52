"""Scaling-limit densities of the three walk kinds.

The one-coordinate density Phi1 is available through three independent
routes: elementary binomial sums (odd d only), the hypergeometric kernel
sampled on the lower side of its cut, and the epsilon-limit of the inversion
formula applied to the kernel computed by direct quadrature.  The radius
density Phi_R is rebuilt from Phi1 by (n+1)-fold differentiation in odd d and
by a half-order right-sided derivative in even d; derivatives are taken
with jets over the hypergeometric route.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EndpointUnstable, ExtrapolationError, NumericError, RouteParityError
from .fractional import HalfIntegralSpec, half_integral_jet
from .hyper import CutSide, g1_hyper, g1_hyper_tjet, g1_quadrature
from .jets import Jet
from .model import (
    ModelParams,
    Parity,
    WalkKind,
    binomial_terms,
    overshoot_constant,
    projection_constant,
    single_terms,
)
from .quadrature import exp_sinh, tanh_sinh

CLAMP_MARGIN = 1e-6
DEFAULT_EPS_SCHEDULE = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7)


class Route(enum.Enum):
    ELEMENTARY = "elementary"
    HYPER = "hyper"
    EPSILON = "epsilon"
    CLOSED_D3 = "closed"

    @classmethod
    def parse(cls, name: str | Route) -> Route:
        if isinstance(name, Route):
            return name
        key = name.strip().lower()
        aliases = {"hypergeometric": "hyper", "eps": "epsilon", "closed_d3": "closed", "elem": "elementary"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise DomainError(f"unknown route {name!r}") from None


# -- generic helpers: the elementary formulas run on arrays and on jets alike ----


def _exp(v):
    return v.exp() if isinstance(v, Jet) else np.exp(v)


def _log(v):
    return v.log() if isinstance(v, Jet) else np.log(v)


def _ipow(v, k: int):
    return v ** k if isinstance(v, Jet) else np.power(v, k)


def _bracket_sum(lp, lm, n: int, alpha: float):
    """Weighted four-index sum shared by all odd-d elementary formulas (the B2 braces).

    ``lp``/``lm`` are log(1/x + 1) and log(1/x - 1).  The factor
    (1/x^2 - 1)^(2n - m1 - m2) is folded into the exponentials.
    """
    cos_pa = math.cos(math.pi * alpha)
    total = 0.0
    for m1, m2, j1, j2, w in binomial_terms(n):
        f1 = m1 + j1 + alpha + 1
        f2 = m2 + j2 + alpha + 1
        q = 2 * n - m1 - m2
        big = f1 + f2
        term = ((-1) ** (j1 + j2)) * _exp(lp * (big + q) + lm * q)
        term = term + ((-1) ** (m1 + m2)) * _exp(lp * q + lm * (big + q))
        term = term + (2.0 * cos_pa * (-1) ** (j1 + m2)) * _exp(lp * (f1 + q) + lm * (f2 + q))
        total = total + term * (w / (f1 * f2))
    return total


def _elementary_standard(x, n: int, alpha: float):
    inv = 1.0 / x
    lp = _log(inv + 1.0)
    lm = _log((1.0 - x) * inv)
    num = 0.0
    for m1, m2, j1, j2, w in binomial_terms(n):
        e1 = m1 + j1 + alpha
        e2 = m2 + j2 + alpha
        q = 2 * n - m1 - m2
        sign = (-1) ** (j1 + m2)
        t = _exp(lp * (e1 + q) + lm * (e2 + 1 + q)) * (1.0 / (e1 * (e2 + 1)))
        t = t + _exp(lp * (e1 + 1 + q) + lm * (e2 + q)) * (1.0 / (e2 * (e1 + 1)))
        num = num + t * (sign * w)
    den = _bracket_sum(lp, lm, n, alpha)
    return num / den * (math.sin(math.pi * alpha) / math.pi) * inv


def _elementary_undershoot(x, n: int, alpha: float):
    inv = 1.0 / x
    lp = _log(inv + 1.0)
    lm = _log((1.0 - x) * inv)
    num = 0.0
    for m, j, w in single_terms(n):
        e = m + j + alpha + 1
        q = n - m
        num = num + _exp(lp * q + lm * (e + q)) * (((-1) ** m) * w / e)
    den = _bracket_sum(lp, lm, n, alpha)
    pref = math.sin(math.pi * alpha) / math.sqrt(math.pi) * math.gamma(n + 1) / math.gamma(n + 1.5)
    return num / den * pref * _ipow(inv, 2 * n + 2)


def _elementary_overshoot_inner(x, n: int, alpha: float, c: float):
    inv = 1.0 / x
    lp = _log(inv + 1.0)
    lm = _log((1.0 - x) * inv)
    theta = 0.5 * math.pi * alpha
    s_t, c_t = math.sin(theta), math.cos(theta)
    s_a, c_a = math.sin(math.pi * alpha), math.cos(math.pi * alpha)
    num = 0.0
    for m, j, w in single_terms(n):
        e = m + j + alpha + 1
        q = n - m
        plus = _exp(lp * (e + q) + lm * q)
        minus = _exp(lp * q + lm * (e + q))
        coef_minus = (-1) ** m * (s_t * c_a - c_t * s_a)
        num = num + (plus * (s_t * (-1) ** j) + minus * coef_minus) * (w / e)
    den = _bracket_sum(lp, lm, n, alpha)
    pref = c * math.gamma(n + 1) / (math.gamma(n + 1.5) * math.sqrt(math.pi))
    return num / den * pref * (inv ** (2 * n + 2 + alpha))


def _elementary_overshoot_outer(x, n: int, alpha: float, c: float):
    inv = 1.0 / x
    lp = _log(inv + 1.0)
    gap = (x - 1.0) * inv
    quad = (1.0 - x) * (1.0 + x) * inv * inv
    total = 0.0
    with np.errstate(divide="ignore"):
        lg = None if isinstance(gap, Jet) else np.log(gap)
    for m, j, w in single_terms(n):
        e = m + j + alpha + 1
        low = gap ** e if lg is None else np.exp(lg * e)
        total = total + (_exp(lp * e) - low) * _ipow(quad, n - m) * (((-1) ** j) * w / e)
    pref = c * math.gamma(n + 1) * math.sin(0.5 * math.pi * alpha) / (math.gamma(n + 1.5) * math.sqrt(math.pi))
    return pref * (inv ** (2 * n + 2 + alpha)) / total


def phi1_elementary(params: ModelParams, x):
    """Phi1 from the binomial sums; ``x`` is an array in (0, 1) (or >= 1 for overshoot) or a jet."""
    if params.parity is not Parity.ODD:
        raise RouteParityError("the elementary route exists only for odd dimensions")
    n, a = params.n, params.alpha
    kind = params.kind
    if kind is WalkKind.STANDARD:
        return _elementary_standard(x, n, a)
    if kind is WalkKind.UNDERSHOOT:
        return _elementary_undershoot(x, n, a)
    c = overshoot_constant(n, a, params.parity)
    x0 = x.value if isinstance(x, Jet) else x
    if np.all(np.asarray(x0) < 1.0):
        return _elementary_overshoot_inner(x, n, a, c)
    if np.all(np.asarray(x0) >= 1.0):
        return _elementary_overshoot_outer(x, n, a, c)
    if isinstance(x, Jet):
        raise DomainError("a jet batch may not straddle x = 1")
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    inner = x < 1.0
    out[inner] = _elementary_overshoot_inner(x[inner], n, a, c)
    out[~inner] = _elementary_overshoot_outer(x[~inner], n, a, c)
    return out


def _overshoot_near_zero(params: ModelParams, x, out):
    """Overshoot values at small x, where the plain kernel quotient cancels, from the t-expansion."""
    if params.kind is not WalkKind.OVERSHOOT:
        return out
    xa = np.atleast_1d(x)
    small = xa * xa < 0.5
    if not np.any(small):
        return out
    g = g1_hyper_tjet(params, Jet((xa[small] ** 2)[None, :]), CutSide.BELOW).c[0]
    fixed = np.array(np.atleast_1d(out), dtype=float)
    fixed[small] = -g.imag / (math.pi * xa[small])
    return fixed if np.ndim(x) else float(fixed[0])


def phi1_hyper(params: ModelParams, x):
    """Phi1 = -(1/(pi x)) Im g1(1/x^2), kernel on the lower side of its cut; ``x > 0``."""
    x = np.maximum(np.asarray(x, dtype=float), 1e-100)
    z = 1.0 / (x * x)
    one_minus_z = (x - 1.0) * (x + 1.0) * z
    g = g1_hyper(params, z, CutSide.BELOW, one_minus_z=one_minus_z)
    return _overshoot_near_zero(params, x, -np.imag(g) / (math.pi * x))


def _eps_value(params: ModelParams, x: float, eps: float) -> float:
    w = complex(x, eps)
    return -(1.0 / w * g1_quadrature(params, -1.0 / w)).imag / math.pi


def godreche_luck_invert(params: ModelParams, x: float, eps_schedule=DEFAULT_EPS_SCHEDULE) -> float:
    """epsilon -> 0 limit of the inversion formula, by Richardson extrapolation in epsilon.

    Uses only the defining integrals of g1, so it is independent of both the
    hypergeometric and the elementary route.
    """
    eps = [float(e) for e in eps_schedule]
    if len(eps) < 2 or any(b >= a for a, b in zip(eps, eps[1:])) or eps[-1] <= 0:
        raise DomainError("the epsilon schedule must be positive and strictly descending")
    x = abs(float(x))
    if x == 0:
        raise DomainError("x = 0 is excluded")
    vals = [_eps_value(params, x, e) for e in eps]
    # the error is O(eps): eliminate it between neighbouring steps
    rich = [(e0 * v1 - e1 * v0) / (e0 - e1) for e0, e1, v0, v1 in zip(eps, eps[1:], vals, vals[1:])]
    if len(rich) >= 3:
        floor = 1e-9 * (1.0 + abs(rich[-1]))
        last = abs(rich[-1] - rich[-2])
        prev = abs(rich[-2] - rich[-3])
        if last > max(prev, floor):
            raise ExtrapolationError(
                f"epsilon extrapolation does not contract at x = {x}: changes {prev:.3e} then {last:.3e}"
            )
    return rich[-1]


def phi1(params: ModelParams, x, route: Route | str = Route.HYPER):
    """Density of the first coordinate in the scaling limit, at |x|."""
    route = Route.parse(route)
    scalar = np.ndim(x) == 0
    xa = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    if np.any(xa == 0):
        raise DomainError("phi1 is not evaluated at x = 0")
    if route is Route.ELEMENTARY and params.parity is not Parity.ODD:
        raise RouteParityError("the elementary route exists only for odd dimensions")
    if route is Route.CLOSED_D3:
        raise DomainError("closed forms exist for the radius density only")
    out = np.zeros_like(xa)
    live = xa < 1.0 if params.kind.bounded else np.ones(xa.shape, dtype=bool)
    if np.any(live):
        xs = xa[live]
        if route is Route.ELEMENTARY:
            out[live] = phi1_elementary(params, xs)
        elif route is Route.HYPER:
            out[live] = phi1_hyper(params, xs)
        else:
            out[live] = [godreche_luck_invert(params, v) for v in xs]
    if not np.all(np.isfinite(out)):
        bad = xa[~np.isfinite(out)][0]
        raise NumericError(f"{route.value} route produced a non-finite value at x = {bad!r}")
    return float(out[0]) if scalar else out


# -- radius density ---------------------------------------------------------------


def _g_jet(params: ModelParams, tjet: Jet, one_minus_z=None) -> Jet:
    """Jet of G(t) = Phi1(sqrt t) through the hypergeometric kernel at z = 1/t."""
    kern = g1_hyper_tjet(params, tjet, CutSide.BELOW, one_minus_z=one_minus_z)
    return kern.imag * (tjet ** -0.5) * (-1.0 / math.pi)


def _g_jet_elementary(params: ModelParams, tjet: Jet) -> Jet:
    return phi1_elementary(params, tjet ** 0.5)


def _t_jet(t0, slope, order: int) -> Jet:
    t0 = np.asarray(t0, dtype=float)
    c = np.zeros((order + 1,) + t0.shape)
    c[0] = t0
    if order >= 1:
        c[1] = slope
    return Jet(c)


def _g_taylor(params: ModelParams):
    """Taylor callback for the half-order operators, expanding G along the given slope."""

    def taylor(x0, gap, slope, order):
        x0 = np.asarray(x0, dtype=float)
        out = np.zeros((order + 1,) + x0.shape)
        ok = np.isfinite(x0) & (x0 < 1e200)
        if np.any(ok):
            xs = x0[ok]
            gap_ok = np.broadcast_to(np.asarray(gap, dtype=float), x0.shape)[ok]
            slope_ok = np.broadcast_to(np.asarray(slope, dtype=float), x0.shape)[ok]
            # gap = 1 - t for the inner piece; it gives 1 - z = -gap / t exactly
            w = -gap_ok / xs
            out[:, ok] = _g_jet(params, _t_jet(xs, slope_ok, order), one_minus_z=w).c
        return out

    return taylor


def _min_gap(order: int) -> float:
    # keeps w^(s - order) of the hypergeometric jets inside double range
    return 10.0 ** (-250.0 / (order + 2))


def _h_jet(params: ModelParams, y, order: int, rtol: float = 1e-12, scale=1.0) -> Jet:
    """Jet in h of H(y + scale h), H = I_-^(1/2) G the half-integral of G(t) = Phi1(sqrt t).

    ``y`` and ``scale`` may be 1-d arrays; the jet then carries a batch axis.
    """
    taylor = _g_taylor(params)
    spec = HalfIntegralSpec(taylor, 1.0, max(order - 1, 0), _min_gap(order))
    if params.kind.bounded:
        return half_integral_jet(spec, y, order, rtol=rtol, scale=scale)
    scalar = np.ndim(y) == 0
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    sc = np.broadcast_to(np.asarray(scale, dtype=float), ys.shape)
    out = np.zeros((order + 1,) + ys.shape)
    ks = np.arange(order + 1)
    outer = ys > 1.0
    if np.any(outer):
        yo, so = ys[outer], sc[outer]

        def beyond(u, du):
            with np.errstate(over="ignore"):
                x0 = yo[:, None] + (u * u)[None, :]
            slope = np.broadcast_to(so[:, None], x0.shape)
            return taylor(x0, 1.0 - x0, slope, order)

        val, _ = exp_sinh(beyond, 0.0, rtol=rtol, max_level=12)
        out[:, outer] = np.asarray(val) * (2.0 / math.sqrt(math.pi))
    if np.any(~outer):
        yi, si = ys[~outer], sc[~outer]
        inner = half_integral_jet(spec, yi, order, rtol=rtol, scale=si)
        kfac = np.array([math.gamma(0.5 + k) / (math.gamma(0.5) * math.factorial(k)) for k in ks])
        gap = 1.0 - yi

        def tail(x, dl):
            g = taylor(x, -dl, np.ones_like(x), 0)[0]
            dist = gap[:, None] + dl[None, :]
            return g[None, None, :] * dist[None, :, :] ** (-0.5 - ks[:, None, None])

        val, _ = exp_sinh(tail, 1.0, rtol=rtol, max_level=12)
        val = np.asarray(val) * (kfac[:, None] * si[None, :] ** ks[:, None]) / math.sqrt(math.pi)
        out[:, ~outer] = inner.c.real + val
    return Jet(out[:, 0] if scalar else out)


def _square(r):
    # radii below 1e-150 would underflow; their share of any integrable density is negligible
    return np.maximum(r, 1e-150) ** 2


def _check_radius(params: ModelParams, r: np.ndarray):
    if np.any(r <= 0):
        raise DomainError("the radius must be positive")
    # a grid clamped exactly to 1 -/+ CLAMP_MARGIN must pass despite rounding
    near = np.abs(r - 1.0) < CLAMP_MARGIN * (1.0 - 1e-6)
    if params.kind.bounded:
        near &= r < 1.0
    if np.any(near):
        bad = r[near][0]
        raise EndpointUnstable(f"r = {bad!r} lies within {CLAMP_MARGIN} of the support edge")


def radius_prefactor(params: ModelParams) -> float:
    """(-1)^(n+1) 2 sqrt(pi) / Gamma(n + 3/2) for odd d, (-1)^(n+1) 2 sqrt(pi) / Gamma(n + 1) for even d."""
    n = params.n
    g = math.gamma(n + 1.5) if params.parity is Parity.ODD else math.gamma(n + 1)
    return (-1) ** (n + 1) * 2.0 * math.sqrt(math.pi) / g


def phi_r(params: ModelParams, r, route: Route | str = Route.HYPER):
    """Density of the radius of the scaling limit at ``r``."""
    route = Route.parse(route)
    scalar = np.ndim(r) == 0
    ra = np.atleast_1d(np.asarray(r, dtype=float))
    _check_radius(params, ra)
    if route is Route.CLOSED_D3:
        if params.dim != 3:
            raise DomainError("closed forms exist for d = 3 only")
        out = phi_r_d3_closed(params.kind, params.alpha, ra)
        return float(out[0]) if scalar else out
    if route is Route.EPSILON:
        raise DomainError("the epsilon route gives Phi1 only")
    if route is Route.ELEMENTARY and params.parity is not Parity.ODD:
        raise RouteParityError("the elementary route exists only for odd dimensions")
    out = np.zeros_like(ra)
    live = ra < 1.0 if params.kind.bounded else np.ones(ra.shape, dtype=bool)
    n = params.n
    if params.parity is Parity.ODD:
        for part in (live & (ra < 1.0), live & (ra > 1.0)):
            if not np.any(part):
                continue
            s = _square(ra[part])
            # expanding along t = s (1 + h) yields s^k G^(k)(s) directly
            tj = _t_jet(s, s, n + 1)
            if route is Route.ELEMENTARY:
                g = _g_jet_elementary(params, tj)
            else:
                g = _g_jet(params, tj, one_minus_z=(s - 1.0) / s)
            scaled = g.derivative(n + 1)
            out[part] = radius_prefactor(params) * scaled
    else:
        if np.any(live):
            s = _square(ra[live])
            h = _h_jet(params, s, n + 1, scale=s)
            scaled = np.real(h.derivative(n + 1))
            out[live] = radius_prefactor(params) / np.sqrt(s) * scaled
    return float(out[0]) if scalar else out


def phi_r_d3_closed(kind: WalkKind | str, alpha: float, r, corrected: bool = False):
    """Closed-form radius densities for d = 3.

    By default the forms are transcribed literally as published.  Two of them
    carry typos (they are not normalised, and the overshoot one goes
    negative); ``corrected=True`` uses the forms re-derived from the n = 0
    one-coordinate density: in the undershoot numerator the cosine term is
    2(1 - a + 2r)(1 - r)^2 (1 - r^2)^a cos(pi a), and in the overshoot r < 1
    numerator the (1 + r)^(3a + 2) term enters with a plus sign.
    """
    kind = WalkKind.parse(kind)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0):
        raise DomainError("the radius must be positive")
    a = alpha
    sa, ca = math.sin(math.pi * a), math.cos(math.pi * a)
    out = np.zeros_like(r)
    inside = r < 1.0
    x = r[inside]
    p, m, q = 1.0 + x, 1.0 - x, (1.0 - x) * (1.0 + x)
    den = p ** (2 + 2 * a) + m ** (2 + 2 * a) + 2.0 * q ** (1 + a) * ca
    if kind is WalkKind.STANDARD:
        num = p ** (2 + 2 * a) * (1 + a - x) - m ** (2 + 2 * a) * (1 + a + x) - 2.0 * x * q ** (1 + a) * ca
        out[inside] = 8.0 / math.pi * (a + 1) / a * sa * x * q ** (a - 1) * num / den ** 2
    elif kind is WalkKind.UNDERSHOOT:
        num = (m ** (2 + 2 * a) * (1 - a - 2 * x)
               + p ** (1 + 2 * a) * (1 - a + 3 * (1 + a) * x - 2 * x * x)
               + 2.0 * (1 - a + 2 * x) * (m * m * q ** a if corrected else q ** (2 + a)) * ca)
        out[inside] = 4.0 * (a + 1) / math.pi * sa * m ** a * x ** (a - 1) * num / den ** 2
    else:
        num = (p ** (2 * a + 1) * ((a + 2) * x * x - 3 * (a + 1) * x - 1) * m ** a
               - 2.0 * q ** a * (((a + 2) * x + 1) * m ** (a + 2) + p ** (a + 2) * ((a + 2) * x - 1)) * ca
               - p ** a * (x * (a * (x + 3) + 2 * x + 3) - 1) * m ** (2 * a + 1)
               - (1 - (a + 2) * x) * m ** (3 * a + 2)
               + (1.0 if corrected else -1.0) * p ** (3 * a + 2) * ((a + 2) * x + 1))
        out[inside] = 2.0 * sa / (math.pi * x) * num / den ** 2
        y = r[r > 1.0]
        num = (1 + y) ** a * (1 + (2 + a) * y) - (y - 1) ** a * (-1 + (2 + a) * y)
        out[r > 1.0] = 2.0 * sa / math.pi * num / (y * ((y - 1) ** (1 + a) - (1 + y) ** (1 + a)) ** 2)
    return float(out[0]) if scalar else out


# -- integrals of Phi1 and the radius CDF -------------------------------------------


def _phi1_with_gap(params: ModelParams, x, gap):
    """Hypergeometric Phi1 at x with 1 - x supplied exactly (matters next to x = 1)."""
    x = np.maximum(np.asarray(x, dtype=float), 1e-100)
    z = 1.0 / (x * x)
    one_minus_z = -np.asarray(gap, dtype=float) * (1.0 + x) * z
    g = g1_hyper(params, z, CutSide.BELOW, one_minus_z=one_minus_z)
    return _overshoot_near_zero(params, x, -np.imag(g) / (math.pi * x))


def _phi1_integral(params: ModelParams, a: float, b: float, rtol: float = 1e-13) -> float:
    """int_a^b Phi1 for 0 <= a < b, with a or b allowed to sit at 1."""
    if b <= a:
        return 0.0

    def f(x, dl, dr):
        if b == 1.0:
            gap = dr
        elif a == 1.0:
            gap = -dl
        else:
            gap = 1.0 - x
        return _phi1_with_gap(params, x, gap)

    val, _ = tanh_sinh(f, a, b, rtol=rtol, max_level=12)
    return float(val)


def _inverse_den_series(params: ModelParams, terms: int = 60) -> np.ndarray:
    """Maclaurin coefficients of 1 / 2F1(-a/2, (1-a)/2; d/2; w)."""
    a, b, c = -params.alpha / 2, (1 - params.alpha) / 2, params.hyper_c
    coef = np.empty(terms)
    coef[0] = 1.0
    for k in range(1, terms):
        coef[k] = coef[k - 1] * (a + k - 1) * (b + k - 1) / ((c + k - 1) * k)
    return (1.0 / Jet(coef)).c


def overshoot_phi1_tail(params: ModelParams, x: float) -> float:
    """int_x^inf Phi1 for the overshooting walk and x >= 2, from the series of the kernel in 1/x^2."""
    if params.kind is not WalkKind.OVERSHOOT:
        raise DomainError("the tail series applies to the overshooting walk")
    if x < 2.0:
        raise DomainError("the tail series is used for x >= 2 only")
    a = params.alpha
    c = overshoot_constant(params.n, a, params.parity)
    q = _inverse_den_series(params)
    j = np.arange(q.size)
    terms = q * x ** (-a - 2.0 * j) / (a + 2.0 * j)
    return c * math.sin(0.5 * math.pi * a) / math.pi * math.fsum(terms)


def phi1_mass(params: ModelParams, x: float | None = None) -> float:
    """2 int_0^x Phi1 (whole support when ``x`` is None), i.e. P(|X_1| <= x)."""
    if x is not None and x <= 0:
        return 0.0
    if params.kind.bounded:
        top = 1.0 if x is None else min(float(x), 1.0)
        return 2.0 * _phi1_integral(params, 0.0, top)
    inner = _phi1_integral(params, 0.0, 1.0)
    if x is not None and x <= 1.0:
        return 2.0 * _phi1_integral(params, 0.0, float(x))
    if x is not None and x < 2.0:
        return 2.0 * (inner + _phi1_integral(params, 1.0, float(x)))
    total = inner + _phi1_integral(params, 1.0, 2.0) + overshoot_phi1_tail(params, 2.0)
    if x is None:
        return 2.0 * total
    return 2.0 * (total - overshoot_phi1_tail(params, float(x)))


def phi1_cumulative(params: ModelParams, x) -> np.ndarray:
    """2 int_0^x Phi1 for every entry of ``x`` (any order), by chaining intervals."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    order = np.argsort(x)
    out = np.empty_like(x)
    mass = total_phi1_mass(params)
    acc = 0.0
    prev = 0.0
    for i in order:
        xi = x[i]
        if xi <= 0:
            out[i] = 0.0
            continue
        if params.kind.bounded and xi >= 1.0:
            out[i] = mass
            continue
        if not params.kind.bounded and xi >= 2.0:
            out[i] = mass - 2.0 * overshoot_phi1_tail(params, xi)
            continue
        if prev < 1.0 < xi:
            acc += _phi1_integral(params, prev, 1.0) + _phi1_integral(params, 1.0, xi)
        else:
            acc += _phi1_integral(params, prev, xi)
        prev = xi
        out[i] = 2.0 * acc
    return out


_MASS_CACHE: dict = {}


def total_phi1_mass(params: ModelParams) -> float:
    """2 int_0^sup Phi1; equals one up to quadrature error.  Cached per parameter set."""
    key = (params.kind, params.alpha, params.dim)
    val = _MASS_CACHE.get(key)
    if val is None:
        val = phi1_mass(params)
        _MASS_CACHE[key] = val
    return val


def radial_cdf(params: ModelParams, r):
    """P(|X| <= r), exact integration by parts of the radius relation.

    Boundary terms use low-order jets of G(t) = Phi1(sqrt t) (odd d) or of
    its half-integral (even d); the remaining integral is an integral of
    Phi1 itself.  Accepts a scalar or an array of radii.
    """
    scalar = np.ndim(r) == 0
    ra = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(ra < 0) or np.any(np.isnan(ra)):
        raise DomainError("the radius must be non-negative")
    out = np.zeros_like(ra)
    live = ra > 0
    if params.kind.bounded:
        top = ra >= 1.0
        out[top] = total_phi1_mass(params)
        live &= ~top
    if np.any(live):
        rl = ra[live]
        _check_radius(params, rl)
        n = params.n
        s = _square(rl)
        # jets along t = s (1 + h): the j-th derivative is s^j G^(j)(s), which
        # absorbs the matching power of s carried by the u^(k) factors below
        if params.parity is Parity.ODD:
            g = _g_jet(params, _t_jet(s, s, n), one_minus_z=(s - 1.0) / s)
            boundary = np.zeros_like(s)
            for k in range(n + 1):
                uk = (-1) ** (n + 1) * math.gamma(n + 1.5) / math.gamma(n + 1.5 - k)
                boundary += (-1) ** k * uk * g.derivative(n - k)
            out[live] = phi1_cumulative(params, rl) + math.sqrt(math.pi) / math.gamma(n + 1.5) * np.sqrt(s) * boundary
        else:
            h = _h_jet(params, s, n, scale=s)
            boundary = np.zeros_like(s)
            for k in range(n + 1):
                uk = (-1) ** (n + 1) * math.factorial(n) / math.factorial(n - k)
                boundary += (-1) ** k * uk * np.real(h.derivative(n - k))
            out[live] = total_phi1_mass(params) + math.sqrt(math.pi) / math.factorial(n) * boundary
    return float(out[0]) if scalar else out


# -- Cartesian density and projection -------------------------------------------------


NORMALIZATION_GAP = 2e-6
NORMALIZATION_CUTOFF = 1e4


def radius_normalization(params: ModelParams, rtol: float = 1e-10) -> float:
    """Total mass of Phi_R by direct quadrature of the density.

    The two endpoint slivers of width 2e-6 around r = 0 and r = 1 (where the
    density is singular) are taken from the one-coordinate masses.  For the
    overshoot law the quadrature stops at r = 1e4 and the rest is the
    integral of a power law fitted to Phi_R at the cutoff.
    """
    eta = NORMALIZATION_GAP

    def f(r, dl, dr):
        return phi_r(params, r)

    total = float(radial_cdf(params, eta)) + float(tanh_sinh(f, eta, 1.0 - eta, rtol=rtol)[0])
    if params.kind.bounded:
        return total + total_phi1_mass(params) - float(radial_cdf(params, 1.0 - eta))
    total += float(radial_cdf(params, 1.0 + eta) - radial_cdf(params, 1.0 - eta))
    cut = NORMALIZATION_CUTOFF
    edges = np.geomspace(1.0 + eta, cut, 9)
    total += math.fsum(float(tanh_sinh(f, lo, hi, rtol=rtol)[0]) for lo, hi in zip(edges[:-1], edges[1:]))
    p_cut, p_far = phi_r(params, np.array([cut, 2.0 * cut]))
    decay = math.log(p_cut / p_far) / math.log(2.0)
    return total + cut * p_cut / (decay - 1.0)


def cartesian_density(params: ModelParams, point, t: float) -> float:
    """Density of the d-dimensional position at ``point`` and time ``t``."""
    point = np.asarray(point, dtype=float)
    if point.shape != (params.dim,):
        raise DomainError(f"point must have length {params.dim}")
    if not t > 0:
        raise DomainError("time must be positive")
    norm = float(np.linalg.norm(point))
    if norm <= CLAMP_MARGIN * t:
        raise EndpointUnstable("point lies too close to the origin")
    rho = norm / t
    d = params.dim
    if params.kind.bounded and rho >= 1.0:
        return 0.0
    surf = 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)
    return phi_r(params, rho) / (surf * t * norm ** (d - 1))


def project_radius_to_axis(params: ModelParams, x: float) -> float:
    """Phi1(x) rebuilt from the radius density via the marginal projection kernel."""
    x = abs(float(x))
    eta = 2.0 * CLAMP_MARGIN
    if x <= 0 or (params.kind.bounded and x >= 1.0 - eta):
        raise EndpointUnstable(f"x = {x} is outside the clamped support")
    if not params.kind.bounded and abs(x - 1.0) <= eta:
        raise EndpointUnstable(f"x = {x} is too close to 1")
    cn = projection_constant(params.n, params.parity)
    p = params.n if params.parity is Parity.ODD else params.n - 0.5

    def weight(rho, dist):
        return cn * (dist * (rho + x) / (rho * rho)) ** p / rho

    def bulk(rho, dl, dr):
        return weight(rho, rho - x if x == 0 else dl) * phi_r(params, rho)

    def below_one(rho, dl, dr):
        return weight(rho, dl) * phi_r(params, rho)

    total = 0.0
    if x < 1.0:
        val, _ = tanh_sinh(below_one, x, 1.0 - eta, rtol=1e-10, max_level=10)
        total += float(val)
        # the thin shell next to r = 1 carries a known mass; the weight is smooth there
        shell_lo = radial_cdf(params, 1.0 - eta)
        if params.kind.bounded:
            shell = phi1_mass(params) - shell_lo
            total += float(weight(1.0 - eta / 2, 1.0 - eta / 2 - x)) * shell
            return total
        shell = radial_cdf(params, 1.0 + eta) - shell_lo
        total += float(weight(1.0, 1.0 - x)) * shell
        start = 1.0 + eta
    else:
        start = x

    def tail(rho, dl):
        out = np.zeros_like(rho)
        ok = rho < 1e60
        dist = (start - x) + dl[ok]
        out[ok] = weight(rho[ok], dist) * phi_r(params, rho[ok])
        return out

    val, _ = exp_sinh(tail, start, rtol=1e-10, max_level=10)
    return total + float(val)


# -- tables ---------------------------------------------------------------------------


def clamp_grid(params: ModelParams, grid) -> np.ndarray:
    """Push abscissae into the support, CLAMP_MARGIN away from 0 and 1."""
    g = np.asarray(grid, dtype=float)
    g = np.maximum(g, CLAMP_MARGIN)
    if params.kind.bounded:
        g = np.minimum(g, 1.0 - CLAMP_MARGIN)
    else:
        near = np.abs(g - 1.0) < CLAMP_MARGIN
        g = np.where(near & (g < 1.0), 1.0 - CLAMP_MARGIN, g)
        g = np.where(near & (g >= 1.0), 1.0 + CLAMP_MARGIN, g)
    return g


def chebyshev_grid(params: ModelParams, npts: int = 512, upper: float | None = None) -> np.ndarray:
    """Chebyshev-spaced abscissae on the support (or on (0, upper)), clamped."""
    if npts < 2:
        raise DomainError("a grid needs at least two points")
    hi = upper if upper is not None else (1.0 if params.kind.bounded else 10.0)
    k = np.arange(npts)
    nodes = 0.5 * hi * (1.0 - np.cos(math.pi * (k + 0.5) / npts))
    return np.unique(clamp_grid(params, nodes))


@dataclass
class DensityTable:
    params: ModelParams
    grid: np.ndarray
    values: np.ndarray
    route: Route
    mode: str = "radius"
    clamp_margin: float = CLAMP_MARGIN
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape:
            raise ValueError("grid and values differ in shape")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly ascending")


def density_table(params: ModelParams, grid=None, route: Route | str = Route.HYPER,
                  mode: str = "radius") -> DensityTable:
    """Evaluate Phi_R (mode "radius") or Phi1 (mode "axis") on a clamped grid.

    Round-off negatives down to -1e-10 are clipped to zero; anything more
    negative is reported as a numeric failure.
    """
    route = Route.parse(route)
    grid = chebyshev_grid(params) if grid is None else np.asarray(grid, dtype=float)
    grid = clamp_grid(params, grid)
    if mode == "radius":
        values = phi_r(params, grid, route)
    elif mode == "axis":
        values = phi1(params, grid, route)
    else:
        raise DomainError(f"unknown table mode {mode!r}")
    values = np.atleast_1d(np.asarray(values, dtype=float))
    bad = ~np.isfinite(values) | (values < -1e-10)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NumericError(f"density value {float(values[i])!r} at abscissa {float(grid[i])!r}")
    return DensityTable(params, grid, np.maximum(values, 0.0), route, mode)
