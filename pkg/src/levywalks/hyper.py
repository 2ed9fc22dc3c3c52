"""Gauss hypergeometric function with explicit cut-side control, and the g1 kernels.

``gauss_2f1`` is vectorised over ``z``.  Region selection, per element:

* ``|z| <= 0.7``                       -- Maclaurin series;
* ``|z| >= 1.3``                       -- 1/z connection formula (needs a - b non-integer);
* ``|1 - z| <= 0.5``                   -- 1 - z connection formula (needs c - a - b non-integer);
* ``|z / (z - 1)| <= 0.7``             -- Pfaff transformation;
* anything else, or a degenerate parameter set -- mpmath at raised precision.

For real ``z > 1`` the caller names the side of the cut the limit is taken
from; the branch of (-z)^p and (1 - z)^p is then fixed by hand instead of
relying on signed zeros.
"""

from __future__ import annotations

import enum
import math

import mpmath
import numpy as np
from scipy.special import poch, rgamma

from .errors import BranchError, ConvergenceError, PoleError, QuadratureError, ZeroDenominator
from .jets import Jet
from .model import ModelParams, WalkKind
from .quadrature import tanh_sinh

SERIES_RADIUS = 0.7
INVERSE_RADIUS = 1.3
ONE_MINUS_Z_RADIUS = 0.5
_DEGENERATE_GAP = 1e-3
_MAX_TERMS = 4000


class CutSide(enum.Enum):
    ABOVE = "above"
    BELOW = "below"

    @property
    def arg(self) -> float:
        """Argument of (-z) and of (1 - z) for z on the cut approached from this side."""
        return math.pi if self is CutSide.BELOW else -math.pi


def _is_nonpos_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def _near_int(v: float, gap: float = _DEGENERATE_GAP) -> bool:
    return abs(v - round(v)) < gap


def _series(a, b, c, z):
    z = np.asarray(z, dtype=complex)
    term = np.ones_like(z)
    total = np.ones_like(z)
    if z.size == 0:
        return total
    for k in range(_MAX_TERMS):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1.0))) * z
        total = total + term
        if k > 2 and np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            return total
        if not np.any(term):
            return total
    raise ConvergenceError(f"2F1 series did not converge for a={a}, b={b}, c={c}")


def _log_with_cut(w, on_cut, cut_arg):
    out = np.log(w.astype(complex))
    if np.any(on_cut):
        out = np.where(on_cut, np.log(np.abs(w)) + 1j * cut_arg, out)
    return out


def _inverse(a, b, c, z, on_cut, cut_arg):
    logmz = _log_with_cut(-z, on_cut, cut_arg)
    w = 1.0 / z
    g_c = math.gamma(c)
    t1 = g_c * math.gamma(b - a) * rgamma(b) * rgamma(c - a)
    t2 = g_c * math.gamma(a - b) * rgamma(a) * rgamma(c - b)
    out = np.zeros_like(z)
    if t1 != 0:
        out = out + t1 * np.exp(-a * logmz) * _series(a, a - c + 1, a - b + 1, w)
    if t2 != 0:
        out = out + t2 * np.exp(-b * logmz) * _series(b, b - c + 1, b - a + 1, w)
    return out


def _one_minus_z(a, b, c, w, on_cut, cut_arg):
    s = c - a - b
    g_c = math.gamma(c)
    t1 = g_c * math.gamma(s) * rgamma(c - a) * rgamma(c - b)
    t2 = g_c * math.gamma(-s) * rgamma(a) * rgamma(b)
    out = np.zeros_like(w)
    if t1 != 0:
        out = out + t1 * _series(a, b, 1 - s, w)
    if t2 != 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            log1mz = _log_with_cut(w, on_cut, cut_arg)
            power = np.where(w == 0, 0.0 if s > 0 else np.inf, np.exp(s * log1mz))
        out = out + t2 * power * _series(c - a, c - b, 1 + s, w)
    return out


def _pfaff(a, b, c, z):
    return np.exp(-a * np.log(1.0 - z)) * _series(a, c - b, c, z / (z - 1.0))


def _mp_fallback(a, b, c, z, w, on_cut, side):
    out = np.empty_like(z)
    for i, (zi, wi, cut) in enumerate(zip(z, w, on_cut)):
        # rebuild z from the exact 1 - z so points next to z = 1 keep their distance;
        # the working precision must resolve |1 - z| against 1
        dps = 40 + max(0, int(-math.log10(abs(wi)))) if wi != 0 else 40
        with mpmath.workdps(dps):
            arg = 1 - mpmath.mpc(wi.real, wi.imag)
            if cut:
                offset = mpmath.mpf("1e-30") * abs(1 - arg)
                arg = mpmath.mpc(arg.real, -offset if side is CutSide.BELOW else offset)
            out[i] = complex(mpmath.hyp2f1(a, b, c, arg))
    return out


def gauss_2f1(a: float, b: float, c: float, z, side: CutSide | None = None, one_minus_z=None):
    """Principal-branch 2F1(a, b; c; z) for real parameters.

    Real ``z > 1`` lies on the branch cut; ``side`` selects the limit from
    above or below and is mandatory there.  ``one_minus_z`` may carry 1 - z
    to full relative precision when z is within rounding of 1.
    """
    if _is_nonpos_int(c):
        raise PoleError(f"2F1 undefined for c = {c}")
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if np.any(~np.isfinite(zz)):
        raise ValueError("2F1 argument must be finite")
    if one_minus_z is None:
        ww = 1.0 - zz
    else:
        ww = np.broadcast_to(np.asarray(one_minus_z, dtype=complex), np.shape(z)).ravel().copy()
    on_cut = (zz.imag == 0) & ((zz.real > 1) | ((ww.imag == 0) & (ww.real < 0)))
    if np.any(on_cut) and side is None:
        raise BranchError("real argument z > 1 lies on the cut; pass side=CutSide.ABOVE/BELOW")
    if np.any(ww == 0) and c - a - b <= 0:
        raise ConvergenceError("2F1 diverges at z = 1 when c - a - b <= 0")
    cut_arg = side.arg if side is not None else 0.0

    out = np.empty_like(zz)
    todo = np.ones(zz.shape, dtype=bool)
    r = np.abs(zz)

    m = r <= SERIES_RADIUS
    if np.any(m):
        out[m] = _series(a, b, c, zz[m])
        todo &= ~m

    if not _near_int(a - b):
        m = todo & (r >= INVERSE_RADIUS)
        if np.any(m):
            out[m] = _inverse(a, b, c, zz[m], on_cut[m], cut_arg)
            todo &= ~m

    if not _near_int(c - a - b):
        m = todo & (np.abs(ww) <= ONE_MINUS_Z_RADIUS)
        if np.any(m):
            out[m] = _one_minus_z(a, b, c, ww[m], on_cut[m], cut_arg)
            todo &= ~m

    with np.errstate(divide="ignore", invalid="ignore"):
        m = todo & (np.abs(zz / (zz - 1.0)) <= SERIES_RADIUS) & ~on_cut
    if np.any(m):
        out[m] = _pfaff(a, b, c, zz[m])
        todo &= ~m

    if np.any(todo):
        out[todo] = _mp_fallback(a, b, c, zz[todo], ww[todo], on_cut[todo], side)

    if scalar:
        return complex(out[0])
    return out.reshape(np.shape(z))


def hyp2f1_taylor(a: float, b: float, c: float, z0, order: int, side: CutSide | None = None,
                  one_minus_z=None):
    """Taylor coefficients F^(k)(z0)/k!, k = 0..order, stacked on a leading axis."""
    z0 = np.asarray(z0, dtype=complex)
    coeffs = np.empty((order + 1,) + z0.shape, dtype=complex)
    for k in range(order + 1):
        scale = poch(a, k) * poch(b, k) / (poch(c, k) * math.factorial(k))
        coeffs[k] = scale * gauss_2f1(a + k, b + k, c + k, z0, side, one_minus_z) if scale != 0 else 0.0
    return coeffs


# -- g1 kernels ---------------------------------------------------------------


def _den_params(params: ModelParams):
    return -params.alpha / 2, (1 - params.alpha) / 2, params.hyper_c


def _num_params(params: ModelParams):
    return (1 - params.alpha) / 2, 1 - params.alpha / 2, params.hyper_c


def _overshoot_c(params: ModelParams) -> float:
    from .model import overshoot_constant

    return overshoot_constant(params.n, params.alpha, params.parity)


def g1_hyper(params: ModelParams, z, side: CutSide = CutSide.BELOW, one_minus_z=None):
    """The one-coordinate transform kernel g1 expressed through 2F1 at z = xi^2.

    The point is xi = -sqrt(z) (principal root), which is where the
    inversion formula samples g1 when z = 1/(x + i eps)^2.

    * standard:   2F1((1-a)/2, 1-a/2; d/2; z) / 2F1(-a/2, (1-a)/2; d/2; z)
    * undershoot: 1 / 2F1(-a/2, (1-a)/2; d/2; z)
    * overshoot:  1 - c (i sqrt z)^a / 2F1(-a/2, (1-a)/2; d/2; z)
    """
    den = gauss_2f1(*_den_params(params), z, side, one_minus_z)
    if np.any(np.abs(den) < 1e-300):
        raise ZeroDenominator("denominator hypergeometric factor vanished")
    kind = params.kind
    if kind is WalkKind.STANDARD:
        return gauss_2f1(*_num_params(params), z, side, one_minus_z) / den
    if kind is WalkKind.UNDERSHOOT:
        return 1.0 / den
    zc = np.asarray(z, dtype=complex)
    root = np.sqrt(zc)
    if np.any((zc.imag == 0) & (zc.real > 0)):
        root = np.where((zc.imag == 0) & (zc.real > 0), np.sqrt(np.abs(zc)), root)
    corr = _overshoot_c(params) * np.power(1j * root, params.alpha)
    out = 1.0 - corr / den
    return complex(out) if np.ndim(out) == 0 else out


def g1_hyper_jet(params: ModelParams, zjet: Jet, side: CutSide = CutSide.BELOW,
                 one_minus_z=None) -> Jet:
    """g1_hyper composed with a (real, positive) jet in z; used for derivatives in r.

    ``one_minus_z`` optionally gives 1 - z0 exactly, see :func:`gauss_2f1`.
    """
    K = zjet.order
    z0 = zjet.value
    den = zjet.compose(hyp2f1_taylor(*_den_params(params), z0, K, side, one_minus_z))
    kind = params.kind
    if kind is WalkKind.STANDARD:
        num = zjet.compose(hyp2f1_taylor(*_num_params(params), z0, K, side, one_minus_z))
        return num / den
    if kind is WalkKind.UNDERSHOOT:
        return 1.0 / den
    a = params.alpha
    corr = (zjet ** (a / 2)) * (_overshoot_c(params) * np.exp(0.5j * math.pi * a))
    return 1.0 - corr / den


def _series_jet(a, b, c, t: Jet) -> Jet:
    """Maclaurin series of 2F1(a, b; c; .) summed on a jet with small constant term."""
    total = Jet.constant(np.ones_like(t.value, dtype=float), t.order) + t * 0.0
    term = total
    for k in range(_MAX_TERMS):
        term = term * t * ((a + k) * (b + k) / ((c + k) * (k + 1.0)))
        total = total + term
        if k > 2 and np.all(np.abs(term.c) <= 1e-17 * np.abs(total.c).max(axis=0)):
            return total
    raise ConvergenceError(f"2F1 jet series did not converge for a={a}, b={b}, c={c}")


def hyp2f1_inverse_jet(a: float, b: float, c: float, tjet: Jet, side: CutSide = CutSide.BELOW) -> Jet:
    """Jet of 2F1(a, b; c; 1/t) for positive t below 1/1.3, built in t directly.

    Uses the 1/z connection formula, so derivatives of every order scale
    like powers of t and never pass through z^k, which would overflow for
    small t.  Requires a - b away from the integers.
    """
    if _near_int(a - b):
        raise PoleError("connection formula needs a - b away from the integers")
    g_c = math.gamma(c)
    phase = side.arg
    out = None
    for p, q, r, sign in ((a, b, c, 1.0), (b, a, c, 1.0)):
        coef = g_c * math.gamma(q - p) * rgamma(q) * rgamma(r - p)
        if coef == 0:
            continue
        # (-z)^(-p) with arg(-z) fixed by the cut side, z = 1/t
        piece = (tjet ** p) * _series_jet(p, p - r + 1, p - q + 1, tjet) * (coef * np.exp(-1j * phase * p))
        out = piece if out is None else out + piece
    return out


def _overshoot_small_t(params: ModelParams, ts: Jet, den: Jet, side: CutSide) -> Jet:
    """Overshoot kernel for small t with its imaginary part free of cancellation.

    With z = 1/t the denominator is t^(-a/2) e^(i pi a/2) (A S_A - i B sqrt(t) S_B)
    for real series S_A, S_B, so Im(corr/den) = c B sqrt(t) S_B / (A^2 S_A^2 + B^2 t S_B^2)
    exactly on the lower side of the cut; subtracting the complex quotient
    directly would lose all digits as t -> 0.
    """
    a = params.alpha
    oc = _overshoot_c(params)
    corr = (ts ** (-a / 2)) * (oc * np.exp(0.5j * math.pi * a))
    res = 1.0 - corr / den
    if side is not CutSide.BELOW:
        return res
    p, q, r = _den_params(params)
    g_c = math.gamma(r)
    coef_a = g_c * math.gamma(q - p) * rgamma(q) * rgamma(r - p)
    coef_b = g_c * math.gamma(p - q) * rgamma(p) * rgamma(r - q)
    s_a = _series_jet(p, p - r + 1, p - q + 1, ts)
    s_b = _series_jet(q, q - r + 1, q - p + 1, ts)
    root = ts ** 0.5
    im = (root * s_b * (oc * coef_b)) / ((s_a * coef_a) ** 2 + (root * s_b * coef_b) ** 2)
    return Jet(res.c.real - 1j * im.c)


def g1_hyper_tjet(params: ModelParams, tjet: Jet, side: CutSide = CutSide.BELOW, one_minus_z=None) -> Jet:
    """Kernel g1 at z = 1/t as a jet in t; small t goes through :func:`hyp2f1_inverse_jet`."""
    t0 = np.asarray(tjet.value, dtype=float)
    small = t0 < 1.0 / INVERSE_RADIUS
    if not np.any(small):
        return g1_hyper_jet(params, 1.0 / tjet, side, one_minus_z)
    out = np.zeros(tjet.c.shape, dtype=complex)
    if np.any(~small):
        sub = Jet(tjet.c[:, ~small])
        w = None if one_minus_z is None else np.broadcast_to(one_minus_z, t0.shape)[~small]
        out[:, ~small] = g1_hyper_jet(params, 1.0 / sub, side, w).c
    ts = Jet(tjet.c[:, small])
    den = hyp2f1_inverse_jet(*_den_params(params), ts, side)
    kind = params.kind
    if kind is WalkKind.STANDARD:
        res = hyp2f1_inverse_jet(*_num_params(params), ts, side) / den
    elif kind is WalkKind.UNDERSHOOT:
        res = 1.0 / den
    else:
        res = _overshoot_small_t(params, ts, den, side)
    out[:, small] = res.c
    return Jet(out)


# -- direct quadrature of g1 ------------------------------------------------


def _moment(xi: complex, beta: float, p: float, rtol: float) -> complex:
    """Integral over [-1, 1] of (1 - xi u)^beta (1 - u^2)^p, principal branch."""
    pieces: list[tuple[float, float]] = [(-1.0, 1.0)]
    ustar = 1.0 / xi if xi != 0 else np.inf
    split = None
    if np.isfinite(ustar) and -1.0 < ustar.real < 1.0 and abs(ustar.imag) < 0.5:
        split = ustar.real
        pieces = [(-1.0, split), (split, 1.0)]

    total = 0.0 + 0.0j
    for a, b in pieces:
        def f(u, dl, dr, a=a, b=b):
            one_plus = (1.0 + a) + dl
            one_minus = (1.0 - b) + dr
            if split is not None and b == split:
                lin = xi * (1j * ustar.imag + dr)
            elif split is not None and a == split:
                lin = xi * (1j * ustar.imag - dl)
            else:
                lin = 1.0 - xi * u
            return np.power(lin.astype(complex), beta) * (one_plus * one_minus) ** p

        val, _ = tanh_sinh(f, a, b, rtol=rtol, max_level=12)
        total += complex(val)
    return total


def g1_quadrature(params: ModelParams, xi: complex, rtol: float = 1e-13) -> complex:
    """g1(xi) from its defining integrals over the marginal direction kernel."""
    xi = complex(xi)
    if math.isnan(xi.real) or math.isnan(xi.imag):
        raise ValueError("xi must not be NaN")
    if xi.imag == 0 and abs(xi.real) >= 1:
        raise QuadratureError("real |xi| >= 1 puts the branch point inside the integration range")
    from .model import kernel_exponent, projection_constant

    a = params.alpha
    p = kernel_exponent(params)
    den = _moment(xi, a, p, rtol)
    kind = params.kind
    if kind is WalkKind.STANDARD:
        return _moment(xi, a - 1.0, p, rtol) / den
    norm = projection_constant(params.n, params.parity)
    mean = norm * den
    if kind is WalkKind.UNDERSHOOT:
        return 1.0 / mean
    return 1.0 - _overshoot_c(params) * (-1j * xi) ** a / mean
