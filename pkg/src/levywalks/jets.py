"""Truncated Taylor arithmetic ("jets") for exact high-order derivatives.

A :class:`Jet` of order K stores ``c[k] = f^(k)(x0) / k!`` for k = 0..K.  The
leading axis of ``c`` is the Taylor index; any trailing axes are a batch of
independent expansion points, so a whole grid is differentiated at once.
Coefficients may be real or complex.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import BranchError


def _as_coeffs(value, order: int, like: np.ndarray | None = None) -> np.ndarray:
    value = np.asarray(value)
    batch = value.shape if like is None else np.broadcast_shapes(value.shape, like.shape[1:])
    shape = (order + 1,) + batch
    dtype = np.result_type(value, like) if like is not None else np.result_type(value, float)
    out = np.zeros(shape, dtype=dtype)
    out[0] = value
    return out


class Jet:
    __slots__ = ("c",)
    __array_priority__ = 100

    def __init__(self, coeffs):
        c = np.asarray(coeffs)
        if c.ndim == 0:
            raise ValueError("a jet needs at least one coefficient")
        if not np.issubdtype(c.dtype, np.inexact):
            c = c.astype(float)
        self.c = c

    @classmethod
    def variable(cls, x0, order: int) -> Jet:
        c = _as_coeffs(x0, order)
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, order: int) -> Jet:
        return cls(_as_coeffs(value, order))

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @property
    def value(self):
        return self.c[0]

    def derivative(self, k: int):
        """k-th derivative at the expansion point."""
        return self.c[k] * math.factorial(k)

    def truncate(self, order: int) -> Jet:
        return Jet(self.c[: order + 1].copy())

    @property
    def real(self) -> Jet:
        return Jet(self.c.real.copy())

    @property
    def imag(self) -> Jet:
        return Jet(self.c.imag.copy())

    def conj(self) -> Jet:
        return Jet(np.conj(self.c))

    def __repr__(self):
        return f"Jet(order={self.order}, c0={self.c[0]!r})"

    # -- arithmetic -----------------------------------------------------

    def _lift(self, other) -> Jet:
        if isinstance(other, Jet):
            if other.order != self.order:
                raise ValueError("jets of different order")
            return other
        return Jet(_as_coeffs(other, self.order, like=self.c))

    def __neg__(self):
        return Jet(-self.c)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.c + self._lift(other).c)
        c = self.c.astype(np.result_type(self.c, np.asarray(other)), copy=True)
        c[0] = c[0] + other
        return Jet(c)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if not isinstance(other, Jet) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * np.asarray(other))
        a, b = self.c, self._lift(other).c
        K = self.order
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
        for k in range(K + 1):
            acc = a[0] * b[k]
            for i in range(1, k + 1):
                acc = acc + a[i] * b[k - i]
            out[k] = acc
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / np.asarray(other))
        a, b = self.c, self._lift(other).c
        if np.any(b[0] == 0):
            raise ZeroDivisionError("jet division by a zero constant term")
        K = self.order
        q = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
        for k in range(K + 1):
            acc = a[k]
            for i in range(1, k + 1):
                acc = acc - b[i] * q[k - i]
            q[k] = acc / b[0]
        return Jet(q)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, p):
        if isinstance(p, Jet):
            return (p * self.log()).exp()
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = Jet.constant(np.ones_like(self.c[0]), self.order)
            base = self
            e = int(p)
            while e:
                if e & 1:
                    out = out * base
                e >>= 1
                if e:
                    base = base * base
            return out
        return self._real_power(p)

    def _real_power(self, p) -> Jet:
        g = self.c
        g0 = g[0]
        if np.isrealobj(g):
            if np.any(g0 <= 0):
                raise BranchError("real jet raised to a non-integer power needs a positive constant term")
            h0 = np.power(g0, p)
        else:
            if np.any(g0 == 0):
                raise BranchError("complex jet raised to a power at zero")
            h0 = np.power(g0, p)
        K = self.order
        h = np.zeros(np.broadcast_shapes(g.shape, np.shape(h0)), dtype=np.result_type(g, h0))
        h[0] = h0
        for k in range(1, K + 1):
            acc = 0.0
            for i in range(1, k + 1):
                acc = acc + ((p + 1) * i - k) * g[i] * h[k - i]
            h[k] = acc / (k * g0)
        return Jet(h)

    def sqrt(self) -> Jet:
        return self._real_power(0.5)

    def exp(self) -> Jet:
        g = self.c
        K = self.order
        e = np.zeros_like(g)
        e[0] = np.exp(g[0])
        for k in range(1, K + 1):
            acc = 0.0
            for i in range(1, k + 1):
                acc = acc + i * g[i] * e[k - i]
            e[k] = acc / k
        return Jet(e)

    def log(self) -> Jet:
        g = self.c
        if np.isrealobj(g) and np.any(g[0] <= 0):
            raise BranchError("logarithm of a jet with non-positive constant term")
        K = self.order
        out = np.zeros_like(g, dtype=np.result_type(g, float))
        out[0] = np.log(g[0])
        for k in range(1, K + 1):
            acc = 0.0
            for i in range(1, k):
                acc = acc + i * out[i] * g[k - i]
            out[k] = (g[k] - acc / k) / g[0]
        return Jet(out)

    def sincos(self) -> tuple[Jet, Jet]:
        g = self.c
        K = self.order
        s = np.zeros_like(g)
        c = np.zeros_like(g)
        s[0], c[0] = np.sin(g[0]), np.cos(g[0])
        for k in range(1, K + 1):
            acc_s = 0.0
            acc_c = 0.0
            for i in range(1, k + 1):
                acc_s = acc_s + i * g[i] * c[k - i]
                acc_c = acc_c + i * g[i] * s[k - i]
            s[k] = acc_s / k
            c[k] = -acc_c / k
        return Jet(s), Jet(c)

    def sin(self) -> Jet:
        return self.sincos()[0]

    def cos(self) -> Jet:
        return self.sincos()[1]

    def compose(self, outer_taylor) -> Jet:
        """Jet of ``f(self)`` given the Taylor coefficients of f at ``self.value``.

        ``outer_taylor[k] = f^(k)(g0) / k!`` for k = 0..K, batch axes matching ours.
        """
        t = np.asarray(outer_taylor)
        K = self.order
        if t.shape[0] < K + 1:
            raise ValueError("not enough outer Taylor coefficients")
        h = self.c.copy()
        h[0] = 0
        dtype = np.result_type(t, h)
        out = np.zeros((K + 1,) + np.broadcast_shapes(t.shape[1:], h.shape[1:]), dtype=dtype)
        out[0] = t[0]
        power = Jet(h)
        for k in range(1, K + 1):
            out = out + t[k] * power.c
            if k < K:
                power = power * Jet(h)
        return Jet(out)


def jet_eval(f: Callable[[Jet], Jet], x0, order: int) -> Jet:
    """Evaluate ``f`` on the identity jet at ``x0``."""
    return f(Jet.variable(x0, order))


def nth_derivative(f: Callable[[Jet], Jet], x, n: int):
    if n < 0:
        raise ValueError("derivative order must be >= 0")
    return jet_eval(f, x, n).derivative(n)
