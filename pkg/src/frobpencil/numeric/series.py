"""Truncated Laurent series with certified truncation order.

A series ``s`` at a point stands for ``sum_k c_k y**k + O(y**order)`` where
``y`` is the local coordinate: ``t - point`` at a finite point and ``1/t`` at
infinity. Coefficients with ``k < low`` are exactly zero; coefficients with
``k >= order`` are unknown and no operation reads them.
"""
from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from ..errors import (IncompatibleExpansionPoints, InsufficientTruncation, NotMonic,
                      OrderTooSmall, ValuationError)
from .polynomial import Polynomial


class _Infinity:
    __slots__ = ()

    def __repr__(self):
        return "AT_INFINITY"

    def __reduce__(self):
        return (_infinity, ())


def _infinity():
    return AT_INFINITY


AT_INFINITY = _Infinity()

Point = Union[complex, _Infinity]


def _same_point(p, q) -> bool:
    if p is AT_INFINITY or q is AT_INFINITY:
        return p is q
    return complex(p) == complex(q)


class LaurentSeries:
    __slots__ = ("point", "low", "coeffs", "order")

    def __init__(self, point: Point, low: int, coeffs: Sequence[complex], order: int | None = None):
        c = np.asarray(coeffs, dtype=complex).ravel()
        if order is None:
            order = low + len(c)
        if order < low:
            raise ValueError("truncation order below lowest order")
        width = order - low
        if len(c) < width:
            c = np.concatenate([c, np.zeros(width - len(c), dtype=complex)])
        c = c[:width].copy()
        nz = np.nonzero(c)[0]
        if nz.size == 0:
            low, c = order, c[:0]
        elif nz[0] > 0:
            low, c = low + int(nz[0]), c[nz[0]:]
        c.setflags(write=False)
        self.point = AT_INFINITY if point is AT_INFINITY else complex(point)
        self.low = int(low)
        self.coeffs = c
        self.order = int(order)

    # construction helpers -------------------------------------------------
    @classmethod
    def monomial(cls, point: Point, k: int, order: int, coefficient: complex = 1.0) -> "LaurentSeries":
        return cls(point, k, [coefficient], order)

    @classmethod
    def from_polynomial(cls, p: Polynomial, point: Point, order: int) -> "LaurentSeries":
        """Expansion of a polynomial in ``t`` at ``point``, exact up to ``order``."""
        if point is AT_INFINITY:
            c = p.coefficients[::-1]
            return cls(point, -p.degree, c, order)
        return cls(point, 0, p.taylor_shift(complex(point)), order)

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    @property
    def valuation(self) -> int:
        if self.is_zero:
            raise ValuationError("valuation of a series with no certified nonzero term")
        return self.low

    def coeff(self, k: int) -> complex:
        if k >= self.order:
            raise InsufficientTruncation(f"coefficient {k} lies beyond truncation order {self.order}")
        if k < self.low:
            return 0j
        return complex(self.coeffs[k - self.low])

    def _check(self, other: "LaurentSeries"):
        if not _same_point(self.point, other.point):
            raise IncompatibleExpansionPoints(f"{self.point!r} vs {other.point!r}")

    def with_order(self, order: int) -> "LaurentSeries":
        if order > self.order:
            raise InsufficientTruncation("cannot raise certified order")
        return LaurentSeries(self.point, self.low, self.coeffs, max(order, self.low))

    def _dense(self, start: int, stop: int) -> np.ndarray:
        out = np.zeros(stop - start, dtype=complex)
        for k in range(max(start, self.low), min(stop, self.order)):
            out[k - start] = self.coeffs[k - self.low]
        return out

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries(self.point, 0, [other], max(self.order, 1))
        self._check(other)
        order = min(self.order, other.order)
        low = min(self.low, other.low, order)
        return LaurentSeries(self.point, low, self._dense(low, order) + other._dense(low, order), order)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(self.point, self.low, -self.coeffs, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            return LaurentSeries(self.point, self.low, self.coeffs * complex(other), self.order)
        self._check(other)
        low = self.low + other.low
        order = min(self.order + other.low, other.order + self.low)
        if order <= low:
            return LaurentSeries(self.point, order, [], order)
        prod = np.convolve(self.coeffs, other.coeffs)[: order - low]
        return LaurentSeries(self.point, low, prod, order)

    __rmul__ = __mul__

    def reciprocal(self) -> "LaurentSeries":
        v = self.valuation
        width = self.order - v
        a = self.coeffs / self.coeffs[0]
        g = np.zeros(width, dtype=complex)
        g[0] = 1.0
        for k in range(1, width):
            g[k] = -np.dot(a[1:k + 1], g[k - 1::-1][:k])
        return LaurentSeries(self.point, -v, g / self.coeffs[0], -v + width)

    def __truediv__(self, other):
        if not isinstance(other, LaurentSeries):
            return self * (1.0 / complex(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def power(self, alpha) -> "LaurentSeries":
        """``self ** alpha`` on the principal branch of the leading coefficient."""
        v = self.valuation
        new_low = v * alpha
        if abs(new_low - round(np.real(new_low))) > 1e-12:
            raise ValuationError("non-integral valuation after power")
        new_low = int(round(np.real(new_low)))
        width = self.order - v
        h = self.coeffs / self.coeffs[0]
        g = np.zeros(width, dtype=complex)
        g[0] = 1.0
        for k in range(1, width):
            j = np.arange(1, k + 1)
            g[k] = np.sum(((alpha + 1) * j - k) * h[1:k + 1] * g[k - j]) / k
        lead = complex(self.coeffs[0]) ** alpha
        return LaurentSeries(self.point, new_low, g * lead, new_low + width)

    __pow__ = power

    def differentiate(self) -> "LaurentSeries":
        """Derivative with respect to the local coordinate ``y``."""
        k = np.arange(self.low, self.order)
        return LaurentSeries(self.point, self.low - 1, self.coeffs * k, self.order - 1)

    def d_dt(self) -> "LaurentSeries":
        """Derivative with respect to the global coordinate ``t``."""
        d = self.differentiate()
        if self.point is AT_INFINITY:
            # y = 1/t, so d/dt = -y^2 d/dy
            return d * LaurentSeries(self.point, 2, [-1.0], 10 ** 6)
        return d

    def compose(self, inner: "LaurentSeries") -> "LaurentSeries":
        """``self(inner(y))``; ``inner`` must vanish at its expansion point."""
        vb = inner.valuation
        if vb < 1:
            raise ValuationError("inner series must have positive valuation")
        ob = inner.order
        order = min(self.order * vb, self.low * vb + ob - vb)
        if self.is_zero:
            return LaurentSeries(inner.point, order, [], order)
        base = inner.with_order(min(ob, order - self.low * vb + vb))
        term = base.power(self.low) if self.low != 0 else LaurentSeries(inner.point, 0, [1.0], ob - vb)
        acc = np.zeros(max(order - self.low * vb, 0), dtype=complex)
        start = self.low * vb
        for k in range(self.low, self.order):
            if term.low >= order:
                break
            a_k = self.coeffs[k - self.low]
            if a_k != 0:
                acc += a_k * term._dense(start, order)
            term = term * base
        return LaurentSeries(inner.point, start, acc, order)

    def revert(self) -> "LaurentSeries":
        """Compositional inverse of a series with valuation exactly one."""
        if self.valuation != 1:
            raise ValuationError("reversion needs valuation exactly 1")
        n = self.order
        a1 = complex(self.coeffs[0])
        b = np.zeros(n, dtype=complex)
        b[1] = 1.0 / a1
        for k in range(2, n):
            partial = LaurentSeries(0, 1, b[1:k], k + 1)
            comp = self.with_order(k + 1).compose(partial)
            b[k] = -comp.coeff(k) / a1
        return LaurentSeries(0, 1, b[1:], n)

    def evaluate(self, y: complex) -> complex:
        """Truncated sum at local coordinate value ``y`` (no error estimate)."""
        k = np.arange(self.low, self.order)
        return complex(np.sum(self.coeffs * np.power(complex(y), k)))

    def __repr__(self):
        return f"LaurentSeries({self.point!r}, low={self.low}, order={self.order}, coeffs={self.coeffs!r})"


def residue_at(form_series: LaurentSeries) -> complex:
    """Coefficient of ``y**-1 dy`` of a 1-form ``g(y) dy`` in a local coordinate."""
    if form_series.order <= -1:
        raise InsufficientTruncation("the y^-1 term is not certified")
    return form_series.coeff(-1)


def series_arith(a: LaurentSeries, b: LaurentSeries | None, op: str) -> LaurentSeries:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "compose":
        return a.compose(b)
    if op == "revert":
        return a.revert()
    if op == "differentiate":
        return a.differentiate()
    raise ValueError(f"unknown series operation {op!r}")


def puiseux_inverse_root(f: Polynomial, order: int) -> LaurentSeries:
    """``x = f(t)**(-1/n)`` expanded in ``y = 1/t`` at infinity.

    Uses the branch with ``x = 1/t + O(t**-2)``.
    """
    n = f.degree
    if n < 1 or not f.is_monic():
        raise NotMonic("expected a monic polynomial of positive degree")
    if order < n:
        raise OrderTooSmall(f"order {order} < degree {n}")
    # f = t^n P(y) with P(0) = 1
    scaled = LaurentSeries(AT_INFINITY, 0, f.coefficients[::-1], order - 1)
    root = scaled.power(-1.0 / n)
    return LaurentSeries(AT_INFINITY, 1, root._dense(0, order - 1), order)
