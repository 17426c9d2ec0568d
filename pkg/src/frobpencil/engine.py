"""Primitive sections, the fiber algebra, multiplication, unit and metric."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Optional

import numpy as np

from . import elliptic as ell
from .errors import KOutOfRange, NonSemisimplePoint, NotPrimitive, SingularFrame
from .forms import FormBasis, PoleChart, form_basis, pole_chart, polar_coefficients
from .model import AbelianIntegral, CriticalData, critical_data, from_chart
from .numeric.polynomial import Polynomial
from .numeric.series import AT_INFINITY, LaurentSeries

#: |rho(q_s)| below this (relative to the largest value) marks rho as not primitive
PRIMITIVE_TOL = 1e-8
#: condition number above which the chart -> fiber map counts as singular
SINGULAR_COND = 1e12
#: relative finite-difference step for moduli derivatives
FD_STEP = 1e-4


@dataclass(frozen=True)
class PrimitiveSection:
    k: int
    genus: int
    # genus 0: polynomial h with rho = h(t) dt; genus 1: coefficients over (du, wp du, ..., wp^(n-1) du)
    coefficients: object
    values_at_critical: np.ndarray
    a_period: complex
    primitive: bool

    def values(self, m: AbelianIntegral, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=complex))
        if self.genus == 0:
            return self.coefficients(u)
        c = self.coefficients
        vals, _ = ell.wp_all(m.lattice, u, len(c) - 2)
        out = np.full_like(u, c[0])
        for j in range(1, len(c)):
            out = out + c[j] * vals[j - 1]
        return out

    def series_at_pole(self, m: AbelianIntegral, order: int) -> LaurentSeries:
        """rho / dy as a series in the local coordinate y at p."""
        if self.genus == 0:
            h = LaurentSeries.from_polynomial(self.coefficients, AT_INFINITY, order + 2)
            s = h * LaurentSeries(AT_INFINITY, -2, [-1.0], order + 10)
            return LaurentSeries(0, s.low, s.coeffs, s.order)
        c = self.coefficients
        s = LaurentSeries(0, 0, [c[0]], order)
        for j in range(1, len(c)):
            s = s + ell.wp_series(m.lattice, order, j - 1) * c[j]
        return s


@dataclass(frozen=True)
class TangentVector:
    chart: np.ndarray
    fiber: np.ndarray


def _check_k(m: AbelianIntegral, k: int):
    if not 2 <= k <= m.n:
        raise KOutOfRange(f"k = {k} outside 2..{m.n}")


def _flag_primitive(values: np.ndarray) -> bool:
    if len(values) == 0:
        return True
    scale = max(1.0, float(np.max(np.abs(values))))
    return bool(np.min(np.abs(values)) >= PRIMITIVE_TOL * scale)


def primitive_section(m: AbelianIntegral, k: int, crit: Optional[CriticalData] = None,
                      check_period: bool = True) -> PrimitiveSection:
    """The section with polar part x^-k dx at p, no other poles and zero a-period."""
    _check_k(m, k)
    crit = crit or critical_data(m)
    n = m.n
    if m.genus == 0:
        order = 2 * n + 4
        # x^(1-k) = f^((k-1)/n); keep its polynomial part in t
        root = LaurentSeries.from_polynomial(m.f, AT_INFINITY, order).power((k - 1) / n)
        top = -root.low
        poly = Polynomial([root.coeff(-j) for j in range(top + 1)])
        h = poly.deriv() * (-1.0 / (k - 1))
        vals = h(crit.points)
        return PrimitiveSection(k, 0, h, np.asarray(vals), 0j, _flag_primitive(vals))

    L = m.lattice
    order = 2 * n + 6
    # f^((k-1)/n) = x^(1-k) on the branch fixed by the pole chart
    root = pole_chart(m, order).x_of_y.power(1 - k)
    d = {mm: root.coeff(-mm) for mm in range(1, k)}
    # g = d1 zeta + sum_{m>=2} d_m (-1)^m/(m-1)! wp^(m-2); rho = -dg/(k-1) + lam du
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[1] = d[1] / (k - 1)
    for mm in range(2, k):
        coeffs[mm] = -d[mm] * (-1) ** mm / factorial(mm - 1) / (k - 1)
    coeffs[0] = d[1] * L.eta1 / (k - 1)
    sec = PrimitiveSection(k, 1, coeffs, np.zeros(0), 0j, True)
    vals = sec.values(m, crit.points)
    a_period = 0j
    if check_period:
        a_period = ell.contour_period(L, lambda u: sec.values(m, u), ell.make_cycle(L, "a"))
    return PrimitiveSection(k, 1, coeffs, vals, complex(a_period), _flag_primitive(vals))


def section_polar_part(m: AbelianIntegral, rho: PrimitiveSection, chart: Optional[PoleChart] = None,
                       mmax: Optional[int] = None) -> np.ndarray:
    """Coefficients of x^-1 dx .. x^-mmax dx in the x-expansion of rho."""
    chart = chart or pole_chart(m)
    mmax = mmax or rho.k + 2
    return polar_coefficients(chart, rho.series_at_pole(m, chart.order), mmax)


# --------------------------------------------------------------------------
# fiber algebra

@dataclass(frozen=True)
class FiberAlgebra:
    m: AbelianIntegral
    critical: CriticalData
    rho: PrimitiveSection
    fiber_matrix: np.ndarray      # H[s, i] = d u_s / d chart_i
    condition: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dimension(self) -> int:
        return len(self.critical.points)

    @property
    def weights(self) -> np.ndarray:
        """rho(q_s)^2 / omega'(q_s): the metric in the idempotent frame."""
        return self.rho.values_at_critical ** 2 / self.critical.omega_deriv

    def basis(self) -> FormBasis:
        if "basis" not in self._cache:
            self._cache["basis"] = form_basis(self.m, self.critical)
        return self._cache["basis"]


def critical_value_jacobian(m: AbelianIntegral, crit: CriticalData, step: float = FD_STEP) -> np.ndarray:
    """d u_s / d chart_i; exact at genus 0, Richardson-extrapolated differences at genus 1."""
    N = m.dimension
    if m.genus == 0:
        return np.array([[qs ** i for i in range(N)] for qs in crit.points], dtype=complex).reshape(N, N)
    base = m.chart()
    H = np.zeros((N, N), dtype=complex)
    for i in range(N):
        h = step * max(1.0, abs(base[i]))

        def values(eps):
            pt = base.copy()
            pt[i] += eps
            mm = from_chart(m, pt)
            return critical_data(mm, guesses=crit.points).values

        d1 = (values(h) - values(-h)) / (2 * h)
        d2 = (values(h / 2) - values(-h / 2)) / h
        H[:, i] = (4 * d2 - d1) / 3
    return H


def fiber_algebra(m: AbelianIntegral, k: int = 2, crit: Optional[CriticalData] = None,
                  rho: Optional[PrimitiveSection] = None) -> FiberAlgebra:
    crit = crit or critical_data(m)
    if len(crit.points) != m.dimension:
        raise NonSemisimplePoint("critical count differs from the chart dimension")
    rho = rho or primitive_section(m, k, crit)
    H = critical_value_jacobian(m, crit)
    cond = float(np.linalg.cond(H)) if H.size else 1.0
    return FiberAlgebra(m, crit, rho, H, cond)


def _solve_chart(FA: FiberAlgebra, fiber: np.ndarray) -> np.ndarray:
    if FA.condition > SINGULAR_COND or not np.isfinite(FA.condition):
        raise SingularFrame(f"chart -> fiber map has condition number {FA.condition:.3e}")
    return np.linalg.solve(FA.fiber_matrix, fiber)


def tangent_to_fiber(FA: FiberAlgebra, chart_dir) -> TangentVector:
    chart_dir = np.asarray(chart_dir, dtype=complex)
    return TangentVector(chart_dir, FA.fiber_matrix @ chart_dir)


def from_fiber(FA: FiberAlgebra, fiber) -> TangentVector:
    fiber = np.asarray(fiber, dtype=complex)
    return TangentVector(_solve_chart(FA, fiber), fiber)


def multiply(FA: FiberAlgebra, X: TangentVector, Y: TangentVector) -> TangentVector:
    return from_fiber(FA, X.fiber * Y.fiber)


def unit_field(FA: FiberAlgebra) -> TangentVector:
    return from_fiber(FA, np.ones(FA.dimension, dtype=complex))


def metric(FA: FiberAlgebra, X: TangentVector, Y: TangentVector) -> complex:
    if not FA.rho.primitive:
        raise NotPrimitive("rho vanishes at a critical point")
    return complex(np.sum(X.fiber * Y.fiber * FA.weights))


def chart_metric(FA: FiberAlgebra) -> np.ndarray:
    """eta(d/dchart_i, d/dchart_j)."""
    H = FA.fiber_matrix
    return H.T @ (FA.weights[:, None] * H)


def chart_structure_constants(FA: FiberAlgebra) -> np.ndarray:
    """C[k, i, j]: chart components of d_i o d_j, by componentwise product."""
    H = FA.fiber_matrix
    N = FA.dimension
    prods = H[:, :, None] * H[:, None, :]
    return _solve_chart(FA, prods.reshape(N, N * N)).reshape(N, N, N)


def chart_structure_constants_via_section(FA: FiberAlgebra) -> np.ndarray:
    """Same constants, routed through rho: Phi(rho, d_i o d_j) = Phi(Phi(rho, d_i), d_j).

    Sections are represented by coefficients over the fiber form basis; the
    action of a tangent vector on the fiber is V^-1 diag(h) V in that basis.
    """
    V = FA.basis().values
    H = FA.fiber_matrix
    rho = FA.rho.values_at_critical
    N = FA.dimension
    A = np.linalg.solve(V, rho[:, None] * H)       # coefficients of Phi(rho, d_i)
    Vinv = np.linalg.inv(V)
    C = np.zeros((N, N, N), dtype=complex)
    for j in range(N):
        act = Vinv @ (H[:, j][:, None] * V)
        C[:, :, j] = np.linalg.solve(A, act @ A)
    return C
