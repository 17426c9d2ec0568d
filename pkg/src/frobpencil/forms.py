"""Finite-dimensional model of the fiber: 1-forms with bounded pole at p.

Genus 0: t^j dt for j = 0..n-2.
Genus 1: du, wp du, wp' du, ..., wp^(n-2) du and one form J with a jump
across the a-cycle, J = (zeta - eta1 u) omega - a wp^(n) du - b wp^(n-1) du,
where a, b remove the poles of order n+2 and n+1.

Each basis form has values at the zeros of omega (the z = 0 picture) and
invariants at z = infinity: the a-period, the jump coefficient lambda and the
polar x-expansion coefficients of x^-m dx for m = 2..n.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Optional

import numpy as np

from . import elliptic as ell
from .model import AbelianIntegral, CriticalData
from .numeric.series import AT_INFINITY, LaurentSeries, puiseux_inverse_root


@dataclass(frozen=True)
class PoleChart:
    """Local coordinate y at p (1/t or u) and the distinguished coordinate x = f^(-1/n)."""
    x_of_y: LaurentSeries
    y_of_x: LaurentSeries
    dy_dx: LaurentSeries
    order: int


def f_series_at_pole(m: AbelianIntegral, order: int) -> LaurentSeries:
    """Laurent expansion of f in the local coordinate at p."""
    if m.genus == 0:
        return LaurentSeries.from_polynomial(m.f, AT_INFINITY, order)
    L = m.lattice
    const = m.c0 - m.antiderivative(m.base_point())[0]
    s = ell.zeta_series(L, order) * (-m.beta)
    s = s + LaurentSeries(0, 0, [const, m.alpha], order)
    for j, g in enumerate(m.gamma, start=1):
        s = s + ell.wp_series(L, order, j - 1) * g
    return s


def pole_chart(m: AbelianIntegral, order: Optional[int] = None) -> PoleChart:
    n = m.n
    order = order or 2 * n + 6
    if m.genus == 0:
        x = puiseux_inverse_root(m.f, order)
        x = LaurentSeries(0, x.low, x.coeffs, x.order)
    else:
        f = f_series_at_pole(m, order)
        lead = f.coeff(-n)
        x = (f * (1.0 / lead)).power(-1.0 / n) * leading_root(m)
    y = x.revert()
    return PoleChart(x, y, y.differentiate(), order)


def leading_root(m: AbelianIntegral) -> complex:
    """Branch of lead^(-1/n) for the leading pole coefficient of f.

    The factor (-1)^n (n-1)! gets a fixed root and only gamma_{n-1} goes through
    the principal branch, so the cut sits on negative gamma_{n-1}.
    """
    if m.genus == 0:
        return 1.0 + 0j
    n = m.n
    fixed = complex((-1) ** n * factorial(n - 1)) ** (-1.0 / n)
    return fixed * complex(m.gamma[-1]) ** (-1.0 / n)


def to_x(chart: PoleChart, form_y: LaurentSeries) -> LaurentSeries:
    """Re-expand g(y) dy as h(x) dx."""
    g = LaurentSeries(0, form_y.low, form_y.coeffs, form_y.order)
    return g.compose(chart.y_of_x) * chart.dy_dx


def polar_coefficients(chart: PoleChart, form_y: LaurentSeries, mmax: int) -> np.ndarray:
    """Coefficients of x^-m dx for m = 1..mmax."""
    h = to_x(chart, form_y)
    return np.array([h.coeff(-mm) for mm in range(1, mmax + 1)], dtype=complex)


# --------------------------------------------------------------------------
# the basis

@dataclass(frozen=True)
class FormBasis:
    """Basis of the fiber model with its z = 0 values and z = infinity invariants."""
    genus: int
    n: int
    values: np.ndarray        # (N, N): values[s, j] = basis_j / standard form at q_s
    invariants: np.ndarray    # (N, N): invariants[r, j]
    invariant_names: tuple
    jump_pole_coeffs: tuple = ()   # (a, b) used in J at genus 1
    residues: Optional[np.ndarray] = None


def _genus0_basis(m: AbelianIntegral, crit: CriticalData, chart: PoleChart) -> FormBasis:
    n = m.n
    N = n - 1
    q = crit.points
    values = np.array([[qs ** j for j in range(N)] for qs in q], dtype=complex).reshape(N, N)
    inv = np.zeros((N, N), dtype=complex)
    res = np.zeros(N, dtype=complex)
    for j in range(N):
        # t^j dt = -y^(-j-2) dy
        form_y = LaurentSeries(0, -j - 2, [-1.0], chart.order)
        pc = polar_coefficients(chart, form_y, n)
        inv[:, j] = pc[1:n]
        res[j] = pc[0]
    names = tuple(f"polar{mm}" for mm in range(2, n + 1))
    return FormBasis(0, n, values, inv, names, (), res)


def jump_form_series(m: AbelianIntegral, order: int):
    """Laurent series of J/du at u = 0 and the pole-cancelling coefficients (a, b)."""
    L = m.lattice
    n = m.n
    zt = ell.zeta_series(L, order + n + 3) - LaurentSeries(0, 1, [L.eta1], order + n + 3)
    w = LaurentSeries(0, 0, [m.alpha], order + n + 3) + ell.wp_series(L, order + n + 3, 0) * m.beta
    for j, g in enumerate(m.gamma, start=1):
        w = w + ell.wp_series(L, order + n + 3, j) * g
    prod = zt * w
    top = ell.wp_series(L, order + 2, n)
    a = prod.coeff(-n - 2) / top.coeff(-n - 2)
    prod = prod - top * a
    nxt = ell.wp_series(L, order + 2, n - 1)
    b = prod.coeff(-n - 1) / nxt.coeff(-n - 1)
    prod = prod - nxt * b
    return prod.with_order(order), complex(a), complex(b)


def jump_form_values(m: AbelianIntegral, u, a: complex, b: complex):
    """J/du at points u (any lift; J jumps by -2 pi i omega under u -> u + tau)."""
    L = m.lattice
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    vals, zt = ell.wp_all(L, u, m.n)
    return (zt - L.eta1 * u) * m.omega_values(u) - a * vals[m.n] - b * vals[m.n - 1]


def jump_form_a_period(m: AbelianIntegral, a: complex, b: complex, tol: float = 1e-11) -> complex:
    cyc = ell.make_cycle(m.lattice, "a")
    return ell.contour_period(m.lattice, lambda u: jump_form_values(m, u, a, b), cyc, tol=tol)


def _genus1_basis(m: AbelianIntegral, crit: CriticalData, chart: PoleChart) -> FormBasis:
    L = m.lattice
    n = m.n
    N = n + 1
    q = crit.points
    vals, _ = ell.wp_all(L, q, n)
    values = np.zeros((N, N), dtype=complex)
    values[:, 0] = 1.0
    for j in range(n - 1):
        values[:, 1 + j] = vals[j]
    J_series, a, b = jump_form_series(m, chart.order)
    # omega(q_s) = 0 kills the (zeta - eta1 u) omega part
    values[:, n] = -a * vals[n] - b * vals[n - 1]

    inv = np.zeros((N, N), dtype=complex)
    res = np.zeros(N, dtype=complex)
    # a-periods: du -> 1, wp du -> -eta1, wp^(j) du -> 0, J numerically
    inv[0, 0] = 1.0
    inv[0, 1] = -L.eta1
    inv[0, n] = jump_form_a_period(m, a, b)
    inv[1, n] = -2j * np.pi
    forms = [LaurentSeries(0, 0, [1.0], chart.order)]
    forms += [ell.wp_series(L, chart.order, j) for j in range(n - 1)]
    forms.append(J_series)
    for j, fy in enumerate(forms):
        pc = polar_coefficients(chart, fy, n)
        inv[2:, j] = pc[1:n]
        res[j] = pc[0]
    names = ("a_period", "lambda") + tuple(f"polar{mm}" for mm in range(2, n + 1))
    return FormBasis(1, n, values, inv, names, (a, b), res)


def form_basis(m: AbelianIntegral, crit: CriticalData, chart: Optional[PoleChart] = None) -> FormBasis:
    chart = chart or pole_chart(m)
    if m.genus == 0:
        return _genus0_basis(m, crit, chart)
    return _genus1_basis(m, crit, chart)
