"""Flat coordinates, structure constants, the potential and the WDVV residual."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_simpson as _cumulative_simpson_real

from .engine import FiberAlgebra, chart_metric, fiber_algebra
from .errors import FlatnessFailure, NonIntegrableFrame, NotPrimitive, PotentialityFailure
from .forms import pole_chart
from .model import AbelianIntegral, critical_data, from_chart
from .numeric.polynomial import Polynomial
from .numeric.series import LaurentSeries

#: outer finite-difference step for derivatives of structure constants
OUTER_STEP = 1e-3


@dataclass(frozen=True)
class FlatChart:
    genus: int
    dimension: int
    base: np.ndarray             # chart point where the frame was evaluated
    coords: np.ndarray           # flat coordinates at the base (zeros if only a local frame)
    jacobian: np.ndarray         # d t_A / d chart_i
    frame: np.ndarray            # columns: d/dt_A in the chart basis
    eta: np.ndarray              # eta(d/dt_A, d/dt_B)
    closure_defect: float = 0.0
    grid: Optional[dict] = field(default=None, compare=False, repr=False)


@dataclass
class PotentialFit:
    chart: FlatChart
    samples: List[np.ndarray]            # flat coordinates of the samples
    c_samples: List[np.ndarray]          # c_ABC at the samples
    eta: np.ndarray
    coefficients: Dict[Tuple[int, ...], complex] = field(default_factory=dict)
    grid_values: Optional[dict] = None
    fit_residual: float = 0.0
    potentiality_defect: float = 0.0
    closure_defect: float = 0.0


def cumulative_simpson(y, x, axis=0, initial=0):
    """scipy's cumulative Simpson rule, applied to real and imaginary parts."""
    y = np.asarray(y)
    re = _cumulative_simpson_real(y.real, x=x, axis=axis, initial=initial)
    if not np.iscomplexobj(y):
        return re
    return re + 1j * _cumulative_simpson_real(y.imag, x=x, axis=axis, initial=initial)


# --------------------------------------------------------------------------
# genus 0: exact flat coordinates from the reversion t(x)

def _poly_of_series(p: Polynomial, s: LaurentSeries) -> LaurentSeries:
    c = p.coefficients
    acc = LaurentSeries(s.point, 0, [c[-1]], s.order - s.low * (len(c) - 1) + 10 ** 3)
    for a in c[-2::-1]:
        acc = acc * s + a
    return acc


def genus0_flat_data(m: AbelianIntegral, order: Optional[int] = None):
    """Flat coordinates t_A = -n b_A, where t(x) = 1/x + sum_A b_A x^A, and their Jacobian."""
    n = m.n
    N = n - 1
    order = order or n + 6
    pc = pole_chart(m, order)
    t_of_x = pc.y_of_x.reciprocal()
    coords = np.array([-n * t_of_x.coeff(A) for A in range(1, n)], dtype=complex)
    # d t(x)/d a_i at fixed x equals -t^i / f'(t)
    inv_df = _poly_of_series(m.f.deriv(), t_of_x).reciprocal()
    jac = np.zeros((N, N), dtype=complex)
    t_pow = LaurentSeries(0, 0, [1.0], 10 ** 3)
    for i in range(N):
        d = t_pow * inv_df * (-1.0)
        jac[:, i] = [-n * d.coeff(A) for A in range(1, n)]
        t_pow = t_pow * t_of_x
    return coords, jac


def _frame_from_jacobian(jac):
    return np.linalg.inv(jac)


def antidiagonal_reference(n: int) -> np.ndarray:
    N = n - 1
    ref = np.zeros((N, N), dtype=complex)
    for A in range(N):
        ref[A, N - 1 - A] = 1.0 / n
    return ref


def flat_coordinates_genus0(m: AbelianIntegral, rho=None, FA: Optional[FiberAlgebra] = None,
                            tol: float = 1e-8) -> FlatChart:
    if m.genus != 0:
        raise ValueError("exact flat coordinates are available at genus 0 only")
    FA = FA or fiber_algebra(m, 2, rho=rho)
    if FA.rho.k != 2:
        raise ValueError("the series construction uses rho_2")
    if not FA.rho.primitive:
        raise NotPrimitive("rho_2 is not primitive here")
    coords, jac = genus0_flat_data(m)
    frame = _frame_from_jacobian(jac)
    eta = frame.T @ chart_metric(FA) @ frame
    ref = antidiagonal_reference(m.n)
    defect = float(np.max(np.abs(eta - ref))) if eta.size else 0.0
    if defect > tol:
        raise FlatnessFailure(f"metric in series coordinates deviates by {defect:.3e}")
    return FlatChart(0, m.dimension, m.chart(), coords, jac, frame, eta)


# --------------------------------------------------------------------------
# the invariant Jacobian: flat coordinates differentiate to it at any genus

def invariant_jacobian(FA: FiberAlgebra) -> np.ndarray:
    """Theta[r, i]: invariant r of the section Phi(rho, d/dchart_i)."""
    B = FA.basis()
    coeffs = np.linalg.solve(B.values, FA.rho.values_at_critical[:, None] * FA.fiber_matrix)
    return B.invariants @ coeffs


def local_flat_chart(FA: FiberAlgebra) -> FlatChart:
    jac = invariant_jacobian(FA)
    frame = np.linalg.inv(jac)
    eta = frame.T @ chart_metric(FA) @ frame
    return FlatChart(FA.m.genus, FA.dimension, FA.m.chart(), np.zeros(FA.dimension, complex),
                     jac, frame, eta)


@dataclass(frozen=True)
class GridSpec:
    axes: Tuple[int, int] = (0, 1)
    half_width: float = 0.02
    points: int = 5


def flat_frame_numeric(m: AbelianIntegral, k: int = 2, region: Optional[GridSpec] = None,
                       closure_tol: float = 1e-5) -> FlatChart:
    """Flat frame at m plus flat coordinates integrated over a 2-d chart grid around m."""
    region = region or GridSpec()
    crit = critical_data(m)
    FA = fiber_algebra(m, k, crit)
    if not FA.rho.primitive:
        raise NotPrimitive("rho is not primitive at the base point")
    base_chart = local_flat_chart(FA)
    ax0, ax1 = region.axes
    K = region.points
    offsets = np.linspace(-region.half_width, region.half_width, K)
    base = m.chart()
    N = m.dimension
    theta = np.zeros((K, K, N, N), dtype=complex)
    eta = np.zeros((K, K, N, N), dtype=complex)
    for i, si in enumerate(offsets):
        for j, sj in enumerate(offsets):
            pt = base.copy()
            pt[ax0] += si
            pt[ax1] += sj
            mm = from_chart(m, pt)
            c = critical_data(mm, guesses=crit.points)
            fa = fiber_algebra(mm, k, c)
            if not fa.rho.primitive:
                raise NotPrimitive("rho is not primitive on the grid")
            lc = local_flat_chart(fa)
            theta[i, j] = lc.jacobian
            eta[i, j] = lc.eta
    mid = K // 2
    d0 = theta[:, :, :, ax0]
    d1 = theta[:, :, :, ax1]
    # path 1: along axis 0 through the base row, then along axis 1
    row = cumulative_simpson(d0[:, mid], x=offsets, axis=0, initial=0)
    row = row - row[mid]
    col = cumulative_simpson(d1, x=offsets, axis=1, initial=0)
    col = col - col[:, mid:mid + 1]
    path1 = row[:, None, :] + col
    # path 2: along axis 1 through the base column, then along axis 0
    c2 = cumulative_simpson(d1[mid], x=offsets, axis=0, initial=0)
    c2 = c2 - c2[mid]
    r2 = cumulative_simpson(d0, x=offsets, axis=0, initial=0)
    r2 = r2 - r2[mid:mid + 1]
    path2 = c2[None, :, :] + r2
    defect = float(np.max(np.abs(path1 - path2)))
    if defect > closure_tol:
        raise NonIntegrableFrame(defect)
    grid = {"offsets": offsets, "axes": (ax0, ax1), "coords": 0.5 * (path1 + path2), "eta": eta,
            "jacobian": theta}
    return FlatChart(m.genus, N, base, np.zeros(N, complex), base_chart.jacobian, base_chart.frame,
                     base_chart.eta, defect, grid)


# --------------------------------------------------------------------------
# structure constants, potentiality, potential, WDVV

def structure_constants(chart: FlatChart, FA: FiberAlgebra) -> np.ndarray:
    """c[A, B, C] = eta(d_A o d_B, d_C) = sum_s h_A h_B h_C rho^2 / omega'."""
    h = FA.fiber_matrix @ chart.frame
    return np.einsum("sa,sb,sc,s->abc", h, h, h, FA.weights)


def symmetry_defect(c: np.ndarray) -> float:
    perms = [(0, 2, 1), (1, 0, 2), (2, 1, 0)]
    return max(float(np.max(np.abs(c - c.transpose(p)))) for p in perms)


def flat_data_at(m: AbelianIntegral, k: int = 2, guesses=None, exact_genus0: bool = True):
    """(FiberAlgebra, FlatChart, c_ABC) at a chart point."""
    crit = critical_data(m, guesses=guesses)
    FA = fiber_algebra(m, k, crit)
    if m.genus == 0 and exact_genus0 and k == 2:
        chart = flat_coordinates_genus0(m, FA=FA)
    else:
        chart = local_flat_chart(FA)
    return FA, chart, structure_constants(chart, FA)


def c_derivatives(m: AbelianIntegral, k: int = 2, step: float = OUTER_STEP,
                  exact_genus0: bool = True) -> np.ndarray:
    """dc[D, A, B, C] = d_D c_ABC along the flat frame, by Richardson-extrapolated differences."""
    FA, chart, _ = flat_data_at(m, k, exact_genus0=exact_genus0)
    base = m.chart()
    N = m.dimension
    q = FA.critical.points

    def c_at(pt):
        return flat_data_at(from_chart(m, pt), k, guesses=q, exact_genus0=exact_genus0)[2]

    dchart = np.zeros((N, N, N, N), dtype=complex)
    for i in range(N):
        h = step * max(1.0, abs(base[i]))
        e = np.zeros(N, dtype=complex)
        e[i] = 1.0
        d1 = (c_at(base + h * e) - c_at(base - h * e)) / (2 * h)
        d2 = (c_at(base + h / 2 * e) - c_at(base - h / 2 * e)) / h
        dchart[i] = (4 * d2 - d1) / 3
    return np.einsum("id,iabc->dabc", chart.frame, dchart)


def potentiality_defect(dc: np.ndarray) -> float:
    """Largest asymmetry of d_D c_ABC under exchanging D with A."""
    return float(np.max(np.abs(dc - dc.transpose(1, 0, 2, 3))))


def wdvv_tensor_residual(c: np.ndarray, eta: np.ndarray) -> float:
    """max |c_AB^E c_ECD - c_AC^E c_EBD| with indices raised by eta^-1."""
    if c.shape[0] <= 1:
        return 0.0
    raised = np.einsum("abf,fe->abe", c, np.linalg.inv(eta))
    lhs = np.einsum("abe,ecd->abcd", raised, c)
    rhs = np.einsum("ace,ebd->abcd", raised, c)
    return float(np.max(np.abs(lhs - rhs)))


def wdvv_residual(fit: PotentialFit) -> float:
    if not fit.c_samples:
        return 0.0
    return max(wdvv_tensor_residual(c, fit.eta) for c in fit.c_samples)


def _monomials(N: int, dmin: int, dmax: int):
    out = []
    for d in range(dmin, dmax + 1):
        for combo in itertools.combinations_with_replacement(range(N), d):
            e = [0] * N
            for v in combo:
                e[v] += 1
            out.append(tuple(e))
    return out


def _third_derivative(expo, A, B, C, t):
    e = list(expo)
    coef = 1.0
    for v in (A, B, C):
        if e[v] == 0:
            return 0.0
        coef *= e[v]
        e[v] -= 1
    return coef * np.prod([t[i] ** e[i] for i in range(len(e))])


def fit_potential(chart: FlatChart, samples, c_samples, eta, max_degree: int) -> PotentialFit:
    """Least-squares polynomial F with third derivatives matching c at the samples."""
    N = chart.dimension
    monos = _monomials(N, 3, max_degree)
    triples = list(itertools.combinations_with_replacement(range(N), 3))
    rows, rhs = [], []
    for t, c in zip(samples, c_samples):
        for (A, B, C) in triples:
            rows.append([_third_derivative(mo, A, B, C, t) for mo in monos])
            rhs.append(c[A, B, C])
    M = np.array(rows, dtype=complex)
    y = np.array(rhs, dtype=complex)
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    coef[np.abs(coef) < 1e-13] = 0
    resid = float(np.max(np.abs(M @ coef - y))) if len(y) else 0.0
    coefficients = {mo: complex(cf) for mo, cf in zip(monos, coef) if cf != 0}
    return PotentialFit(chart, list(samples), list(c_samples), eta, coefficients, None, resid)


def potential(m: AbelianIntegral, family: Sequence[np.ndarray], k: int = 2,
              potentiality_tol: float = 1e-5, max_degree: Optional[int] = None) -> PotentialFit:
    """Fit F on the sample family (genus 0, k = 2); elsewhere use ``potential_by_paths``."""
    if m.genus != 0 or k != 2:
        raise ValueError("exact flat coordinates need genus 0 and k = 2; use potential_by_paths")
    dc = c_derivatives(m, k)
    pdef = potentiality_defect(dc)
    if pdef > potentiality_tol:
        raise PotentialityFailure(f"d_D c_ABC asymmetry {pdef:.3e}")
    _, chart, _ = flat_data_at(m, k)
    samples, cs = [], []
    for pt in family:
        _, ch, c = flat_data_at(from_chart(m, pt), k)
        samples.append(ch.coords)
        cs.append(c)
    fit = fit_potential(chart, samples, cs, chart.eta, max_degree or m.n + 2)
    fit.potentiality_defect = pdef
    return fit


def evaluate_potential(fit: PotentialFit, t) -> complex:
    return complex(sum(cf * np.prod([t[i] ** e for i, e in enumerate(mo)])
                       for mo, cf in fit.coefficients.items()))


def _path_integrals(m: AbelianIntegral, k: int, points: np.ndarray, guesses, initial=None):
    """Integrate t, F_AB, F_A, F along a straight chart segment (uniform parameter).

    ``initial`` carries (t, F_AB, F_A, F) from the end of a previous segment.
    """
    N = m.dimension
    s = np.linspace(0.0, 1.0, len(points))
    velocity = points[-1] - points[0]
    dt = np.zeros((len(points), N), dtype=complex)
    cs = np.zeros((len(points), N, N, N), dtype=complex)
    for idx, pt in enumerate(points):
        _, ch, c = flat_data_at(from_chart(m, pt), k, guesses=guesses, exact_genus0=False)
        dt[idx] = ch.jacobian @ velocity
        cs[idx] = c
    if initial is None:
        initial = (np.zeros(N, complex), np.zeros((N, N), complex), np.zeros(N, complex), 0j)
    t0, G2, G1, F0 = initial

    def cum(y):
        return cumulative_simpson(y, x=s, axis=0, initial=0)

    t = t0 + cum(dt)
    second = G2 + cum(np.einsum("pabc,pc->pab", cs, dt))
    first = G1 + cum(np.einsum("pab,pb->pa", second, dt))
    F = F0 + cum(np.einsum("pa,pa->p", first, dt))
    return t[-1], second[-1], first[-1], F[-1]


def potential_by_paths(m: AbelianIntegral, k: int = 2, axes: Tuple[int, int] = (0, 1),
                       width: float = 0.01, nodes: int = 9, potentiality_tol: float = 1e-4) -> PotentialFit:
    """F, dF and d^2F at the far corner of a chart square by nested path integration.

    Both L-shaped paths to the corner are integrated; their disagreement is the
    closure defect. F, dF and d^2F vanish at the base point.
    """
    dc = c_derivatives(m, k, exact_genus0=False)
    pdef = potentiality_defect(dc)
    if pdef > potentiality_tol:
        raise PotentialityFailure(f"d_D c_ABC asymmetry {pdef:.3e}")
    FA, chart, c0 = flat_data_at(m, k, exact_genus0=False)
    q = FA.critical.points
    base = m.chart()
    e0 = np.zeros_like(base)
    e1 = np.zeros_like(base)
    e0[axes[0]] = width
    e1[axes[1]] = width
    s = np.linspace(0, 1, nodes)[:, None]
    results = []
    for first, second in ((e0, e1), (e1, e0)):
        mid = _path_integrals(m, k, base + s * first, q)
        results.append(_path_integrals(m, k, base + first + s * second, q, initial=mid))
    (tA, G2A, G1A, FA_), (tB, G2B, G1B, FB) = results
    defect = float(max(np.max(np.abs(tA - tB)), np.max(np.abs(G2A - G2B)),
                       np.max(np.abs(G1A - G1B)), abs(FA_ - FB)))
    grid = {"corner_coords": 0.5 * (tA + tB), "F": 0.5 * (FA_ + FB), "dF": 0.5 * (G1A + G1B),
            "d2F": 0.5 * (G2A + G2B)}
    fit = PotentialFit(chart, [np.zeros(m.dimension, complex)], [c0], chart.eta, {}, grid)
    fit.potentiality_defect = pdef
    fit.closure_defect = defect
    return fit
