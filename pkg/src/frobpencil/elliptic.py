"""Weierstrass functions for the lattice Z + tau Z.

Primary evaluation uses nome expansions in q = exp(2 pi i tau) after reducing
the argument to the centred period cell; lattice sums are kept only as an
independent cross-check (``wp_lattice_sum``, ``invariants_lattice_sum``).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np
from scipy.integrate import quad_vec

from ._accel import select
from .errors import LowerHalfPlane, PoleAtLatticePoint, PoleOnPath, QuadratureFailure
from .numeric.series import LaurentSeries

PI = math.pi
#: largest derivative order prepared at lattice construction
MAX_DERIVATIVE = 12
#: cycle base offset keeping the integration paths away from lattice points
CYCLE_OFFSET = 0.17 + 0.13j


@dataclass(frozen=True)
class Lattice:
    tau: complex
    g2: complex
    g3: complex
    eta1: complex
    eta2: complex
    precision: float
    nterms: int
    q_index: np.ndarray = field(repr=False, compare=False)
    q_lambert: np.ndarray = field(repr=False, compare=False)
    # polynomials A_j, B_j with wp^(j) = A_j(wp) + wp' * B_j(wp), ascending coefficients
    deriv_polys: Tuple[Tuple[np.ndarray, np.ndarray], ...] = field(repr=False, compare=False)

    @property
    def discriminant(self) -> complex:
        return self.g2 ** 3 - 27 * self.g3 ** 2

    def legendre_defect(self) -> float:
        return abs(self.eta1 * self.tau - self.eta2 - 2j * PI)


def _derivative_polynomials(g2: complex, g3: complex, jmax: int):
    P = np.polynomial.polynomial
    six_p2 = np.array([-g2 / 2, 0, 6], dtype=complex)
    cubic = np.array([-g3, -g2, 0, 4], dtype=complex)
    A = np.array([0, 1], dtype=complex)
    B = np.array([0], dtype=complex)
    out = [(A, B)]
    for _ in range(jmax):
        A_next = P.polyadd(P.polymul(six_p2, B), P.polymul(cubic, P.polyder(B)))
        B_next = P.polyder(A) if len(A) > 1 else np.array([0], dtype=complex)
        A, B = A_next, B_next
        out.append((A.astype(complex), B.astype(complex)))
    return tuple(out)


def lattice_init(tau: complex, precision: float = 1e-16) -> Lattice:
    tau = complex(tau)
    if not tau.imag > 0:
        raise LowerHalfPlane(f"Im(tau) = {tau.imag} is not positive")
    q = cmath.exp(2j * PI * tau)
    aq = abs(q)
    # evaluation in the centred cell converges like |q|^(n/2); the margin covers polynomial factors
    nterms = int(math.ceil(2 * math.log(precision) / math.log(aq))) + 12
    nterms = max(8, min(nterms, 4000))
    n = np.arange(1, nterms + 1, dtype=float)
    qn = q ** n
    lam = qn / (1 - qn)
    e2 = 1 - 24 * np.sum(n * lam)
    e4 = 1 + 240 * np.sum(n ** 3 * lam)
    e6 = 1 - 504 * np.sum(n ** 5 * lam)
    g2 = complex(4 * PI ** 4 / 3 * e4)
    g3 = complex(8 * PI ** 6 / 27 * e6)
    eta1 = complex(PI ** 2 / 3 * e2)
    # eta2 = 2 zeta(tau/2), evaluated on the series directly (no reduction needed there)
    half = np.array([tau / 2])
    _, _, z_half = _eval_kernel(half, n, lam.astype(complex), eta1)
    eta2 = complex(2 * z_half[0])
    return Lattice(tau, g2, g3, eta1, eta2, precision, nterms, n, lam.astype(complex),
                   _derivative_polynomials(g2, g3, MAX_DERIVATIVE))


# --------------------------------------------------------------------------
# series kernels: wp, wp', and zeta for arguments in the centred cell

def _eval_loop(u, n, lam, eta1):
    m = u.shape[0]
    wp = np.empty(m, dtype=np.complex128)
    wp1 = np.empty(m, dtype=np.complex128)
    zt = np.empty(m, dtype=np.complex128)
    pi = np.pi
    for i in range(m):
        x = pi * u[i]
        s = np.sin(x)
        c = np.cos(x)
        acc_p = 0j
        acc_p1 = 0j
        acc_z = 0j
        for k in range(n.shape[0]):
            arg = 2.0 * n[k] * x
            sn = np.sin(arg)
            cs = np.cos(arg)
            acc_p += n[k] * lam[k] * cs
            acc_p1 += n[k] * n[k] * lam[k] * sn
            acc_z += lam[k] * sn
        wp[i] = -eta1 + pi * pi / (s * s) - 8.0 * pi * pi * acc_p
        wp1[i] = -2.0 * pi ** 3 * c / (s * s * s) + 16.0 * pi ** 3 * acc_p1
        zt[i] = eta1 * u[i] + pi * c / s + 4.0 * pi * acc_z
    return wp, wp1, zt


def _eval_numpy(u, n, lam, eta1):
    x = PI * u
    s = np.sin(x)
    c = np.cos(x)
    arg = 2.0 * np.outer(x, n)
    sn = np.sin(arg)
    cs = np.cos(arg)
    wp = -eta1 + PI ** 2 / (s * s) - 8.0 * PI ** 2 * (cs @ (n * lam))
    wp1 = -2.0 * PI ** 3 * c / (s * s * s) + 16.0 * PI ** 3 * (sn @ (n * n * lam))
    zt = eta1 * u + PI * c / s + 4.0 * PI * (sn @ lam)
    return wp, wp1, zt


_eval_kernel = select(_eval_loop, _eval_numpy)


def reduce_argument(L: Lattice, u):
    """Split ``u = r + k + m*tau`` with ``r`` in the centred cell; returns ``(r, k, m)``."""
    u = np.asarray(u, dtype=complex)
    m = np.round(u.imag / L.tau.imag)
    r = u - m * L.tau
    k = np.round(r.real)
    return r - k, k.astype(int), m.astype(int)


def standard_domain(L: Lattice, u):
    """Representative of ``u`` in {s + t*tau : 0 <= s, t < 1}; returns ``(r, k, m)``."""
    u = np.asarray(u, dtype=complex)
    m = np.floor(u.imag / L.tau.imag)
    r = u - m * L.tau
    k = np.floor(r.real)
    return r - k, k.astype(int), m.astype(int)


def _evaluate(L: Lattice, u):
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    r, k, m = reduce_argument(L, u)
    if np.any(np.abs(r) < 1e-12):
        raise PoleAtLatticePoint("argument coincides with a lattice point")
    wp0, wp1, zt = _eval_kernel(np.ascontiguousarray(r), L.q_index, L.q_lambert, L.eta1)
    return wp0, wp1, zt + k * L.eta1 + m * L.eta2


def _scalar_or_array(template, arr):
    return complex(arr[0]) if np.ndim(template) == 0 else arr.reshape(np.shape(template))


def wp(L: Lattice, u, j: int = 0):
    """``j``-th derivative of the Weierstrass function at ``u`` (scalar or array)."""
    if j < 0:
        raise ValueError("derivative order must be nonnegative")
    wp0, wp1, _ = _evaluate(L, u)
    out = wp_from_values(L, wp0, wp1, j)
    return _scalar_or_array(u, out)


def wp_from_values(L: Lattice, wp0, wp1, j: int):
    """``wp^(j)`` from already computed ``wp`` and ``wp'`` values."""
    if j == 0:
        return wp0
    if j == 1:
        return wp1
    A, B = _polys(L, j)
    P = np.polynomial.polynomial
    return P.polyval(wp0, A) + wp1 * P.polyval(wp0, B)


def _polys(L: Lattice, j: int):
    if j < len(L.deriv_polys):
        return L.deriv_polys[j]
    return _derivative_polynomials(L.g2, L.g3, j)[j]


def wp_all(L: Lattice, u, jmax: int):
    """Array of shape (jmax+1, len(u)) with wp^(j)(u) for j = 0..jmax, and zeta(u)."""
    wp0, wp1, zt = _evaluate(L, u)
    rows = [wp_from_values(L, wp0, wp1, j) for j in range(jmax + 1)]
    return np.array(rows), zt


def zeta_w(L: Lattice, u):
    """Weierstrass zeta, continued over the plane with its quasi-periods."""
    _, _, zt = _evaluate(L, u)
    return _scalar_or_array(u, zt)


# --------------------------------------------------------------------------
# local expansions at the origin

def wp_laurent_coefficients(L: Lattice, kmax: int) -> np.ndarray:
    """``c[k]`` with wp(u) = u^-2 + sum_{k>=2} c_k u^(2k-2); entries 0, 1 are zero."""
    c = np.zeros(max(kmax + 1, 4), dtype=complex)
    c[2] = L.g2 / 20
    c[3] = L.g3 / 28
    for k in range(4, kmax + 1):
        c[k] = 3.0 / ((2 * k + 1) * (k - 3)) * np.sum(c[2:k - 1] * c[k - 2:1:-1])
    return c[: kmax + 1]


def wp_series(L: Lattice, order: int, j: int = 0) -> LaurentSeries:
    """Laurent expansion of ``wp^(j)`` at u = 0, certified to ``O(u^order)``."""
    base_order = order + j
    kmax = base_order // 2 + 2
    c = wp_laurent_coefficients(L, kmax)
    coeffs = np.zeros(base_order + 2, dtype=complex)
    coeffs[0] = 1.0
    for k in range(2, kmax + 1):
        idx = 2 * k - 2 + 2
        if idx < len(coeffs):
            coeffs[idx] = c[k]
    s = LaurentSeries(0, -2, coeffs, base_order)
    for _ in range(j):
        s = s.differentiate()
    return s


def zeta_series(L: Lattice, order: int) -> LaurentSeries:
    """Laurent expansion of zeta at u = 0: 1/u - sum c_k u^(2k-1)/(2k-1)."""
    kmax = order // 2 + 2
    c = wp_laurent_coefficients(L, kmax)
    coeffs = np.zeros(order + 2, dtype=complex)
    coeffs[0] = 1.0
    for k in range(2, kmax + 1):
        idx = 2 * k - 1 + 1
        if idx < len(coeffs):
            coeffs[idx] = -c[k] / (2 * k - 1)
    return LaurentSeries(0, -1, coeffs, order)


# --------------------------------------------------------------------------
# cycles and periods

@dataclass(frozen=True)
class Cycle:
    kind: str
    start: complex
    end: complex
    samples: np.ndarray = field(repr=False, compare=False)

    def point(self, s):
        return self.start + np.asarray(s) * (self.end - self.start)


def make_cycle(L: Lattice, kind: str, offset: complex = CYCLE_OFFSET, nsamples: int = 65) -> Cycle:
    if kind == "a":
        end = offset + 1
    elif kind == "b":
        end = offset + L.tau
    else:
        raise ValueError(f"unknown cycle kind {kind!r}")
    samples = offset + np.linspace(0, 1, nsamples) * (end - offset)
    return Cycle(kind, complex(offset), complex(end), samples)


def path_clearance(L: Lattice, start: complex, end: complex) -> float:
    """Distance from the segment [start, end] to the nearest lattice point."""
    lo_m = int(math.floor(min(start.imag, end.imag) / L.tau.imag)) - 1
    hi_m = int(math.ceil(max(start.imag, end.imag) / L.tau.imag)) + 1
    best = math.inf
    d = end - start
    for m in range(lo_m, hi_m + 1):
        base = m * L.tau
        lo_k = int(math.floor(min(start.real, end.real) - base.real)) - 1
        hi_k = int(math.ceil(max(start.real, end.real) - base.real)) + 1
        for k in range(lo_k, hi_k + 1):
            w = base + k
            s = ((w - start) * d.conjugate()).real / abs(d) ** 2 if d != 0 else 0.0
            s = min(1.0, max(0.0, s))
            best = min(best, abs(start + s * d - w))
    return best


def segment_integral(form: Callable, start: complex, end: complex, tol: float = 1e-10):
    """Integral of ``form(u) du`` along a straight segment; returns ``(value, error)``."""
    d = end - start

    def integrand(s):
        v = np.asarray(form(start + s * d), dtype=complex) * d
        return np.array([v.real, v.imag]).reshape(-1) if v.ndim == 0 else np.concatenate([v.real, v.imag])

    val, err = quad_vec(integrand, 0.0, 1.0, epsabs=tol, epsrel=0.0, norm="max", limit=2000)
    half = len(val) // 2
    res = val[:half] + 1j * val[half:]
    return (complex(res[0]) if half == 1 else res), float(err)


def contour_period(L: Lattice, form: Callable, c: Cycle, tol: float = 1e-10, clearance: float = 1e-3):
    """Period of ``form(u) du`` over a cycle; ``form`` may return an array (vector form).

    ``tol`` is absolute for integrands of unit size and scales with the largest
    integrand value on the sampled path otherwise.
    """
    if path_clearance(L, c.start, c.end) < clearance:
        raise PoleOnPath("cycle passes too close to a lattice point")
    scale = max(1.0, float(np.max(np.abs(np.asarray(form(c.samples))))) * abs(c.end - c.start))
    val, err = segment_integral(form, c.start, c.end, tol * scale)
    if not np.isfinite(err) or err > 10 * tol * scale:
        raise QuadratureFailure(f"quadrature error estimate {err:.3e} above tolerance")
    return val


def solve_period_system(L: Lattice, P_a: complex, P_b: complex) -> Tuple[complex, complex]:
    """Coefficients of du and wp du with the prescribed periods."""
    A = np.array([[1.0, -L.eta1], [L.tau, -L.eta2]], dtype=complex)
    alpha, beta = np.linalg.solve(A, np.array([P_a, P_b], dtype=complex))
    return complex(alpha), complex(beta)


# --------------------------------------------------------------------------
# lattice-sum cross-checks (rows of the lattice summed in closed form)

def _csc2(z):
    # 1/sin^2(z) = -4 w / (1 - w)^2 with w = exp(2iz); csc^2 is even, so take Im z >= 0
    z = np.asarray(z, dtype=complex)
    w = np.exp(2j * np.where(z.imag >= 0, z, -z))
    return -4 * w / (1 - w) ** 2


def wp_lattice_sum(tau: complex, u, rows: int = 60):
    """wp from its lattice sum, each row k + m*tau summed exactly via csc^2."""
    u = np.asarray(u, dtype=complex)
    m = np.arange(-rows, rows + 1)
    m_nz = m[m != 0]
    g2_eis = PI ** 2 / 3 + np.sum(PI ** 2 * _csc2(PI * m_nz * tau))
    total = np.sum(PI ** 2 * _csc2(PI * (u[..., None] + m * tau)), axis=-1)
    return total - g2_eis


def invariants_lattice_sum(tau: complex, rows: int = 60) -> Tuple[complex, complex]:
    """(g2, g3) from Eisenstein lattice sums with rows summed in closed form."""
    m = np.arange(1, rows + 1)
    C = _csc2(PI * m * tau)
    g4 = 2 * PI ** 4 / 90 + 2 * np.sum(PI ** 4 * (C ** 2 - 2 * C / 3))
    g6 = 2 * PI ** 6 / 945 + 2 * np.sum(PI ** 6 * (C ** 3 - C ** 2 + 2 * C / 15))
    return complex(60 * g4), complex(140 * g6)


def invariants_direct_sum(tau: complex, bound: int = 60) -> Tuple[complex, complex]:
    """(g2, g3) from the plain two-index sum over |m|, |k| <= bound (slowly convergent)."""
    k = np.arange(-bound, bound + 1)
    w = (k[:, None] + k[None, :] * tau).ravel()
    w = w[w != 0]
    return complex(60 * np.sum(w ** -4.0)), complex(140 * np.sum(w ** -6.0))
