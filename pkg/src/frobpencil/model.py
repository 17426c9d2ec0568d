"""Moduli points (curve, pole, abelian integral) and their critical data."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import elliptic as ell
from .errors import (InvalidModel, LeftSemisimpleLocus, NonSemisimplePoint, QuadratureFailure,
                     RootCountMismatch)
from .numeric.polynomial import CLUSTER_TOL, Polynomial, poly_roots


@dataclass(frozen=True)
class AbelianIntegral:
    genus: int
    n: int
    f: Optional[Polynomial] = None
    lattice: Optional[ell.Lattice] = None
    alpha: complex = 0j
    beta: complex = 0j
    gamma: Tuple[complex, ...] = ()
    c0: complex = 0j
    P_a: complex = 0j
    P_b: complex = 0j
    delta: str = ""

    @property
    def dimension(self) -> int:
        return 2 * self.genus + self.n - 1

    @property
    def tau(self) -> complex:
        return self.lattice.tau

    def chart(self) -> np.ndarray:
        """Moduli chart coordinates: (a_0..a_{n-2}) at genus 0, (tau, gamma.., c0) at genus 1."""
        if self.genus == 0:
            return np.array(self.f.coefficients[: self.n - 1], dtype=complex).copy() \
                if self.n > 1 else np.zeros(0, dtype=complex)
        return np.array([self.lattice.tau, *self.gamma, self.c0], dtype=complex)

    def chart_names(self):
        if self.genus == 0:
            return [f"a{i}" for i in range(self.n - 1)]
        return ["tau"] + [f"gamma{j}" for j in range(1, self.n)] + ["c0"]

    # genus-1 evaluation -----------------------------------------------------
    def omega_coefficients(self) -> np.ndarray:
        """Coefficients of omega over (du, wp du, wp' du, ..., wp^(n-1) du)."""
        return np.array([self.alpha, self.beta, *self.gamma], dtype=complex)

    def base_point(self) -> complex:
        return (1 + self.lattice.tau) / 2

    def antiderivative(self, u):
        """alpha u - beta zeta(u) + sum_j gamma_j wp^(j-1)(u), continued over the plane."""
        u = np.atleast_1d(np.asarray(u, dtype=complex))
        vals, zt = ell.wp_all(self.lattice, u, max(self.n - 2, 0))
        out = self.alpha * u - self.beta * zt
        for j, g in enumerate(self.gamma, start=1):
            out = out + g * vals[j - 1]
        return out

    def f_values(self, u):
        """Values of f on the plane (the lift is the argument itself)."""
        if self.genus == 0:
            return self.f(np.asarray(u, dtype=complex))
        F0 = self.antiderivative(self.base_point())[0]
        return self.c0 + self.antiderivative(u) - F0

    def omega_values(self, u, derivative: int = 0):
        """omega/du (or its derivatives in u) at the given points."""
        u = np.atleast_1d(np.asarray(u, dtype=complex))
        if self.genus == 0:
            return self.f.deriv(1 + derivative)(u)
        coeffs = self.omega_coefficients()
        vals, _ = ell.wp_all(self.lattice, u, self.n - 1 + derivative)
        out = np.zeros_like(u) if derivative else np.full_like(u, coeffs[0])
        for j in range(1, len(coeffs)):
            # coefficient j multiplies wp^(j-1)
            out = out + coeffs[j] * vals[j - 1 + derivative]
        return out


def _check_genus0(f: Polynomial, n: int):
    if f.degree != n or not f.is_monic():
        raise InvalidModel("genus-0 integral must be monic of degree n")
    if n >= 2 and f.coefficients[n - 1] != 0:
        raise InvalidModel("genus-0 integral must have vanishing t^(n-1) coefficient")


def genus0(coeffs: Sequence[complex], n: Optional[int] = None) -> AbelianIntegral:
    """f = t^n + sum_{i<=n-2} a_i t^i from ascending coefficients (a_0, ..., a_{n-2})."""
    coeffs = list(coeffs)
    if n is None:
        n = len(coeffs) + 1
    if n < 1 or len(coeffs) != max(n - 1, 0):
        raise InvalidModel(f"expected {max(n - 1, 0)} coefficients for n = {n}, got {len(coeffs)}")
    full = np.zeros(n + 1, dtype=complex)
    full[: n - 1] = coeffs
    full[n] = 1.0
    f = Polynomial(full)
    _check_genus0(f, n)
    return AbelianIntegral(genus=0, n=n, f=f)


def solve_leaf_coefficients(L: ell.Lattice, P_a: complex, P_b: complex) -> Tuple[complex, complex]:
    return ell.solve_period_system(L, P_a, P_b)


def genus1(tau: complex, gamma: Sequence[complex], c0: complex = 0j, P_a: complex = 0j,
           P_b: complex = 0j, lattice: Optional[ell.Lattice] = None) -> AbelianIntegral:
    gamma = tuple(complex(g) for g in gamma)
    n = len(gamma) + 1
    if n < 2:
        raise InvalidModel("genus-1 integrals need n >= 2")
    if gamma[-1] == 0:
        raise InvalidModel("leading coefficient gamma_{n-1} must be nonzero")
    L = lattice if lattice is not None and lattice.tau == complex(tau) else ell.lattice_init(tau)
    alpha, beta = solve_leaf_coefficients(L, P_a, P_b)
    return AbelianIntegral(genus=1, n=n, lattice=L, alpha=alpha, beta=beta, gamma=gamma,
                           c0=complex(c0), P_a=complex(P_a), P_b=complex(P_b), delta="[0,1]")


def from_chart(template: AbelianIntegral, chart: Sequence[complex]) -> AbelianIntegral:
    chart = np.asarray(chart, dtype=complex)
    if len(chart) != template.dimension:
        raise InvalidModel("chart vector has the wrong length")
    if template.genus == 0:
        return genus0(chart, template.n)
    return genus1(chart[0], chart[1:-1], chart[-1], template.P_a, template.P_b,
                  lattice=template.lattice)


def differential(m: AbelianIntegral):
    """omega = df as a callable returning omega/du (omega/dt at genus 0)."""
    if m.genus == 0:
        return m.f.deriv()
    return lambda u: m.omega_values(u)


# --------------------------------------------------------------------------
# critical data

@dataclass(frozen=True)
class CriticalData:
    points: np.ndarray
    values: np.ndarray
    omega_deriv: np.ndarray
    # lattice shift (k, m) from the located zero to the reported lift
    branch: Tuple[Tuple[int, int], ...] = ()
    basepoint: complex = 0j

    @property
    def count(self) -> int:
        return len(self.points)


def _assign(points: np.ndarray, guesses: np.ndarray) -> np.ndarray:
    cost = np.abs(points[:, None] - guesses[None, :])
    rows, cols = linear_sum_assignment(cost)
    order = np.empty(len(guesses), dtype=int)
    order[cols] = rows
    return points[order]


def _genus0_critical(m: AbelianIntegral, tol: float, guesses) -> CriticalData:
    df = m.f.deriv()
    expected = m.n - 1
    if expected == 0:
        return CriticalData(np.zeros(0, complex), np.zeros(0, complex), np.zeros(0, complex))
    roots = poly_roots(df, tol=tol)
    if any(mult > 1 for _, mult in roots):
        raise NonSemisimplePoint("omega has a multiple zero")
    q = np.array([r for r, _ in roots], dtype=complex)
    if len(q) != expected:
        raise RootCountMismatch(f"found {len(q)} zeros, expected {expected}")
    if guesses is not None:
        q = _assign(q, np.asarray(guesses, dtype=complex))
    return CriticalData(q, m.f(q), m.f.deriv(2)(q), tuple((0, 0) for _ in q))


def _newton(m: AbelianIntegral, u: np.ndarray, iters: int = 30):
    u = np.array(u, dtype=complex)
    for _ in range(iters):
        w = m.omega_values(u)
        dw = m.omega_values(u, 1)
        step = w / dw
        u = u - step
        if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(u))):
            break
    return u


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _edge_moments(m: AbelianIntegral, a, b, centre, radius, kmax, panels):
    # composite Gauss-Legendre on [a, b], all nodes in one vectorised evaluation
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    s = ((edges[:-1] + half)[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    u = a + s * (b - a)
    ratio = m.omega_values(u, 1) / m.omega_values(u)
    z = (u - centre) / radius
    return (w * ratio * (b - a)) @ (z[:, None] ** np.arange(kmax + 1)[None, :])


def _cell_moments(m: AbelianIntegral, corners, centre, radius, kmax, tol=1e-9, max_panels=1024):
    """Power-sum moments of the zeros minus poles inside a cell (argument principle).

    Panels double until two resolutions agree; the moments only seed Newton polishing.
    """
    total = np.zeros(kmax + 1, dtype=complex)
    for a, b in zip(corners, corners[1:] + corners[:1]):
        panels = 8
        prev = _edge_moments(m, a, b, centre, radius, kmax, panels)
        while True:
            panels *= 2
            cur = _edge_moments(m, a, b, centre, radius, kmax, panels)
            if np.max(np.abs(cur - prev)) <= tol * max(1.0, float(np.max(np.abs(cur)))):
                break
            if panels >= max_panels:
                raise QuadratureFailure("cell moments did not converge")
            prev = cur
        total += cur
    return total / (2j * np.pi)


def _power_sums_to_poly(p: np.ndarray, count: int) -> Polynomial:
    # Newton identities: e_k = (1/k) sum_{i=1}^k (-1)^(i-1) e_{k-i} p_i
    e = np.zeros(count + 1, dtype=complex)
    e[0] = 1.0
    for k in range(1, count + 1):
        e[k] = sum((-1) ** (i - 1) * e[k - i] * p[i] for i in range(1, k + 1)) / k
    # monic polynomial z^count - e1 z^(count-1) + ...
    coeffs = np.array([(-1) ** (count - j) * e[count - j] for j in range(count + 1)], dtype=complex)
    return Polynomial(coeffs)


def _locate_zeros(m: AbelianIntegral, shift: complex, cells: int = 3):
    L = m.lattice
    tau = L.tau
    origin = -(1 + tau) / 2 + shift
    poles = m.n + 1
    found = []
    for i in range(cells):
        for j in range(cells):
            c00 = origin + i / cells + j * tau / cells
            corners = [c00, c00 + 1 / cells, c00 + (1 + tau) / cells, c00 + tau / cells]
            centre = c00 + (1 + tau) / (2 * cells)
            radius = abs(1 + tau) / (2 * cells)
            mom = _cell_moments(m, corners, centre, radius, poles + 1)
            # the pole at 0 sits in exactly one cell
            inside = _inside_parallelogram(0j, c00, 1 / cells, tau / cells)
            pole_count = poles if inside else 0
            if inside:
                mom = mom + pole_count * ((0 - centre) / radius) ** np.arange(len(mom))
            zeros = mom[0].real
            if abs(mom[0].imag) > 1e-3 or abs(zeros - round(zeros)) > 1e-3:
                raise QuadratureFailure("argument-principle count is not an integer")
            count = int(round(zeros))
            if count == 0:
                continue
            poly = _power_sums_to_poly(mom, count)
            for r, mult in poly_roots(poly, cluster_tol=CLUSTER_TOL):
                if mult > 1:
                    raise NonSemisimplePoint("omega has a multiple zero")
                found.append(centre + radius * r)
    return np.array(found, dtype=complex)


def _inside_parallelogram(z, corner, e1, e2) -> bool:
    M = np.array([[e1.real, e2.real], [e1.imag, e2.imag]])
    s, t = np.linalg.solve(M, [(z - corner).real, (z - corner).imag])
    return 0 < s < 1 and 0 < t < 1


def _distinct_mod_lattice(L: ell.Lattice, q: np.ndarray, threshold: float) -> bool:
    red, _, _ = ell.reduce_argument(L, q[:, None] - q[None, :])
    d = np.abs(red)
    np.fill_diagonal(d, np.inf)
    return bool(np.all(d > threshold))


def _genus1_critical(m: AbelianIntegral, tol: float, guesses) -> CriticalData:
    L = m.lattice
    expected = m.n + 1
    scale = max(1.0, abs(L.tau))
    threshold = CLUSTER_TOL * scale
    q = None
    if guesses is not None:
        cand = _newton(m, np.asarray(guesses, dtype=complex))
        ok = np.all(np.abs(m.omega_values(cand)) <= 1e-9 * np.maximum(1.0, np.abs(m.omega_values(cand, 1)))) \
            and np.all(np.abs(cand - guesses) < 0.25) and _distinct_mod_lattice(L, cand, threshold)
        if ok:
            q = cand
            branch = tuple((0, 0) for _ in q)
    if q is None:
        last_error = None
        for shift in (0.0123 + 0.0071j, -0.0217 + 0.0133j, 0.0311 - 0.0193j, -0.0401 - 0.0277j):
            try:
                raw = _locate_zeros(m, shift)
                break
            except QuadratureFailure as exc:
                last_error = exc
        else:
            raise last_error
        raw = _newton(m, raw)
        if len(raw) != expected:
            raise RootCountMismatch(f"found {len(raw)} zeros, expected {expected}")
        if not _distinct_mod_lattice(L, raw, threshold):
            raise NonSemisimplePoint("omega has a multiple zero")
        q, k, mm = ell.standard_domain(L, raw)
        branch = tuple(zip((-k).tolist(), (-mm).tolist()))
        if guesses is not None:
            # keep the ordering and lifts of the guesses
            g = np.asarray(guesses, dtype=complex)
            diff, _, _ = ell.reduce_argument(L, g[None, :] - q[:, None])
            cost = np.abs(diff)
            rows, cols = linear_sum_assignment(cost)
            lifted = np.empty(len(g), dtype=complex)
            lifted[cols] = g[cols] - diff[rows, cols]
            q = lifted
            branch = tuple((0, 0) for _ in q)
        else:
            order = np.lexsort((np.round(q.imag, 9), np.round(q.real, 9)))
            q = q[order]
            branch = tuple(branch[i] for i in order)
    if np.any(np.abs(m.omega_values(q, 1)) < 1e-10):
        raise NonSemisimplePoint("omega' vanishes at a zero of omega")
    return CriticalData(q, m.f_values(q), m.omega_values(q, 1), branch, m.base_point())


def critical_data(m: AbelianIntegral, tol: float = 1e-13, guesses=None) -> CriticalData:
    """Zeros of omega and critical values.

    ``guesses`` (the critical points of a nearby point) switches to tracking
    mode: zeros are matched to the guesses, keeping their order and lifts.
    """
    if m.genus == 0:
        return _genus0_critical(m, tol, guesses)
    return _genus1_critical(m, tol, guesses)


def deform(m: AbelianIntegral, direction: Sequence[complex], eps: complex,
           check: bool = True) -> AbelianIntegral:
    """Move along the chart; at genus 1 the period system is re-solved on the new lattice."""
    direction = np.asarray(direction, dtype=complex)
    if eps == 0 or not np.any(direction):
        return m
    out = from_chart(m, m.chart() + eps * direction)
    if check:
        try:
            critical_data(out)
        except NonSemisimplePoint as exc:
            raise LeftSemisimpleLocus(str(exc)) from exc
    return out
