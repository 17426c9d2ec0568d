"""Independent oracles and the Frobenius axiom battery."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import elliptic as ell
from .engine import (TangentVector, chart_metric, chart_structure_constants_via_section, fiber_algebra,
                     from_fiber, metric, multiply, tangent_to_fiber, unit_field)
from .errors import FitFailure, FrobPencilError, SolveFailure
from .flat import (OUTER_STEP, antidiagonal_reference, c_derivatives, flat_data_at,
                   local_flat_chart, potentiality_defect, symmetry_defect, wdvv_tensor_residual)
from .forms import form_basis, jump_form_values
from .model import AbelianIntegral, critical_data, from_chart
from .numeric.polynomial import Polynomial
from .numeric.series import AT_INFINITY, LaurentSeries

#: pencil-parameter samples for the 1/z fit
Z_SAMPLES = (1.0, 2.0, 4.0, 8.0, -3.0, 1j)

THRESHOLDS = {
    0: {"default": 1e-9, "flatness": 1e-8, "potentiality": 1e-9, "wdvv": 1e-9},
    1: {"default": 1e-5, "flatness": 1e-5, "potentiality": 1e-4, "wdvv": 1e-5, "curvature": 1e-4,
        "periods": 1e-8, "intersection": 1e-6},
}


@dataclass
class CheckRecord:
    name: str
    residual: float
    threshold: float
    passed: bool
    note: str = ""


def check(name: str, residual: float, threshold: float, note: str = "", larger_is_better: bool = False):
    residual = float(residual)
    ok = residual >= threshold if larger_is_better else residual <= threshold
    return CheckRecord(name, residual, threshold, bool(ok and np.isfinite(residual)), note)


def _rel(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale


# --------------------------------------------------------------------------
# Cech cocycles at genus 0 (z = 0 model)

@dataclass(frozen=True)
class CechCocycle:
    """(alpha_outer, alpha_disk, s) with alpha_outer - alpha_disk = omega s near infinity.

    Forms are stored as coefficients of dt: alpha_outer as a polynomial in t,
    alpha_disk and s as Laurent series in y = 1/t.
    """
    z: complex
    alpha_outer: Polynomial
    alpha_disk: LaurentSeries
    s_overlap: LaurentSeries

    def relation_defect(self, m: AbelianIntegral) -> float:
        order = self.alpha_disk.order
        outer = LaurentSeries.from_polynomial(self.alpha_outer, AT_INFINITY, order)
        df = LaurentSeries.from_polynomial(m.f.deriv(), AT_INFINITY, order + 2 * m.n)
        diff = outer - self.alpha_disk - df * self.s_overlap
        return float(np.max(np.abs(diff.coeffs))) if not diff.is_zero else 0.0


def _split(s: LaurentSeries):
    """Polynomial part in t (y^-k, k >= 0) and the strictly decaying rest."""
    top = max(-s.low, 0)
    plus = Polynomial([s.coeff(-k) for k in range(top + 1)]) if s.low <= 0 else Polynomial([0])
    minus = LaurentSeries(AT_INFINITY, max(s.low, 1), s._dense(max(s.low, 1), s.order), s.order)
    return plus, minus


def make_cocycle(m: AbelianIntegral, outer: Polynomial, s_minus: Sequence[complex], order: int = 24) -> CechCocycle:
    """Cocycle whose overlap function is (outer div f') + sum s_minus[j] t^-(j+1)."""
    df = m.f.deriv()
    s_plus, _ = divmod(outer, df)
    s = LaurentSeries.from_polynomial(s_plus, AT_INFINITY, order) + \
        LaurentSeries(AT_INFINITY, 1, list(s_minus), order)
    disk = LaurentSeries.from_polynomial(outer, AT_INFINITY, order) - \
        LaurentSeries.from_polynomial(df, AT_INFINITY, order + 2 * m.n) * s
    return CechCocycle(0j, outer, disk, s)


def coboundary(m: AbelianIntegral, g_outer: Polynomial, g_disk: LaurentSeries) -> CechCocycle:
    """Image of (g_outer, g_disk) under x omega: (omega g_outer, omega g_disk, g_outer - g_disk)."""
    order = g_disk.order
    df = m.f.deriv()
    disk = LaurentSeries.from_polynomial(df, AT_INFINITY, order + 2 * m.n) * g_disk
    s = LaurentSeries.from_polynomial(g_outer, AT_INFINITY, order) - g_disk
    return CechCocycle(0j, df * g_outer, disk, s)


def reduce_cocycle(m: AbelianIntegral, c: CechCocycle, crit=None):
    """Normal form (R dt, R dt, 0) with deg R <= n-2, plus its values at the critical points.

    With s = s_+ + s_-, the global form alpha_outer - omega s_+ equals
    alpha_disk + omega s_-; dividing it by f' removes a further exact part.
    The third slot is whatever the cocycle relation then forces (zero here).
    """
    crit = crit or critical_data(m)
    df = m.f.deriv()
    s_plus, s_minus = _split(c.s_overlap)
    glob = c.alpha_outer - df * s_plus
    # consistency with the disk side
    order = c.alpha_disk.order
    disk_side = c.alpha_disk + LaurentSeries.from_polynomial(df, AT_INFINITY, order + 2 * m.n) * s_minus
    mismatch = disk_side - LaurentSeries.from_polynomial(glob, AT_INFINITY, order)
    defect = float(np.max(np.abs(mismatch.coeffs))) if not mismatch.is_zero else 0.0
    _, R = divmod(glob, df)
    R_series = LaurentSeries.from_polynomial(R, AT_INFINITY, order)
    reduced = CechCocycle(c.z, R, R_series, LaurentSeries(AT_INFINITY, order, [], order))
    return reduced, R(crit.points), defect


def cech_multiplication_oracle(m: AbelianIntegral, xi: TangentVector, c: CechCocycle, crit=None):
    """Cocycle product (h alpha_outer, h alpha_disk, h s), reduced; returns (cocycle, values, defect)."""
    if m.genus != 0:
        raise ValueError("the cocycle oracle is implemented at genus 0")
    crit = crit or critical_data(m)
    h = Polynomial(xi.chart)   # d f / d a_i = t^i
    order = c.alpha_disk.order
    hs = LaurentSeries.from_polynomial(h, AT_INFINITY, order + 2 * m.n)
    prod = CechCocycle(c.z, h * c.alpha_outer, hs * c.alpha_disk, hs * c.s_overlap)
    return reduce_cocycle(m, prod, crit)


# --------------------------------------------------------------------------
# twisted periods and the pencil shape (genus 0)

def _ray_nodes(theta: float, radius: float, panels: int = 24, per_panel: int = 24):
    x, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(0.0, radius, panels + 1)
    r = ((edges[1:] - edges[:-1])[:, None] * (x[None, :] + 1) / 2 + edges[:-1, None]).ravel()
    wr = ((edges[1:] - edges[:-1])[:, None] * w[None, :] / 2).ravel()
    direction = np.exp(1j * theta)
    return r * direction, wr * direction


def twisted_periods(m: AbelianIntegral, z: complex) -> np.ndarray:
    """Pi[l, j] = integral over (ray_{l+1} - ray_l) of exp(f/z) t^j dt."""
    n = m.n
    N = n - 1
    scale = max(1.0, float(np.max(np.abs(m.f.coefficients))))
    radius = (60.0 * abs(z)) ** (1.0 / n) + 2.0 * scale ** (1.0 / n) + 1.0
    rays = []
    for l in range(n):
        theta = (np.angle(z) + np.pi + 2 * np.pi * l) / n
        t, w = _ray_nodes(theta, radius)
        weight = np.exp(m.f(t) / z) * w
        rays.append(np.array([np.sum(weight * t ** j) for j in range(N)]))
    return np.array([rays[l + 1] - rays[l] for l in range(N)])


def connection_matrices(m: AbelianIntegral, z: complex, step: float = 1e-3) -> List[np.ndarray]:
    """A_i(z) = Pi^-1 d_i Pi from Richardson-extrapolated differences in the chart."""
    base = m.chart()
    Pi = twisted_periods(m, z)
    out = []
    for i in range(m.dimension):
        e = np.zeros_like(base)
        e[i] = 1.0

        def P(eps):
            return twisted_periods(from_chart(m, base + eps * e), z)

        d1 = (P(step) - P(-step)) / (2 * step)
        d2 = (P(step / 2) - P(-step / 2)) / step
        out.append(np.linalg.solve(Pi, (4 * d2 - d1) / 3))
    return out


@dataclass
class PencilReport:
    fit_residual: float
    residue_delta: float
    A_inf: List[np.ndarray]
    B: List[np.ndarray]
    z_samples: tuple


def pencil_fit(samples: Dict[complex, List[np.ndarray]]):
    """Least-squares fit A(z) = A_inf + B/z per direction; returns (A_inf, B, max residual)."""
    zs = list(samples)
    design = np.array([[1.0, 1.0 / z] for z in zs], dtype=complex)
    A_inf, B, resid = [], [], 0.0
    for i in range(len(samples[zs[0]])):
        Y = np.array([samples[z][i].ravel() for z in zs])
        coef, *_ = np.linalg.lstsq(design, Y, rcond=None)
        shape = samples[zs[0]][i].shape
        A_inf.append(coef[0].reshape(shape))
        B.append(coef[1].reshape(shape))
        resid = max(resid, float(np.max(np.abs(design @ coef - Y))))
    return A_inf, B, resid


def pencil_consistency(m: AbelianIntegral, z_samples: Sequence[complex] = Z_SAMPLES,
                       tol: float = 1e-6, perturb: Optional[Callable] = None,
                       raise_on_failure: bool = False) -> PencilReport:
    """Fit the connection on the twisted-period basis to A_inf + B/z and compare B with Phi.

    ``perturb(z, A)`` lets tests inject faults into the sampled matrices.
    """
    if m.genus != 0:
        raise ValueError("the twisted-period pencil check is implemented at genus 0")
    crit = critical_data(m)
    FA = fiber_algebra(m, 2, crit)
    V = form_basis(m, crit).values
    samples = {}
    for z in z_samples:
        A = connection_matrices(m, z)
        if perturb is not None:
            A = [perturb(z, a) for a in A]
        samples[z] = A
    A_inf, B, resid = pencil_fit(samples)
    delta = 0.0
    for i in range(m.dimension):
        phi = np.linalg.solve(V, FA.fiber_matrix[:, i][:, None] * V)
        delta = max(delta, _rel(B[i], phi))
    if raise_on_failure and (resid > tol or delta > tol):
        raise FitFailure(max(resid, delta))
    return PencilReport(resid, delta, A_inf, B, tuple(z_samples))


# --------------------------------------------------------------------------
# genus 1: forms with jumps and flat transport

@dataclass(frozen=True)
class JumpsForm:
    """chi = sum_j coeffs[j] basis_j; only the last basis form jumps, by -2 pi i omega."""
    lam: complex
    coeffs: np.ndarray
    pole_coeffs: tuple

    def values(self, m: AbelianIntegral, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=complex))
        n = m.n
        vals, _ = ell.wp_all(m.lattice, u, max(n - 2, 0))
        out = np.full_like(u, self.coeffs[0])
        for j in range(n - 1):
            out = out + self.coeffs[1 + j] * vals[j]
        a, b = self.pole_coeffs
        return out + self.coeffs[n] * jump_form_values(m, u, a, b)

    def jump_defect(self, m: AbelianIntegral, points) -> float:
        points = np.asarray(points, dtype=complex)
        jump = self.values(m, points + m.lattice.tau) - self.values(m, points)
        expected = self.lam * m.omega_values(points)
        return _rel(jump, expected)


def jumps_form_from_invariants(m: AbelianIntegral, invariants: np.ndarray, crit=None):
    crit = crit or critical_data(m)
    B = form_basis(m, crit)
    try:
        coeffs = np.linalg.solve(B.invariants, invariants)
    except np.linalg.LinAlgError as exc:
        raise SolveFailure(str(exc)) from exc
    return JumpsForm(complex(-2j * np.pi * coeffs[-1]), coeffs, B.jump_pole_coeffs), B


def christoffel(m: AbelianIntegral, k: int, guesses, step: float = OUTER_STEP) -> np.ndarray:
    """Gamma[c, a, b] of the metric in chart coordinates, by Richardson differences."""
    base = m.chart()
    N = m.dimension

    def g(pt):
        mm = from_chart(m, pt)
        fa = fiber_algebra(mm, k, critical_data(mm, guesses=guesses))
        return chart_metric(fa)

    g0 = g(base)
    dg = np.zeros((N, N, N), dtype=complex)
    for i in range(N):
        h = step * max(1.0, abs(base[i]))
        e = np.zeros(N, dtype=complex)
        e[i] = 1.0
        d1 = (g(base + h * e) - g(base - h * e)) / (2 * h)
        d2 = (g(base + h / 2 * e) - g(base - h / 2 * e)) / h
        dg[i] = (4 * d2 - d1) / 3
    return np.einsum("cl,lab->cab", np.linalg.inv(g0), _levi_civita_lower(dg))


def _levi_civita_lower(dg: np.ndarray) -> np.ndarray:
    # dg[i, a, b] = d_i g_ab; returns L[l, a, b] = (d_a g_lb + d_b g_la - d_l g_ab)/2
    return 0.5 * (np.einsum("alb->lab", dg) + np.einsum("bla->lab", dg) - dg)


def levi_civita_transport(m: AbelianIntegral, k: int, path: np.ndarray, vector: np.ndarray,
                          guesses) -> List[np.ndarray]:
    """Parallel transport of a chart vector along a polyline of chart points (RK4 per segment)."""
    def gamma_at(pt):
        return christoffel(from_chart(m, pt), k, guesses)

    out = [np.asarray(vector, dtype=complex)]
    v = out[0]
    cache = {}

    def G(pt):
        key = tuple(np.round(pt, 14))
        if key not in cache:
            cache[key] = gamma_at(pt)
        return cache[key]

    for p0, p1 in zip(path[:-1], path[1:]):
        d = p1 - p0

        def rhs(pt, vec):
            return -np.einsum("cab,a,b->c", G(pt), d, vec)

        mid = 0.5 * (p0 + p1)
        k1 = rhs(p0, v)
        k2 = rhs(mid, v + 0.5 * k1)
        k3 = rhs(mid, v + 0.5 * k2)
        k4 = rhs(p1, v + k3)
        v = v + (k1 + 2 * k2 + 2 * k3 + k4) / 6
        out.append(v)
    return out


@dataclass
class JumpsReport:
    max_jump_defect: float
    route_delta_flat: float       # re-solved jumps family vs flat-frame family
    route_delta_levi_civita: float  # re-solved jumps family vs Levi-Civita transport
    loop_holonomy: Optional[float]
    invariants: np.ndarray
    steps: int


def jumps_flatness_check(m: AbelianIntegral, direction: np.ndarray, invariants: np.ndarray,
                         k: int = 2, steps: int = 4, loop_direction: Optional[np.ndarray] = None) -> JumpsReport:
    """Hold (a-period, lambda, polar expansion) fixed along a chart segment and compare transports."""
    if m.genus != 1:
        raise ValueError("the jumps model is the genus-1 cross-check")
    crit0 = critical_data(m)
    FA0 = fiber_algebra(m, k, crit0)
    theta0 = local_flat_chart(FA0).jacobian
    xi0 = np.linalg.solve(theta0, invariants)
    base = m.chart()
    path = np.array([base + s * np.asarray(direction) for s in np.linspace(0, 1, steps + 1)])
    lc = levi_civita_transport(m, k, path, xi0, crit0.points)
    jump_def = 0.0
    d_flat = 0.0
    d_lc = 0.0
    cut_points = ell.make_cycle(m.lattice, "a").samples[1:-1:8]
    for pt, xi_lc in zip(path, lc):
        mm = from_chart(m, pt)
        crit = critical_data(mm, guesses=crit0.points)
        FA = fiber_algebra(mm, k, crit)
        try:
            chi, B = jumps_form_from_invariants(mm, invariants, crit)
        except SolveFailure:
            raise
        jump_def = max(jump_def, chi.jump_defect(mm, cut_points))
        values_jumps = B.values @ chi.coeffs
        theta = np.linalg.solve(B.values, FA.rho.values_at_critical[:, None] * FA.fiber_matrix)
        xi_flat = np.linalg.solve(B.invariants @ theta, invariants)
        values_flat = FA.rho.values_at_critical * (FA.fiber_matrix @ xi_flat)
        values_lc = FA.rho.values_at_critical * (FA.fiber_matrix @ xi_lc)
        d_flat = max(d_flat, _rel(values_jumps, values_flat))
        d_lc = max(d_lc, _rel(values_jumps, values_lc))
    hol = None
    if loop_direction is not None:
        hol = loop_holonomy(m, k, np.asarray(direction), np.asarray(loop_direction), xi0, crit0.points)
    return JumpsReport(jump_def, d_flat, d_lc, hol, np.asarray(invariants), steps)


def loop_holonomy(m: AbelianIntegral, k: int, e0: np.ndarray, e1: np.ndarray, vector, guesses,
                  steps: int = 2) -> float:
    """Levi-Civita transport around the chart square spanned by e0, e1; returns |v_end - v_start|."""
    base = m.chart()
    corners = [base, base + e0, base + e0 + e1, base + e1, base]
    path = [base]
    for a, b in zip(corners[:-1], corners[1:]):
        for s in np.linspace(0, 1, steps + 1)[1:]:
            path.append(a + s * (b - a))
    vs = levi_civita_transport(m, k, np.array(path), vector, guesses)
    return _rel(vs[-1], vs[0])


# --------------------------------------------------------------------------
# axiom battery

def _random_vectors(rng, N, count):
    return [rng.normal(size=N) + 1j * rng.normal(size=N) for _ in range(count)]


def _neighbours(m: AbelianIntegral, rng, count: int, radius: float):
    base = m.chart()
    out = []
    for _ in range(count):
        d = rng.normal(size=len(base)) + 1j * rng.normal(size=len(base))
        out.append(base + radius * d / np.linalg.norm(d))
    return out


def intersection_form_checks(m: AbelianIntegral, chart_eta: np.ndarray) -> List[CheckRecord]:
    """Pairing on the (a-period, lambda) block of the invariant frame at genus 1."""
    thr = THRESHOLDS[1]["intersection"]
    aa = abs(chart_eta[0, 0])
    al = abs(chart_eta[0, 1] - 1j / (2 * np.pi))
    ll = abs(chart_eta[1, 1] + 1j * m.P_a / (2 * np.pi))
    mixed = float(np.max(np.abs(chart_eta[:2, 2:]))) if chart_eta.shape[0] > 2 else 0.0
    return [
        check("intersection_a_isotropic", aa, thr, "eta(a, a) on the a-period direction"),
        check("intersection_pairing", al, thr, "eta(a, lambda) = i/(2 pi)"),
        check("intersection_lambda_residue_corrected", ll, thr, "eta(lambda, lambda) + i P_a/(2 pi)"),
        check("intersection_orthogonal_to_polar", mixed, thr, "H^1 block orthogonal to polar block"),
    ]


def axiom_suite(m: AbelianIntegral, k: int = 2, seed: int = 0, samples: Optional[int] = None,
                thresholds: Optional[dict] = None, with_curvature: bool = False) -> List[CheckRecord]:
    """Run the Frobenius axiom checks at m; failures become records, never exceptions."""
    thr = dict(THRESHOLDS[m.genus])
    thr.update(thresholds or {})
    T = thr["default"]
    rng = np.random.default_rng(seed)
    records: List[CheckRecord] = []
    N = m.dimension
    try:
        crit = critical_data(m)
    except FrobPencilError as exc:
        return [CheckRecord(type(exc).__name__, float("inf"), 0.0, False, str(exc))]
    records.append(check("critical_count", abs(len(crit.points) - N), 0.0, "2g+n-1 zeros of omega"))
    try:
        FA = fiber_algebra(m, k, crit)
    except FrobPencilError as exc:
        records.append(CheckRecord(type(exc).__name__, float("inf"), 0.0, False, str(exc)))
        return records
    records.append(check("primitive", 0.0 if FA.rho.primitive else 1.0, 0.0, f"rho_{k} nonvanishing at q_s"))
    if m.genus == 1:
        records.append(check("rho_a_period", abs(FA.rho.a_period), thr["periods"]))
        L = m.lattice
        om = ell.contour_period(L, m.omega_values, ell.make_cycle(L, "a"))
        ob = ell.contour_period(L, m.omega_values, ell.make_cycle(L, "b"))
        records.append(check("leaf_periods", max(abs(om - m.P_a), abs(ob - m.P_b)), thr["periods"]))

    X, Y, Z = [tangent_to_fiber(FA, v) for v in _random_vectors(rng, N, 3)]
    try:
        XY = multiply(FA, X, Y)
        YX = multiply(FA, Y, X)
        records.append(check("commutativity", _rel(XY.chart, YX.chart), T))
        lhs = multiply(FA, tangent_to_fiber(FA, XY.chart), Z)
        YZ = multiply(FA, Y, Z)
        rhs = multiply(FA, X, tangent_to_fiber(FA, YZ.chart))
        records.append(check("associativity", _rel(lhs.chart, rhs.chart), T))
        e = unit_field(FA)
        eX = multiply(FA, tangent_to_fiber(FA, e.chart), X)
        records.append(check("unit", _rel(eX.chart, X.chart), T))
        expected = np.zeros(N, dtype=complex)
        expected[0 if m.genus == 0 else N - 1] = 1.0
        records.append(check("unit_is_constant_shift", _rel(e.chart, expected), T,
                             "e = d/d(constant term of f)"))
        g = chart_metric(FA)
        records.append(check("eta_symmetry", _rel(g, g.T), T))
        cond = float(np.linalg.cond(g))
        records.append(check("eta_nondegenerate", 1.0 / cond, 1e-12, f"condition {cond:.3e}",
                             larger_is_better=True))
        c1 = metric(FA, tangent_to_fiber(FA, XY.chart), Z)
        c2 = metric(FA, X, tangent_to_fiber(FA, YZ.chart))
        records.append(check("compatibility", abs(c1 - c2) / max(1.0, abs(c1)), T))
    except FrobPencilError as exc:
        records.append(CheckRecord(type(exc).__name__, float("inf"), 0.0, False, str(exc)))
        return records

    if m.n >= 3:
        try:
            FA3 = fiber_algebra(m, 3, crit)
            if FA3.rho.primitive:
                C2 = chart_structure_constants_via_section(FA)
                C3 = chart_structure_constants_via_section(FA3)
                records.append(check("k_independence", _rel(C2, C3), T))
                gap = _rel(chart_metric(FA), chart_metric(FA3))
                records.append(check("metrics_differ_between_k", gap, 1e-6, "", larger_is_better=True))
        except FrobPencilError as exc:
            records.append(CheckRecord("k_independence", float("inf"), T, False, str(exc)))

    # flat structure
    try:
        FAf, chart, c = flat_data_at(m, k, exact_genus0=(m.genus == 0 and k == 2))
        records.append(check("c_symmetry", symmetry_defect(c) / max(1.0, np.max(np.abs(c))), T))
        eref = chart.eta
        if m.genus == 0 and k == 2:
            records.append(check("eta_flat_antidiagonal", _rel(eref, antidiagonal_reference(m.n)), thr["flatness"]))
        e_flat = chart.jacobian @ unit_field(FAf).chart
        count = samples if samples is not None else (20 if m.genus == 0 else 3)
        radius = 0.2 if m.genus == 0 else 0.02
        flat_dev, unit_dev, wdvv = 0.0, 0.0, wdvv_tensor_residual(c, eref)
        for pt in _neighbours(m, rng, count, radius):
            fa, ch, cc = flat_data_at(from_chart(m, pt), k, guesses=crit.points,
                                      exact_genus0=(m.genus == 0 and k == 2))
            flat_dev = max(flat_dev, _rel(ch.eta, eref))
            unit_dev = max(unit_dev, _rel(ch.jacobian @ unit_field(fa).chart, e_flat))
            wdvv = max(wdvv, wdvv_tensor_residual(cc, ch.eta) / max(1.0, np.max(np.abs(cc)) ** 2))
        records.append(check("eta_flat_constant", flat_dev, thr["flatness"], f"{count} nearby points"))
        records.append(check("unit_flat", unit_dev, thr["flatness"]))
        records.append(check("wdvv", wdvv, thr["wdvv"]))
        dc = c_derivatives(m, k, exact_genus0=(m.genus == 0 and k == 2))
        scale = max(1.0, float(np.max(np.abs(dc))))
        records.append(check("potentiality", potentiality_defect(dc) / scale, thr["potentiality"]))
        if m.genus == 1:
            records.extend(intersection_form_checks(m, eref))
            if with_curvature:
                N_ = m.dimension
                v0 = rng.normal(size=N_) + 0j
                e0 = np.zeros(N_, complex)
                e1 = np.zeros(N_, complex)
                e0[0] = 0.02
                e1[1] = 0.02
                hol = loop_holonomy(m, k, e0, e1, v0, crit.points)
                records.append(check("curvature_loop_holonomy", hol, thr["curvature"]))
    except FrobPencilError as exc:
        records.append(CheckRecord(type(exc).__name__, float("inf"), 0.0, False, str(exc)))
    return records


def suite_passed(records: Sequence[CheckRecord]) -> bool:
    return all(r.passed for r in records)


# --------------------------------------------------------------------------
# elliptic substrate

def _sample_cell(L: ell.Lattice, rng, count: int, clearance: float = 0.05) -> np.ndarray:
    """Points of the period parallelogram at least ``clearance`` from the lattice."""
    out = []
    while len(out) < count:
        a, b = rng.uniform(0, 1, size=2)
        u = a + b * L.tau
        corners = np.array([0, 1, L.tau, 1 + L.tau])
        if np.min(np.abs(u - corners)) > clearance:
            out.append(u)
    return np.array(out, dtype=complex)


def elliptic_checks(tau: complex, rng, count: int = 100, tol: float = 1e-10) -> List[CheckRecord]:
    """Differential equation, periodicity, Legendre relation and lattice-sum agreement."""
    L = ell.lattice_init(tau)
    u = _sample_cell(L, rng, count)
    p, dp = ell.wp(L, u, 0), ell.wp(L, u, 1)
    rhs = 4 * p ** 3 - L.g2 * p - L.g3
    scale = np.maximum(1.0, np.maximum(np.abs(dp) ** 2, np.abs(4 * p ** 3)))
    de = float(np.max(np.abs(dp ** 2 - rhs) / scale))
    pscale = np.maximum(1.0, np.abs(p))
    per = max(float(np.max(np.abs(ell.wp(L, u + 1) - p) / pscale)),
              float(np.max(np.abs(ell.wp(L, u + L.tau) - p) / pscale)))
    z = ell.zeta_w(L, u)
    zscale = np.maximum(1.0, np.abs(z))
    quasi = max(float(np.max(np.abs(ell.zeta_w(L, u + 1) - z - L.eta1) / zscale)),
                float(np.max(np.abs(ell.zeta_w(L, u + L.tau) - z - L.eta2) / zscale)))
    lattice = float(np.max(np.abs(ell.wp_lattice_sum(tau, u) - p) / pscale))
    return [
        check("weierstrass_equation", de, tol),
        check("wp_periodicity", per, tol),
        check("zeta_quasi_periodicity", quasi, tol),
        check("legendre_relation", abs(L.legendre_defect()), tol),
        check("q_series_vs_lattice_sum", lattice, tol),
    ]


def cech_engine_delta(m: AbelianIntegral, rng, trials: int = 1) -> Dict[str, float]:
    """Relative gap between the reduced cocycle product and the engine's multiply.

    A random class c (values c_s at q_s) is fed to the engine through rho:
    Y = Phi(rho, .)^-1 c, and Phi(rho, xi o Y) must reproduce the oracle values.
    """
    crit = critical_data(m)
    FA = fiber_algebra(m, 2, crit)
    N = m.dimension
    delta, cocycle = 0.0, 0.0
    for _ in range(trials):
        deg = int(rng.integers(N, 2 * m.n + 2))
        outer = Polynomial(rng.normal(size=deg) + 1j * rng.normal(size=deg))
        c = make_cocycle(m, outer, rng.normal(size=3) + 1j * rng.normal(size=3))
        xi = tangent_to_fiber(FA, rng.normal(size=N) + 1j * rng.normal(size=N))
        _, class_values, d1 = reduce_cocycle(m, c, crit)
        _, oracle_values, d2 = cech_multiplication_oracle(m, xi, c, crit)
        Y = from_fiber(FA, class_values / FA.rho.values_at_critical)
        engine_values = FA.rho.values_at_critical * multiply(FA, xi, Y).fiber
        delta = max(delta, _rel(oracle_values, engine_values))
        cocycle = max(cocycle, c.relation_defect(m), d1, d2)
    return {"delta": delta, "cocycle_defect": cocycle}
