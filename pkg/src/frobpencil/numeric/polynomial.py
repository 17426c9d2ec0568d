"""Dense complex polynomials and simultaneous-iteration root finding."""
from __future__ import annotations

from math import comb
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .._accel import select
from ..errors import NonConvergence, ZeroPolynomial

#: merge radius for root clusters, relative to the root scale
CLUSTER_TOL = 1e-6
#: hard cap on the degree handed to the root finder
DEGREE_CAP = 64

_EPS = np.finfo(float).eps


class Polynomial:
    """Polynomial with complex coefficients stored in ascending degree.

    Trailing zero coefficients are stripped, so ``degree`` is the index of the
    last nonzero coefficient (``-1`` for the zero polynomial is avoided: the
    zero polynomial has ``degree == 0`` and ``is_zero`` set).
    """

    __slots__ = ("_c",)

    def __init__(self, coefficients: Iterable[complex]):
        c = np.atleast_1d(np.asarray(list(coefficients) if not isinstance(coefficients, np.ndarray) else coefficients,
                                     dtype=complex)).copy()
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)
        c.setflags(write=False)
        self._c = c

    @classmethod
    def from_roots(cls, roots: Sequence[complex], leading: complex = 1.0) -> "Polynomial":
        return cls(leading * npoly.polyfromroots(np.asarray(roots, dtype=complex)))

    @classmethod
    def monomial(cls, k: int, coefficient: complex = 1.0) -> "Polynomial":
        c = np.zeros(k + 1, dtype=complex)
        c[k] = coefficient
        return cls(c)

    @property
    def coefficients(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    @property
    def is_zero(self) -> bool:
        return len(self._c) == 1 and self._c[0] == 0

    @property
    def leading(self) -> complex:
        return complex(self._c[-1])

    def is_monic(self) -> bool:
        return self._c[-1] == 1

    def __call__(self, t):
        return npoly.polyval(t, self._c)

    def deriv(self, m: int = 1) -> "Polynomial":
        if self.degree < m:
            return Polynomial([0])
        return Polynomial(npoly.polyder(self._c, m))

    def __add__(self, other):
        other = _as_poly(other)
        return Polynomial(npoly.polyadd(self._c, other._c))

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_poly(other)
        return Polynomial(npoly.polysub(self._c, other._c))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __neg__(self):
        return Polynomial(-self._c)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(npoly.polymul(self._c, other._c))
        return Polynomial(self._c * complex(other))

    __rmul__ = __mul__

    def __divmod__(self, other: "Polynomial"):
        if other.is_zero:
            raise ZeroDivisionError("division by the zero polynomial")
        if self.degree < other.degree:
            return Polynomial([0]), self
        q, r = npoly.polydiv(self._c, other._c)
        return Polynomial(q), Polynomial(r)

    def __mod__(self, other: "Polynomial") -> "Polynomial":
        return divmod(self, other)[1]

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self._c, other._c)

    def __hash__(self):
        return hash(self._c.tobytes())

    def taylor_shift(self, c: complex) -> np.ndarray:
        """Coefficients of ``p(c + y)`` in ascending powers of ``y``."""
        out = np.array(self._c, dtype=complex)
        n = len(out)
        for i in range(n - 1):
            for j in range(n - 2, i - 1, -1):
                out[j] += c * out[j + 1]
        return out

    def __repr__(self):
        return f"Polynomial({np.array2string(self._c, precision=6)})"


def _as_poly(x) -> Polynomial:
    return x if isinstance(x, Polynomial) else Polynomial([x])


# --------------------------------------------------------------------------
# Aberth-Ehrlich kernels

def _aberth_loop(coeffs, z, tol, maxiter):
    n = z.shape[0]
    deg = coeffs.shape[0] - 1
    done = np.zeros(n, dtype=np.bool_)
    for it in range(maxiter):
        remaining = 0
        for i in range(n):
            if done[i]:
                continue
            zi = z[i]
            p = coeffs[deg]
            dp = 0.0 + 0.0j
            for k in range(deg - 1, -1, -1):
                dp = dp * zi + p
                p = p * zi + coeffs[k]
            if p == 0:
                done[i] = True
                continue
            s = 0.0 + 0.0j
            for j in range(n):
                if j != i:
                    s += 1.0 / (zi - z[j])
            ratio = p / dp if dp != 0 else p / (1e-300 + 0j)
            w = ratio / (1.0 - ratio * s)
            z[i] = zi - w
            if abs(w) <= tol * max(1.0, abs(z[i])):
                done[i] = True
            else:
                remaining += 1
        if remaining == 0:
            return z, it + 1, True
    return z, maxiter, False


def _aberth_numpy(coeffs, z, tol, maxiter):
    z = z.copy()
    n = z.shape[0]
    active = np.ones(n, dtype=bool)
    eye = np.eye(n, dtype=bool)
    dcoeffs = npoly.polyder(coeffs)
    for it in range(maxiter):
        p = npoly.polyval(z, coeffs)
        dp = npoly.polyval(z, dcoeffs)
        diff = z[:, None] - z[None, :]
        diff[eye] = 1.0
        inv = 1.0 / diff
        inv[eye] = 0.0
        s = inv.sum(axis=1)
        safe_dp = np.where(dp == 0, 1e-300, dp)
        ratio = p / safe_dp
        w = ratio / (1.0 - ratio * s)
        w = np.where(active & (p != 0), w, 0.0)
        z = z - w
        active &= ~((np.abs(w) <= tol * np.maximum(1.0, np.abs(z))) | (p == 0))
        if not active.any():
            return z, it + 1, True
    return z, maxiter, False


aberth_kernel = select(_aberth_loop, _aberth_numpy)


def _initial_guesses(c: np.ndarray) -> np.ndarray:
    n = len(c) - 1
    lead = c[-1]
    centre = -c[-2] / (n * lead)
    shifted = Polynomial(c).taylor_shift(centre)
    ratios = [abs(shifted[k] / lead) ** (1.0 / (n - k)) for k in range(n) if shifted[k] != 0]
    radius = 2.0 * max(ratios) if ratios else 1.0
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    return centre + radius * np.exp(1j * angles)


def _raw_roots(c: np.ndarray, tol: float, maxiter: int) -> np.ndarray:
    n = len(c) - 1
    if n == 1:
        return np.array([-c[0] / c[1]])
    z0 = _initial_guesses(c)
    z, _, ok = aberth_kernel(np.ascontiguousarray(c), z0.copy(), tol, maxiter)
    if ok and np.all(np.isfinite(z)):
        return z
    # fall back to companion-matrix eigenvalues, then polish
    z = np.roots(c[::-1]).astype(complex)
    z, _, _ = aberth_kernel(np.ascontiguousarray(c), z.copy(), tol, 50)
    if not np.all(np.isfinite(z)):
        raise NonConvergence("root iteration diverged")
    return z


def _coefficient_rounding(p: Polynomial, c: complex, j: int) -> float:
    a = np.abs(p.coefficients)
    r = abs(c)
    return float(sum(a[k] * comb(k, j) * r ** (k - j) for k in range(j, len(a))))


def _is_tight(p: Polynomial, centre: complex, m: int, radius: float) -> bool:
    b = p.taylor_shift(centre)
    if len(b) <= m or b[m] == 0:
        return False
    for j in range(m):
        bound = comb(m, j) * radius ** (m - j) * abs(b[m]) + 1e3 * _EPS * _coefficient_rounding(p, centre, j)
        if abs(b[j]) > bound:
            return False
    return True


def _single_linkage(points: np.ndarray, idx: List[int], radius: float) -> List[List[int]]:
    groups: List[List[int]] = []
    unassigned = list(idx)
    while unassigned:
        group = [unassigned.pop(0)]
        grew = True
        while grew:
            grew = False
            for j in list(unassigned):
                if any(abs(points[j] - points[g]) < radius for g in group):
                    group.append(j)
                    unassigned.remove(j)
                    grew = True
        groups.append(group)
    return groups


def _polish_multiple(p: Polynomial, centre: complex, m: int) -> complex:
    # an m-fold root of p is a simple root of its (m-1)-th derivative
    d = p.deriv(m - 1)
    dd = d.deriv()
    z = centre
    for _ in range(8):
        slope = dd(z)
        if slope == 0:
            break
        step = d(z) / slope
        z = z - step
        if abs(step) <= 4 * _EPS * max(1.0, abs(z)):
            break
    return complex(z) if abs(z - centre) < 1e-3 * max(1.0, abs(centre)) else centre


def cluster_roots(p: Polynomial, z: np.ndarray, threshold: float) -> List[Tuple[complex, int]]:
    """Merge approximations that belong to one multiple root.

    Candidate groups are tested at the polynomial level: a group of ``m``
    approximations is merged when ``p`` is, up to rounding, within
    ``threshold`` of having an ``m``-fold root at the group mean.
    """
    out: List[Tuple[complex, int]] = []

    def visit(idx: List[int], radius: float) -> None:
        for group in _single_linkage(z, idx, radius):
            if len(group) == 1:
                out.append((complex(z[group[0]]), 1))
                continue
            # the group mean can sit eps^(1/m) away from an m-fold root; polish first
            centre = _polish_multiple(p, complex(np.mean(z[group])), len(group))
            if _is_tight(p, centre, len(group), threshold):
                out.append((centre, len(group)))
            elif radius > threshold:
                visit(group, radius / 10.0)
            else:
                out.extend((complex(z[g]), 1) for g in group)

    visit(list(range(len(z))), max(1e3 * threshold, threshold))
    return out


def poly_roots(p: Polynomial, tol: float = 1e-13, cluster_tol: float = CLUSTER_TOL,
               maxiter: int = 500) -> List[Tuple[complex, int]]:
    """Roots of ``p`` with multiplicities.

    Roots closer than ``cluster_tol`` (relative to the root scale) are merged.
    The result is sorted by real part, then imaginary part.
    """
    if p.is_zero:
        raise ZeroPolynomial("cannot find roots of the zero polynomial")
    if p.degree > DEGREE_CAP:
        raise ValueError(f"degree {p.degree} exceeds the configured cap {DEGREE_CAP}")
    c = np.array(p.coefficients)
    if p.degree == 0:
        return []
    zero_mult = int(np.argmax(c != 0))
    roots: List[Tuple[complex, int]] = []
    if zero_mult:
        roots.append((0j, zero_mult))
        c = c[zero_mult:]
    if len(c) > 1:
        z = _raw_roots(c, tol, maxiter)
        q = Polynomial(c)
        scale = max(1.0, float(np.max(np.abs(z))))
        roots.extend(cluster_roots(q, z, cluster_tol * scale))
    merged: List[Tuple[complex, int]] = []
    scale = max([1.0] + [abs(r) for r, _ in roots])
    for r, m in roots:
        for i, (r2, m2) in enumerate(merged):
            if abs(r - r2) < cluster_tol * scale:
                merged[i] = ((r2 * m2 + r * m) / (m + m2), m + m2)
                break
        else:
            merged.append((r, m))
    merged.sort(key=lambda rm: (round(rm[0].real, 12), round(rm[0].imag, 12)))
    return merged
