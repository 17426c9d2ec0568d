import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frobpencil.errors import (InsufficientTruncation, NotMonic, OrderTooSmall,
                               ValuationError, ZeroPolynomial)
from frobpencil.numeric import Polynomial, poly_roots
from frobpencil.numeric.polynomial import DEGREE_CAP, _aberth_loop, _aberth_numpy, _initial_guesses
from frobpencil.numeric.series import (AT_INFINITY, LaurentSeries, puiseux_inverse_root, residue_at,
                                       series_arith)

complex_st = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


# --------------------------------------------------------------------------
# polynomials

def test_polynomial_arithmetic_and_division():
    p = Polynomial([1, 2, 3])
    q = Polynomial([-1, 1])
    quot, rem = divmod(p * q + Polynomial([5]), q)
    assert quot == p
    assert rem == Polynomial([5])
    assert (p - p).is_zero
    assert p.deriv() == Polynomial([2, 6])
    assert p.deriv(3).is_zero


def test_taylor_shift_matches_expansion():
    p = Polynomial([1, -2, 0, 4])
    c = 0.7 - 0.2j
    shifted = Polynomial(p.taylor_shift(c))
    t = np.array([0.3, -1.1 + 0.4j])
    assert np.allclose(shifted(t - c), p(t))


@pytest.mark.parametrize("coeffs, expected", [
    ([1, 0, 1], [(-1j, 1), (1j, 1)]),
    ([-3, 0, 3], [(-1, 1), (1, 1)]),
    ([4, -4, 1], [(2, 2)]),
    ([0, 0, 0, 0, 4], [(0, 4)]),
])
def test_roots_examples(coeffs, expected):
    got = poly_roots(Polynomial(coeffs))
    assert [m for _, m in got] == [m for _, m in expected]
    for (r, _), (e, _) in zip(got, expected):
        assert abs(r - e) < 1e-12


def test_multiple_roots_are_exact():
    p = Polynomial.from_roots([1.5, 1.5, 1.5, -2, -2, 0.5j])
    got = dict((round(r.real, 8) + 1j * round(r.imag, 8), m) for r, m in poly_roots(p))
    assert got == {1.5: 3, -2: 2, 0.5j: 1}
    for r, m in poly_roots(p):
        assert abs(r - round(r.real, 8) - 1j * round(r.imag, 8)) < 1e-12


def test_derivative_of_quartic_has_triple_zero():
    assert poly_roots(Polynomial([0, 0, 0, 0, 1]).deriv()) == [(0j, 3)]


def test_roots_errors():
    with pytest.raises(ZeroPolynomial):
        poly_roots(Polynomial([0]))
    with pytest.raises(ValueError):
        poly_roots(Polynomial.monomial(DEGREE_CAP + 1))


def test_random_roots_recovered():
    rng = np.random.default_rng(5)
    roots = rng.normal(size=30) + 1j * rng.normal(size=30)
    got = np.array([r for r, m in poly_roots(Polynomial.from_roots(roots))])
    assert len(got) == 30
    for r in roots:
        assert np.min(np.abs(got - r)) < 1e-10


@pytest.mark.parametrize("kernel", [_aberth_loop, _aberth_numpy])
def test_aberth_kernels_agree(kernel):
    rng = np.random.default_rng(2)
    roots = rng.normal(size=12) + 1j * rng.normal(size=12)
    c = np.array(Polynomial.from_roots(roots).coefficients, dtype=complex)
    z, iters, ok = kernel(c, _initial_guesses(c), 1e-14, 500)
    assert ok
    for r in roots:
        assert np.min(np.abs(z - r)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.lists(complex_st, min_size=2, max_size=8))
def test_vieta_property(roots):
    """Product and sum of the returned roots (with multiplicity) match the coefficients."""
    p = Polynomial.from_roots(roots)
    got = poly_roots(p)
    assert sum(m for _, m in got) == len(roots)
    flat = np.concatenate([[r] * m for r, m in got])
    scale = max(1.0, max(abs(r) for r in roots)) ** len(roots)
    assert abs(np.sum(flat) - np.sum(roots)) < 1e-6 * scale
    assert abs(np.prod(flat) - np.prod(roots)) < 1e-6 * scale


# --------------------------------------------------------------------------
# Laurent series

def test_reciprocal_and_product():
    s = LaurentSeries(0, -1, [2.0, 1.0, -0.5, 0.25], 8)
    one = s * s.reciprocal()
    assert abs(one.coeff(0) - 1) < 1e-15
    for k in range(1, 6):
        assert abs(one.coeff(k)) < 1e-14


def test_truncation_is_enforced():
    s = LaurentSeries(0, 0, [1.0, 1.0], 3)
    with pytest.raises(InsufficientTruncation):
        s.coeff(3)


def test_power_roundtrip():
    s = LaurentSeries(0, 0, [1.0, 0.3, -0.2j, 0.1], 10)
    back = s.power(1 / 3).power(3)
    assert np.allclose([back.coeff(k) for k in range(8)], [s.coeff(k) for k in range(8)], atol=1e-14)


def test_revert_composes_to_identity():
    s = LaurentSeries(0, 1, [1.0, 0.5, -0.25j, 0.2], 10)
    ident = s.compose(s.revert())
    assert abs(ident.coeff(1) - 1) < 1e-14
    for k in range(2, 8):
        assert abs(ident.coeff(k)) < 1e-13


def test_revert_needs_valuation_one():
    with pytest.raises(ValuationError):
        LaurentSeries(0, 2, [1.0], 6).revert()


def test_points_must_match():
    a = LaurentSeries(0, 0, [1.0], 4)
    b = LaurentSeries(AT_INFINITY, 0, [1.0], 4)
    with pytest.raises(Exception):
        series_arith(a, b, "+")


def test_inverse_root_of_cubic():
    f = Polynomial([0, -3, 0, 1])
    x = puiseux_inverse_root(f, 12)
    # x^-3 = f exactly, as series in y = 1/t
    fs = LaurentSeries.from_polynomial(f, AT_INFINITY, 12)
    prod = fs * x.power(3)
    assert abs(prod.coeff(0) - 1) < 1e-14
    for k in range(1, 8):
        assert abs(prod.coeff(k)) < 1e-13


def test_inverse_root_errors():
    with pytest.raises(NotMonic):
        puiseux_inverse_root(Polynomial([0, 0, 2]), 8)
    with pytest.raises(OrderTooSmall):
        puiseux_inverse_root(Polynomial([0, 0, 1]), 0)


def test_residue_oracle():
    # residue at t = 0 of dt / (t^3 - 3t) type rational functions: 1/(t(t-1)(t+2)) -> 1/(-2)
    s = (LaurentSeries(0, 1, [1.0], 10) * LaurentSeries(0, 0, [-1.0, 1.0], 10)
         * LaurentSeries(0, 0, [2.0, 1.0], 10)).reciprocal()
    assert abs(residue_at(s) - (-0.5)) < 1e-15


@settings(max_examples=30, deadline=None)
@given(st.lists(complex_st, min_size=3, max_size=6), st.lists(complex_st, min_size=3, max_size=6))
def test_product_is_commutative_and_matches_polynomials(a, b):
    a[0] = a[0] + 4
    b[0] = b[0] + 4
    sa, sb = LaurentSeries(0, 0, a, 8), LaurentSeries(0, 0, b, 8)
    ab = sa * sb
    ba = sb * sa
    ref = np.convolve(a, b)
    for k in range(min(8, len(ref))):
        assert abs(ab.coeff(k) - ref[k]) < 1e-12
        assert abs(ab.coeff(k) - ba.coeff(k)) < 1e-12
