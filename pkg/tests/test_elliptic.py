import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frobpencil import elliptic as ell
from frobpencil.elliptic import _eval_loop, _eval_numpy
from frobpencil.errors import LowerHalfPlane, PoleAtLatticePoint
from frobpencil.verify import elliptic_checks

tau_st = st.builds(complex, st.floats(-0.5, 0.5), st.floats(0.7, 2.0))


def test_square_lattice_has_vanishing_g3():
    L = ell.lattice_init(1j)
    assert abs(L.g3) < 1e-12


def test_hexagonal_lattice_has_vanishing_g2():
    L = ell.lattice_init(np.exp(1j * np.pi / 3))
    assert abs(L.g2) < 1e-11


def test_lower_half_plane_rejected():
    with pytest.raises(LowerHalfPlane):
        ell.lattice_init(0.3 - 1j)


def test_pole_at_lattice_point():
    L = ell.lattice_init(0.3 + 1.1j)
    with pytest.raises(PoleAtLatticePoint):
        ell.wp(L, 1 + L.tau)


def test_invariants_agree_with_lattice_sum_oracle():
    for tau in (0.3 + 1.1j, -0.2 + 0.8j, 1.7j):
        L = ell.lattice_init(tau)
        g2, g3 = ell.invariants_lattice_sum(tau)
        assert abs(L.g2 - g2) < 1e-10 * max(1, abs(g2))
        assert abs(L.g3 - g3) < 1e-10 * max(1, abs(g3))


def test_kernels_agree():
    L = ell.lattice_init(0.3 + 1.1j)
    rng = np.random.default_rng(0)
    r = (rng.uniform(-0.5, 0.5, 50) + rng.uniform(-0.5, 0.5, 50) * L.tau).astype(complex)
    a = _eval_loop(r, L.q_index, L.q_lambert, L.eta1)
    b = _eval_numpy(r, L.q_index, L.q_lambert, L.eta1)
    for x, y in zip(a, b):
        assert np.max(np.abs(x - y) / np.maximum(1, np.abs(x))) < 1e-12


def test_periods_of_wp_are_minus_quasi_periods():
    L = ell.lattice_init(0.3 + 1.1j)
    fa = ell.contour_period(L, lambda u: ell.wp(L, u), ell.make_cycle(L, "a"))
    fb = ell.contour_period(L, lambda u: ell.wp(L, u), ell.make_cycle(L, "b"))
    assert abs(fa + L.eta1) < 1e-10
    assert abs(fb + L.eta2) < 1e-10


def test_series_matches_evaluation():
    L = ell.lattice_init(0.3 + 1.1j)
    u = 0.05 + 0.03j
    for j in range(3):
        s = ell.wp_series(L, 14, j)
        assert abs(s.evaluate(u) - ell.wp(L, u, j)) < 1e-9 * max(1, abs(ell.wp(L, u, j)))
    assert abs(ell.zeta_series(L, 14).evaluate(u) - ell.zeta_w(L, u)) < 1e-10


def test_period_system_hurwitz_case():
    L = ell.lattice_init(0.3 + 1.1j)
    assert ell.solve_period_system(L, 0, 0) == (0, 0)


@settings(max_examples=10, deadline=None)
@given(tau_st, st.integers(0, 2 ** 31))
def test_elliptic_identities_property(tau, seed):
    for rec in elliptic_checks(tau, np.random.default_rng(seed), count=20):
        assert rec.passed, rec


@settings(max_examples=20, deadline=None)
@given(tau_st, st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.integers(-3, 3), st.integers(-3, 3))
def test_lattice_translation_property(tau, a, b, k, m):
    L = ell.lattice_init(tau)
    u = a + b * L.tau
    p = ell.wp(L, u)
    assert abs(ell.wp(L, u + k + m * L.tau) - p) < 1e-9 * max(1, abs(p))
    dz = ell.zeta_w(L, u + k + m * L.tau) - ell.zeta_w(L, u)
    assert abs(dz - (k * L.eta1 + m * L.eta2)) < 1e-9 * max(1, abs(dz))
