import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frobpencil.engine import fiber_algebra, tangent_to_fiber, unit_field
from frobpencil.errors import FitFailure
from frobpencil.flat import local_flat_chart
from frobpencil.model import critical_data, genus0, genus1
from frobpencil.numeric import Polynomial
from frobpencil.numeric.series import AT_INFINITY, LaurentSeries
from frobpencil.verify import (axiom_suite, cech_engine_delta, cech_multiplication_oracle, coboundary,
                               jumps_flatness_check, jumps_form_from_invariants, loop_holonomy,
                               make_cocycle, pencil_consistency, reduce_cocycle, suite_passed)

G1 = dict(tau=0.3 + 1.1j, gamma=[0.4 - 0.2j, 1.0], c0=0.1, P_a=1.0, P_b=2 + 1j)


@pytest.fixture(scope="module")
def g0():
    return genus0([0.3, -1.2, 0.5 + 0.2j])


@pytest.fixture(scope="module")
def g1():
    return genus1(**G1)


# --------------------------------------------------------------------------
# cocycles

def test_cocycle_relation_holds(g0):
    c = make_cocycle(g0, Polynomial([1, 2, -1, 0.5, 3j, 1]), [0.2, -0.1j, 0.4])
    assert c.relation_defect(g0) < 1e-13


def test_coboundary_has_zero_class(g0):
    cb = coboundary(g0, Polynomial([1, -2, 0.5j]), LaurentSeries(AT_INFINITY, 1, [0.3, 1.0, -0.2], 24))
    assert cb.relation_defect(g0) < 1e-13
    _, values, defect = reduce_cocycle(g0, cb)
    assert np.max(np.abs(values)) < 1e-12
    assert defect < 1e-12


def test_unit_direction_leaves_class_unchanged(g0):
    FA = fiber_algebra(g0)
    c = make_cocycle(g0, Polynomial([1, 2, -1, 0.5, 3j]), [0.2, -0.1j])
    _, before, _ = reduce_cocycle(g0, c)
    e = tangent_to_fiber(FA, unit_field(FA).chart)
    _, after, _ = cech_multiplication_oracle(g0, e, c)
    assert np.allclose(before, after, atol=1e-12)


def test_product_values_are_componentwise(g0):
    """Reduced product values equal (d_xi f)(q_s) times the class values."""
    crit = critical_data(g0)
    FA = fiber_algebra(g0, 2, crit)
    xi = tangent_to_fiber(FA, [0.3, -1j, 2.0])
    c = make_cocycle(g0, Polynomial([0.5, 1, 2, -1, 0.7]), [1.0, 0.5])
    _, cv, _ = reduce_cocycle(g0, c, crit)
    _, pv, _ = cech_multiplication_oracle(g0, xi, c, crit)
    h = Polynomial(xi.chart)(crit.points)
    assert np.allclose(pv, h * cv, atol=1e-12)


def test_cocycle_oracle_is_genus0_only(g1):
    with pytest.raises(ValueError):
        cech_multiplication_oracle(g1, None, None)


@settings(max_examples=20, deadline=None)
@given(st.integers(3, 6), st.integers(0, 2 ** 31))
def test_oracle_agrees_with_engine_property(n, seed):
    rng = np.random.default_rng(seed)
    m = genus0(0.5 * (rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)))
    FA = fiber_algebra(m)
    d = cech_engine_delta(m, rng, trials=2)
    assert d["delta"] < 1e-12 * FA.condition
    assert d["cocycle_defect"] < 1e-10


# --------------------------------------------------------------------------
# pencil

def test_pencil_shape(g0):
    rep = pencil_consistency(g0)
    assert rep.fit_residual < 1e-6
    assert rep.residue_delta < 1e-6


def test_pencil_fault_injection(g0):
    rep = pencil_consistency(g0, perturb=lambda z, A: A + 1e-3 / z ** 2)
    assert rep.fit_residual > 1e-4
    with pytest.raises(FitFailure):
        pencil_consistency(g0, perturb=lambda z, A: A + 1e-3 / z ** 2, raise_on_failure=True)


# --------------------------------------------------------------------------
# jumps model

def test_jump_relation(g1):
    chi, _ = jumps_form_from_invariants(g1, np.array([0.3, 0.7, 1.0, -0.4], complex))
    assert abs(chi.lam - 0.7) < 1e-8
    pts = np.linspace(0.1, 0.9, 7) + 0.13j
    assert chi.jump_defect(g1, pts) < 1e-8


def test_constant_family_without_jump_or_pole(g1):
    """a-period 1, no jump, no pole: the form du, constant along any path."""
    inv = np.array([1, 0, 0, 0], complex)
    chi, _ = jumps_form_from_invariants(g1, inv)
    assert np.allclose(chi.coeffs, [1, 0, 0, 0], atol=1e-10)
    rep = jumps_flatness_check(g1, np.array([0, 0.02, 0.01j, 0]), inv, steps=2)
    assert rep.route_delta_flat < 1e-10
    assert rep.route_delta_levi_civita < 1e-5


def test_jumps_transport_matches_levi_civita(g1):
    inv = np.array([0.3, 0.7, 1.0, -0.4], complex)
    rep = jumps_flatness_check(g1, np.array([0, 0.03, 0.02j, 0]), inv, steps=4)
    assert rep.max_jump_defect < 1e-8
    assert rep.route_delta_flat < 1e-8
    assert rep.route_delta_levi_civita < 1e-5


def test_closed_loop_holonomy(g1):
    FA = fiber_algebra(g1)
    v0 = np.linalg.solve(local_flat_chart(FA).jacobian, np.array([1, 0.5, -0.2, 0.3], complex))
    e0 = np.array([0, 0.02, 0, 0], complex)
    e1 = np.array([0, 0, 0.02, 0], complex)
    assert loop_holonomy(g1, 2, e0, e1, v0, FA.critical.points) < 1e-5


# --------------------------------------------------------------------------
# axiom battery

def test_genus0_suite_passes():
    m = genus0([0.1 + 0.2j, -0.7, 0.4])
    recs = axiom_suite(m, 2, seed=0)
    assert suite_passed(recs), [r for r in recs if not r.passed]
    names = {r.name for r in recs}
    for required in ("commutativity", "associativity", "unit", "eta_symmetry", "eta_nondegenerate",
                     "compatibility", "k_independence", "eta_flat_constant", "potentiality", "wdvv"):
        assert required in names


def test_suite_reports_nonsemisimple_point():
    recs = axiom_suite(genus0([0, 0, 0]))
    assert not suite_passed(recs)
    assert recs[0].name == "NonSemisimplePoint"


def test_suite_thresholds_are_enforced():
    m = genus0([0.1 + 0.2j, -0.7, 0.4])
    recs = axiom_suite(m, 2, seed=0, thresholds={"default": 0.0, "flatness": 0.0,
                                                 "potentiality": 0.0, "wdvv": 0.0})
    assert not suite_passed(recs)
