from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frobpencil.engine import (chart_metric, chart_structure_constants,
                               chart_structure_constants_via_section, fiber_algebra, from_fiber,
                               metric, multiply, primitive_section, section_polar_part,
                               tangent_to_fiber, unit_field)
from frobpencil.errors import KOutOfRange, NonSemisimplePoint, NotPrimitive, SingularFrame
from frobpencil.model import critical_data, genus0, genus1

small = st.floats(-1.5, 1.5)
G1 = dict(tau=0.3 + 1.1j, gamma=[0.4 - 0.2j, 1.0], c0=0.1, P_a=1.0, P_b=2 + 1j)


@pytest.fixture(scope="module")
def g1():
    return genus1(**G1)


def test_cubic_weights():
    FA = fiber_algebra(genus0([0, -3]))
    assert np.allclose(FA.weights, [-1 / 6, 1 / 6])
    assert np.allclose(FA.rho.values_at_critical, [-1, -1])


@pytest.mark.parametrize("k", [2, 3, 4])
def test_genus0_polar_part_is_pure(k):
    m = genus0([0.3, -1.0, 0.5 + 0.2j])
    rho = primitive_section(m, k)
    pc = section_polar_part(m, rho, mmax=k + 2)
    expected = np.zeros(k + 2, complex)
    expected[k - 1] = 1.0
    assert np.allclose(pc, expected, atol=1e-12)


@pytest.mark.parametrize("k", [2, 3])
def test_genus1_polar_part_and_period(g1, k):
    rho = primitive_section(g1, k)
    pc = section_polar_part(g1, rho, mmax=k + 2)
    expected = np.zeros(k + 2, complex)
    expected[k - 1] = 1.0
    assert np.allclose(pc, expected, atol=1e-10)
    assert abs(rho.a_period) < 1e-10


def test_k_out_of_range():
    m = genus0([0.3, -1.0])
    with pytest.raises(KOutOfRange):
        primitive_section(m, 1)
    with pytest.raises(KOutOfRange):
        primitive_section(m, 4)


def test_not_primitive_raises_on_metric():
    # f = t^4 + a2 t^2 + a0 has q = 0 critical and rho_3 = -t dt vanishes there
    m = genus0([0.4, 0.0, -1.0])
    FA = fiber_algebra(m, 3)
    assert not FA.rho.primitive
    X = unit_field(FA)
    with pytest.raises(NotPrimitive):
        metric(FA, X, X)


def test_singular_frame_detected():
    FA = fiber_algebra(genus0([0.3, -1.0, 0.5]))
    H = FA.fiber_matrix.copy()
    H[:, 1] = H[:, 0]
    bad = replace(FA, fiber_matrix=H, condition=float(np.linalg.cond(H)))
    with pytest.raises(SingularFrame):
        from_fiber(bad, np.ones(3))


def test_nonsemisimple_rejected():
    with pytest.raises(NonSemisimplePoint):
        fiber_algebra(genus0([0, 0, 0]))


def test_unit_is_constant_direction(g1):
    FA = fiber_algebra(g1)
    e = unit_field(FA)
    assert np.allclose(e.chart, [0, 0, 0, 1], atol=1e-9)
    FA0 = fiber_algebra(genus0([0.3, -1.0, 0.5]))
    assert np.allclose(unit_field(FA0).chart, [1, 0, 0])


def test_genus1_structure_is_k_independent(g1):
    crit = critical_data(g1)
    C2 = chart_structure_constants_via_section(fiber_algebra(g1, 2, crit))
    C3 = chart_structure_constants_via_section(fiber_algebra(g1, 3, crit))
    assert np.max(np.abs(C2 - C3)) < 1e-8 * max(1, np.max(np.abs(C2)))
    assert np.max(np.abs(C2 - chart_structure_constants(fiber_algebra(g1, 2, crit)))) < 1e-8 * np.max(np.abs(C2))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(small, small), min_size=3, max_size=3), st.integers(0, 2 ** 31))
def test_frobenius_algebra_property(pairs, seed):
    m = genus0([complex(a, b) for a, b in pairs])
    try:
        FA = fiber_algebra(m)
    except NonSemisimplePoint:
        return
    if FA.condition > 1e8:
        return
    rng = np.random.default_rng(seed)
    X, Y, Z = [tangent_to_fiber(FA, rng.normal(size=3) + 1j * rng.normal(size=3)) for _ in range(3)]
    XY = multiply(FA, X, Y)
    tol = 1e-8 * FA.condition
    assert np.allclose(XY.chart, multiply(FA, Y, X).chart, atol=tol)
    left = multiply(FA, tangent_to_fiber(FA, XY.chart), Z)
    right = multiply(FA, X, tangent_to_fiber(FA, multiply(FA, Y, Z).chart))
    assert np.allclose(left.chart, right.chart, atol=tol * max(1, np.max(np.abs(left.chart))))
    a = metric(FA, tangent_to_fiber(FA, XY.chart), Z)
    b = metric(FA, X, tangent_to_fiber(FA, multiply(FA, Y, Z).chart))
    assert abs(a - b) < tol * max(1, abs(a))
    g = chart_metric(FA)
    assert np.allclose(g, g.T)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.tuples(small, small), min_size=2, max_size=4))
def test_k_independence_property(pairs):
    m = genus0([complex(a, b) for a, b in pairs])
    try:
        crit = critical_data(m)
        FA2, FA3 = fiber_algebra(m, 2, crit), fiber_algebra(m, 3, crit)
    except NonSemisimplePoint:
        return
    if not FA3.rho.primitive or FA2.condition > 1e8:
        return
    C2 = chart_structure_constants_via_section(FA2)
    C3 = chart_structure_constants_via_section(FA3)
    # rounding is amplified by the frame condition and by the spread of |rho_k| over the critical points
    spread = max(np.max(np.abs(F.rho.values_at_critical)) / np.min(np.abs(F.rho.values_at_critical))
                 for F in (FA2, FA3))
    assert np.max(np.abs(C2 - C3)) < 1e-9 * FA2.condition * spread * max(1, np.max(np.abs(C2)))
