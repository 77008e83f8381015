import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lietaylor.geometry import (
    GeometryError,
    axes_from_moments,
    basis_set,
    curl_linear,
    geometry_from_axes,
    geometry_from_moments,
    moment_ratios_from_r,
    omega_from_varpi,
    omega_general,
    r3_from,
    rotation_generator,
    skew_from_vector,
    vector_from_skew,
    verify_algebra,
)
from lietaylor.taylor_hierarchy import bracket_linear

EULER_A2 = (0.75, 1.75, 0.5)
axes = st.tuples(*[st.floats(0.1, 10.0)] * 3)


def test_sphere():
    g = geometry_from_axes((1, 1, 1))
    np.testing.assert_array_equal(g.I, [2, 2, 2])
    np.testing.assert_array_equal(g.r, [0, 0, 0])
    assert g.sqrt_g == 1.0


def test_euler_axes_give_preset_moments():
    g = geometry_from_axes(np.sqrt(EULER_A2))
    np.testing.assert_allclose(g.I, [2.25, 1.25, 2.5], atol=1e-14)
    np.testing.assert_allclose(g.r, [5 / 9, -0.2, -0.4], atol=1e-14)


def test_axes_123():
    g = geometry_from_axes((1, 2, 3))
    np.testing.assert_allclose(g.I, [13, 10, 5])
    np.testing.assert_allclose(g.r, [-5 / 13, 0.8, -0.6], atol=1e-15)
    assert g.sqrt_g == 6.0


@pytest.mark.parametrize("a", [(0, 1, 1), (1, -2, 3)])
def test_nonpositive_axis_rejected(a):
    with pytest.raises(GeometryError):
        geometry_from_axes(a)


def test_axes_from_moments_examples():
    np.testing.assert_allclose(axes_from_moments((2, 2, 2)), [1, 1, 1])
    np.testing.assert_allclose(axes_from_moments((2.25, 1.25, 2.5)) ** 2, EULER_A2, atol=1e-14)


def test_axes_from_moments_names_failing_axis():
    with pytest.raises(GeometryError, match="a3"):
        axes_from_moments((1, 1, 3))


def test_r3_from_examples():
    assert r3_from(0, 0) == 0
    assert r3_from(-0.5, 0.25) == pytest.approx(2 / 7)
    assert r3_from(5 / 9, -0.2) == pytest.approx(-0.4)
    with pytest.raises(GeometryError):
        r3_from(1.0, -1.0)


def test_moment_ratios_examples():
    assert moment_ratios_from_r((0, 0, 0)) == (1, 1)
    np.testing.assert_allclose(moment_ratios_from_r((5 / 9, -0.2, -0.4)), (1.25 / 2.25, 2.5 / 2.25))
    # I3/I1 = (1 + r1)/(1 - r3) = 0.5/(5/7) = 0.7
    np.testing.assert_allclose(moment_ratios_from_r((-0.5, 0.25, r3_from(-0.5, 0.25))), (1.2, 0.7))


@given(axes)
@settings(max_examples=100, deadline=None)
def test_geometry_properties(a):
    g = geometry_from_axes(a)
    np.testing.assert_allclose(axes_from_moments(g.I), a, rtol=1e-12)
    r1, r2, r3 = g.r
    assert abs(r1 + r2 + r3 + r1 * r2 * r3) <= 1e-12
    assert np.all(np.abs(g.r) <= 1 + 1e-15)
    assert r3_from(r1, r2) == pytest.approx(r3, abs=1e-12)
    q2, q3 = moment_ratios_from_r(g.r)
    assert q2 == pytest.approx(g.I[1] / g.I[0], rel=1e-12)
    assert q3 == pytest.approx(g.I[2] / g.I[0], rel=1e-12)
    assert (1 - r2) / (1 + r3) == pytest.approx(q3 / q2, rel=1e-12)


def test_geometry_from_moments_roundtrip():
    g = geometry_from_moments((2.25, 1.25, 2.5))
    assert g.constraint_residual() <= 1e-15


def test_basis_sphere_standard_generators():
    b = basis_set(geometry_from_axes((1, 1, 1)))
    for i in range(3):
        np.testing.assert_array_equal(b.e[i], rotation_generator(i))
        np.testing.assert_array_equal(b.curl_e[i], 2 * np.eye(3)[i])
        assert np.trace(b.e[i]) == 0
    assert verify_algebra(b) == 0.0


def test_basis_123():
    g = geometry_from_axes((1, 2, 3))
    b = basis_set(g)
    e1 = b.e[0]
    assert e1[1, 2] == pytest.approx(-2 / 3) and e1[2, 1] == pytest.approx(3 / 2)
    assert np.count_nonzero(e1) == 2
    np.testing.assert_allclose(b.curl_e[0], [13 / 6, 0, 0])
    np.testing.assert_allclose(g.I[0] * b.c[0] / g.sqrt_g, b.curl_e[0])
    np.testing.assert_allclose(e1 @ b.c[1], [0, 0, 3])
    assert verify_algebra(b) <= 1e-12


def test_algebra_random_axes():
    rng = np.random.default_rng(0)
    for _ in range(100):
        b = basis_set(geometry_from_axes(rng.uniform(0.05, 20, 3)))
        assert verify_algebra(b) <= 1e-12
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            np.testing.assert_allclose(bracket_linear(b.e[i], b.e[j]), b.e[k], atol=1e-12)


def test_omega_examples():
    np.testing.assert_allclose(omega_from_varpi((1, 0, 0), geometry_from_axes((1, 1, 1))), [2, 0, 0])
    g = geometry_from_axes(np.sqrt(EULER_A2))
    assert omega_from_varpi((0, 0, 1), g)[2] == pytest.approx(2.5 / np.sqrt(0.65625))
    assert omega_from_varpi((0, 0, 1), g)[2] == pytest.approx(3.0861, abs=1e-4)


@given(axes, st.tuples(*[st.floats(-5, 5)] * 3))
@settings(max_examples=100, deadline=None)
def test_omega_general_agrees(a, w):
    g = geometry_from_axes(a)
    np.testing.assert_allclose(omega_general(w, g.G), omega_from_varpi(w, g), atol=1e-12 * (1 + np.max(np.abs(w)) * np.max(g.I) / g.sqrt_g))


def test_curl_sphere_anchor():
    for i in range(3):
        np.testing.assert_allclose(curl_linear(np.eye(3), rotation_generator(i)), 2 * np.eye(3)[i])
    w = np.array([0.3, -1.2, 0.7])
    np.testing.assert_allclose(curl_linear(np.eye(3), skew_from_vector(w)), 2 * w)
    np.testing.assert_allclose(vector_from_skew(skew_from_vector(w)), w)


def test_curl_metric_example_123():
    g = geometry_from_axes((1, 2, 3))
    np.testing.assert_allclose(curl_linear(g.G, rotation_generator(0)), [13 / 6, 0, 0])


def test_curl_symmetric_field_vanishes():
    S = np.random.default_rng(1).uniform(-1, 1, (3, 3))
    assert np.max(np.abs(curl_linear(np.eye(3), S + S.T))) <= 1e-15


@given(axes)
@settings(max_examples=100, deadline=None)
def test_curl_of_basis_fields(a):
    g = geometry_from_axes(a)
    b = basis_set(g)
    for i in range(3):
        target = g.I[i] * b.c[i] / g.sqrt_g
        np.testing.assert_allclose(curl_linear(np.eye(3), b.e[i]), target, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(g.a[i] * curl_linear(g.G, rotation_generator(i)), target, rtol=1e-12)
