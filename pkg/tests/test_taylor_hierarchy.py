import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lietaylor import polyoracle
from lietaylor.geometry import rotation_generator
from lietaylor.taylor_hierarchy import (
    ScalarHierarchy,
    TaylorHierarchy,
    bracket_linear,
    diagnostics,
    hierarchy_rhs,
    mass_hierarchy_rhs,
    symmetrize,
)
from lietaylor.verify import commutator_flow, skew_flow

mat3 = arrays(np.float64, (3, 3), elements=st.floats(-1, 1))


def only_order1(m):
    return TaylorHierarchy(order1=m)


def test_bracket_self_is_zero():
    a = np.arange(9.0).reshape(3, 3)
    assert np.array_equal(bracket_linear(a, a), np.zeros((3, 3)))


def test_bracket_rotation_generators_close():
    M1, M2, M3 = (rotation_generator(i) for i in range(3))
    assert M1[1, 2] == -1 and M1[2, 1] == 1
    np.testing.assert_array_equal(bracket_linear(M1, M2), M3)


def test_bracket_matches_pointwise_lie_bracket():
    rng = np.random.default_rng(1)
    A, B = rng.uniform(-1, 1, (2, 3, 3))
    got = hierarchy_rhs(only_order1(A), only_order1(B))
    ref = polyoracle.hierarchy_rhs_oracle(only_order1(A), only_order1(B))
    np.testing.assert_allclose(bracket_linear(A, B), ref.order1, atol=1e-14)
    np.testing.assert_allclose(got.order1, ref.order1, atol=1e-14)


def test_zero_q_gives_zero():
    u = TaylorHierarchy.random(np.random.default_rng(0))
    assert np.all(hierarchy_rhs(u, TaylorHierarchy.zeros()).flat() == 0.0)


def test_order1_only_inputs_reduce_to_commutator():
    rng = np.random.default_rng(2)
    A, B = rng.uniform(-1, 1, (2, 3, 3))
    d = hierarchy_rhs(only_order1(A), only_order1(B))
    np.testing.assert_allclose(d.order1, A @ B - B @ A, atol=1e-15)
    assert np.all(d.order0 == 0) and np.all(d.order2 == 0) and np.all(d.order3 == 0)


def test_oracle_equivalence_many_pairs():
    rng = np.random.default_rng(3)
    for _ in range(100):
        u, q = TaylorHierarchy.random(rng), TaylorHierarchy.random(rng)
        ref = polyoracle.hierarchy_rhs_oracle(u, q)
        assert polyoracle.max_difference(hierarchy_rhs(u, q), ref) <= 1e-12


def test_output_order3_slot_zero_and_symmetric():
    rng = np.random.default_rng(4)
    d = hierarchy_rhs(TaylorHierarchy.random(rng), TaylorHierarchy.random(rng))
    assert np.all(d.order3 == 0)
    assert d.symmetry_defect() == 0.0


def test_closure_lower_orders_do_not_see_higher():
    rng = np.random.default_rng(5)
    u = TaylorHierarchy.random(rng, orders=(1, 2, 3))
    q = TaylorHierarchy.random(rng, orders=(1, 2, 3))
    base = hierarchy_rhs(u, q)
    q_more = TaylorHierarchy(q.order0, q.order1, q.order2, symmetrize(rng.uniform(-1, 1, (3,) * 4)))
    u_more = TaylorHierarchy(u.order0, u.order1, u.order2, symmetrize(rng.uniform(-1, 1, (3,) * 4)))
    alt = hierarchy_rhs(u_more, q_more)
    np.testing.assert_array_equal(base.order1, alt.order1)
    np.testing.assert_array_equal(base.order2, alt.order2)
    q_o2 = TaylorHierarchy(q.order0, q.order1, symmetrize(rng.uniform(-1, 1, (3,) * 3)))
    np.testing.assert_array_equal(hierarchy_rhs(u, q_o2).order1, base.order1)


@given(mat3, mat3, arrays(np.float64, (3, 3), elements=st.floats(-1, 1)))
@settings(max_examples=60, deadline=None)
def test_conjugation_covariance(V, K, M):
    ell = np.eye(3) * 2.0 + M  # diagonally dominant, so invertible
    inv = np.linalg.inv(ell)
    lhs = bracket_linear(ell @ V @ inv, ell @ K @ inv)
    rhs = ell @ bracket_linear(V, K) @ inv
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


@given(mat3, mat3)
@settings(max_examples=60, deadline=None)
def test_bracket_antisymmetric_and_trace_free(A, B):
    C = bracket_linear(A, B)
    np.testing.assert_allclose(C, -bracket_linear(B, A), atol=1e-15)
    assert abs(np.trace(C)) <= 1e-14


def test_mass_incompressible_uniform_is_zero():
    rng = np.random.default_rng(6)
    U1 = rng.uniform(-1, 1, (3, 3))
    U1 -= np.trace(U1) / 3 * np.eye(3)
    u = TaylorHierarchy(order1=U1)
    d = mass_hierarchy_rhs(u, ScalarHierarchy(1.7, np.zeros(3), np.zeros((3, 3))))
    assert abs(d.s0) < 1e-15 and np.all(np.abs(d.s1) < 1e-15) and np.all(np.abs(d.s2) < 1e-15)


def test_mass_uniform_expansion():
    d = mass_hierarchy_rhs(TaylorHierarchy(order1=np.eye(3)), ScalarHierarchy(1.0, np.zeros(3), np.zeros((3, 3))))
    assert d.s0 == pytest.approx(-3.0)


def test_mass_oracle_many_pairs():
    rng = np.random.default_rng(7)
    for _ in range(100):
        u, rho = TaylorHierarchy.random(rng), ScalarHierarchy.random(rng)
        ref = polyoracle.mass_rhs_oracle(u, rho)
        assert polyoracle.max_scalar_difference(mass_hierarchy_rhs(u, rho), ref) <= 1e-12


def test_diagnostics_identity():
    d = diagnostics(TaylorHierarchy(order1=np.eye(3)))
    assert d.trace_powers == (3.0, 3.0, 3.0, 3.0)
    assert d.frobenius1 == 3.0 and d.a0 == 0.0 and math.isinf(d.lam)


def test_diagnostics_diag123():
    d = diagnostics(TaylorHierarchy(order1=np.diag([1.0, 2.0, 3.0])))
    assert d.trace_powers == (6.0, 14.0, 36.0, 98.0)


def test_diagnostics_a0_ratio():
    q1 = np.zeros((3, 3))
    q1[0, 1] = 4.0
    d = diagnostics(TaylorHierarchy(order0=np.array([2.0, 0, 0]), order1=q1))
    assert d.a0 == pytest.approx(0.5)


def test_random_is_symmetric():
    h = TaylorHierarchy.random(np.random.default_rng(8))
    assert h.symmetry_defect() <= 1e-15
    assert np.array_equal(TaylorHierarchy.from_flat(h.flat()).flat(), h.flat())


def test_evaluate_matches_polynomial():
    rng = np.random.default_rng(9)
    h = TaylorHierarchy.random(rng)
    x = rng.uniform(-1, 1, 3)
    polys = polyoracle.field_to_polys(h)
    e = np.indices((4, 4, 4))
    mono = x[0] ** e[0] * x[1] ** e[1] * x[2] ** e[2]
    ref = np.array([np.sum(p * mono) for p in polys])
    np.testing.assert_allclose(h.evaluate(x), ref, atol=1e-13)


def test_commutator_flow_conserves_trace_powers():
    rng = np.random.default_rng(10)
    U = rng.uniform(-0.2, 0.2, (3, 3))
    Q = rng.uniform(-1, 1, (3, 3))
    traj = commutator_flow(U, Q)
    n = np.linalg.norm(Q)
    for L in range(1, 5):
        tr = np.array([np.trace(np.linalg.matrix_power(y.reshape(3, 3), L)) for y in traj.states])
        assert np.max(np.abs(tr - tr[0])) / max(abs(tr[0]), n**L) <= 1e-8


def test_skew_flow_conserves_frobenius_sums():
    rng = np.random.default_rng(11)
    A = rng.uniform(-1, 1, (3, 3))
    q = TaylorHierarchy.random(rng, orders=(1, 2))
    traj = skew_flow(A - A.T, q)
    f = [diagnostics(TaylorHierarchy.from_flat(np.concatenate([y, np.zeros(81)]))) for y in traj.states]
    f1 = np.array([d.frobenius1 for d in f])
    f2 = np.array([d.frobenius2 for d in f])
    assert np.max(np.abs(f1 / f1[0] - 1)) <= 1e-8
    assert np.max(np.abs(f2 / f2[0] - 1)) <= 1e-8
