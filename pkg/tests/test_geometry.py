"""Unit tests for the pure geometry kernels: frozen hand-computed values,
algebraic identities, and model-conversion consistency."""

import numpy as np
import pytest

from gyronet import geometry as geo

from conftest import random_ball_points


# ---------------------------------------------------------------------------
# Mobius addition / negation / gyration
# ---------------------------------------------------------------------------

def test_mobius_add_left_identity():
    x = np.array([0.3, 0.4])
    np.testing.assert_allclose(geo.mobius_add(np.zeros(2), x), x, atol=1e-15)


def test_mobius_add_left_inverse():
    x = np.array([0.3, 0.4])
    np.testing.assert_allclose(geo.mobius_add(x, geo.mobius_neg(x)), 0.0, atol=1e-15)


def test_mobius_add_collinear_value():
    # tanh(2 atanh 0.5) = 0.8
    out = geo.mobius_add(np.array([0.5, 0.0]), np.array([0.5, 0.0]))
    np.testing.assert_allclose(out, [0.8, 0.0], atol=1e-12)


def test_mobius_add_dimension_mismatch():
    with pytest.raises(ValueError):
        geo.mobius_add(np.zeros(2), np.zeros(3))


def test_mobius_neg():
    np.testing.assert_array_equal(geo.mobius_neg(np.zeros(2)), np.zeros(2))
    np.testing.assert_array_equal(geo.mobius_neg(np.array([0.3, -0.4])), [-0.3, 0.4])


def test_mobius_add_noncommutative_witness():
    a = np.array([0.5, 0.1])
    b = np.array([-0.2, 0.6])
    diff = np.linalg.norm(geo.mobius_add(a, b) - geo.mobius_add(b, a))
    assert diff > 1e-3


def test_gyration_identity_argument():
    rng = np.random.default_rng(1)
    b = random_ball_points(rng, 5, 3)
    v = random_ball_points(rng, 5, 3)
    np.testing.assert_allclose(geo.gyration(np.zeros(3), b, v), v, atol=1e-12)


def test_gyration_norm_preserving():
    rng = np.random.default_rng(2)
    a, b, v = (random_ball_points(rng, 200, 3) for _ in range(3))
    gyr = geo.gyration(a, b, v)
    np.testing.assert_allclose(np.linalg.norm(gyr, axis=-1),
                               np.linalg.norm(v, axis=-1), atol=1e-9)


def test_gyroassociativity_specific():
    a = np.array([0.1, 0.2])
    b = np.array([-0.3, 0.1])
    v = np.array([0.2, 0.2])
    lhs = geo.mobius_add(a, geo.mobius_add(b, v))
    rhs = geo.mobius_add(geo.mobius_add(a, b), geo.gyration(a, b, v))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


# ---------------------------------------------------------------------------
# Scalar multiplication / conformal factor
# ---------------------------------------------------------------------------

def test_scalar_mul_identity_and_zero():
    x = np.array([0.3, 0.4])
    np.testing.assert_allclose(geo.mobius_scalar_mul(1.0, x), x, atol=1e-12)
    np.testing.assert_array_equal(geo.mobius_scalar_mul(3.0, np.zeros(2)), np.zeros(2))


def test_scalar_mul_two_matches_add():
    x = np.array([0.5, 0.0])
    np.testing.assert_allclose(geo.mobius_scalar_mul(2.0, x), [0.8, 0.0], atol=1e-12)
    np.testing.assert_allclose(geo.mobius_scalar_mul(2.0, x),
                               geo.mobius_add(x, x), atol=1e-12)


def test_scalar_mul_integer_distributivity():
    rng = np.random.default_rng(3)
    p = random_ball_points(rng, 50, 3, radius=0.5)
    acc = p.copy()
    for n in range(2, 6):
        acc = geo.mobius_add(acc, p)
        np.testing.assert_allclose(geo.mobius_scalar_mul(n, p), acc, atol=1e-7)


def test_conformal_factor_values():
    assert geo.conformal_factor(np.zeros(2)) == 2.0
    np.testing.assert_allclose(geo.conformal_factor(np.array([0.6, 0.0])), 3.125)
    # flat limit c -> infinity
    np.testing.assert_allclose(geo.conformal_factor(np.array([0.6, 0.0]), c=1e8), 2.0)


# ---------------------------------------------------------------------------
# exp / log / distance / transport on the ball
# ---------------------------------------------------------------------------

def test_exp_map_poincare_values():
    x = np.array([0.3, -0.2])
    np.testing.assert_allclose(geo.exp_map_poincare(x, np.zeros(2)), x, atol=1e-15)
    out = geo.exp_map_poincare(np.zeros(2), np.array([np.arctanh(0.5), 0.0]))
    np.testing.assert_allclose(out, [0.5, 0.0], atol=1e-12)


def test_log_map_poincare_values():
    x = np.array([0.3, -0.2])
    np.testing.assert_allclose(geo.log_map_poincare(x, x), 0.0, atol=1e-12)
    out = geo.log_map_poincare(np.zeros(2), np.array([0.5, 0.0]))
    np.testing.assert_allclose(out, [np.arctanh(0.5), 0.0], atol=1e-12)


def test_exp_log_round_trip_random():
    rng = np.random.default_rng(4)
    x = random_ball_points(rng, 1000, 3, radius=0.8)
    v = rng.normal(size=(1000, 3))
    v *= 2.0 * rng.random((1000, 1)) / np.linalg.norm(v, axis=-1, keepdims=True)
    y = geo.exp_map_poincare(x, v)
    np.testing.assert_allclose(geo.log_map_poincare(x, y), v, atol=1e-8)


def test_poincare_distance_values():
    x = np.array([0.3, 0.1])
    assert geo.poincare_distance(x, x) == 0.0
    np.testing.assert_allclose(
        geo.poincare_distance(np.zeros(2), np.array([0.6, 0.0])),
        2.0 * np.arctanh(0.6), atol=1e-12)


def test_poincare_distance_symmetry():
    rng = np.random.default_rng(5)
    x = random_ball_points(rng, 200, 3)
    y = random_ball_points(rng, 200, 3)
    np.testing.assert_allclose(geo.poincare_distance(x, y),
                               geo.poincare_distance(y, x), atol=1e-12)


def test_distance_along_exp_geodesic():
    # d(0, exp_0(v)) = 2||v|| at the origin where lambda = 2
    v = np.array([0.4, 0.3])
    d = geo.poincare_distance(np.zeros(2), geo.exp_map_poincare(np.zeros(2), v))
    np.testing.assert_allclose(d, 2.0 * np.linalg.norm(v), atol=1e-10)


def test_transport_from_origin():
    v = np.array([1.0, 0.0])
    np.testing.assert_allclose(geo.transport_from_origin_poincare(np.zeros(2), v), v)
    out = geo.transport_from_origin_poincare(np.array([0.6, 0.0]), v)
    np.testing.assert_allclose(out, [0.64, 0.0], atol=1e-12)


def test_transport_preserves_metric_norm():
    rng = np.random.default_rng(6)
    x = random_ball_points(rng, 100, 3)
    v = rng.normal(size=(100, 3))
    moved = geo.transport_from_origin_poincare(x, v)
    lam = geo.conformal_factor(x)
    np.testing.assert_allclose(lam * np.linalg.norm(moved, axis=-1),
                               2.0 * np.linalg.norm(v, axis=-1), atol=1e-12)


# ---------------------------------------------------------------------------
# Matvec, bias translation, lifted maps
# ---------------------------------------------------------------------------

def test_mobius_matvec_values():
    x = np.array([0.5, 0.0])
    np.testing.assert_allclose(geo.mobius_matvec(np.eye(2), x), x, atol=1e-12)
    np.testing.assert_array_equal(geo.mobius_matvec(np.eye(2), np.zeros(2)), np.zeros(2))
    out = geo.mobius_matvec(2.0 * np.eye(2), x)
    np.testing.assert_allclose(out, [0.8, 0.0], atol=1e-12)


def test_mobius_matvec_zero_image():
    M = np.array([[1.0, -1.0], [1.0, -1.0]])
    out = geo.mobius_matvec(M, np.array([0.3, 0.3]))
    np.testing.assert_array_equal(out, np.zeros(2))


def test_bias_translate_matches_mobius_add():
    x = np.array([0.5, 0.0])
    np.testing.assert_allclose(geo.bias_translate(x, np.zeros(2)), x, atol=1e-12)
    np.testing.assert_allclose(geo.bias_translate(np.zeros(2), x), x, atol=1e-12)
    np.testing.assert_allclose(geo.bias_translate(x, x), [0.8, 0.0], atol=1e-8)
    rng = np.random.default_rng(7)
    a = random_ball_points(rng, 100, 3)
    b = random_ball_points(rng, 100, 3)
    np.testing.assert_allclose(geo.bias_translate(a, b), geo.mobius_add(a, b), atol=1e-8)


def test_lift_map():
    x = np.array([0.4, 0.2])
    np.testing.assert_allclose(geo.lift_map(lambda v: v, x), x, atol=1e-12)
    np.testing.assert_allclose(geo.lift_map(lambda v: 0.0 * v, x), 0.0, atol=1e-15)
    np.testing.assert_allclose(geo.lift_map(lambda v: 1.7 * v, x),
                               geo.mobius_scalar_mul(1.7, x), atol=1e-9)


# ---------------------------------------------------------------------------
# Hyperboloid model
# ---------------------------------------------------------------------------

def test_lorentz_inner_values():
    o = np.array([0.0, 0.0, 1.0])
    assert geo.lorentz_inner(o, o) == -1.0
    assert geo.lorentz_inner(np.array([1.0, 2, 3]), np.array([4.0, 5, 6])) == -4.0
    with pytest.raises(ValueError):
        geo.lorentz_inner(np.zeros(3), np.zeros(4))


def test_lorentz_inner_bilinear():
    rng = np.random.default_rng(8)
    u, w, v = rng.normal(size=(3, 20, 4))
    np.testing.assert_allclose(geo.lorentz_inner(u + w, v),
                               geo.lorentz_inner(u, v) + geo.lorentz_inner(w, v),
                               atol=1e-12)


def test_hyperboloid_distance_values():
    o = geo.hyperboloid_origin(2)
    assert geo.hyperboloid_distance(o, o) == 0.0
    p = np.array([np.sinh(1.0), 0.0, np.cosh(1.0)])
    np.testing.assert_allclose(geo.hyperboloid_distance(o, p), 1.0, atol=1e-12)


def test_tangent_project():
    o = geo.hyperboloid_origin(2)
    v = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(geo.tangent_project(o, v), [1.0, 2.0, 0.0])
    # idempotent and tangent
    rng = np.random.default_rng(9)
    x = geo.to_hyperboloid(random_ball_points(rng, 50, 3, radius=0.7))
    w = geo.tangent_project(x, rng.normal(size=(50, 4)))
    np.testing.assert_allclose(geo.tangent_project(x, w), w, atol=1e-12)
    np.testing.assert_allclose(geo.lorentz_inner(x, w), 0.0, atol=1e-12)


def test_exp_map_hyperboloid_values():
    o = geo.hyperboloid_origin(2)
    np.testing.assert_allclose(geo.exp_map_hyperboloid(o, np.zeros(3)), o, atol=1e-15)
    out = geo.exp_map_hyperboloid(o, np.array([1.0, 0.0, 0.0]))
    np.testing.assert_allclose(out, [np.sinh(1.0), 0.0, np.cosh(1.0)], atol=1e-12)


def test_exp_map_hyperboloid_geodesic_length():
    rng = np.random.default_rng(10)
    x = geo.to_hyperboloid(random_ball_points(rng, 100, 3, radius=0.7))
    v = geo.tangent_project(x, rng.normal(size=(100, 4)))
    nv = np.sqrt(geo.lorentz_inner(v, v))
    np.testing.assert_allclose(geo.hyperboloid_distance(x, geo.exp_map_hyperboloid(x, v)),
                               nv, atol=1e-8)


def test_hyperboloid_log_exp_round_trip():
    rng = np.random.default_rng(11)
    x = geo.to_hyperboloid(random_ball_points(rng, 200, 3, radius=0.8))
    y = geo.to_hyperboloid(random_ball_points(rng, 200, 3, radius=0.8))
    v = geo.log_map_hyperboloid(x, y)
    np.testing.assert_allclose(geo.exp_map_hyperboloid(x, v), y, atol=1e-8)


def test_hyperboloid_parallel_transport():
    rng = np.random.default_rng(12)
    x = geo.to_hyperboloid(random_ball_points(rng, 100, 3, radius=0.7))
    y = geo.to_hyperboloid(random_ball_points(rng, 100, 3, radius=0.7))
    w = geo.tangent_project(x, rng.normal(size=(100, 4)))
    out = geo.hyperboloid_parallel_transport(x, y, w)
    # transport to the same point is the identity
    np.testing.assert_allclose(geo.hyperboloid_parallel_transport(x, x, w), w, atol=1e-12)
    # tangency at y and Lorentzian norm preservation
    np.testing.assert_allclose(geo.lorentz_inner(y, out), 0.0, atol=1e-8)
    np.testing.assert_allclose(geo.lorentz_inner(out, out),
                               geo.lorentz_inner(w, w), atol=1e-8)


# ---------------------------------------------------------------------------
# Model conversions
# ---------------------------------------------------------------------------

def test_to_poincare_values():
    np.testing.assert_allclose(geo.to_poincare(np.array([0.0, 0.0, 1.0])), [0.0, 0.0])
    p = np.array([np.sinh(1.0), 0.0, np.cosh(1.0)])
    np.testing.assert_allclose(geo.to_poincare(p), [np.tanh(0.5), 0.0], atol=1e-12)


def test_to_hyperboloid_values():
    np.testing.assert_allclose(geo.to_hyperboloid(np.zeros(2)), [0.0, 0.0, 1.0])
    out = geo.to_hyperboloid(np.array([np.tanh(0.5), 0.0]))
    np.testing.assert_allclose(out, [np.sinh(1.0), 0.0, np.cosh(1.0)], atol=1e-12)


def test_conversion_round_trip_and_invariant():
    rng = np.random.default_rng(13)
    y = random_ball_points(rng, 1000, 3, radius=0.9)
    h = geo.to_hyperboloid(y)
    np.testing.assert_allclose(geo.lorentz_inner(h, h), -1.0, atol=1e-9)
    np.testing.assert_allclose(geo.to_poincare(h), y, atol=1e-10)


def test_conversion_isometry():
    rng = np.random.default_rng(14)
    u = geo.to_hyperboloid(random_ball_points(rng, 500, 3, radius=0.85))
    v = geo.to_hyperboloid(random_ball_points(rng, 500, 3, radius=0.85))
    np.testing.assert_allclose(
        geo.hyperboloid_distance(u, v),
        geo.poincare_distance(geo.to_poincare(u), geo.to_poincare(v)),
        atol=1e-6)


# ---------------------------------------------------------------------------
# Purity / clamping
# ---------------------------------------------------------------------------

def test_operations_are_pure():
    rng = np.random.default_rng(15)
    a = random_ball_points(rng, 10, 3)
    b = random_ball_points(rng, 10, 3)
    first = geo.mobius_add(a, b)
    second = geo.mobius_add(a, b)
    assert np.array_equal(first, second)


def test_project_to_ball_clamps():
    far = np.array([2.0, 0.0])
    out = geo.project_to_ball(far)
    np.testing.assert_allclose(np.linalg.norm(out), 1.0 - geo.EPS_BOUNDARY)
    near = np.array([0.5, 0.0])
    np.testing.assert_array_equal(geo.project_to_ball(near), near)
