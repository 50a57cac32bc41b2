import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from src.errors import AmbiguityError, UsageError
from src.geometry.sampling import sample_uniform_halfsphere, sample_uniform_sphere
from src.geometry.sphere import (
    HALF_PI,
    Rotation,
    TangentVector,
    basis_vector,
    chordal_distance,
    colatitude,
    exp_map,
    geodesic_distance,
    geodesic_point,
    meridian_point,
    north_pole,
    reflect_equator,
    rotate_about_pole,
)

N = north_pole(2)
E1 = basis_vector(2, 1)
E2 = basis_vector(2, 2)

angles = st.floats(min_value=0.0, max_value=np.pi, allow_nan=False)
longitudes = st.floats(min_value=-np.pi, max_value=np.pi, allow_nan=False)


# --- distances ---

def test_geodesic_distance_examples():
    assert geodesic_distance(N, N) == 0.0
    assert geodesic_distance(E1, E2) == pytest.approx(HALF_PI, abs=1e-15)
    x = meridian_point(1.1, 0.3)
    assert geodesic_distance(x, -x) == pytest.approx(np.pi, abs=1e-15)


def test_geodesic_distance_dimension_mismatch():
    with pytest.raises(UsageError):
        geodesic_distance(N, north_pole(3))


def test_geodesic_distance_batches():
    t = np.linspace(0.0, np.pi, 7)
    d = geodesic_distance(meridian_point(t), N)
    np.testing.assert_allclose(d, t, atol=1e-15)


@given(t1=angles, p1=longitudes, t2=angles, p2=longitudes)
@settings(deadline=None)
def test_geodesic_distance_is_symmetric_and_bounded(t1, p1, t2, p2):
    x, y = meridian_point(t1, p1), meridian_point(t2, p2)
    d = geodesic_distance(x, y)
    assert 0.0 <= d <= np.pi
    assert d == pytest.approx(geodesic_distance(y, x), abs=1e-15)
    assert d == pytest.approx(np.arccos(np.clip(x @ y, -1.0, 1.0)), abs=1e-7)


def test_colatitude_matches_distance_to_pole():
    x = meridian_point(0.7, 2.0)
    assert colatitude(x) == pytest.approx(0.7, abs=1e-15)


# --- exponential map and geodesics ---

def test_exp_map_examples():
    np.testing.assert_array_equal(exp_map(TangentVector(N, np.zeros(3))), N)
    np.testing.assert_allclose(exp_map(TangentVector(N, HALF_PI * E1)), E1, atol=1e-15)
    np.testing.assert_allclose(exp_map(TangentVector(N, np.pi * E1)), -N, atol=1e-15)


def test_exp_map_rejects_long_vectors():
    with pytest.raises(UsageError):
        exp_map(TangentVector(N, 3.5 * E1))


def test_tangent_vector_must_be_tangent():
    with pytest.raises(UsageError):
        TangentVector(N, np.array([0.0, 0.0, 1.0]))


@given(t=angles, phi=longitudes, length=st.floats(min_value=0.0, max_value=3.0))
@settings(deadline=None)
def test_exp_map_travels_its_length(t, phi, length):
    base = meridian_point(t, phi)
    other = meridian_point(np.clip(t + 1.0, 0.0, np.pi), phi + 1.0)
    if np.linalg.norm(other - (base @ other) * base) < 1e-3:
        return
    v = TangentVector.toward(base, other, length)
    assert geodesic_distance(base, exp_map(v)) == pytest.approx(length, abs=1e-10)


def test_geodesic_point_examples():
    np.testing.assert_allclose(geodesic_point(N, E1, 0.0), N)
    np.testing.assert_allclose(geodesic_point(N, E1, HALF_PI), E1)
    h = np.sqrt(2.0) / 2.0
    np.testing.assert_allclose(geodesic_point(N, E1, np.pi / 4), [h, 0.0, h], atol=1e-15)


def test_geodesic_point_errors():
    with pytest.raises(AmbiguityError):
        geodesic_point(N, -N, 1.0)
    with pytest.raises(UsageError):
        geodesic_point(N, E1, 2.0)


# --- rotations and reflection ---

def test_rotate_about_pole_examples():
    np.testing.assert_allclose(rotate_about_pole(N, 0.83), N)
    np.testing.assert_allclose(rotate_about_pole(E1, HALF_PI), E2, atol=1e-15)
    x = meridian_point(0.4, 1.3)
    np.testing.assert_allclose(rotate_about_pole(x, 2 * np.pi), x, atol=1e-15)


def test_rotate_about_pole_on_the_circle_is_identity():
    x = meridian_point(np.array([-1.0, 0.2, 1.3]), n=1)
    np.testing.assert_array_equal(rotate_about_pole(x, 0.7), x)
    np.testing.assert_array_equal(rotate_about_pole(north_pole(1), 2.0), north_pole(1))


@given(t1=angles, p1=longitudes, t2=angles, p2=longitudes, theta=longitudes)
@settings(deadline=None)
def test_rotations_preserve_distance(t1, p1, t2, p2, theta):
    x, y = meridian_point(t1, p1), meridian_point(t2, p2)
    d = geodesic_distance(rotate_about_pole(x, theta), rotate_about_pole(y, theta))
    assert d == pytest.approx(geodesic_distance(x, y), abs=1e-10)


def test_random_rotation_is_deterministic_and_isometric():
    r1, r2 = Rotation.random(2, seed=7), Rotation.random(2, seed=7)
    np.testing.assert_array_equal(r1.matrix, r2.matrix)
    x, y = sample_uniform_sphere(2, 2, seed=1)
    assert geodesic_distance(r1.apply(x), r1.apply(y)) == pytest.approx(geodesic_distance(x, y), abs=1e-12)
    np.testing.assert_allclose(r1.compose(r1.inverse()).matrix, np.eye(3), atol=1e-12)


def test_rotation_rejects_reflections():
    with pytest.raises(UsageError):
        Rotation(np.diag([1.0, 1.0, -1.0]))


def test_about_pole_higher_dimensional_plane():
    e3 = basis_vector(3, 3)
    np.testing.assert_allclose(Rotation.about_pole(3, HALF_PI, plane=(1, 2)).apply(basis_vector(3, 2)), e3, atol=1e-15)


def test_reflect_equator_examples():
    np.testing.assert_array_equal(reflect_equator(N), -N)
    eq = np.array([np.cos(0.9), np.sin(0.9), 0.0])
    np.testing.assert_array_equal(reflect_equator(eq), eq)
    near = meridian_point(HALF_PI, 0.9)
    np.testing.assert_allclose(reflect_equator(near), near, atol=1e-15)
    x = meridian_point(0.3, 0.1)
    np.testing.assert_array_equal(reflect_equator(reflect_equator(x)), x)


def test_chordal_distance_is_half_angle_chord():
    x, y = meridian_point(0.2, 0.0), meridian_point(1.4, 2.0)
    assert chordal_distance(x, y) == pytest.approx(2 * np.sin(geodesic_distance(x, y) / 2), abs=1e-14)


# --- sampling ---

def test_halfsphere_samples_are_on_the_upper_half():
    pts = sample_uniform_halfsphere(2, 10_000, seed=3)
    assert pts.shape == (10_000, 3)
    assert np.all(pts[:, -1] >= 0.0)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)


def test_halfsphere_sample_moments():
    pts = sample_uniform_halfsphere(2, 100_000, seed=11)
    t = colatitude(pts)
    assert np.mean(t) == pytest.approx(1.0, abs=0.01)
    assert np.mean(t <= np.pi / 3) == pytest.approx(0.5, abs=0.01)


def test_sampling_is_seeded():
    np.testing.assert_array_equal(sample_uniform_sphere(3, 5, seed=2), sample_uniform_sphere(3, 5, seed=2))


def test_sampling_rejects_bad_arguments():
    with pytest.raises(UsageError):
        sample_uniform_sphere(0, 10, seed=0)
    with pytest.raises(UsageError):
        sample_uniform_halfsphere(2, 0, seed=0)
