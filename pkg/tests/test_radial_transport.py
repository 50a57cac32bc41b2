import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st
from scipy.integrate import quad

from src.errors import AmbiguityError, NumericalFailure, UsageError
from src.geometry.sampling import sample_uniform_halfsphere
from src.geometry.sphere import HALF_PI, colatitude, geodesic_distance, meridian_point, north_pole, rotate_about_pole
from src.measures.profiles import RadialDensitySpec, build_profile, cdf
from src.transport.lipschitz import empirical_lipschitz
from src.transport.radial import (
    RadialMap,
    apply_radial_map,
    equator_preserved,
    monotone_map,
    radial_lipschitz,
    scan_radial_map,
)


def _gaussian_equator_stretch(beta=1.0):
    z, _ = quad(lambda s: np.exp(-beta * s * s) * np.sin(s), 0.0, HALF_PI, epsabs=1e-14)
    return z * np.exp(beta * HALF_PI ** 2)


# --- monotone_map ---

def test_self_transport_is_identity(uniform_profile):
    radial = monotone_map(uniform_profile, uniform_profile)
    assert np.max(np.abs(radial.values - radial.grid)) < 1e-9
    assert radial_lipschitz(radial).lip_formula == pytest.approx(1.0, abs=1e-8)


def test_gaussian_map_contracts_toward_pole(gaussian_map):
    assert np.all(gaussian_map.values <= gaussian_map.grid + 1e-12)
    assert gaussian_map.values[-1] == HALF_PI
    assert gaussian_map.is_monotone()
    assert equator_preserved(gaussian_map)


def test_cap_map_sends_equator_to_radius(uniform_profile):
    target = build_profile(RadialDensitySpec.cap(np.pi / 3, RadialDensitySpec.uniform()))
    radial = monotone_map(uniform_profile, target)
    assert radial.values[-1] == pytest.approx(np.pi / 3, abs=1e-12)
    assert not equator_preserved(radial)


def test_pushforward_matches_target_cdf(uniform_profile, gaussian_profile, gaussian_map):
    pushed = cdf(gaussian_profile, gaussian_map.values)
    np.testing.assert_allclose(pushed, uniform_profile.cdf, atol=1e-7)


def test_monotone_map_preconditions(uniform_profile):
    with pytest.raises(UsageError):
        monotone_map(uniform_profile, build_profile(RadialDensitySpec.uniform(3)))
    cap_source = build_profile(RadialDensitySpec.cap(1.0, RadialDensitySpec.uniform()))
    with pytest.raises(UsageError):
        monotone_map(cap_source, uniform_profile)


# --- apply_radial_map ---

def test_identity_map_fixes_points():
    pts = sample_uniform_halfsphere(2, 50, seed=0)
    np.testing.assert_allclose(apply_radial_map(RadialMap.identity(), pts), pts, atol=1e-12)


def test_pole_is_fixed(gaussian_map):
    np.testing.assert_array_equal(apply_radial_map(gaussian_map, north_pole(2)), north_pole(2))


def test_equator_point_goes_to_cap_edge(uniform_profile):
    target = build_profile(RadialDensitySpec.cap(np.pi / 4, RadialDensitySpec.uniform()))
    radial = monotone_map(uniform_profile, target)
    image = apply_radial_map(radial, meridian_point(HALF_PI, 0.7))
    np.testing.assert_allclose(image, meridian_point(np.pi / 4, 0.7), atol=1e-12)


def test_moving_the_pole_is_ambiguous():
    shifted = RadialMap.from_function(lambda t: 0.1 + t * (HALF_PI - 0.1) / HALF_PI)
    with pytest.raises(AmbiguityError):
        apply_radial_map(shifted, north_pole(2))


def test_lower_hemisphere_points_are_rejected():
    with pytest.raises(UsageError):
        apply_radial_map(RadialMap.identity(), meridian_point(2.0, 0.0))


@given(theta=st.floats(min_value=-np.pi, max_value=np.pi), seed=st.integers(0, 1000))
@settings(deadline=None, max_examples=25)
def test_apply_is_rotation_equivariant(gaussian_map, theta, seed):
    pts = sample_uniform_halfsphere(2, 20, seed=seed)
    lhs = apply_radial_map(gaussian_map, rotate_about_pole(pts, theta))
    rhs = rotate_about_pole(apply_radial_map(gaussian_map, pts), theta)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_apply_moves_along_meridians(gaussian_map):
    pts = sample_uniform_halfsphere(2, 200, seed=5)
    images = apply_radial_map(gaussian_map, pts)
    np.testing.assert_allclose(colatitude(images), gaussian_map(colatitude(pts)), atol=1e-12)
    u_in = pts[:, :2] / np.linalg.norm(pts[:, :2], axis=1, keepdims=True)
    u_out = images[:, :2] / np.linalg.norm(images[:, :2], axis=1, keepdims=True)
    np.testing.assert_allclose(u_out, u_in, atol=1e-9)


def test_apply_on_the_circle():
    half = RadialMap.from_function(lambda t: t / 2)
    # n=1 maps reuse the same table
    circle = RadialMap(grid=half.grid, values=half.values, n=1)
    image = apply_radial_map(circle, meridian_point(-np.pi / 2, n=1))
    np.testing.assert_allclose(image, meridian_point(-np.pi / 4, n=1), atol=1e-12)


# --- radial_lipschitz ---

def test_half_angle_map_lipschitz():
    report = radial_lipschitz(RadialMap.from_function(lambda t: t / 2))
    assert report.lip_formula == pytest.approx(np.sqrt(2) / 2, abs=1e-9)
    assert report.argmax_location == pytest.approx(HALF_PI)
    assert report.lip_empirical is None


def test_gaussian_lipschitz_matches_quadrature_oracle(gaussian_map):
    report = radial_lipschitz(gaussian_map)
    oracle = _gaussian_equator_stretch()
    assert report.lip_formula > 1.0
    assert report.lip_formula == pytest.approx(oracle, rel=1e-4)
    assert report.argmax_location == pytest.approx(HALF_PI, abs=1e-3)
    assert len(report.witness) == 2


def test_lipschitz_needs_dense_grid():
    with pytest.raises(UsageError):
        radial_lipschitz(RadialMap.from_function(lambda t: t, nodes=100))


def test_vanishing_target_density_reports_location(uniform_profile):
    wide = build_profile(RadialDensitySpec.cap(np.pi / 4, RadialDensitySpec.uniform()))
    narrow = build_profile(RadialDensitySpec.cap(np.pi / 8, RadialDensitySpec.uniform()))
    radial = monotone_map(uniform_profile, wide)
    mismatched = RadialMap(grid=radial.grid, values=radial.values, source=uniform_profile, target=narrow)
    with pytest.raises(NumericalFailure) as err:
        radial_lipschitz(mismatched)
    assert 0.0 < err.value.location < HALF_PI


def test_radial_map_rejects_values_outside_range():
    with pytest.raises(UsageError):
        RadialMap.from_function(lambda t: 2.0 * t)


# --- scan_radial_map ---

@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_scan_agrees_with_formula(uniform_profile, beta):
    radial = monotone_map(uniform_profile, build_profile(RadialDensitySpec.gaussian_like(beta)))
    report = scan_radial_map(radial, count=10_000, seed=0)
    assert report.lip_empirical <= report.lip_formula * (1 + 1e-3)
    assert report.lip_empirical == pytest.approx(report.lip_formula, rel=0.02)


def test_scan_of_cap_map(uniform_profile):
    target = build_profile(RadialDensitySpec.cap(np.pi / 4, RadialDensitySpec.uniform()))
    report = scan_radial_map(monotone_map(uniform_profile, target))
    assert report.lip_empirical == pytest.approx(report.lip_formula, rel=0.02)
    assert report.lip_formula < 1.0


def test_scan_meridian_pairs_on_half_angle_map():
    t = np.linspace(0.0, HALF_PI, 200)
    inputs = meridian_point(t, n=1)
    outputs = meridian_point(t / 2, n=1)
    report = empirical_lipschitz(inputs, outputs)
    assert report.lip_empirical == pytest.approx(0.5, abs=1e-9)
    assert geodesic_distance(*report.witness) > 0.0


@pytest.mark.parametrize("beta", [1.0, 2.0])
def test_table_slope_at_equator_matches_density_ratio(uniform_profile, beta):
    radial = monotone_map(uniform_profile, build_profile(RadialDensitySpec.gaussian_like(beta)))
    step = 1e-6
    slope = (radial(HALF_PI) - radial(HALF_PI - step)) / step
    assert slope == pytest.approx(radial_lipschitz(radial).lip_formula, rel=1e-3)


def test_scan_with_explicit_fine_step(uniform_profile):
    radial = monotone_map(uniform_profile, build_profile(RadialDensitySpec.gaussian_like(2.0)))
    report = scan_radial_map(radial, count=10_000, seed=1, step=1e-5)
    assert report.lip_empirical == pytest.approx(report.lip_formula, rel=0.02)
    with pytest.raises(UsageError):
        scan_radial_map(radial, step=2.0)


def test_steep_target_map_stays_monotone_between_nodes(uniform_profile):
    radial = monotone_map(uniform_profile, build_profile(RadialDensitySpec.tempered("quadratic", 1e-3)))
    t = np.linspace(0.0, HALF_PI, 50_001)
    r = radial(t)
    assert np.all(np.diff(r) >= -1e-15)
    assert r.min() >= 0.0 and r.max() <= HALF_PI


def test_tabulated_function_maps_interpolate_linearly():
    half = RadialMap.from_function(lambda t: t / 2, nodes=257)
    assert half.slopes is None
    assert half(0.3) == pytest.approx(0.15, abs=1e-15)
