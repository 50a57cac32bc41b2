import numpy as np
import pytest

from src.errors import UsageError
from src.geometry.sampling import sample_uniform_halfsphere
from src.geometry.sphere import HALF_PI, Rotation, meridian_point, rotate_about_pole
from src.transport.lipschitz import LipschitzReport, empirical_lipschitz


def test_identity_has_constant_one():
    pts = sample_uniform_halfsphere(2, 300, seed=0)
    report = empirical_lipschitz(pts, pts)
    assert report.lip_empirical == pytest.approx(1.0, abs=1e-12)
    assert report.lip_formula is None


def test_rotation_is_an_isometry():
    pts = sample_uniform_halfsphere(2, 300, seed=1)
    report = empirical_lipschitz(pts, Rotation.random(2, seed=3).apply(pts))
    assert report.lip_empirical == pytest.approx(1.0, abs=1e-10)


def test_pole_rotation_keeps_constant_and_rotates_witness():
    pts = sample_uniform_halfsphere(2, 200, seed=2)
    squashed = meridian_point(0.5 * np.arccos(np.clip(pts[:, -1], -1.0, 1.0)), np.arctan2(pts[:, 1], pts[:, 0]))
    base = empirical_lipschitz(pts, squashed)
    turned = empirical_lipschitz(rotate_about_pole(pts, 0.9), rotate_about_pole(squashed, 0.9))
    assert turned.lip_empirical == pytest.approx(base.lip_empirical, abs=1e-10)
    assert turned.witness_indices == base.witness_indices
    np.testing.assert_allclose(turned.witness[0], rotate_about_pole(base.witness[0], 0.9), atol=1e-12)


def test_half_angle_on_meridian():
    t = np.linspace(0.0, HALF_PI, 500)
    report = empirical_lipschitz(meridian_point(t, n=1), meridian_point(t / 2, n=1))
    assert report.lip_empirical == pytest.approx(0.5, abs=1e-9)


def test_listed_pairs_only():
    t = np.array([0.0, 0.1, 1.0, 1.5])
    inputs = meridian_point(t, n=1)
    outputs = meridian_point(np.array([0.0, 0.3, 1.0, 1.1]), n=1)
    report = empirical_lipschitz(inputs, outputs, pairs=([2], [3]))
    assert report.lip_empirical == pytest.approx(0.2, abs=1e-12)
    assert report.witness_indices == (2, 3)
    assert empirical_lipschitz(inputs, outputs).lip_empirical == pytest.approx(3.0, abs=1e-12)


def test_block_scan_covers_all_pairs():
    # spans several row blocks
    pts = sample_uniform_halfsphere(2, 600, seed=4)
    outputs = pts.copy()
    outputs[599] = rotate_about_pole(pts[599], 0.2)
    report = empirical_lipschitz(pts, outputs)
    assert report.lip_empirical > 1.0
    assert 599 in report.witness_indices


def test_degenerate_inputs_are_rejected():
    x = np.tile(meridian_point(0.3, 0.2), (5, 1))
    with pytest.raises(UsageError):
        empirical_lipschitz(x, x)
    with pytest.raises(UsageError):
        empirical_lipschitz(x[:1], x[:1])
    with pytest.raises(UsageError):
        empirical_lipschitz(x, x[:3])


def test_report_record_is_plain():
    report = LipschitzReport(lip_formula=1.5, witness=(meridian_point(0.1), meridian_point(0.2)), argmax_location=0.1)
    record = report.to_record()
    assert record["lip_formula"] == 1.5
    assert record["lip_empirical"] is None
    assert isinstance(record["witness"][0], list)
