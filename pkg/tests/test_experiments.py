import math

import numpy as np
import pytest

from motile.errors import NotSteady, SelfIntersecting, ValidationError
from motile.experiments import (beta_sweep, convergence_study, drift, four_ellipse_curve,
                                linear_fit_r2, sample_four_ellipse, segments_intersect)
from motile.geometry import build_curve, centroid, circle_points, segment_lengths, signed_area
from motile.interface_solver import SimConfig


@pytest.fixture(scope="module")
def curve():
    return four_ellipse_curve(2.0, 256)


# initial curve

def test_four_ellipse_orientation_and_start(curve):
    assert curve.n == 256
    assert signed_area(curve.points) > 0
    np.testing.assert_allclose(curve.points[0], (4.0, 0.0), atol=1e-12)


def test_four_ellipse_extremes(curve):
    x, y = curve.points.T
    assert x.max() == pytest.approx(4.0, abs=1e-9)
    # lobes reach y = 3/4 + 9/4 = 3, the outer arc y = 3 at x = 0
    assert y.max() == pytest.approx(3.0, abs=1e-3)
    assert y.min() == pytest.approx(-3.0, abs=1e-3)
    assert x.min() == pytest.approx(-2.0, abs=1e-3)


def test_four_ellipse_mirror_symmetric(curve):
    p = curve.points
    mirrored = np.column_stack((p[:, 0], -p[:, 1]))
    # vertex k mirrors onto vertex n - k
    np.testing.assert_allclose(mirrored[1:], p[:0:-1], atol=1e-9)
    assert abs(centroid(curve).y) < 1e-10


def test_four_ellipse_equal_segments(curve):
    seg = segment_lengths(curve)
    assert seg.max() / seg.min() <= 1 + 1e-8


def test_four_ellipse_well_deepens_with_zeta():
    # the well crosses the x-axis at x = zeta
    for z in (1.0, 2.0, 3.0):
        c = four_ellipse_curve(z, 512)
        on_axis = c.points[np.abs(c.points[:, 1]) < 1e-9, 0]
        assert on_axis.min() == pytest.approx(z, abs=1e-6)


def test_four_ellipse_simple_curve():
    assert not segments_intersect(four_ellipse_curve(2.0, 512))
    assert not segments_intersect(four_ellipse_curve(3.5, 256))


def test_four_ellipse_rejections():
    with pytest.raises(SelfIntersecting):
        four_ellipse_curve(4.0, 128)
    with pytest.raises(ValidationError):
        four_ellipse_curve(2.0, 32)
    with pytest.raises(ValidationError):
        four_ellipse_curve(0.0, 128)
    assert sample_four_ellipse(2.0, 32).n == 32


def test_segments_intersect_detects_bowtie():
    assert segments_intersect(build_curve([(0, 0), (1, 1), (2, 2), (2, 1.2), (2, 0.5), (1, 1.2), (0, 2), (-0.5, 1)]))
    assert not segments_intersect(build_curve(circle_points(40)))


# fits and validation

def test_linear_fit_exact_line():
    a, b, r2 = linear_fit_r2([0, 1, 2, 3], [1, 3, 5, 7])
    assert (a, b) == pytest.approx((2.0, 1.0))
    assert r2 == pytest.approx(1.0)


def test_linear_fit_noise_lowers_r2():
    assert linear_fit_r2([0, 1, 2, 3], [0, 1, 0, 1])[2] < 0.5


def test_convergence_requires_doubling():
    with pytest.raises(ValidationError):
        convergence_study(Ns=(32, 48, 96))
    with pytest.raises(ValidationError):
        convergence_study(Ns=(64,))


# short runs

def test_drift_at_zero_beta_is_exact():
    cfg = SimConfig(n=64, t_end=20.0)
    rep = drift(1.0, 0.0, cfg)
    assert rep.drift == 0.0 and rep.drift_x == 0.0 and rep.drift_y == 0.0


def test_unfinished_run_is_not_steady():
    with pytest.raises(NotSteady):
        drift(2.0, 1.0, SimConfig(n=64, t_end=0.5))


def test_small_beta_sweep_drifts_along_axis():
    reps = beta_sweep(1.0, [0.0, 1.0], SimConfig(n=64, t_end=20.0))
    assert reps[0].drift == 0.0
    r = reps[1]
    assert r.drift > 0
    assert abs(r.drift_y) <= 1e-3 * r.drift
    assert r.drift == pytest.approx(math.hypot(r.drift_x, r.drift_y))
