import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motile.errors import NoBlowUp, ValidationError
from motile.phi import PhiModel
from motile.traveling_wave import (BACK, FRONT, WaveParams, blowup_quadrature, closure_obstruction,
                                   f_lambda_c, g_lambda_c, integrate_w, sweep, translated_comparison)

from oracles import unit_circle_profile

GAUSS = PhiModel.gaussian()


def circle_params():
    # beta = 0 switches the kernel off
    return WaveParams(c=0.0, lam=1.0, beta=0.0)


# parameters

def test_params_validation():
    with pytest.raises(ValidationError):
        WaveParams(c=-0.1, lam=1.0)
    with pytest.raises(ValidationError):
        WaveParams(c=1.0, lam=1.0, beta=1.5)


# right-hand sides

def test_f_without_kernel():
    p = circle_params()
    assert f_lambda_c(0.0, p) == 1.0
    z = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(f_lambda_c(z, p), (1 + z * z) ** 1.5, rtol=1e-15)


@pytest.mark.parametrize("c", [0.0, 0.5, 2.0])
def test_f_at_origin(c):
    p = WaveParams(c=c, lam=0.7, beta=1.0)
    assert f_lambda_c(0.0, p) == pytest.approx(c - math.exp(-c * c) + 0.7, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 3.0), st.floats(-2, 2), st.floats(0, 1.1), st.floats(-20, 20))
def test_back_dominates_front(c, lam, beta, z):
    p = WaveParams(c=c, lam=lam, beta=beta)
    assert f_lambda_c(z, p, 1) > f_lambda_c(z, p, -1)


def test_g_at_origin_and_even_without_speed():
    p = WaveParams(c=0.8, lam=1.3, beta=0.5)
    assert g_lambda_c(0.0, p) == pytest.approx(1.3 - 0.5, abs=1e-15)
    q = WaveParams(c=0.0, lam=1.3, beta=0.5)
    z = np.linspace(0, 4, 9)
    np.testing.assert_allclose(g_lambda_c(z, q), (1.3 - 0.5) * (1 + z * z) ** 1.5, rtol=1e-14)
    np.testing.assert_array_equal(g_lambda_c(-z, q), g_lambda_c(z, q))


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 3), st.floats(-5, 5))
def test_g_reflection(c, z):
    p = WaveParams(c=c, lam=0.4, beta=0.9)
    assert g_lambda_c(-z, p, 1) == pytest.approx(g_lambda_c(z, p, -1), rel=1e-14, abs=1e-15)


# shooting

def test_unit_circle_reproduced():
    r = integrate_w(circle_params())
    assert not r.reached_cap and r.side == 1
    assert abs(r.x_star - 1.0) <= 1e-6
    x = r.profile[:, 0]
    x = x[x < 0.999]
    assert np.max(np.abs(r.y(x) - unit_circle_profile(x))) <= 1e-5
    np.testing.assert_allclose(r.w(x[:50]), x[:50] / np.sqrt(1 - x[:50] ** 2), atol=1e-8)


def test_negative_lambda_blows_down():
    p = WaveParams(c=0.5, lam=-2.0, beta=1.0)
    assert f_lambda_c(0.0, p) < 0
    r = integrate_w(p)
    assert r.side == -1 and r.x_star > 0
    assert np.all(np.diff(r.profile[:, 1]) < 0)
    assert r.x_star == pytest.approx(blowup_quadrature(p), abs=1e-8)


def test_reflection_symmetry():
    p = WaveParams(c=0.5, lam=1.0, beta=1.0)
    fwd = integrate_w(p, BACK)
    bwd = integrate_w(p, BACK, direction=-1)
    assert bwd.x_star == pytest.approx(-fwd.x_star, abs=1e-10)
    x = np.linspace(0, 0.9 * fwd.x_star, 50)
    np.testing.assert_allclose(bwd.w(-x), -fwd.w(x), atol=1e-10)
    np.testing.assert_allclose(bwd.y(-x), fwd.y(x), atol=1e-10)


def test_halved_first_step_agrees():
    p = WaveParams(c=0.5, lam=1.0, beta=1.0)
    a = integrate_w(p, first_step=1e-3)
    b = integrate_w(p, first_step=5e-4)
    assert abs(a.x_star - b.x_star) <= 1e-8


@pytest.mark.parametrize("c,lam,beta", [(0.5, 1.0, 1.0), (1.0, 2.0, 0.5), (0.25, 0.5, 0.0)])
def test_shooting_matches_quadrature(c, lam, beta):
    # f > 0 along the path, so x* = int_0^inf dw / f(w)
    p = WaveParams(c, lam, beta)
    for sel in (BACK, FRONT):
        assert integrate_w(p, sel).x_star == pytest.approx(blowup_quadrature(p, sel), abs=1e-8)


def test_global_solution_hits_cap():
    # f(0) = 0 for the front: w stays at the rest point
    p = WaveParams(c=1.0, lam=1.0 + math.exp(-1.0), beta=1.0)
    assert f_lambda_c(0.0, p, -1) == pytest.approx(0.0, abs=1e-15)
    r = integrate_w(p, FRONT, x_cap=50.0)
    assert r.reached_cap and math.isnan(r.x_star)
    with pytest.raises(NoBlowUp) as exc:
        closure_obstruction(p, x_cap=50.0)
    assert exc.value.report.front.reached_cap


def test_cap_arguments_validated():
    with pytest.raises(ValueError):
        integrate_w(circle_params(), x_cap=0.0)
    with pytest.raises(ValueError):
        integrate_w(circle_params(), "middle")


# obstruction

def test_obstruction_reference_case():
    rep = closure_obstruction(WaveParams(0.5, 1.0, 1.0))
    assert rep.gap > 0 and rep.pointwise_ok and rep.comparable
    assert rep.gap == pytest.approx(rep.x_star_F - rep.x_star_B, abs=0)


def test_zero_speed_has_zero_gap():
    rep = closure_obstruction(WaveParams(0.0, 2.0, 1.0))
    assert abs(rep.gap) <= 1e-8


def test_gap_increases_with_speed():
    gaps = [closure_obstruction(WaveParams(c, 1.0, 1.0)).gap for c in (0.25, 0.5, 1.0)]
    assert gaps[0] < gaps[1] < gaps[2]


def test_translated_comparison():
    # both slopes increase here, so w_B(x1) = w_F(x2) has a root
    rep = closure_obstruction(WaveParams(0.5, 2.0, 1.0))
    assert rep.back.side == rep.front.side == 1
    for frac in (0.2, 0.5, 0.8):
        assert translated_comparison(rep.back, rep.front, frac * rep.x_star_B)


def test_sweep_rows():
    rows = sweep([0.5], [1.0, 2.0], [0.0, 1.0])
    assert len(rows) == 4
    assert set(rows[0]) == {"c", "lambda", "beta", "x_star_B", "x_star_F", "gap", "pointwise_ok", "comparable"}
    assert all(r["gap"] > 1e-8 and r["pointwise_ok"] and r["comparable"] for r in rows)


def test_falling_back_profile_is_not_comparable():
    rep = closure_obstruction(WaveParams(0.25, 0.5, 1.0))
    assert rep.both_blow_up and rep.back.side == rep.front.side == -1
    assert not rep.comparable
