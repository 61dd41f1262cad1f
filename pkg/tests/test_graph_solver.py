import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motile.errors import ChartExit, ValidationError
from motile.geometry import discrete_curvature, shoelace_area
from motile.graph_solver import (CurveChart, GraphState, chart_area, chart_curvature, chart_S, embed,
                                 graph_dt_limit, graph_state_from_function, lambda_closed_form,
                                 psi_inverse, psi_inverse_slope, resolving_map, run_graph, step_graph)
from motile.interface_solver import SimConfig
from motile.phi import PhiModel, phi_eval, sup_abs_deriv

GAUSS = PhiModel.gaussian()
J1 = sup_abs_deriv(GAUSS)


def chart(n=256, R=1.0):
    return CurveChart.circle(R, n)


def cosine(ch, amp, k):
    return amp * np.cos(k * ch.sigma_grid / ch.R)


# chart

def test_chart_invariant():
    with pytest.raises(ValidationError):
        CurveChart(1.0, 64, 1.0)
    ch = chart()
    assert ch.delta0 == pytest.approx(0.8) and ch.kappa0 == 1.0
    assert ch.dsigma == pytest.approx(2 * math.pi / 256)


def test_S_for_reference_and_concentric():
    ch = chart(64, 2.0)
    np.testing.assert_array_equal(chart_S(np.zeros(64), ch), 1.0)
    np.testing.assert_allclose(chart_S(np.full(64, 0.3), ch), 1 - 0.3 / 2.0, rtol=1e-15)


def test_S_rejects_chart_exit():
    ch = chart(64)
    with pytest.raises(ChartExit):
        chart_S(np.full(64, 0.9), ch)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-0.8, 0.8), min_size=32, max_size=32))
def test_S_lower_bound(vals):
    ch = chart(32)
    S = chart_S(np.asarray(vals), ch)
    assert np.all(S >= (1 - ch.delta0 * ch.kappa0) / math.sqrt(2))


def test_curvature_reference_and_concentric():
    ch = chart(128, 1.5)
    np.testing.assert_allclose(chart_curvature(np.zeros(128), ch), 1 / 1.5, rtol=1e-14)
    np.testing.assert_allclose(chart_curvature(np.full(128, 0.4), ch), 1 / 1.1, rtol=1e-13)


def test_curvature_matches_embedding():
    errs = []
    for n in (256, 512):
        ch = chart(n)
        st_ = graph_state_from_function(lambda s: 0.1 * np.cos(2 * s), ch)
        k_chart = chart_curvature(st_.u, ch)
        k_embed = discrete_curvature(embed(st_, ch))
        errs.append(np.max(np.abs(k_chart - k_embed)))
    assert errs[0] <= 5e-3
    assert 3.5 < errs[0] / errs[1] < 4.5


# psi inverse

def test_psi_identity_at_beta_zero():
    for w in (-2.0, 0.0, 0.3, 5.0):
        assert psi_inverse(w, 0.0, GAUSS) == w


def test_psi_round_trip():
    for v in (-3.0, -1.0, 0.0, 1.0, 3.0):
        w = v - 0.5 * phi_eval(GAUSS, v)
        assert abs(psi_inverse(w, 0.5, GAUSS) - v) <= 1e-10


@pytest.mark.parametrize("beta", [0.2, 0.8])
def test_psi_round_trip_grid(beta):
    for v in np.linspace(-5, 5, 100):
        assert abs(psi_inverse(v - beta * phi_eval(GAUSS, v), beta, GAUSS) - v) <= 1e-10


def test_psi_monotone_with_slope_bounds():
    beta = 1.0
    J = beta * J1
    ws = np.linspace(-4, 4, 201)
    vs = np.array([psi_inverse(w, beta, GAUSS) for w in ws])
    assert np.all(np.diff(vs) > 0)
    slopes = psi_inverse_slope(vs, beta, GAUSS)
    assert np.all(slopes >= 1 / (1 + J) - 1e-12) and np.all(slopes <= 1 / (1 - J) + 1e-12)
    fd = np.diff(vs) / np.diff(ws)
    assert np.all(fd >= 1 / (1 + J) - 1e-9) and np.all(fd <= 1 / (1 - J) + 1e-9)


def test_psi_rejects_supercritical():
    with pytest.raises(ValidationError):
        psi_inverse(0.0, 1.2, GAUSS)


# resolving map

def test_resolving_map_circle_beta_zero():
    ch = chart(64)
    V, lam = resolving_map(np.zeros(64), ch, 0.0, GAUSS)
    assert lam == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(V)) < 1e-12


@pytest.mark.parametrize("beta", [0.5, 1.0])
def test_resolving_map_circle_any_beta(beta):
    ch = chart(64)
    V, lam = resolving_map(np.zeros(64), ch, beta, GAUSS)
    assert np.max(np.abs(V)) < 1e-11
    # V = 0 forces kappa0 - lambda = -beta Phi(0)
    assert lam == pytest.approx(1.0 + beta * phi_eval(GAUSS, 0.0), abs=1e-11)


def test_resolving_map_linear_case():
    ch = chart(128)
    u = cosine(ch, 0.1, 3)
    V, lam = resolving_map(u, ch, 0.0, GAUSS)
    S, k = chart_S(u, ch), chart_curvature(u, ch)
    assert lam == pytest.approx(np.sum(k * S) / np.sum(S), abs=1e-11)
    np.testing.assert_allclose(V, k - lam, atol=1e-11)


def test_lambda_matches_closed_form():
    ch = chart(128)
    u = cosine(ch, 0.1, 2)
    V, lam = resolving_map(u, ch, 0.5, GAUSS)
    L = np.sum(chart_S(u, ch)) * ch.dsigma
    assert lam == pytest.approx(lambda_closed_form(V, u, ch, 0.5, GAUSS), abs=1e-10 * max(1, L))
    # the integrated curvature is 2 pi, not pi
    est0 = lambda_closed_form(V, u, ch, 0.0, GAUSS)
    assert est0 * L == pytest.approx(2 * math.pi, rel=1e-3)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-0.2, 0.2), min_size=3, max_size=3), st.sampled_from([0.0, 0.5, 1.0]))
def test_resolving_map_zero_flux(amps, beta):
    ch = chart(64)
    u = sum(a * np.cos((k + 1) * ch.sigma_grid) for k, a in enumerate(amps))
    V, lam = resolving_map(u, ch, beta, GAUSS, tol=1e-12)
    S = chart_S(u, ch)
    L = np.sum(S) * ch.dsigma
    assert abs(np.sum(V * S) * ch.dsigma) <= 1e-12 * L * 10
    assert np.all(np.isfinite(V))


# stepping

def _cfg(n, beta, **kw):
    return SimConfig(n=n, beta=beta, **kw)


def test_circle_is_stationary():
    ch = chart(64)
    new = step_graph(GraphState(np.zeros(64)), ch, _cfg(64, 0.5))
    assert np.max(np.abs(new.u)) < 1e-15


def test_constant_offset_stays_constant():
    ch = chart(64)
    new = run_graph(GraphState(np.full(64, 0.2)), ch, _cfg(64, 0.5), 20)
    assert np.ptp(new.u) == 0.0 or np.ptp(new.u) < 1e-15


def test_perturbation_decays_monotonically():
    ch = chart(256)
    cfg = _cfg(256, 0.5)
    state = graph_state_from_function(lambda s: 0.05 * np.cos(3 * s), ch)
    norms = [np.max(np.abs(state.u))]
    for _ in range(50):
        state = step_graph(state, ch, cfg)
        norms.append(np.max(np.abs(state.u)))
    assert all(b < a for a, b in zip(norms, norms[1:]))


def test_area_change_is_second_order_in_dt():
    ch = chart(128)
    u0 = cosine(ch, 0.1, 2)
    a0 = chart_area(u0, ch)
    changes = []
    for dt in (2e-5, 1e-5):
        s = step_graph(GraphState(u0.copy()), ch, _cfg(128, 0.5, dt=dt))
        changes.append(abs(chart_area(s.u, ch) - a0))
    assert 3.5 < changes[0] / changes[1] < 4.5


def test_chart_area_matches_shoelace():
    errs = []
    for n in (128, 256):
        ch = chart(n)
        u = cosine(ch, 0.1, 2)
        errs.append(abs(chart_area(u, ch) - shoelace_area(embed(GraphState(u), ch))))
    assert errs[0] < 2e-3
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_dt_above_graph_limit_rejected():
    ch = chart(256)
    cfg = _cfg(8, 0.5)
    assert cfg.dt > graph_dt_limit(ch, 0.5, GAUSS)
    with pytest.raises(ValidationError):
        step_graph(GraphState(np.zeros(256)), ch, cfg)


def test_chart_exit_during_run():
    ch = chart(64)
    with pytest.raises(ChartExit):
        run_graph(GraphState(np.full(64, 0.85)), ch, _cfg(64, 0.0), 1)


# embedding

def test_embed_reference_and_offset():
    ch = chart(128, 2.0)
    c0 = embed(GraphState(np.zeros(128)), ch)
    np.testing.assert_allclose(np.hypot(c0.x, c0.y), 2.0, rtol=1e-15)
    c1 = embed(GraphState(np.full(128, 0.5)), ch)
    np.testing.assert_allclose(np.hypot(c1.x, c1.y), 1.5, rtol=1e-15)
    polygon = 0.5 * 128 * 1.5**2 * math.sin(2 * math.pi / 128)
    assert shoelace_area(c1) == pytest.approx(polygon, rel=1e-13)
    assert shoelace_area(c1) == pytest.approx(math.pi * 1.5**2, rel=1e-3)
