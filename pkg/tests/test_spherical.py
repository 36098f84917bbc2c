import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rank1walk.geometry import CATALOG
from rank1walk.spherical import (
    SphericalEvalConfig,
    phi,
    phi_d4_lambda,
    phi_dd_eta_at_zero,
    phi_dd_lambda_at_zero,
    phi_grid,
    phi_ode,
    phi_series,
    phi_series_with_slope,
)

H3 = CATALOG["real:3"]


def h3(lam, eta):
    return eta / np.sinh(eta) if lam == 0 else np.sin(lam * eta) / (lam * np.sinh(eta))


@pytest.mark.parametrize("lam", [0.0, 0.3, 1.0, 4.0, 25.0])
def test_h3_closed_form(lam):
    etas = np.linspace(0.01, 6, 300)
    assert np.max(np.abs(phi(H3, lam, etas) - h3(lam, etas))) < 1e-9


def test_h3_limit_at_origin():
    assert phi(H3, 3.0, 0.0) == 1.0
    assert phi(H3, 0.0, 1e-8) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("name", list(CATALOG))
def test_series_and_ode_agree(name):
    p = CATALOG[name]
    worst = 0.0
    for lam in np.linspace(0, 10, 11):
        etas = np.linspace(0.2, 0.85, 14)
        worst = max(worst, np.max(np.abs(phi_series(p, lam, etas) - phi_ode(p, lam, etas))))
    assert worst <= 1e-8


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(list(CATALOG)), st.floats(-40, 40), st.floats(0, 8))
def test_bounded_by_one_and_even(name, lam, eta):
    p = CATALOG[name]
    a = phi(p, lam, eta)
    assert abs(a) <= 1 + 1e-12
    assert phi(p, -lam, eta) == a


@pytest.mark.parametrize("name, lam, expected", [
    ("real:3", 2.0, -5 / 3), ("real:3", 0.0, -1 / 3), ("complex:4", 1.0, -1.25),
])
def test_second_eta_derivative_examples(name, lam, expected):
    assert phi_dd_eta_at_zero(CATALOG[name], lam) == pytest.approx(expected, abs=1e-4)


@pytest.mark.parametrize("name", list(CATALOG))
def test_second_lambda_derivative_is_minus_second_moment(name):
    p = CATALOG[name]
    etas = np.array([0.1, 0.5, 1.5, 3.0])
    d2 = phi_dd_lambda_at_zero(p, etas)
    assert np.all(d2 <= 0)
    # small eta: phi ~ 1 - (lam^2 + rho^2) eta^2 / (2n)
    assert phi_dd_lambda_at_zero(p, 1e-2) == pytest.approx(-1e-4 / p.n, rel=1e-3)


def test_fourth_derivative_on_h3_matches_closed_form():
    # sin(lam eta)/lam = eta - lam^2 eta^3/6 + lam^4 eta^5/120 - ...
    eta = 1.2
    # five-point stencil with h = 0.05/eta: O(h^2) error
    assert phi_d4_lambda(H3, 0.0, eta) == pytest.approx(eta**5 / (5 * math.sinh(eta)), rel=1e-3)


def test_grid_matches_pointwise_and_is_cached():
    lams = [0.0, 1.5, 7.0]
    etas = np.array([0.05, 0.4, 2.0, 5.0])
    grid = phi_grid(CATALOG["quat:8"], lams, etas)
    again = phi_grid(CATALOG["quat:8"], lams, etas)
    assert np.array_equal(grid, again)
    for i, lam in enumerate(lams):
        assert np.allclose(grid[i], phi(CATALOG["quat:8"], lam, etas), rtol=0, atol=1e-12)


def test_tighter_ode_tolerance_changes_little():
    etas = np.linspace(0.6, 4, 20)
    loose = phi_grid(CATALOG["cayley"], [3.0], etas, cache=False)
    tight = phi_grid(CATALOG["cayley"], [3.0], etas, SphericalEvalConfig(ode_tol=1e-13), cache=False)
    assert np.max(np.abs(loose - tight)) < 1e-10


def test_series_refuses_outside_its_disc():
    from rank1walk.errors import SeriesDiverged
    with pytest.raises(SeriesDiverged):
        phi_series(H3, 1.0, 0.9)


def test_config_validation():
    with pytest.raises(ValueError):
        SphericalEvalConfig(series_cutoff_eta=1.0)
    with pytest.raises(ValueError):
        SphericalEvalConfig(ode_tol=0)
    with pytest.raises(ValueError):
        phi(H3, 1.0, -0.1)


@pytest.mark.parametrize("name", list(CATALOG))
@pytest.mark.parametrize("lam", [0.0, 1.0, 5.0])
def test_seam_is_continuous(name, lam):
    p = CATALOG[name]
    cut, d = SphericalEvalConfig().series_cutoff_eta, 1e-6
    assert abs(phi_series(p, lam, cut - d) - phi_ode(p, lam, cut - d)) <= 1e-8
    # phi moves by 2 d phi' across the seam; only the remainder is a jump
    _, slope = phi_series_with_slope(p, np.array([lam]), np.array([cut]))
    below, above = phi(p, lam, cut - d), phi(p, lam, cut + d)
    assert abs(above - below - 2 * d * slope[0]) <= 1e-8


@pytest.mark.parametrize("lam, eta, expected", [
    (2.0, 3.0, math.sin(6) / (2 * math.sinh(3))),
    (1.0, 1.0, math.sin(1) / math.sinh(1)),
    (5.0, 2.0, math.sin(10) / (5 * math.sinh(2))),
])
def test_ode_examples(lam, eta, expected):
    assert phi_ode(H3, lam, eta) == pytest.approx(expected, abs=1e-10)


def test_zero_frequency_tail_positive_and_decreasing():
    for p in CATALOG.values():
        vals = phi(p, 0.0, np.linspace(1, 8, 30))
        assert np.all(vals > 0) and np.all(np.diff(vals) < 0)
